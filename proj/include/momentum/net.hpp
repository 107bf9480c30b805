#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "momentum/error.hpp"

namespace momentum {

/// Feed-forward binary classifier: tanh hidden layers, logistic output,
/// mean binary cross-entropy loss.
struct NetConfig {
  int input_dim = 1;
  std::vector<int> hidden{8};

  /// Layer widths including input and the single output unit.
  std::vector<int> widths() const {
    std::vector<int> w{input_dim};
    w.insert(w.end(), hidden.begin(), hidden.end());
    w.push_back(1);
    return w;
  }

  /// Flattened parameter count. Layer by layer: weights (out x in,
  /// row-major) followed by biases (out).
  Eigen::Index param_count() const {
    const auto w = widths();
    Eigen::Index n = 0;
    for (std::size_t l = 1; l < w.size(); ++l) n += static_cast<Eigen::Index>(w[l - 1] + 1) * w[l];
    return n;
  }

  void validate() const {
    if (input_dim < 1) throw Error(ErrorCode::InvalidArgument, "input_dim must be >= 1");
    for (int h : hidden) {
      if (h < 1) throw Error(ErrorCode::InvalidArgument, "hidden widths must be >= 1");
    }
  }
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

inline double sigmoid(double z) {
  return z >= 0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// Forward pass over a batch; returns the output logits and fills the
/// post-activation of every hidden layer (activations[0] is the input).
inline Eigen::VectorXd forward_logits(const NetConfig& cfg, std::span<const double> params,
                                      const Eigen::MatrixXd& X, std::vector<Eigen::MatrixXd>* activations) {
  if (static_cast<Eigen::Index>(params.size()) != cfg.param_count()) {
    throw Error(ErrorCode::DimMismatch, "parameter vector has " + std::to_string(params.size()) +
                                            " entries, expected " + std::to_string(cfg.param_count()));
  }
  if (X.cols() != cfg.input_dim) {
    throw Error(ErrorCode::DimMismatch, "input has " + std::to_string(X.cols()) + " columns, expected " +
                                            std::to_string(cfg.input_dim));
  }
  const auto w = cfg.widths();
  Eigen::MatrixXd a = X;
  if (activations) activations->assign(1, X);
  std::size_t off = 0;
  for (std::size_t l = 1; l < w.size(); ++l) {
    const Eigen::Index in = w[l - 1], out = w[l];
    Eigen::Map<const RowMatrix> W(params.data() + off, out, in);
    off += static_cast<std::size_t>(in * out);
    Eigen::Map<const Eigen::RowVectorXd> b(params.data() + off, out);
    off += static_cast<std::size_t>(out);
    Eigen::MatrixXd z = a * W.transpose();
    z.rowwise() += b;
    if (l + 1 == w.size()) return z.col(0);
    a = z.array().tanh().matrix();
    if (activations) activations->push_back(a);
  }
  return {};
}

}  // namespace detail

/// Output probability for one input vector.
inline double forward(const NetConfig& cfg, std::span<const double> params, std::span<const double> x) {
  if (static_cast<int>(x.size()) != cfg.input_dim) {
    throw Error(ErrorCode::DimMismatch, "input has " + std::to_string(x.size()) + " entries, expected " +
                                            std::to_string(cfg.input_dim));
  }
  Eigen::MatrixXd X = Eigen::Map<const Eigen::RowVectorXd>(x.data(), static_cast<Eigen::Index>(x.size()));
  return detail::sigmoid(detail::forward_logits(cfg, params, X, nullptr)(0));
}

/// Output probabilities for every row of X.
inline Eigen::VectorXd forward_batch(const NetConfig& cfg, std::span<const double> params, const Eigen::MatrixXd& X) {
  return detail::forward_logits(cfg, params, X, nullptr).unaryExpr(&detail::sigmoid);
}

/// Mean binary cross-entropy, evaluated from logits for stability.
inline double loss(const NetConfig& cfg, std::span<const double> params, const Eigen::MatrixXd& X,
                   std::span<const int> y) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw Error(ErrorCode::DimMismatch, "X rows != y size");
  if (y.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  const Eigen::VectorXd z = detail::forward_logits(cfg, params, X, nullptr);
  double s = 0.0;
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    const double zi = z(i);
    const double softplus = zi > 0 ? zi + std::log1p(std::exp(-zi)) : std::log1p(std::exp(zi));
    s += softplus - y[static_cast<std::size_t>(i)] * zi;
  }
  return s / static_cast<double>(z.size());
}

/// Exact gradient of the mean cross-entropy with respect to the flattened
/// parameters (backpropagation).
inline Eigen::VectorXd gradient(const NetConfig& cfg, std::span<const double> params, const Eigen::MatrixXd& X,
                                std::span<const int> y) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw Error(ErrorCode::DimMismatch, "X rows != y size");
  if (y.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  std::vector<Eigen::MatrixXd> acts;
  const Eigen::VectorXd z = detail::forward_logits(cfg, params, X, &acts);
  const auto w = cfg.widths();
  const double n = static_cast<double>(X.rows());

  // Offsets of each layer's block in the flat vector.
  std::vector<std::size_t> offsets(w.size(), 0);
  for (std::size_t l = 1; l < w.size(); ++l) {
    offsets[l] = (l == 1 ? 0 : offsets[l - 1] + static_cast<std::size_t>((w[l - 2] + 1) * w[l - 1]));
  }

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(cfg.param_count());
  Eigen::MatrixXd delta(X.rows(), 1);  // dL/dz for the current layer
  for (Eigen::Index i = 0; i < z.size(); ++i) delta(i, 0) = (detail::sigmoid(z(i)) - y[static_cast<std::size_t>(i)]) / n;

  for (std::size_t l = w.size() - 1; l >= 1; --l) {
    const Eigen::Index in = w[l - 1], out = w[l];
    const std::size_t off = offsets[l];
    const Eigen::MatrixXd& a_prev = acts[l - 1];
    Eigen::Map<RowMatrix> gW(grad.data() + off, out, in);
    gW = delta.transpose() * a_prev;
    Eigen::Map<Eigen::RowVectorXd> gb(grad.data() + off + static_cast<std::size_t>(in * out), out);
    gb = delta.colwise().sum();
    if (l == 1) break;
    Eigen::Map<const RowMatrix> W(params.data() + off, out, in);
    Eigen::MatrixXd back = delta * W;  // dL/da_prev
    delta = (back.array() * (1.0 - a_prev.array().square())).matrix();
  }
  return grad;
}

}  // namespace momentum
