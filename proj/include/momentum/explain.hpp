#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "momentum/error.hpp"
#include "momentum/rng.hpp"

namespace momentum {

/// Maps a batch of rows to one prediction per row.
using BatchPredictor = std::function<Eigen::VectorXd(const Eigen::MatrixXd&)>;

inline constexpr int kMaxShapFeatures = 15;

struct ShapConfig {
  int background_size = 100;
  std::uint64_t seed = 1;
};

/// Draws min(size, rows) distinct rows, kept in their original order.
inline Eigen::MatrixXd sample_background(const Eigen::MatrixXd& rows, const ShapConfig& cfg) {
  if (rows.rows() == 0 || cfg.background_size < 1) throw Error(ErrorCode::EmptyBackground, "no background rows");
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(rows.rows()));
  std::iota(idx.begin(), idx.end(), 0);
  if (static_cast<Eigen::Index>(cfg.background_size) < rows.rows()) {
    Rng rng = Rng::substream(cfg.seed, 0xba5e);
    rng.shuffle(idx.begin(), idx.end());
    idx.resize(static_cast<std::size_t>(cfg.background_size));
    std::sort(idx.begin(), idx.end());
  }
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), rows.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = rows.row(idx[i]);
  return out;
}

struct ShapValues {
  std::vector<double> phi;
  double base = 0.0;        // v(empty set): mean prediction over the background
  double prediction = 0.0;  // v(all features)
};

/// Subset value v(S): mean prediction over background rows with the features
/// in `mask` taken from the instance.
inline std::vector<double> subset_values(const BatchPredictor& predict, std::span<const double> instance,
                                         const Eigen::MatrixXd& background) {
  const auto F = static_cast<int>(instance.size());
  const Eigen::Index B = background.rows();
  std::vector<double> v(std::size_t{1} << F);
  Eigen::MatrixXd batch(B, F);
  for (std::size_t mask = 0; mask < v.size(); ++mask) {
    batch = background;
    for (int j = 0; j < F; ++j) {
      if (mask >> j & 1U) batch.col(j).setConstant(instance[static_cast<std::size_t>(j)]);
    }
    const Eigen::VectorXd out = predict(batch);
    if (out.size() != B) throw Error(ErrorCode::DimMismatch, "predictor returned wrong batch size");
    v[mask] = out.mean();
  }
  return v;
}

/// Exact Shapley values under the marginal (background replacement) value
/// function:
///   phi_i = sum_{S without i} |S|! (F-|S|-1)! / F! * (v(S + i) - v(S))
inline ShapValues shapley_values(const BatchPredictor& predict, std::span<const double> instance,
                                 const Eigen::MatrixXd& background) {
  const auto F = static_cast<int>(instance.size());
  if (F > kMaxShapFeatures) {
    throw Error(ErrorCode::TooManyFeatures, std::to_string(F) + " features, limit " + std::to_string(kMaxShapFeatures));
  }
  if (F < 1) throw Error(ErrorCode::InvalidArgument, "instance has no features");
  if (background.rows() == 0) throw Error(ErrorCode::EmptyBackground, "background set is empty");
  if (background.cols() != F) throw Error(ErrorCode::DimMismatch, "background width != instance width");

  const auto v = subset_values(predict, instance, background);
  // weight[s] = s! (F-s-1)! / F!
  std::vector<double> weight(static_cast<std::size_t>(F));
  for (int s = 0; s < F; ++s) {
    weight[static_cast<std::size_t>(s)] = std::exp(std::lgamma(s + 1.0) + std::lgamma(F - s) - std::lgamma(F + 1.0));
  }
  ShapValues r;
  r.phi.assign(static_cast<std::size_t>(F), 0.0);
  for (std::size_t mask = 0; mask < v.size(); ++mask) {
    const int s = std::popcount(mask);
    for (int i = 0; i < F; ++i) {
      const std::size_t bit = std::size_t{1} << i;
      if (mask & bit) continue;
      r.phi[static_cast<std::size_t>(i)] += weight[static_cast<std::size_t>(s)] * (v[mask | bit] - v[mask]);
    }
  }
  r.base = v.front();
  r.prediction = v.back();
  return r;
}

struct ShapReport {
  std::vector<std::string> features;
  Eigen::MatrixXd instances;  // explained rows
  Eigen::MatrixXd phi;        // one row per instance
  std::vector<double> predictions;
  double base = 0.0;
};

inline ShapReport explain_rows(const BatchPredictor& predict, const Eigen::MatrixXd& instances,
                               const Eigen::MatrixXd& background, std::vector<std::string> features) {
  if (static_cast<Eigen::Index>(features.size()) != instances.cols()) {
    throw Error(ErrorCode::DimMismatch, "one feature name per column required");
  }
  ShapReport rep;
  rep.features = std::move(features);
  rep.instances = instances;
  rep.phi.resize(instances.rows(), instances.cols());
  for (Eigen::Index i = 0; i < instances.rows(); ++i) {
    const Eigen::RowVectorXd x = instances.row(i);
    const auto sv = shapley_values(predict, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
                                   background);
    for (Eigen::Index j = 0; j < instances.cols(); ++j) rep.phi(i, j) = sv.phi[static_cast<std::size_t>(j)];
    rep.predictions.push_back(sv.prediction);
    rep.base = sv.base;
  }
  return rep;
}

struct FeatureImportance {
  std::string feature;
  int index;  // column position
  double mean_abs;
  int rank;   // 1 = most important
};

/// Features by mean |phi| descending; ties keep the lower column index first.
inline std::vector<FeatureImportance> mean_abs_shap(const ShapReport& rep) {
  if (rep.phi.rows() == 0) throw Error(ErrorCode::InvalidArgument, "no explained instances");
  std::vector<FeatureImportance> out;
  for (Eigen::Index j = 0; j < rep.phi.cols(); ++j) {
    out.push_back({rep.features[static_cast<std::size_t>(j)], static_cast<int>(j), rep.phi.col(j).cwiseAbs().mean(), 0});
  }
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.mean_abs > b.mean_abs; });
  for (std::size_t r = 0; r < out.size(); ++r) out[r].rank = static_cast<int>(r + 1);
  return out;
}

}  // namespace momentum
