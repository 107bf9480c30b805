#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "momentum/error.hpp"
#include "momentum/ingest.hpp"

namespace momentum {

// ---------------------------------------------------------------------------
// Logistic regression
// ---------------------------------------------------------------------------

struct LogisticOptions {
  double tolerance = 1e-8;  // on the gradient norm of the mean log-likelihood
  int max_iter = 100;
  double coefficient_cap = 30.0;
};

struct LogisticModel {
  double intercept = 0.0;
  Eigen::VectorXd coefficients;
  int iterations = 0;
  double gradient_norm = 0.0;
  bool separated = false;  // classes perfectly split by the fit, or the norm hit the cap

  Eigen::VectorXd linear_predictor(const Eigen::MatrixXd& X) const {
    return (X * coefficients).array() + intercept;
  }
  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const {
    return (1.0 + (-linear_predictor(X)).array().exp()).inverse();
  }
};

namespace detail {

inline double log1pexp(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double mean_loglik(const Eigen::MatrixXd& Xt, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd eta = Xt * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < eta.size(); ++i) ll += y(i) * eta(i) - log1pexp(eta(i));
  return ll / static_cast<double>(eta.size());
}

inline void check_labels(std::span<const int> y) {
  for (int v : y) {
    if (v != 0 && v != 1) throw Error(ErrorCode::InvalidArgument, "labels must be 0/1");
  }
}

}  // namespace detail

/// Maximum-likelihood logistic regression by damped Newton iterations.
///
/// Separable data drives the coefficients to infinity; once the coefficient
/// norm exceeds the cap the vector is scaled back onto the cap and the fit
/// stops with `separated` set (the ranking of scores is preserved).
inline LogisticModel fit_logistic(const Eigen::MatrixXd& X, std::span<const int> y,
                                  const LogisticOptions& opt = {}) {
  const Eigen::Index n = X.rows();
  const Eigen::Index p = X.cols();
  if (static_cast<Eigen::Index>(y.size()) != n) throw Error(ErrorCode::DimMismatch, "X rows != y size");
  detail::check_labels(y);
  if (n < p + 1) throw Error(ErrorCode::DegenerateDesign, "need at least columns + 1 rows");

  Eigen::MatrixXd Xt(n, p + 1);
  Xt.col(0).setOnes();
  Xt.rightCols(p) = X;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Xt);
  if (qr.rank() < p + 1) {
    throw Error(ErrorCode::DegenerateDesign, "design matrix is rank deficient (constant or duplicate columns)");
  }
  Eigen::VectorXd yy(n);
  for (Eigen::Index i = 0; i < n; ++i) yy(i) = y[static_cast<std::size_t>(i)];

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p + 1);
  LogisticModel m;
  double ll = detail::mean_loglik(Xt, yy, beta);
  bool done = false;
  for (int it = 1; it <= opt.max_iter; ++it) {
    m.iterations = it;
    const Eigen::VectorXd prob = (1.0 + (-(Xt * beta)).array().exp()).inverse();
    const Eigen::VectorXd grad = Xt.transpose() * (yy - prob) / static_cast<double>(n);
    m.gradient_norm = grad.norm();
    if (m.gradient_norm <= opt.tolerance) {
      done = true;
      break;
    }
    const Eigen::VectorXd w = (prob.array() * (1.0 - prob.array())).max(1e-12);
    const Eigen::MatrixXd H = Xt.transpose() * w.asDiagonal() * Xt / static_cast<double>(n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(H);
    Eigen::VectorXd step = ldlt.solve(grad);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) step = grad;
    double scale = 1.0;
    Eigen::VectorXd next = beta + step;
    double next_ll = detail::mean_loglik(Xt, yy, next);
    while (!(next_ll >= ll) && scale > 1e-10) {
      scale *= 0.5;
      next = beta + scale * step;
      next_ll = detail::mean_loglik(Xt, yy, next);
    }
    if (!(next_ll >= ll)) {
      done = true;  // no ascent direction left at machine precision
      break;
    }
    beta = next;
    ll = next_ll;
    if (beta.norm() > opt.coefficient_cap) {
      beta *= opt.coefficient_cap / beta.norm();
      m.separated = true;
      done = true;
      break;
    }
  }
  if (!done) {
    throw Error(ErrorCode::NonConvergence, "logistic fit: gradient norm " + std::to_string(m.gradient_norm) +
                                               " after " + std::to_string(opt.max_iter) + " iterations");
  }
  // Complete separation can also end in a tiny gradient before the cap is hit.
  const Eigen::VectorXd eta = Xt * beta;
  double lo_pos = INFINITY, hi_neg = -INFINITY;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[static_cast<std::size_t>(i)] == 1) lo_pos = std::min(lo_pos, eta(i));
    else hi_neg = std::max(hi_neg, eta(i));
  }
  if (lo_pos > hi_neg) m.separated = true;
  m.intercept = beta(0);
  m.coefficients = beta.tail(p);
  return m;
}

// ---------------------------------------------------------------------------
// ROC / AUC
// ---------------------------------------------------------------------------

struct RocPoint {
  double fpr;
  double tpr;
  double threshold;
};

struct RocResult {
  double auc = 0.5;
  std::vector<RocPoint> curve;  // from (0,0) to (1,1)
};

/// AUC as the Mann-Whitney statistic (ties count one half) plus the ROC
/// curve evaluated at every distinct score.
inline RocResult roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error(ErrorCode::DimMismatch, "scores/labels size");
  detail::check_labels(labels);
  const auto pos = std::count(labels.begin(), labels.end(), 1);
  const auto neg = static_cast<long long>(labels.size()) - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::SingleClass, "both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] > scores[b]; });

  RocResult r;
  r.curve.push_back({0.0, 0.0, INFINITY});
  double tp = 0, fp = 0, area = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    double dtp = 0, dfp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] == 1 ? dtp : dfp) += 1;
      ++j;
    }
    // Trapezoid over a tie block = pairs ranked correctly + half the tied pairs.
    area += dfp * (tp + 0.5 * dtp);
    tp += dtp;
    fp += dfp;
    r.curve.push_back({fp / static_cast<double>(neg), tp / static_cast<double>(pos), scores[order[i]]});
    i = j;
  }
  r.auc = area / (static_cast<double>(pos) * static_cast<double>(neg));
  return r;
}

struct MetricsReport {
  double precision = 0, recall = 0, f1 = 0, auc = 0.5;
  double threshold = 0.5;
  long long tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Positive-class precision/recall/F1 at `threshold` (score >= threshold
/// predicts 1) and the threshold-free AUC.
inline MetricsReport classification_metrics(std::span<const double> scores, std::span<const int> labels,
                                            double threshold = 0.5) {
  MetricsReport m;
  m.auc = roc_auc(scores, labels).auc;
  m.threshold = threshold;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool truth = labels[i] == 1;
    if (pred && truth) ++m.tp;
    else if (pred) ++m.fp;
    else if (truth) ++m.fn;
    else ++m.tn;
  }
  m.precision = m.tp + m.fp > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp) : 0.0;
  m.recall = m.tp + m.fn > 0 ? static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn) : 0.0;
  m.f1 = m.precision + m.recall > 0 ? 2 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
  return m;
}

// ---------------------------------------------------------------------------
// Stepwise selection under the AUC criterion
// ---------------------------------------------------------------------------

enum class StepAction { Added, Removed };

struct SelectionStep {
  StepAction action;
  int feature;                // id of the feature added or removed
  std::vector<int> features;  // set after the step, in inclusion order
  double auc;
};

struct SelectionTrace {
  std::vector<SelectionStep> steps;
  std::vector<int> selected;
  double auc = 0.5;
};

struct StepwiseOptions {
  int folds = 0;  // 0 = in-sample AUC; k >= 2 = pooled out-of-fold AUC
  LogisticOptions fit;
};

namespace detail {

inline Eigen::MatrixXd take_columns(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& cols) {
  Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
  return out;
}

inline Eigen::MatrixXd take_rows(const Eigen::MatrixXd& X, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), X.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
  return out;
}

}  // namespace detail

/// AUC of a logistic model on the given columns.
inline double subset_auc(const Eigen::MatrixXd& X, std::span<const int> y, const std::vector<Eigen::Index>& cols,
                         const StepwiseOptions& opt = {}) {
  if (cols.empty()) return 0.5;
  const Eigen::MatrixXd Xs = detail::take_columns(X, cols);
  if (opt.folds < 2) {
    const auto m = fit_logistic(Xs, y, opt.fit);
    const Eigen::VectorXd s = m.linear_predictor(Xs);
    return roc_auc(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())), y).auc;
  }
  std::vector<double> scores(y.size());
  for (int f = 0; f < opt.folds; ++f) {
    std::vector<Eigen::Index> train, test;
    std::vector<int> ytrain;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (static_cast<int>(i % static_cast<std::size_t>(opt.folds)) == f) {
        test.push_back(static_cast<Eigen::Index>(i));
      } else {
        train.push_back(static_cast<Eigen::Index>(i));
        ytrain.push_back(y[i]);
      }
    }
    const auto m = fit_logistic(detail::take_rows(Xs, train), ytrain, opt.fit);
    const Eigen::VectorXd s = m.linear_predictor(detail::take_rows(Xs, test));
    for (std::size_t i = 0; i < test.size(); ++i) scores[static_cast<std::size_t>(test[i])] = s(static_cast<Eigen::Index>(i));
  }
  return roc_auc(scores, y).auc;
}

/// Bidirectional stepwise selection maximizing AUC.
///
/// Each forward step adds the candidate whose refit model has the highest
/// AUC, if that beats the current AUC. After each addition, any included
/// feature whose removal raises the AUC is dropped (best removal first,
/// repeated). Ties go to the lower feature id. Candidates whose design is
/// rank deficient (exact duplicates of included columns) are skipped.
///
/// `ids[j]` labels column j of X.
inline SelectionTrace stepwise_select(const Eigen::MatrixXd& X, std::span<const int> y, const std::vector<int>& ids,
                                      const StepwiseOptions& opt = {}) {
  if (ids.empty() || static_cast<Eigen::Index>(ids.size()) != X.cols()) {
    throw Error(ErrorCode::InvalidArgument, "need one id per candidate column");
  }
  const auto pos = std::count(y.begin(), y.end(), 1);
  if (pos == 0 || pos == static_cast<long long>(y.size())) throw Error(ErrorCode::SingleClass, "stepwise selection");

  std::vector<Eigen::Index> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return ids[static_cast<std::size_t>(a)] < ids[static_cast<std::size_t>(b)]; });

  SelectionTrace tr;
  std::vector<Eigen::Index> in;  // column positions, inclusion order
  double current = 0.5;
  auto ids_of = [&](const std::vector<Eigen::Index>& cols) {
    std::vector<int> out;
    for (auto c : cols) out.push_back(ids[static_cast<std::size_t>(c)]);
    return out;
  };
  auto try_auc = [&](const std::vector<Eigen::Index>& cols) -> std::optional<double> {
    try {
      return subset_auc(X, y, cols, opt);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::DegenerateDesign) return std::nullopt;
      throw;
    }
  };

  for (;;) {
    Eigen::Index best_col = -1;
    double best_auc = current;
    for (auto c : order) {
      if (std::find(in.begin(), in.end(), c) != in.end()) continue;
      auto cols = in;
      cols.push_back(c);
      const auto a = try_auc(cols);
      if (a && *a > best_auc) {
        best_auc = *a;
        best_col = c;
      }
    }
    if (best_col < 0) break;
    in.push_back(best_col);
    current = best_auc;
    tr.steps.push_back({StepAction::Added, ids[static_cast<std::size_t>(best_col)], ids_of(in), current});

    for (;;) {
      std::size_t drop = in.size();
      double drop_auc = current;
      std::vector<std::size_t> by_id(in.size());
      std::iota(by_id.begin(), by_id.end(), 0);
      std::sort(by_id.begin(), by_id.end(), [&](auto a, auto b) {
        return ids[static_cast<std::size_t>(in[a])] < ids[static_cast<std::size_t>(in[b])];
      });
      for (auto k : by_id) {
        auto cols = in;
        cols.erase(cols.begin() + static_cast<std::ptrdiff_t>(k));
        const auto a = try_auc(cols);
        if (a && *a > drop_auc) {
          drop_auc = *a;
          drop = k;
        }
      }
      if (drop == in.size()) break;
      const int removed = ids[static_cast<std::size_t>(in[drop])];
      in.erase(in.begin() + static_cast<std::ptrdiff_t>(drop));
      current = drop_auc;
      tr.steps.push_back({StepAction::Removed, removed, ids_of(in), current});
    }
  }
  tr.selected = ids_of(in);
  tr.auc = current;
  return tr;
}

/// Stepwise selection over engineered feature columns (ids 1..16).
inline SelectionTrace stepwise_select(const FeatureFrame& f, const std::vector<int>& candidates,
                                      const StepwiseOptions& opt = {}) {
  Eigen::MatrixXd X(f.size(), static_cast<Eigen::Index>(candidates.size()));
  for (std::size_t j = 0; j < candidates.size(); ++j) {
    const int id = candidates[j];
    if (id < 1 || id > kFeatureCount) throw Error(ErrorCode::UnknownColumn, std::to_string(id));
    X.col(static_cast<Eigen::Index>(j)) = f.column(id);
  }
  return stepwise_select(X, f.outcome, candidates, opt);
}

}  // namespace momentum
