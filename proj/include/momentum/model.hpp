#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "momentum/error.hpp"
#include "momentum/net.hpp"
#include "momentum/pso.hpp"
#include "momentum/rng.hpp"
#include "momentum/stats.hpp"

namespace momentum {

/// Per-column min/max scaling fitted on training rows.
struct Scaler {
  std::vector<double> min, max;
  double clip_lo = -0.5, clip_hi = 1.5;

  static Scaler fit(const Eigen::MatrixXd& X) {
    if (X.rows() == 0) throw Error(ErrorCode::EmptyInput, "cannot fit a scaler on zero rows");
    Scaler s;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      s.min.push_back(X.col(j).minCoeff());
      s.max.push_back(X.col(j).maxCoeff());
    }
    return s;
  }

  std::size_t size() const { return min.size(); }

  double apply(std::size_t j, double v) const {
    const double span = max[j] - min[j];
    if (!(span > 0.0)) return 0.0;
    return std::clamp((v - min[j]) / span, clip_lo, clip_hi);
  }

  Eigen::MatrixXd apply(const Eigen::MatrixXd& X) const {
    if (static_cast<std::size_t>(X.cols()) != size()) {
      throw Error(ErrorCode::DimMismatch, "scaler fitted on " + std::to_string(size()) + " columns, got " +
                                              std::to_string(X.cols()));
    }
    Eigen::MatrixXd out(X.rows(), X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      for (Eigen::Index i = 0; i < X.rows(); ++i) out(i, j) = apply(static_cast<std::size_t>(j), X(i, j));
    }
    return out;
  }
};

struct BpConfig {
  double learning_rate = 0.05;
  int epochs = 500;
};

struct TrainingHistory {
  std::vector<double> pso_best;    // global best loss, initialization then per iteration
  std::vector<double> epoch_loss;  // training loss after each gradient step
  double final_loss = 0.0;         // loss of the returned parameters
};

struct TrainedNet {
  NetConfig config;
  std::vector<double> params;
  Scaler scaler;
  TrainingHistory history;
  std::uint64_t seed = 0;
  std::vector<std::string> features;

  /// Probability for one raw (unscaled) input row.
  double predict(std::span<const double> x) const {
    if (x.size() != scaler.size()) throw Error(ErrorCode::DimMismatch, "input width " + std::to_string(x.size()));
    std::vector<double> s(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) s[j] = scaler.apply(j, x[j]);
    return forward(config, params, s);
  }

  Eigen::VectorXd predict(const Eigen::MatrixXd& X) const { return forward_batch(config, params, scaler.apply(X)); }
};

/// PSO over the flat parameter vector minimizes training cross-entropy; the
/// swarm's global best then seeds full-batch gradient descent. The returned
/// parameters are the lowest-loss point visited, so the final loss never
/// exceeds the PSO optimum.
inline TrainedNet train_bp_pso(const Eigen::MatrixXd& X, std::span<const int> y, NetConfig net,
                               const PsoConfig& pso, const BpConfig& bp = {}) {
  if (static_cast<Eigen::Index>(y.size()) != X.rows()) throw Error(ErrorCode::DimMismatch, "X rows != y size");
  const auto pos = std::count(y.begin(), y.end(), 1);
  if (pos == 0 || pos == static_cast<long long>(y.size())) {
    throw Error(ErrorCode::SingleClass, "training rows contain a single class");
  }
  if (bp.epochs < 0 || !(bp.learning_rate > 0.0)) throw Error(ErrorCode::InvalidArgument, "bad BP settings");
  net.input_dim = static_cast<int>(X.cols());
  net.validate();

  TrainedNet out;
  out.config = net;
  out.seed = pso.seed;
  out.scaler = Scaler::fit(X);
  const Eigen::MatrixXd Xs = out.scaler.apply(X);

  const auto objective = [&](std::span<const double> p) { return loss(net, p, Xs, y); };
  PsoResult swarm = pso_optimize(objective, static_cast<int>(net.param_count()), pso);
  if (!std::isfinite(swarm.best_value)) throw Error(ErrorCode::NonFiniteLoss, "no finite loss in the swarm");
  out.history.pso_best = std::move(swarm.trace);

  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(swarm.best_position.data(), net.param_count());
  Eigen::VectorXd best = w;
  double best_loss = swarm.best_value;
  for (int e = 0; e < bp.epochs; ++e) {
    w -= bp.learning_rate * gradient(net, std::span<const double>(w.data(), static_cast<std::size_t>(w.size())), Xs, y);
    const double l = loss(net, std::span<const double>(w.data(), static_cast<std::size_t>(w.size())), Xs, y);
    if (!std::isfinite(l)) throw Error(ErrorCode::NonFiniteLoss, "epoch " + std::to_string(e + 1));
    out.history.epoch_loss.push_back(l);
    if (l < best_loss) {
      best_loss = l;
      best = w;
    }
  }
  out.params.assign(best.data(), best.data() + best.size());
  out.history.final_loss = best_loss;
  return out;
}

// ---------------------------------------------------------------------------
// Train/test splits
// ---------------------------------------------------------------------------

struct Split {
  std::vector<Eigen::Index> train, test;
};

/// Random split keeping the class ratio: round(ratio * n_c) rows of each class
/// go to training. Index lists are returned in ascending order.
inline Split stratified_split(std::span<const int> y, double ratio, std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "split ratio must be in (0,1)");
  Rng rng = Rng::substream(seed, 0x5b117);
  Split s;
  for (int cls : {0, 1}) {
    std::vector<Eigen::Index> idx;
    for (std::size_t i = 0; i < y.size(); ++i) {
      if (y[i] == cls) idx.push_back(static_cast<Eigen::Index>(i));
    }
    rng.shuffle(idx.begin(), idx.end());
    const auto k = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(idx.size())));
    s.train.insert(s.train.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k));
    s.test.insert(s.test.end(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end());
  }
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

/// First floor(ratio * n) rows train, the rest test.
inline Split chronological_split(std::size_t n, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) throw Error(ErrorCode::InvalidArgument, "split ratio must be in (0,1)");
  Split s;
  const auto k = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) (i < k ? s.train : s.test).push_back(static_cast<Eigen::Index>(i));
  return s;
}

// ---------------------------------------------------------------------------
// Scenario evaluation
// ---------------------------------------------------------------------------

/// Named design matrix: one column per feature plus a binary label per row.
struct DataTable {
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
  std::vector<int> labels;

  Eigen::Index rows() const { return values.rows(); }

  Eigen::Index index_of(const std::string& name) const {
    const auto it = std::find(columns.begin(), columns.end(), name);
    if (it == columns.end()) throw Error(ErrorCode::UnknownColumn, name);
    return it - columns.begin();
  }

  Eigen::MatrixXd select(const std::vector<std::string>& names) const {
    Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(names.size()));
    for (std::size_t j = 0; j < names.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = values.col(index_of(names[j]));
    return out;
  }
};

struct ScenarioSpec {
  std::string id;
  std::vector<std::string> columns;
};

inline const std::vector<std::string>& default_base_columns() {
  static const std::vector<std::string> cols{"x3", "x4", "x6", "x7", "x9", "x10"};
  return cols;
}

/// Base, Base+M, Base+M+CP, Base+M+CP+V.
inline std::vector<ScenarioSpec> standard_scenarios(const std::vector<std::string>& base = default_base_columns()) {
  std::vector<ScenarioSpec> out{{"Base", base}};
  for (const char* extra : {"M", "CP", "V"}) {
    ScenarioSpec next = out.back();
    next.id += "+" + std::string(extra);
    next.columns.emplace_back(extra);
    out.push_back(std::move(next));
  }
  return out;
}

inline ScenarioSpec find_scenario(const std::string& id, const std::vector<std::string>& base = default_base_columns()) {
  for (auto& s : standard_scenarios(base)) {
    if (s.id == id) return s;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown scenario '" + id + "'");
}

struct ScenarioOptions {
  double train_ratio = 0.8;
  bool chronological = false;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  NetConfig net;
  PsoConfig pso;
  BpConfig bp;
};

struct ScenarioRun {
  std::uint64_t seed;
  MetricsReport metrics;
  RocResult roc;
};

struct ScenarioRow {
  ScenarioSpec spec;
  MetricsReport mean;  // rates averaged over seeds, confusion counts summed
  std::vector<ScenarioRun> runs;
};

inline Split make_split(std::span<const int> y, const ScenarioOptions& opt, std::uint64_t seed) {
  return opt.chronological ? chronological_split(y.size(), opt.train_ratio)
                           : stratified_split(y, opt.train_ratio, seed);
}

/// Trains and scores one scenario on a given split.
inline ScenarioRun run_scenario(const DataTable& data, const ScenarioSpec& spec, const Split& split,
                                std::uint64_t seed, const ScenarioOptions& opt) {
  const Eigen::MatrixXd X = data.select(spec.columns);
  const Eigen::MatrixXd Xtr = detail::take_rows(X, split.train);
  const Eigen::MatrixXd Xte = detail::take_rows(X, split.test);
  std::vector<int> ytr, yte;
  for (auto i : split.train) ytr.push_back(data.labels[static_cast<std::size_t>(i)]);
  for (auto i : split.test) yte.push_back(data.labels[static_cast<std::size_t>(i)]);

  PsoConfig pso = opt.pso;
  pso.seed = seed;
  const TrainedNet net = train_bp_pso(Xtr, ytr, opt.net, pso, opt.bp);
  const Eigen::VectorXd s = net.predict(Xte);
  const std::span<const double> scores(s.data(), static_cast<std::size_t>(s.size()));
  return {seed, classification_metrics(scores, yte), roc_auc(scores, yte)};
}

/// Evaluates every scenario on the same split for each seed and averages.
inline std::vector<ScenarioRow> scenario_matrix(const DataTable& data, const std::vector<ScenarioSpec>& scenarios,
                                                const ScenarioOptions& opt) {
  if (opt.seeds.empty()) throw Error(ErrorCode::InvalidArgument, "need at least one seed");
  for (const auto& sc : scenarios) {
    for (const auto& c : sc.columns) data.index_of(c);
  }
  std::vector<ScenarioRow> rows;
  for (const auto& sc : scenarios) rows.push_back({sc, {}, {}});
  for (const auto seed : opt.seeds) {
    const Split split = make_split(data.labels, opt, seed);
    for (auto& row : rows) row.runs.push_back(run_scenario(data, row.spec, split, seed, opt));
  }
  const double n = static_cast<double>(opt.seeds.size());
  for (auto& row : rows) {
    MetricsReport& m = row.mean;
    m.auc = 0.0;
    for (const auto& r : row.runs) {
      m.precision += r.metrics.precision / n;
      m.recall += r.metrics.recall / n;
      m.f1 += r.metrics.f1 / n;
      m.auc += r.metrics.auc / n;
      m.tp += r.metrics.tp;
      m.fp += r.metrics.fp;
      m.tn += r.metrics.tn;
      m.fn += r.metrics.fn;
      m.threshold = r.metrics.threshold;
    }
  }
  return rows;
}

}  // namespace momentum
