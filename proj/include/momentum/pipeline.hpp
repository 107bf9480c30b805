#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "momentum/changepoint.hpp"
#include "momentum/ewm.hpp"
#include "momentum/ingest.hpp"
#include "momentum/model.hpp"
#include "momentum/shift.hpp"

namespace momentum {

inline const std::vector<int>& default_momentum_features() {
  static const std::vector<int> ids{3, 4, 6, 7, 9, 10};
  return ids;
}

struct MomentumOptions {
  std::vector<int> features = default_momentum_features();
  double epsilon = 1e-12;
  bool pooled_weights = false;          // one weight vector across all matches
  std::optional<int> target;            // change points per match; unset scales 40 per 325 points
  std::optional<double> drift;          // unset: 0.05 * stdev(M)
  std::optional<double> threshold;      // fixed h; disables tuning
  std::optional<double> mu;             // unset: match mean
  TuneOptions tune;
};

/// Momentum, change points and shift intensity of one match.
struct MatchMomentum {
  std::string match_id;
  StandardizedFrame z;
  MomentumSeries momentum;
  CusumParams params;
  CusumResult cusum;
  std::optional<TuneResult> tuning;
  ShiftSeries shift;
};

/// Default change-point target for a match of T points.
inline int default_target(Eigen::Index T) {
  return std::max(1, static_cast<int>(std::lround(static_cast<double>(T) * 40.0 / 325.0)));
}

inline MatchMomentum analyze_match(const FeatureFrame& frame, const StandardizedFrame& z, const WeightVector& w,
                                   const MomentumOptions& opt) {
  MatchMomentum mm;
  mm.match_id = frame.match_id;
  mm.z = z;
  mm.momentum = momentum_series(z, w, frame.match_id);
  const std::span<const double> m(mm.momentum.values);
  mm.params.mu = opt.mu;
  mm.params.drift = opt.drift.value_or(0.05 * series_stdev(m));
  if (opt.threshold) {
    mm.params.threshold = *opt.threshold;
    mm.cusum = cusum_detect(m, mm.params);
  } else {
    TuneOptions t = opt.tune;
    t.target = opt.target.value_or(default_target(frame.size()));
    TuneResult r;
    try {
      r = tune_threshold(m, mm.params, t);
    } catch (const NoConvergenceError& e) {
      r = e.best();
    }
    mm.params.threshold = r.threshold;
    mm.cusum = r.result;
    mm.tuning = std::move(r);
  }
  mm.shift = relative_distance(mm.cusum.changepoints, static_cast<int>(frame.size()));
  return mm;
}

/// Runs standardization, entropy weighting, CUSUM and the shift series for
/// every match. Weights are per match unless `pooled_weights` is set.
inline std::vector<MatchMomentum> analyze_matches(const std::vector<FeatureFrame>& frames,
                                                  const MomentumOptions& opt = {}) {
  std::vector<StandardizedFrame> zs;
  for (const auto& f : frames) zs.push_back(standardize(f, opt.features));
  std::optional<WeightVector> pooled;
  if (opt.pooled_weights) {
    StandardizedFrame all = zs.front();
    Eigen::Index rows = 0;
    for (const auto& z : zs) rows += z.z.rows();
    all.z.resize(rows, static_cast<Eigen::Index>(opt.features.size()));
    Eigen::Index r = 0;
    for (const auto& z : zs) {
      all.z.middleRows(r, z.z.rows()) = z.z;
      r += z.z.rows();
    }
    pooled = entropy_weights(all, opt.epsilon);
  }
  std::vector<MatchMomentum> out;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const WeightVector w = pooled ? *pooled : entropy_weights(zs[i], opt.epsilon);
    out.push_back(analyze_match(frames[i], zs[i], w, opt));
  }
  return out;
}

/// Stacks x1..x16, M, CP and V of every match into one model table.
inline DataTable build_model_table(const std::vector<FeatureFrame>& frames,
                                   const std::vector<MatchMomentum>& momentum) {
  if (frames.size() != momentum.size()) throw Error(ErrorCode::DimMismatch, "one momentum result per match");
  DataTable d;
  for (int j = 1; j <= kFeatureCount; ++j) d.columns.push_back(feature_name(j));
  d.columns.insert(d.columns.end(), {"M", "CP", "V"});
  Eigen::Index rows = 0;
  for (const auto& f : frames) rows += f.size();
  d.values.resize(rows, static_cast<Eigen::Index>(d.columns.size()));
  Eigen::Index r = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const auto& f = frames[i];
    const auto& mm = momentum[i];
    for (Eigen::Index t = 0; t < f.size(); ++t, ++r) {
      const auto ti = static_cast<std::size_t>(t);
      d.values.row(r).head(kFeatureCount) = f.features.row(t);
      d.values(r, kFeatureCount) = mm.momentum.values[ti];
      d.values(r, kFeatureCount + 1) = mm.cusum.changepoints.labels[ti];
      d.values(r, kFeatureCount + 2) = mm.shift.values[ti];
      d.labels.push_back(f.outcome[ti]);
    }
  }
  return d;
}

}  // namespace momentum
