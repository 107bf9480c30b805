#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "momentum/error.hpp"
#include "momentum/ingest.hpp"

namespace momentum {

struct WeightVector {
  std::vector<int> column_ids;
  std::vector<double> weights;    // non-negative, sum to 1
  std::vector<double> entropies;  // clamped to [0, 1]
  double epsilon = 1e-12;
};

struct MomentumSeries {
  std::string match_id;
  std::vector<double> values;  // M_t, each in [0, 1]
  WeightVector weights;
};

/// Entropy weights of the standardized columns.
///
///   p_it = z_it / sum_t z_it
///   e_i  = -(1 / ln T) sum_t p_it ln(p_it + eps), clamped to [0, 1]
///   w_i  = (1 - e_i) / sum_j (1 - e_j)
///
/// An all-zero column gets e_i = 1 (weight 0).
inline WeightVector entropy_weights(const StandardizedFrame& z, double epsilon = 1e-12) {
  const Eigen::Index T = z.z.rows();
  const Eigen::Index m = z.z.cols();
  if (T < 2) throw Error(ErrorCode::InvalidArgument, "entropy weights need T >= 2 points");
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  WeightVector w;
  w.column_ids = z.column_ids;
  w.epsilon = epsilon;
  w.entropies.resize(static_cast<std::size_t>(m));
  const double inv_log_t = 1.0 / std::log(static_cast<double>(T));
  double divergence_total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto col = z.z.col(i);
    const double sum = col.sum();
    double e = 1.0;
    if (sum > 0.0) {
      double acc = 0.0;
      for (Eigen::Index t = 0; t < T; ++t) {
        const double p = col(t) / sum;
        acc += p * std::log(p + epsilon);
      }
      e = std::clamp(-inv_log_t * acc, 0.0, 1.0);
    }
    w.entropies[static_cast<std::size_t>(i)] = e;
    divergence_total += 1.0 - e;
  }
  if (!(divergence_total > 0.0)) {
    throw Error(ErrorCode::AllColumnsUninformative, "every column has entropy 1");
  }
  w.weights.resize(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < w.weights.size(); ++i) {
    w.weights[i] = (1.0 - w.entropies[i]) / divergence_total;
  }
  return w;
}

/// M_t = sum_i w_i z_it. Columns are matched by id, so `w` may cover a subset of `z`.
inline MomentumSeries momentum_series(const StandardizedFrame& z, const WeightVector& w,
                                      std::string match_id = {}) {
  std::vector<Eigen::Index> pos;
  for (int id : w.column_ids) {
    auto it = std::find(z.column_ids.begin(), z.column_ids.end(), id);
    if (it == z.column_ids.end()) throw Error(ErrorCode::ColumnMismatch, feature_name(id) + " not in frame");
    pos.push_back(it - z.column_ids.begin());
  }
  MomentumSeries s;
  s.match_id = std::move(match_id);
  s.weights = w;
  s.values.assign(static_cast<std::size_t>(z.z.rows()), 0.0);
  for (Eigen::Index t = 0; t < z.z.rows(); ++t) {
    double m = 0.0;
    for (std::size_t i = 0; i < pos.size(); ++i) m += w.weights[i] * z.z(t, pos[i]);
    s.values[static_cast<std::size_t>(t)] = std::clamp(m, 0.0, 1.0);
  }
  return s;
}

}  // namespace momentum
