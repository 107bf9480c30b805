#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "momentum/changepoint.hpp"
#include "momentum/error.hpp"

namespace momentum {

struct ShiftSeries {
  std::vector<double> values;  // V_t for t = 1..T
  int d_max = 0;
  std::vector<int> anchor_times;
  std::vector<double> anchor_values;
  int length = 0;  // T

  /// V at a real-valued time in [0, T], on the same piecewise-linear curve.
  double at(double t) const {
    if (anchor_times.empty() || t <= 0.0) return 0.0;
    const double t1 = anchor_times.front();
    if (t < t1) return anchor_values.front() / t1 * t;
    const double tn = anchor_times.back();
    if (t >= tn) {
      if (tn == length) return anchor_values.back();
      return anchor_values.back() - anchor_values.back() / (length - tn) * (t - tn);
    }
    const auto hi = std::upper_bound(anchor_times.begin(), anchor_times.end(), t) - anchor_times.begin();
    const auto lo = hi - 1;
    const double ta = anchor_times[static_cast<std::size_t>(lo)];
    const double tb = anchor_times[static_cast<std::size_t>(hi)];
    const double va = anchor_values[static_cast<std::size_t>(lo)];
    const double vb = anchor_values[static_cast<std::size_t>(hi)];
    return (vb - va) / (tb - ta) * (t - ta) + va;
  }
};

/// Shift intensity V_t. Anchors sit at the change points with value
/// CP_{t_i} * D_max / D_i; V rises linearly from 0 to the first anchor,
/// interpolates between anchors and decays linearly to 0 at T. No change
/// points gives V = 0 everywhere; an anchor at t = T keeps its value.
inline ShiftSeries relative_distance(const ChangePointSet& cp, int T) {
  if (T < 1) throw Error(ErrorCode::TimeOutOfRange, "series length must be >= 1");
  ShiftSeries s;
  s.length = T;
  int prev = 0;
  for (std::size_t i = 0; i < cp.times.size(); ++i) {
    if (cp.times[i] <= prev || cp.times[i] > T) {
      throw Error(ErrorCode::TimeOutOfRange, "change point time " + std::to_string(cp.times[i]) +
                                                 " outside [1, " + std::to_string(T) + "]");
    }
    s.d_max = std::max(s.d_max, cp.times[i] - prev);
    prev = cp.times[i];
  }
  s.anchor_times = cp.times;
  prev = 0;
  for (std::size_t i = 0; i < cp.times.size(); ++i) {
    const int duration = cp.times[i] - prev;
    s.anchor_values.push_back(cp.signs[i] * static_cast<double>(s.d_max) / duration);
    prev = cp.times[i];
  }
  s.values.resize(static_cast<std::size_t>(T));
  for (int t = 1; t <= T; ++t) s.values[static_cast<std::size_t>(t - 1)] = s.at(t);
  return s;
}

}  // namespace momentum
