#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "momentum/error.hpp"

namespace momentum {

/// Two-sided CUSUM settings. `mu` unset means "use the series mean".
struct CusumParams {
  std::optional<double> mu;
  double drift = 0.0;
  double threshold = 1.0;
  bool reset_after_detection = true;
};

struct CusumTrace {
  std::vector<double> c_pos;  // >= 0
  std::vector<double> c_neg;  // <= 0
};

struct ChangePointSet {
  std::vector<int> times;  // 1-based, strictly increasing
  std::vector<int> signs;  // +1 / -1 per time
  std::vector<int> labels; // CP_t for t = 1..T, 0 away from change points
  std::vector<int> durations;  // D_1 = t_1, D_i = t_i - t_{i-1}

  std::size_t size() const { return times.size(); }
  std::size_t positives() const { return static_cast<std::size_t>(std::count(signs.begin(), signs.end(), 1)); }
  std::size_t negatives() const { return size() - positives(); }

  /// Builds a set from (time, sign) pairs over a series of length T.
  static ChangePointSet from_times(std::vector<int> times, std::vector<int> signs, int T) {
    ChangePointSet s;
    s.labels.assign(static_cast<std::size_t>(std::max(T, 0)), 0);
    int prev = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      if (times[i] <= prev || times[i] > T) {
        throw Error(ErrorCode::TimeOutOfRange, "change point time " + std::to_string(times[i]));
      }
      if (signs[i] != 1 && signs[i] != -1) {
        throw Error(ErrorCode::InvalidArgument, "change point sign must be +1 or -1");
      }
      s.durations.push_back(times[i] - prev);
      s.labels[static_cast<std::size_t>(times[i] - 1)] = signs[i];
      prev = times[i];
    }
    s.times = std::move(times);
    s.signs = std::move(signs);
    return s;
  }
};

struct CusumResult {
  CusumTrace trace;
  ChangePointSet changepoints;
  double mu = 0.0;
};

/// Mean taken relative to the first value, so a constant series returns that value exactly.
inline double series_mean(std::span<const double> m) {
  const double x0 = m.front();
  double s = 0.0;
  for (double x : m) s += x - x0;
  return x0 + s / static_cast<double>(m.size());
}

inline double series_stdev(std::span<const double> m) {
  const double mu = series_mean(m);
  double ss = 0.0;
  for (double x : m) ss += (x - mu) * (x - mu);
  return m.size() > 1 ? std::sqrt(ss / static_cast<double>(m.size() - 1)) : 0.0;
}

/// Two-sided CUSUM:
///   c+_t = max(0, c+_{t-1} + (M_t - mu) - d)
///   c-_t = min(0, c-_{t-1} + (M_t - mu) + d)
/// t is a positive change point when c+_t > h and a negative one when
/// c-_t < -h. If both cross at once the larger excess wins. Both sums restart
/// from zero after a detection when reset_after_detection is set.
inline CusumResult cusum_detect(std::span<const double> m, const CusumParams& p) {
  if (m.empty()) throw Error(ErrorCode::EmptySeries, "momentum series is empty");
  if (!(p.threshold > 0.0)) throw Error(ErrorCode::InvalidArgument, "threshold h must be > 0");
  if (!(p.drift >= 0.0)) throw Error(ErrorCode::InvalidArgument, "drift d must be >= 0");
  CusumResult r;
  r.mu = p.mu.value_or(series_mean(m));
  const std::size_t T = m.size();
  r.trace.c_pos.resize(T);
  r.trace.c_neg.resize(T);
  std::vector<int> times, signs;
  double up = 0.0, down = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const double dev = m[t] - r.mu;
    up = std::max(0.0, up + dev - p.drift);
    down = std::min(0.0, down + dev + p.drift);
    r.trace.c_pos[t] = up;
    r.trace.c_neg[t] = down;
    const double over = up - p.threshold;
    const double under = -p.threshold - down;
    if (over > 0.0 || under > 0.0) {
      times.push_back(static_cast<int>(t + 1));
      signs.push_back(over >= under ? 1 : -1);
      if (p.reset_after_detection) up = down = 0.0;
    }
  }
  r.changepoints = ChangePointSet::from_times(std::move(times), std::move(signs), static_cast<int>(T));
  return r;
}

struct TuneOptions {
  int target = 40;
  double h0 = 0.0;          // <= 0 picks the series standard deviation
  double tolerance = 0.01;  // relative to target, at least one change point
  int max_iter = 200;
};

struct TuneResult {
  double threshold = 0.0;
  CusumResult result;
  int iterations = 0;
  bool converged = false;
};

/// Thrown when the iteration budget runs out; carries the closest result seen.
class NoConvergenceError : public Error {
 public:
  explicit NoConvergenceError(TuneResult best)
      : Error(ErrorCode::NoConvergence, "threshold tuner: " + std::to_string(best.iterations) +
                                            " iterations, closest count " +
                                            std::to_string(best.result.changepoints.size())),
        best_(std::move(best)) {}
  const TuneResult& best() const noexcept { return best_; }

 private:
  TuneResult best_;
};

/// Adjusts h until the detected count is within tolerance of the target:
/// too many change points raise h by 10%, too few lower it by 10%.
///
/// Each time the count crosses over the target the step is halved. If it
/// shrinks to nothing without an acceptable count (h oscillates around a jump
/// in the count) the closest h is returned unconverged; ties go to the larger h.
inline TuneResult tune_threshold(std::span<const double> m, CusumParams p, const TuneOptions& opt) {
  if (opt.target < 1) throw Error(ErrorCode::InvalidArgument, "target must be >= 1");
  if (m.empty()) throw Error(ErrorCode::EmptySeries, "momentum series is empty");
  double h = opt.h0 > 0.0 ? opt.h0 : series_stdev(m);
  if (!(h > 0.0)) h = 1e-3;
  const double slack = std::max(1.0, opt.tolerance * opt.target);

  TuneResult best;
  double best_gap = INFINITY;
  double step = 0.1;
  int last_dir = 0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    p.threshold = h;
    auto r = cusum_detect(m, p);
    const int count = static_cast<int>(r.changepoints.size());
    const double gap = std::abs(count - opt.target);
    if (gap < best_gap || (gap == best_gap && h > best.threshold)) {
      best_gap = gap;
      best = TuneResult{h, r, it, false};
    }
    best.iterations = it;
    if (gap <= slack) {
      return TuneResult{h, std::move(r), it, true};
    }
    const int dir = count > opt.target ? 1 : -1;
    if (last_dir != 0 && dir != last_dir) step *= 0.5;
    last_dir = dir;
    if (step < 1e-12) return best;
    h *= dir > 0 ? 1.0 + step : 1.0 - step;
  }
  throw NoConvergenceError(best);
}

}  // namespace momentum
