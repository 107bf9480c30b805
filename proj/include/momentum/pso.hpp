#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "momentum/error.hpp"
#include "momentum/rng.hpp"

namespace momentum {

struct PsoConfig {
  int swarm = 30;
  int iterations = 100;
  double inertia = 0.7;  // omega
  double cognitive = 1.5;  // c1
  double social = 1.5;     // c2
  double lower = -3.0;
  double upper = 3.0;
  double velocity_clamp = 1.0;
  std::uint64_t seed = 1;

  void validate() const {
    if (swarm < 2) throw Error(ErrorCode::InvalidArgument, "swarm must be >= 2");
    if (iterations < 0) throw Error(ErrorCode::InvalidArgument, "iterations must be >= 0");
    if (inertia < 0.0 || inertia > 1.0) throw Error(ErrorCode::InvalidArgument, "inertia must be in [0,1]");
    if (cognitive < 0.0 || social < 0.0) throw Error(ErrorCode::InvalidArgument, "c1, c2 must be >= 0");
    if (!(upper > lower)) throw Error(ErrorCode::InvalidArgument, "position bounds are empty");
    if (!(velocity_clamp > 0.0)) throw Error(ErrorCode::InvalidArgument, "velocity clamp must be > 0");
  }
};

struct PsoResult {
  std::vector<double> best_position;
  double best_value = std::numeric_limits<double>::infinity();
  std::vector<double> trace;  // global best after initialization and after each iteration
};

using Objective = std::function<double(std::span<const double>)>;

/// Global-best particle swarm minimization.
///
///   v <- w v + c1 r1 (pbest - x) + c2 r2 (gbest - x),   x <- x + v
///
/// r1, r2 ~ U[0,1) are drawn per particle, iteration and dimension. Velocities
/// are clamped, positions clipped to the bounds, and the global best is
/// refreshed once per iteration after every particle has moved. Non-finite
/// objective values count as +inf.
inline PsoResult pso_optimize(const Objective& objective, int dim, const PsoConfig& cfg) {
  cfg.validate();
  if (dim < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be >= 1");
  const auto d = static_cast<std::size_t>(dim);
  const auto n = static_cast<std::size_t>(cfg.swarm);
  Rng rng(cfg.seed);
  auto eval = [&](std::span<const double> x) {
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<std::vector<double>> x(n, std::vector<double>(d)), v(n, std::vector<double>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      x[i][k] = rng.uniform(cfg.lower, cfg.upper);
      v[i][k] = rng.uniform(-cfg.velocity_clamp, cfg.velocity_clamp);
    }
  }
  auto pbest = x;
  std::vector<double> pbest_value(n);
  PsoResult r;
  for (std::size_t i = 0; i < n; ++i) {
    pbest_value[i] = eval(x[i]);
    if (pbest_value[i] < r.best_value || r.best_position.empty()) {
      r.best_value = pbest_value[i];
      r.best_position = x[i];
    }
  }
  r.trace.push_back(r.best_value);

  for (int it = 0; it < cfg.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        double vel = cfg.inertia * v[i][k] + cfg.cognitive * r1 * (pbest[i][k] - x[i][k]) +
                     cfg.social * r2 * (r.best_position[k] - x[i][k]);
        vel = std::clamp(vel, -cfg.velocity_clamp, cfg.velocity_clamp);
        v[i][k] = vel;
        x[i][k] = std::clamp(x[i][k] + vel, cfg.lower, cfg.upper);
      }
    }
    std::size_t winner = n;
    double winner_value = r.best_value;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = eval(x[i]);
      if (f < pbest_value[i]) {
        pbest_value[i] = f;
        pbest[i] = x[i];
      }
      if (f < winner_value) {
        winner_value = f;
        winner = i;
      }
    }
    if (winner < n) {
      r.best_value = winner_value;
      r.best_position = x[winner];
    }
    r.trace.push_back(r.best_value);
  }
  return r;
}

}  // namespace momentum
