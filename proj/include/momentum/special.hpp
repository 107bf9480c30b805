#pragma once

#include <cmath>
#include <limits>

namespace momentum::special {

/// Regularized upper incomplete gamma Q(a, x) = Γ(a, x) / Γ(a).
///
/// Power series for P when x < a + 1, Lentz continued fraction for Q
/// otherwise; both converge to full double precision. Returns Q directly in
/// the continued-fraction branch so tiny tails keep their relative accuracy.
inline double gamma_q(double a, double x) {
  if (!(a > 0.0) || std::isnan(x)) return std::numeric_limits<double>::quiet_NaN();
  if (x <= 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  constexpr double kEps = 1e-16;
  constexpr int kMaxIter = 10000;
  const double log_prefix = a * std::log(x) - x - std::lgamma(a);

  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n < kMaxIter; ++n) {
      term *= x / (a + n);
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return 1.0 - sum * std::exp(log_prefix);
  }

  constexpr double kTiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < kMaxIter; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < kEps) break;
  }
  return std::exp(log_prefix) * h;
}

/// Upper tail P(X > x) of the chi-squared distribution with `df` degrees of freedom.
inline double chi2_sf(double x, int df) { return gamma_q(0.5 * df, 0.5 * x); }

/// log of the binomial coefficient C(n, k).
inline double log_choose(long long n, long long k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

}  // namespace momentum::special
