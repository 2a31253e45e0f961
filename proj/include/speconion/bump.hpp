#pragma once

#include <cmath>

namespace speconion {

// Smooth cutoff machinery. Everything here is built from the C-infinity
// transition f(t) = exp(-1/t), t > 0, so all cutoffs vanish to infinite
// order at the ends of their transition intervals.

inline double expm_inv(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }

// smoothstep01: 0 for t <= 0, 1 for t >= 1, C-infinity monotone in between.
inline double smoothstep01(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = expm_inv(t);
  const double b = expm_inv(1.0 - t);
  return a / (a + b);
}

// The reference mollifier bump g(t) = exp(-1/(1-t^2)) on |t| < 1 (unnormalized).
inline double mollifier_bump(double t) {
  const double s = 1.0 - t * t;
  return s > 0.0 ? std::exp(-1.0 / s) : 0.0;
}

// plateau: identically 1 for |x| <= inner, 0 for |x| >= outer, smoothstep in
// between. Requires inner < outer.
inline double plateau(double x, double inner, double outer) {
  const double ax = std::fabs(x);
  if (ax <= inner) return 1.0;
  if (ax >= outer) return 0.0;
  return smoothstep01((outer - ax) / (outer - inner));
}

// One-sided plateau on an interval [lo, hi]: 1 on [lo+width, hi-width],
// 0 outside (lo, hi).
inline double plateau_interval(double x, double lo, double hi, double width) {
  if (x <= lo || x >= hi) return 0.0;
  double v = 1.0;
  if (x < lo + width) v *= smoothstep01((x - lo) / width);
  if (x > hi - width) v *= smoothstep01((hi - x) / width);
  return v;
}

}  // namespace speconion
