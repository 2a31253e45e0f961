#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace speconion {

// Cyclic Jacobi eigenvalue iteration for Hermitian matrices, templated on the
// real scalar so band-edge eigenvalues can be resolved in extended precision
// (gap widths decay super-exponentially and fall below double rounding).
// Values only; ascending order.
template <typename Real>
std::vector<Real> jacobi_eigenvalues(std::vector<std::complex<Real>> a, int n,
                                     int max_sweeps = 60) {
  using C = std::complex<Real>;
  auto at = [&](int i, int j) -> C& { return a[i * n + j]; };
  const Real eps = std::numeric_limits<Real>::epsilon();

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    Real off = 0, diag = 0;
    for (int i = 0; i < n; ++i) {
      diag += std::abs(at(i, i));
      for (int j = i + 1; j < n; ++j) off += std::abs(at(i, j));
    }
    if (off <= eps * (diag + off)) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const C apq = at(p, q);
        if (std::abs(apq) == Real(0)) continue;
        const Real app = at(p, p).real(), aqq = at(q, q).real();
        // Hermitian 2x2 rotation: diagonalize [[app, apq],[conj(apq), aqq]]
        const Real absq = std::abs(apq);
        const C phase = apq / absq;
        const Real tau = (aqq - app) / (2 * absq);
        const Real t = (tau >= 0 ? Real(1) : Real(-1)) /
                       (std::abs(tau) + std::sqrt(Real(1) + tau * tau));
        const Real c = Real(1) / std::sqrt(Real(1) + t * t);
        const Real s = t * c;
        // unitary U = [[c, s],[-s e^{-i phi}, c e^{-i phi}]] acting on (p,q):
        // A <- U^H A U zeroes the (p,q) entry
        for (int i = 0; i < n; ++i) {
          const C aip = at(i, p), aiq = at(i, q);
          at(i, p) = c * aip - s * std::conj(phase) * aiq;
          at(i, q) = s * aip + c * std::conj(phase) * aiq;
        }
        for (int j = 0; j < n; ++j) {
          const C apj = at(p, j), aqj = at(q, j);
          at(p, j) = c * apj - s * phase * aqj;
          at(q, j) = s * apj + c * phase * aqj;
        }
        at(p, q) = C(0);
        at(q, p) = C(0);
      }
    }
  }
  std::vector<Real> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = at(i, i).real();
  std::sort(ev.begin(), ev.end());
  return ev;
}

}  // namespace speconion
