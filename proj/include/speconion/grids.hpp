#pragma once

#include <cmath>
#include <stdexcept>

namespace speconion {

// Uniform xi-grid tied to a semiclassical parameter and a period.
//
// The spacing is dxi = pi*hbar/L, computed once and reused, so that every
// Weyl half-shift hbar*theta/2 with theta = 2*pi*m/L lands exactly m grid
// steps away. Grid points are xi(i) = i*dxi for i in [-nxi, nxi].
struct XiGrid {
  double hbar = 0.0;
  double L = 0.0;
  double dxi = 0.0;
  int nxi = 0;

  XiGrid() = default;
  XiGrid(double hbar_, double L_, double xi_max) : hbar(hbar_), L(L_) {
    if (!(hbar > 0.0 && hbar < 1.0)) throw std::invalid_argument("XiGrid: hbar must be in (0,1)");
    if (!(L > 0.0)) throw std::invalid_argument("XiGrid: period must be positive");
    if (!(xi_max > 0.0)) throw std::invalid_argument("XiGrid: xi_max must be positive");
    dxi = M_PI * hbar / L;
    nxi = static_cast<int>(std::ceil(xi_max / dxi));
  }

  int size() const { return 2 * nxi + 1; }
  double xi(int i) const { return i * dxi; }          // i in [-nxi, nxi]
  double xi_col(int c) const { return (c - nxi) * dxi; }  // c in [0, 2*nxi]
  int col(int i) const { return i + nxi; }
  double xi_max() const { return nxi * dxi; }
  double theta(int m) const { return 2.0 * M_PI * m / L; }

  bool same_as(const XiGrid& o) const {
    return hbar == o.hbar && L == o.L && nxi == o.nxi;
  }
};

}  // namespace speconion
