#pragma once

#include <Eigen/Core>
#include <complex>
#include <stdexcept>
#include <vector>

#include "speconion/grids.hpp"

namespace speconion {

struct SupportMarginError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct GridMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A Weyl symbol that is a finite Fourier series in x and a grid function in
// xi: values(m + mtheta, i + nxi) = qhat(theta_m, xi_i), theta_m = 2*pi*m/L.
//
// kinetic_weight adds kinetic_weight * xi^2 to the symbol; that part is kept
// analytic (never stored on the grid) and all operations handle it in closed
// form, so the full Hamiltonian xi^2 + hbar*q is representable exactly.
class WeylSymbol {
 public:
  XiGrid grid;
  int mtheta = 0;
  Eigen::MatrixXcd values;  // (2*mtheta+1) x (2*nxi+1)
  double kinetic_weight = 0.0;
  bool real_flag = false;  // Hermitian symmetry asserted (real-valued symbol)

  WeylSymbol() = default;
  WeylSymbol(const XiGrid& g, int mmax)
      : grid(g), mtheta(mmax), values(Eigen::MatrixXcd::Zero(2 * mmax + 1, g.size())) {}

  std::complex<double> at(int m, int i) const {
    if (std::abs(m) > mtheta || std::abs(i) > grid.nxi) return {0.0, 0.0};
    return values(m + mtheta, i + grid.nxi);
  }
  void set(int m, int i, std::complex<double> v) { values(m + mtheta, i + grid.nxi) = v; }
  Eigen::MatrixXcd::RowXpr row(int m) { return values.row(m + mtheta); }

  double hermitian_defect() const;
  void check_real_flag(double tol = 1e-12);  // sets real_flag if defect <= tol
  double sup_abs() const { return values.size() ? values.cwiseAbs().maxCoeff() : 0.0; }
  bool row_nonzero(int m) const { return values.row(m + mtheta).cwiseAbs().maxCoeff() > 0.0; }

  // Largest |m| with a nonzero row; 0 for the zero symbol.
  int active_mtheta() const;
  // xi-support column bounds [lo, hi] over all modes; {-1,-1} if zero.
  std::pair<int, int> xi_support() const;
  // Drop identically-zero outer mode rows (never grows).
  void trim_modes();
};

// sup over the grid of |Delta_x^alpha Delta_xi^beta values|, where Delta_x
// multiplies mode m by (i*theta_m) and Delta_xi is a central grid difference.
double sup_norm(const WeylSymbol& a, int alpha, int beta);

struct ClassNormReport {
  double radius = 1.0;
  double table[5][5] = {};  // table[alpha][beta] = sup_norm(alpha,beta) * r^-alpha
};
ClassNormReport class_norm_report(const WeylSymbol& a, double r);

WeylSymbol add(const WeylSymbol& a, const WeylSymbol& b);
WeylSymbol scale(const WeylSymbol& a, std::complex<double> c);

// Exact Weyl composition in the mode representation:
//   chat(theta, xi) = sum_{theta1+theta2=theta} ahat(theta1, xi + hbar*theta2/2)
//                                             * bhat(theta2, xi - hbar*theta1/2).
// The half-shifts are exact integer numbers of grid steps. Throws
// SupportMarginError if a shift would read past the grid edge from inside a
// symbol's xi-support, and GridMismatchError on different grids.
// Neither operand may carry a kinetic part.
WeylSymbol weyl_compose(const WeylSymbol& a, const WeylSymbol& b);

// compose(a,b) - compose(b,a); kinetic parts are handled in closed form via
// [Op(g), Op(xi^2)] = Op(-2*hbar*theta*xi*ghat).
WeylSymbol commutator(const WeylSymbol& a, const WeylSymbol& b);

// s with i[Op(g), -hbar^2 Delta] = hbar*Op(s): shat = -2i*theta*xi*ghat.
WeylSymbol commutator_with_laplacian(const WeylSymbol& g);

// Smooth xi-cutoff == 1 on [band_lo, band_hi] in |xi|, supported on the
// 1.5x enlargement (transition width = 0.25 * band width).
double xi_band_cutoff(double xi, double band_lo, double band_hi);

// Homological-equation solver: ghat = i*qhat*chi_cut(xi)/(2*theta*xi) on
// theta_lo <= |theta| <= theta_hi, zero elsewhere. Preconditions: the |xi|
// band stays away from 0 (including the cutoff transition), and q has no
// content at 0 < |theta| < theta_lo inside the band (tolerance 1e-13).
WeylSymbol solve_homological(const WeylSymbol& q, double band_lo, double band_hi, double theta_lo,
                             double theta_hi);

struct ConjugationResult {
  WeylSymbol symbol;         // sum_{j=0}^{K} ad_G^j(h) / (i^j j!)
  double remainder_sup = 0;  // sup norm of the dropped (K+1)-st term
};

// Conjugation series for e^{-iOp(g)} Op(h) e^{iOp(g)}; h may carry a kinetic
// part (the Hamiltonian xi^2 + hbar*q), g may not.
ConjugationResult conjugate_series(const WeylSymbol& h, const WeylSymbol& g, int K);

// max |ahat(theta, xi)| over xi_lo <= |xi| <= xi_hi, |theta| >= theta_floor.
// Ignores the kinetic part (theta = 0 by definition).
double residual_norm(const WeylSymbol& a, double xi_lo, double xi_hi, double theta_floor);

}  // namespace speconion
