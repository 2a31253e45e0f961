#pragma once

#include <Eigen/Core>
#include <vector>

#include "speconion/bloch.hpp"
#include "speconion/grids.hpp"

namespace speconion {

// Real function qtilde(xi) on the xi-grid; authoritative on [window_lo,
// window_hi] in |xi| (zero tails outside by construction).
struct FourierMultiplier {
  XiGrid grid;
  Eigen::VectorXd values;  // size grid.size()
  double window_lo = 0.0, window_hi = 0.0;

  FourierMultiplier() = default;
  FourierMultiplier(const XiGrid& g, double lo, double hi)
      : grid(g), values(Eigen::VectorXd::Zero(g.size())), window_lo(lo), window_hi(hi) {}

  double at_col(int c) const { return values(c); }
  // cubic (4-point Lagrange) interpolation off the grid
  double operator()(double xi) const;
};

FourierMultiplier zero_multiplier(const XiGrid& g, double lo, double hi);
FourierMultiplier constant_multiplier(const XiGrid& g, double c, double lo, double hi);

// Spectral kernel of -hbar^2 Delta + hbar qtilde(hbar D):
//   E(x,y,omega) = (1/2pi hbar) Int_{G(omega)} e^{i(x-y)xi/hbar} dxi,
//   G(omega) = { xi : xi^2 + hbar qtilde(xi) <= omega^2 },
// with the sublevel set resolved as a union of grid intervals (endpoints by
// bisection on the interpolant) and the integral evaluated in closed form.
// Derivatives insert (i xi/hbar)^alpha (-i xi/hbar)^beta.
SpectralSample multiplier_kernel(const FourierMultiplier& q, double x, double y, double omega,
                                 int alpha = 0, int beta = 0);

struct ExpansionFit {
  std::vector<double> rho;                // ladder
  Eigen::VectorXd coeffs_re, coeffs_im;   // fitted coefficients
  Eigen::VectorXd residuals;              // per-ladder-point residual of the fit
  double condition_number = 0.0;
  double residual_exponent = 0.0;         // fitted decay exponent of |residual| vs rho
  bool exponent_ok = true;                // exponent >= N - 0.5 heuristic flag
};

// On-diagonal fit: samples E(x,x) at omega=1, hbar=1/rho; fit E*rho^-1
// against {rho^-2k}, k = 0..N-1 (odd powers excluded). force_odd_term adds a
// rho^-1 column for the excluded-term check.
ExpansionFit fit_expansion_diag(const std::vector<SpectralSample>& samples,
                                const std::vector<double>& rho, int N, bool force_odd_term = false);

// Off-diagonal fit at fixed (x,y): E against {e^{+-i rho|x-y|} rho^-j},
// j = 0..N-1. coeffs g_j^+ and g_j^- are interleaved (+0, -0, +1, -1, ...).
struct OffdiagFit {
  std::vector<double> rho;
  std::vector<std::complex<double>> g_plus, g_minus;
  Eigen::VectorXd residuals;
  double condition_number = 0.0;
};
OffdiagFit fit_expansion_offdiag(const std::vector<SpectralSample>& samples,
                                 const std::vector<double>& rho, int N);

struct FirstTermReport {
  struct Row {
    double hbar = 0, x = 0, y = 0;
    double diag_scaled = 0;     // |E(x,x,omega) - omega/(pi hbar)| * hbar^{3/4}
    double offdiag_err = 0;     // |E(x,y,omega) - sin(omega|x-y|/hbar)/(pi|x-y|)|
  };
  std::vector<Row> rows;
  double max_diag_scaled = 0.0;
  double max_offdiag_err = 0.0;
  double offdiag_trend_slope = 0.0;  // d log(err) / d log(hbar); > 0 means err -> 0
};

FirstTermReport first_term_check(const TrigPotential& p, double omega,
                                 const std::vector<std::pair<double, double>>& points,
                                 const std::vector<double>& hbar_ladder, int Nk = 256);

}  // namespace speconion
