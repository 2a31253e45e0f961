#pragma once

#include <Eigen/Core>
#include <complex>
#include <functional>
#include <vector>

#include "speconion/potential.hpp"

namespace speconion {

// Hermitian tridiagonal finite-difference Hamiltonian on a Dirichlet box
// [-X, X]: second-order Laplacian stencil, symmetrized first-order term.
struct TridiagOperator {
  double X = 0, dx = 0, hbar = 0;
  Eigen::VectorXd diag;
  Eigen::VectorXd off_re;  // superdiagonal, real part
  Eigen::VectorXd off_im;  // superdiagonal, imag part (first-order term)
  bool has_v1 = false;

  int n() const { return static_cast<int>(diag.size()); }
  double x_of(int i) const { return -X + (i + 1) * dx; }
  int index_of(double x) const;
  void apply(const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const;
  std::pair<double, double> gershgorin() const;
};

TridiagOperator box_operator(const TrigPotential& p, double X, int n, double hbar,
                             const std::function<double(double)>& extra_v0 = {});

// Chebyshev expansion of f(lambda) = cos(t sqrt(max(lambda,0))/hbar) over the
// Gershgorin-certified spectral interval; degree by the coefficient tail rule.
struct ChebPropagator {
  const TridiagOperator* H = nullptr;
  double t = 0, hbar = 0;
  double lmin = 0, lmax = 0;
  Eigen::VectorXd coeffs;
  int degree() const { return static_cast<int>(coeffs.size()) - 1; }
};

ChebPropagator make_cos_propagator(const TridiagOperator& H, double t, double hbar);
Eigen::VectorXcd apply_cos_propagator(const ChebPropagator& prop, const Eigen::VectorXcd& u0);

// Smooth compactly supported Gaussian-like bump of unit height: exact support
// [center - radius, center + radius].
Eigen::VectorXcd bump_state(const TridiagOperator& H, double center, double radius);

struct FiniteSpeedResult {
  double leaked_mass = 0;  // L2 mass beyond |t| + margin from supp u0
  double u0_norm = 0;
  double margin = 0;
};

FiniteSpeedResult finite_speed_check(const TrigPotential& p, double hbar, double X, int n,
                                     double x0, double R0, double t, int margin_cells = 4);

struct WaveCompareResult {
  std::vector<double> ts;
  std::vector<double> norm_diff;
  double u0_h1_norm = 0;
  double slope = 0;  // fitted norm_diff ~ slope * t
};

WaveCompareResult wave_compare(const TridiagOperator& H0, const TridiagOperator& H1, double hbar,
                               const Eigen::VectorXcd& u0, const std::vector<double>& ts);

// nu with nu_hat == 1 on [-1,1], supp nu_hat in (-2,2), even.
struct SmoothingKernel {
  double hbar = 0, T = 1;
  double nu_hat(double tau) const;
  double nu(double s) const;       // (1/pi) Int_0^2 nu_hat cos(s tau) dtau
  double nu_cdf(double t) const;   // 1/2 + (1/pi) Int_0^2 nu_hat sin(t tau)/tau dtau
  double scaled(double s) const { return T / hbar * nu(T / hbar * s); }  // nu_{hbar,T}
  double scaled_cdf(double t) const { return nu_cdf(T / hbar * t); }
};

enum class SmoothedMode { eigen, wave };

// (nu_{hbar,T} * E(H)(x,y,.))(omega) for an already-positive H (callers apply
// the positivity shift and the omega remap). eigen: spectral sum against the
// kernel CDF. wave: (1/pi) Int tau^-1 nu_hat(tau/T) sin(tau omega/hbar)
// cos(tau sqrt(H)/hbar) dtau by midpoint quadrature with the two-term cosine
// recursion in tau.
std::vector<double> smoothed_projector(const TridiagOperator& H, const SmoothingKernel& nu,
                                       double x, double y, const std::vector<double>& omegas,
                                       SmoothedMode mode);

struct TauberianReport {
  double conv_sup_error = 0;   // sup |nu*w - w|
  double lipschitz_lh = 0;     // measured L_h
  double C_conv = 0;           // conv_sup_error / L_h
  double C_transfer = 0;       // Lipschitz-transfer constant
  double M_h = 0, B_h = 0;
};

// w: monotone samples on a uniform omega grid [omega0, omega0+(n-1)*dw];
// the window must sit well inside so kernel tails are covered.
TauberianReport tauberian_bounds_check(const std::vector<double>& w, double omega0, double dw,
                                       const SmoothingKernel& nu, double win_lo, double win_hi);

enum class ModKind { none, periodize_mod, dirichlet_box, quadratic_well };

struct LdosCompareConfig {
  ModKind kind = ModKind::none;
  double hbar = 0.125;
  std::vector<double> Ts = {4, 8, 16};
  std::vector<double> omegas = {0.9, 0.95, 1.0, 1.05, 1.1};
  double x = 0.0;
  double R0 = 1.0;
  double X0 = 80.0;          // reference box half-width
  double delta_scale = 1.0;  // delta(hbar) = delta_scale * hbar^2 for the well
  int Nk = 192;
  std::function<double(double)> v0_tail;  // non-periodic addition for periodize runs
};

struct LdosCompareRow {
  double T = 0, omega = 0, e0 = 0, e1 = 0, diff = 0, bound_unit = 0;
};
struct LdosCompareReport {
  std::vector<LdosCompareRow> rows;
  double fitted_C = 0;  // max diff / bound_unit
  double delta = 0;
};

LdosCompareReport ldos_compare_experiment(const TrigPotential& p, const LdosCompareConfig& cfg);

}  // namespace speconion
