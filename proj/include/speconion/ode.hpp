#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <vector>

#include "speconion/potential.hpp"

namespace speconion {

// Cauchy data (u, w) with w = hbar u' / omega; ED = |u|^2 + |w|^2.
struct EnergyState {
  std::complex<double> u{0.0, 0.0};
  std::complex<double> w{0.0, 0.0};
  double x = 0.0;
  double ed() const { return std::norm(u) + std::norm(w); }
};

struct TransferResult {
  EnergyState final_state;
  std::vector<double> mesh_x;
  std::vector<double> mesh_ed;
  double ed_max = 0, ed_min = 0;
  Eigen::Matrix2d T = Eigen::Matrix2d::Identity();  // propagation of (u, w)
};

// Accuracy/step parameters for the transfer integrator. The step is
// h = (hbar/omega) * min(1/16, step_factor); step_factor ~ 0.004 keeps the
// per-step local error near 1e-12.
struct StepRule {
  double step_factor = 0.004;
  int mesh_per_period = 64;
};

// Transfer matrix of u'' = ((hbar V0 - omega^2)/hbar^2) u over [x0, x1]
// (V1 must be identically zero; remove it first). Interaction-picture
// 4th-order Magnus: the free rotation is factored out exactly, so V == 0
// propagates exactly and det T == 1 to rounding.
Eigen::Matrix2d transfer_matrix(const TrigPotential& p, double omega, double hbar, double x0,
                                double x1, const StepRule& rule = {});

TransferResult transfer_propagate(const TrigPotential& p, const EnergyState& s0, double omega,
                                  double hbar, double x0, double x1, const StepRule& rule = {});

struct PhaseFunction {
  double mean = 0.0;             // linear part: mean(V1) * x
  Eigen::VectorXcd periodic;     // trig series of the periodic primitive
  int mtheta = 0;
  double period = 2 * M_PI;
  double operator()(double x) const;  // int_0^x V1(s) ds
};

// v = e^{-i int V1} u reduction: returns p' with V0' = V0 - hbar*V1^2,
// V1' = 0, plus the phase function.
std::pair<TrigPotential, PhaseFunction> remove_first_order(const TrigPotential& p, double hbar);

struct GronwallReport {
  double worst_ratio_over_bound = 0;  // max over trials of (ED(b)/ED(a)) / bound
  int trials = 0;
  bool all_pass = true;
};
GronwallReport gronwall_check(const TrigPotential& p, double omega, double hbar, double a, double b,
                              int trials, std::uint64_t seed, const StepRule& rule = {});

struct GlueResult {
  double s = 0;                  // junction shift in [0, 2 pi hbar / omega)
  double matching_residual = 0;  // |match equation| after solving
};
// Phase-matching shift for joining a left and a right real solution through a
// free region; both states are Cauchy data at the junction with V == 0 nearby.
GlueResult glue_solutions(const EnergyState& left, const EnergyState& right, double omega,
                          double hbar);

struct EnergyRatioReport {
  std::vector<double> rho;
  std::vector<double> max_ratio_minus_1;  // max over trials/positions of ED ratio - 1
  double slope = 0;                       // log(ratio-1) vs log(rho) fit
  int points_used = 0;
};
// Corollary-style rigidity experiment: for each rho, propagate random-phase
// solutions over [0, X] and record the worst ED ratio on a mesh.
EnergyRatioReport energy_ratio_experiment(const TrigPotential& p, const std::vector<double>& rho,
                                          double X, int trials, std::uint64_t seed,
                                          const StepRule& rule = {});

struct LyapunovEstimate {
  double exponent = 0;
  double exponent_double_x = 0;  // stability check at 2X
  double floor = 1e-10;
};
LyapunovEstimate lyapunov_estimate(const TrigPotential& p, double rho, double X,
                                   std::uint64_t seed, const StepRule& rule = {});

}  // namespace speconion
