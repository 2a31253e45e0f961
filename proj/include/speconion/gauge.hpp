#pragma once

#include <string>
#include <vector>

#include "speconion/multiplier.hpp"
#include "speconion/weyl.hpp"

namespace speconion {

struct PeelConfig {
  double window_a = 0.5, window_b = 1.5;  // energy window [a, b], 0 < a < b
  double delta = 0.25;                    // s_n = mu_n^-delta, 0 < delta < 1/2
  double theta_min = 0.0;                 // frequency floor; 0 -> one lattice spacing
  int parallel_steps = 6;                 // Kp
  int series_order = 8;                   // K in the conjugation series
  double tol_rel = 1e-8;                  // tau = tol_rel * sup |qhat|
  int max_layers = 64;
  bool polish = false;  // keep stepping below tau while the residual still halves

  void validate() const;
};

struct LayerReport {
  int layer_index = -2;        // -1 is the first (|theta| >= 1) layer
  double radius = 1.0;         // r_j
  double theta_floor = 1.0;    // frequencies >= this are cleaned by the layer
  int steps_used = 0;
  int steps_to_tau = -1;       // first parallel step with residual <= tau; -1 if never
  std::vector<double> residuals;  // residual after each parallel step
  double remainder_estimate = 0.0;  // largest conjugation-series remainder seen
  double generator_sup = 0.0;
};

// Ordered list of layer generators g_j with radii r_j; U = prod_j e^{i Op(g_j)}
// in the order stored (outermost frequencies first).
class GaugeLog {
 public:
  std::vector<WeylSymbol> generators;
  std::vector<LayerReport> reports;
  double tau = 0.0;  // absolute residual target used

  void append(WeylSymbol g, LayerReport rep);
  void validate() const;  // radii strictly decreasing, generators real-flagged
};

struct PeelStepResult {
  WeylSymbol q1;  // conjugated perturbation, kinetic part removed
  WeylSymbol g;   // accumulated generator for the layer
  LayerReport report;
};

// Remove |theta| >= 1 content over the energy window by a parallel gauge
// transform: split off the high-frequency part, solve the homological
// equation, conjugate the full Hamiltonian xi^2 + hbar*q by the accumulated
// generator, repeat on the new residual.
PeelStepResult peel_layer0(const WeylSymbol& q, const PeelConfig& cfg);

// Peel one annulus: assumes q is already clean at {a<=|xi|<=b, |theta|>=r}
// (residual <= tau) and cleans down to |theta| >= r*sn.
PeelStepResult peel_layer(const WeylSymbol& q, double r, double sn, const PeelConfig& cfg);

struct OnionPeelResult {
  FourierMultiplier multiplier;
  GaugeLog log;
  WeylSymbol final_symbol;
};

// Full onion peeling: layer0 then annuli r = 1, sn, sn^2, ... until the floor
// theta_min (default: one mode-lattice spacing) is reached. For periodic
// inputs everything below one lattice spacing is exactly theta = 0, so the
// final symbol restricted to the window is a Fourier multiplier.
OnionPeelResult onion_peel(const WeylSymbol& q, const PeelConfig& cfg);

struct GaugeConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Serialization: a directory of symbol dumps plus a manifest.
void save_gauge_log(const GaugeLog& log, const FourierMultiplier& mult, const std::string& dir);

}  // namespace speconion
