#pragma once

#include <Eigen/Core>
#include <complex>
#include <string>
#include <vector>

#include "speconion/potential.hpp"
#include "speconion/weyl.hpp"

namespace speconion {

class GaugeLog;
struct FourierMultiplier;

// One evaluation of the spectral function E(x, y, omega) by some backend.
struct SpectralSample {
  double x = 0.0, y = 0.0, omega = 0.0;
  std::complex<double> value{0.0, 0.0};
  int alpha = 0, beta = 0;  // derivative orders in x and y
  std::string method;       // bloch | box | multiplier | conjugated
};

// Floquet plane-wave matrix of H = -hbar^2 Delta + hbar Op(q) at
// quasimomentum k, in the basis e^{i(k+theta_m)x}, |m| <= M:
//   H[m',m] = hbar^2 (k+theta_m)^2 delta_{m'm}
//           + hbar (v0(m'-m) + hbar (2k + theta_m + theta_m') v1(m'-m)).
struct BlochMatrix {
  double k = 0.0, hbar = 0.0;
  int M = 0;
  Eigen::MatrixXcd H;
};

BlochMatrix bloch_matrix(const TrigPotential& p, double k, int M, double hbar);

// Exact Fourier-basis realization of Op_hbar^W(a):
//   A[m',m] = ahat(theta_{m'-m}, hbar*(k + (theta_m + theta_m')/2))
// plus kinetic_weight * (hbar(k+theta_m))^2 on the diagonal.
// Throws if a needed xi falls outside the symbol grid.
Eigen::MatrixXcd realize_symbol_matrix(const WeylSymbol& a, double k, int M);

// Default plane-wave cutoff: covers |xi| <= omega + margin at every k.
int default_bloch_cutoff(const TrigPotential& p, double omega, double hbar, double margin = 2.0);

// E(x,y,omega) = (1/2pi) Int_0^{2pi/L} Sum_{n: lambda_n(k) <= omega^2}
//                u_{n,k}(x) conj(u_{n,k}(y)) dk,  |u| normalized to
// Int_0^L |u|^2 = L. The k-integral is piecewise Gauss-Legendre between the
// band crossings lambda_n(k) = omega^2, each crossing located to ~1e-12 in k.
// Derivatives are applied analytically to the plane-wave expansion.
SpectralSample bloch_spectral_kernel(const TrigPotential& p, double x, double y, double omega,
                                     double hbar, int Nk = 256, int M = -1, int alpha = 0,
                                     int beta = 0);

// Spectral function of the non-semiclassical operator
// H = D^2 + V1 D + D V1 + V0 at energy rho^2, via the scaling
// hbar = 1/rho, omega = 1, (V0, V1) -> (hbar V0, V1).
SpectralSample nonsemiclassical_kernel(const TrigPotential& p, double x, double y, double rho,
                                       int Nk = 256, int M = -1, int alpha = 0, int beta = 0);

// Dirichlet-box finite-difference oracle on [-X, X] with n interior points.
// Second-order stencil, symmetrized first-order term. x and y snap to the
// nearest grid point. extra_v0 adds a sampled external potential (wells).
struct BoxKernelOptions {
  int n = 0;                  // interior grid points; 0 -> resolution rule
  double resolution = 20.0;   // points per pi*hbar/omega wavelength rule
  std::function<double(double)> extra_v0;  // optional addition to hbar*V0 term (absolute)
};

SpectralSample box_spectral_kernel(const TrigPotential& p, double X, double omega, double hbar,
                                   double x, double y, const BoxKernelOptions& opt = {});

// All box eigenvalues and the value columns needed to evaluate kernels at a
// fixed pair of grid points; used by experiments that sweep omega.
struct BoxDiagonalization {
  double X = 0, dx = 0, hbar = 0;
  Eigen::VectorXd lambda;      // ascending
  Eigen::MatrixXcd phi_cols;   // rows: eigenindex; cols: requested points (grid-normalized)
  std::vector<int> point_index;
  std::vector<double> point_x;
};

BoxDiagonalization box_diagonalize(const TrigPotential& p, double X, double omega_max, double hbar,
                                   const std::vector<double>& points,
                                   const BoxKernelOptions& opt = {});
std::complex<double> box_kernel_value(const BoxDiagonalization& d, int ip, int jp, double omega);

// Band gaps of H at hbar over the energy window: (center, width) of every
// positive gap between consecutive bands, band extrema refined in k and the
// edge eigenvalues polished in extended precision.
struct BandGap {
  int index = 0;  // gap between band index and index+1 (1-based bands)
  double center = 0.0, width = 0.0;
};
std::vector<BandGap> band_gaps(const TrigPotential& p, double hbar, double lambda_min,
                               double lambda_max, int M = -1, int kmesh = 33);

// Kernel of U E(multiplier) U* built from a gauge log: per quasimomentum the
// unitary U_k = prod_j exp(i Op(g_j)) conjugates the diagonal projector of
// the multiplier matrix.
SpectralSample conjugated_projector_kernel(const GaugeLog& log, const FourierMultiplier& mult,
                                           const TrigPotential& p, double x, double y, double omega,
                                           double hbar, int Nk = 256, int M = -1);

}  // namespace speconion
