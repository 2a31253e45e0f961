#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <functional>
#include <string>

#include "speconion/grids.hpp"

namespace speconion {

class WeylSymbol;

// Which coefficient (or derivative) to evaluate.
enum class Coeff { V0, V1, dV0, dV1 };

// A real L-periodic coefficient pair (V0, V1) stored as finite Fourier
// series. coeff(m) multiplies exp(i*2*pi*m*x/L); Hermitian symmetry
// coeff(-m) = conj(coeff(m)) keeps both series real valued.
struct TrigPotential {
  double period = 2.0 * M_PI;
  int mtheta = 0;              // declared max mode index
  Eigen::VectorXcd coeffs_v0;  // size 2*mtheta+1, index m+mtheta
  Eigen::VectorXcd coeffs_v1;

  TrigPotential() : coeffs_v0(Eigen::VectorXcd::Zero(1)), coeffs_v1(Eigen::VectorXcd::Zero(1)) {}
  TrigPotential(double L, int mmax)
      : period(L),
        mtheta(mmax),
        coeffs_v0(Eigen::VectorXcd::Zero(2 * mmax + 1)),
        coeffs_v1(Eigen::VectorXcd::Zero(2 * mmax + 1)) {}

  std::complex<double>& v0(int m) { return coeffs_v0(m + mtheta); }
  std::complex<double>& v1(int m) { return coeffs_v1(m + mtheta); }
  std::complex<double> v0(int m) const {
    return std::abs(m) > mtheta ? std::complex<double>(0.0) : coeffs_v0(m + mtheta);
  }
  std::complex<double> v1(int m) const {
    return std::abs(m) > mtheta ? std::complex<double>(0.0) : coeffs_v1(m + mtheta);
  }
  double theta(int m) const { return 2.0 * M_PI * m / period; }

  // max |coeff| deviation from Hermitian symmetry (0 for exactly real series)
  double hermitian_defect() const;
  void enforce_hermitian();  // symmetrize; used after DFT round-off
  bool is_zero() const;
  // sup norms estimated on a dense mesh (n points per period)
  double sup_v0(int n = 4096) const;
  double sup_v1(int n = 4096) const;
};

// Pointwise samples of a coefficient pair on a uniform grid over [-X, X],
// with finite-difference derivative sup-norm estimates up to order 4.
struct SampledPotential {
  double x0 = 0.0;  // left end
  double dx = 0.0;
  Eigen::VectorXd samples_v0;
  Eigen::VectorXd samples_v1;
  double deriv_sup_v0[5] = {0, 0, 0, 0, 0};
  double deriv_sup_v1[5] = {0, 0, 0, 0, 0};

  int size() const { return static_cast<int>(samples_v0.size()); }
  double x(int i) const { return x0 + i * dx; }
  double extent() const { return -x0; }  // grids are symmetric: [-X, X]

  void refresh_deriv_bounds();
};

// Sample a callable pair on [-X, X] with n points (uniform, endpoints included).
SampledPotential sample_potential(const std::function<double(double)>& v0,
                                  const std::function<double(double)>& v1, double X, int n);
SampledPotential sample_potential(const TrigPotential& p, double X, int n);

double evaluate(const TrigPotential& p, double x, Coeff which);

// Windowed-sum periodization. The cutoff chi is a smooth overlap-add window
// built from the exp(-1/t) smoothstep: chi == 1 on |x| <= P/2 - cutoff_width,
// transitions through chi(P/2) = 1/2, and the P-translates of chi sum to 1
// exactly, so P-periodic inputs are reproduced coefficient-for-coefficient.
// Fourier coefficients come from a DFT over one period, truncated at relative
// magnitude 1e-14.
TrigPotential periodize(const SampledPotential& p, double P, double cutoff_width);

// q(x, xi) = 2*V1(x)*xi + V0(x) as a Weyl symbol on the given grid.
WeylSymbol weyl_symbol_of(const TrigPotential& p, const XiGrid& grid);

// Random real trig polynomial pair, reproducible from the seed. Mode m
// amplitude scale/(1+m^2); v1_scale = 0 gives V1 == 0.
TrigPotential random_trig_potential(std::uint64_t seed, double L, int modes, double scale,
                                    double v1_scale = 0.0);

// Trig series product (used by remove_first_order for V1^2).
Eigen::VectorXcd convolve_coeffs(const Eigen::VectorXcd& a, int ma, const Eigen::VectorXcd& b,
                                 int mb);

// Potential spec file: header line `period <L>`, then blocks `V0` / `V1`
// of lines `mode_index real_part imag_part`.
TrigPotential read_potential_file(const std::string& path);
void write_potential_file(const TrigPotential& p, const std::string& path);

}  // namespace speconion
