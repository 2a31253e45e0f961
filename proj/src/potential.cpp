#include "speconion/potential.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "speconion/bump.hpp"
#include "speconion/weyl.hpp"

namespace speconion {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

double TrigPotential::hermitian_defect() const {
  double d = 0.0;
  for (int m = 0; m <= mtheta; ++m) {
    d = std::max(d, std::abs(v0(m) - std::conj(v0(-m))));
    d = std::max(d, std::abs(v1(m) - std::conj(v1(-m))));
  }
  return d;
}

void TrigPotential::enforce_hermitian() {
  for (int m = 1; m <= mtheta; ++m) {
    auto s0 = 0.5 * (v0(m) + std::conj(v0(-m)));
    coeffs_v0(m + mtheta) = s0;
    coeffs_v0(-m + mtheta) = std::conj(s0);
    auto s1 = 0.5 * (v1(m) + std::conj(v1(-m)));
    coeffs_v1(m + mtheta) = s1;
    coeffs_v1(-m + mtheta) = std::conj(s1);
  }
  coeffs_v0(mtheta) = coeffs_v0(mtheta).real();
  coeffs_v1(mtheta) = coeffs_v1(mtheta).real();
}

bool TrigPotential::is_zero() const {
  return coeffs_v0.cwiseAbs().maxCoeff() == 0.0 && coeffs_v1.cwiseAbs().maxCoeff() == 0.0;
}

double TrigPotential::sup_v0(int n) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s = std::max(s, std::abs(evaluate(*this, period * i / n, Coeff::V0)));
  return s;
}

double TrigPotential::sup_v1(int n) const {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s = std::max(s, std::abs(evaluate(*this, period * i / n, Coeff::V1)));
  return s;
}

double evaluate(const TrigPotential& p, double x, Coeff which) {
  const bool deriv = (which == Coeff::dV0 || which == Coeff::dV1);
  const Eigen::VectorXcd& c =
      (which == Coeff::V0 || which == Coeff::dV0) ? p.coeffs_v0 : p.coeffs_v1;
  std::complex<double> acc = 0.0;
  for (int m = -p.mtheta; m <= p.mtheta; ++m) {
    const double th = p.theta(m);
    std::complex<double> term = c(m + p.mtheta) * std::exp(kI * (th * x));
    if (deriv) term *= kI * th;
    acc += term;
  }
  return acc.real();
}

void SampledPotential::refresh_deriv_bounds() {
  // 4th-order central difference stencils for orders 0..4
  auto bound = [&](const Eigen::VectorXd& v, int order) {
    const int n = static_cast<int>(v.size());
    if (order == 0) return v.cwiseAbs().maxCoeff();
    double mx = 0.0;
    const double h = dx;
    for (int i = 4; i < n - 4; ++i) {
      double d = 0.0;
      switch (order) {
        case 1:
          d = (-v(i + 2) + 8 * v(i + 1) - 8 * v(i - 1) + v(i - 2)) / (12 * h);
          break;
        case 2:
          d = (-v(i + 2) + 16 * v(i + 1) - 30 * v(i) + 16 * v(i - 1) - v(i - 2)) / (12 * h * h);
          break;
        case 3:
          d = (-v(i + 3) + 8 * v(i + 2) - 13 * v(i + 1) + 13 * v(i - 1) - 8 * v(i - 2) +
               v(i - 3)) /
              (8 * h * h * h);
          break;
        case 4:
          d = (-v(i + 3) + 12 * v(i + 2) - 39 * v(i + 1) + 56 * v(i) - 39 * v(i - 1) +
               12 * v(i - 2) - v(i - 3)) /
              (6 * h * h * h * h);
          break;
      }
      mx = std::max(mx, std::abs(d));
    }
    return mx;
  };
  for (int k = 0; k <= 4; ++k) {
    deriv_sup_v0[k] = bound(samples_v0, k);
    deriv_sup_v1[k] = bound(samples_v1, k);
  }
}

SampledPotential sample_potential(const std::function<double(double)>& v0,
                                  const std::function<double(double)>& v1, double X, int n) {
  SampledPotential p;
  p.x0 = -X;
  p.dx = 2.0 * X / (n - 1);
  p.samples_v0.resize(n);
  p.samples_v1.resize(n);
  for (int i = 0; i < n; ++i) {
    const double x = p.x(i);
    p.samples_v0(i) = v0(x);
    p.samples_v1(i) = v1(x);
  }
  p.refresh_deriv_bounds();
  return p;
}

SampledPotential sample_potential(const TrigPotential& p, double X, int n) {
  return sample_potential([&](double x) { return evaluate(p, x, Coeff::V0); },
                          [&](double x) { return evaluate(p, x, Coeff::V1); }, X, n);
}

namespace {

// Overlap-add window: transitions of half-width cw centered at +-P/2, built
// from the complementary smoothstep so that sum_k chi(x - k*P) == 1.
double pu_window(double x, double P, double cw) {
  const double ax = std::fabs(x);
  if (ax <= P / 2 - cw) return 1.0;
  if (ax >= P / 2 + cw) return 0.0;
  return smoothstep01((P / 2 + cw - ax) / (2 * cw));
}

double sample_at(const SampledPotential& p, const Eigen::VectorXd& v, double x) {
  // index of x in the uniform grid; callers arrange exact alignment
  const double t = (x - p.x0) / p.dx;
  const int i = static_cast<int>(std::llround(t));
  if (i < 0 || i >= p.size()) throw std::invalid_argument("periodize: sample out of extent");
  return v(i);
}

}  // namespace

TrigPotential periodize(const SampledPotential& p, double P, double cutoff_width) {
  const double X = p.extent();
  if (!(P > 0.0)) throw std::invalid_argument("periodize: period must be positive");
  if (!(cutoff_width > 0.0 && cutoff_width < P / 4))
    throw std::invalid_argument("periodize: cutoffWidth must lie in (0, P/4)");
  if (P / 2 + cutoff_width > X)
    throw std::invalid_argument("periodize: extent too small (need P/2 + cutoffWidth <= X)");

  // Snap the period to a whole number of grid steps so the windowed sum is
  // sampled exactly at input grid points (no interpolation).
  const int N = static_cast<int>(std::llround(P / p.dx));
  if (N < 8) throw std::invalid_argument("periodize: grid too coarse for requested period");
  const double Ps = N * p.dx;

  auto windowed = [&](const Eigen::VectorXd& v, double x) {
    double acc = 0.0;
    for (int k = -1; k <= 1; ++k) {
      const double xs = x - k * Ps;
      const double w = pu_window(xs, Ps, cutoff_width);
      if (w > 0.0) acc += w * sample_at(p, v, xs);
    }
    return acc;
  };

  // DFT over one period sampled at the input grid points
  Eigen::VectorXd f0(N), f1(N);
  for (int i = 0; i < N; ++i) {
    const double x = -Ps / 2 + i * p.dx;
    f0(i) = windowed(p.samples_v0, x);
    f1(i) = windowed(p.samples_v1, x);
  }
  const int mmax_full = N / 2 - 1;
  auto dft_coeff = [&](const Eigen::VectorXd& f, int m) {
    std::complex<double> acc = 0.0;
    for (int i = 0; i < N; ++i) {
      const double x = -Ps / 2 + i * p.dx;
      acc += f(i) * std::exp(-kI * (2.0 * M_PI * m / Ps * x));
    }
    return acc / static_cast<double>(N);
  };

  // compute up to full Nyquist, then truncate at 1e-14 relative
  std::vector<std::complex<double>> c0(mmax_full + 1), c1(mmax_full + 1);
  double peak = 0.0;
  for (int m = 0; m <= mmax_full; ++m) {
    c0[m] = dft_coeff(f0, m);
    c1[m] = dft_coeff(f1, m);
    peak = std::max({peak, std::abs(c0[m]), std::abs(c1[m])});
  }
  int mt = 0;
  for (int m = 0; m <= mmax_full; ++m)
    if (std::abs(c0[m]) >= 1e-14 * peak || std::abs(c1[m]) >= 1e-14 * peak) mt = m;

  TrigPotential out(Ps, mt);
  for (int m = 0; m <= mt; ++m) {
    out.v0(m) = c0[m];
    out.v1(m) = c1[m];
    if (m > 0) {
      out.v0(-m) = std::conj(c0[m]);
      out.v1(-m) = std::conj(c1[m]);
    }
  }
  out.enforce_hermitian();
  return out;
}

WeylSymbol weyl_symbol_of(const TrigPotential& p, const XiGrid& grid) {
  if (std::abs(grid.L - p.period) > 1e-12 * p.period)
    throw GridMismatchError("weyl_symbol_of: grid period differs from potential period");
  WeylSymbol q(grid, p.mtheta);
  for (int m = -p.mtheta; m <= p.mtheta; ++m)
    for (int i = -grid.nxi; i <= grid.nxi; ++i)
      q.set(m, i, p.v0(m) + 2.0 * grid.xi(i) * p.v1(m));
  q.check_real_flag();
  return q;
}

TrigPotential random_trig_potential(std::uint64_t seed, double L, int modes, double scale,
                                    double v1_scale) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  TrigPotential p(L, modes);
  for (int m = 1; m <= modes; ++m) {
    const double damp = 1.0 / (1.0 + m * m);
    std::complex<double> c0(unif(rng), unif(rng));
    std::complex<double> c1(unif(rng), unif(rng));
    p.v0(m) = scale * damp * c0;
    p.v0(-m) = std::conj(p.v0(m));
    if (v1_scale > 0.0) {
      p.v1(m) = v1_scale * damp * c1;
      p.v1(-m) = std::conj(p.v1(m));
    }
  }
  return p;
}

Eigen::VectorXcd convolve_coeffs(const Eigen::VectorXcd& a, int ma, const Eigen::VectorXcd& b,
                                 int mb) {
  const int mc = ma + mb;
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(2 * mc + 1);
  for (int i = -ma; i <= ma; ++i)
    for (int j = -mb; j <= mb; ++j) c(i + j + mc) += a(i + ma) * b(j + mb);
  return c;
}

TrigPotential read_potential_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open potential file: " + path);
  std::string line;
  double L = -1.0;
  std::vector<std::tuple<int, double, double>> b0, b1;
  int block = -1;  // 0 -> V0, 1 -> V1
  int lineno = 0;
  int mmax = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = line.substr(0, line.find('#'));
    std::istringstream ss(s);
    std::string tok;
    if (!(ss >> tok)) continue;
    if (tok == "period") {
      if (!(ss >> L) || L <= 0)
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad period");
    } else if (tok == "V0") {
      block = 0;
    } else if (tok == "V1") {
      block = 1;
    } else {
      int m;
      double re, im;
      std::istringstream ss2(s);
      if (!(ss2 >> m >> re >> im) || block < 0)
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad coefficient line");
      (block == 0 ? b0 : b1).emplace_back(m, re, im);
      mmax = std::max(mmax, std::abs(m));
    }
  }
  if (L <= 0) throw std::runtime_error(path + ": missing `period` header");
  TrigPotential p(L, mmax);
  for (auto& [m, re, im] : b0) p.v0(m) = {re, im};
  for (auto& [m, re, im] : b1) p.v1(m) = {re, im};
  if (p.hermitian_defect() > 1e-10)
    throw std::runtime_error(path + ": coefficients violate Hermitian symmetry");
  return p;
}

void write_potential_file(const TrigPotential& p, const std::string& path) {
  std::ofstream out(path);
  char buf[128];
  std::snprintf(buf, sizeof buf, "period %.17g\n", p.period);
  out << buf;
  out << "V0\n";
  for (int m = -p.mtheta; m <= p.mtheta; ++m) {
    if (std::abs(p.v0(m)) == 0.0) continue;
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g\n", m, p.v0(m).real(), p.v0(m).imag());
    out << buf;
  }
  out << "V1\n";
  for (int m = -p.mtheta; m <= p.mtheta; ++m) {
    if (std::abs(p.v1(m)) == 0.0) continue;
    std::snprintf(buf, sizeof buf, "%d %.17g %.17g\n", m, p.v1(m).real(), p.v1(m).imag());
    out << buf;
  }
}

}  // namespace speconion
