#include "speconion/ode.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace speconion {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};

// Traceless 2x2 exponential in closed form.
Eigen::Matrix2d exp_traceless(const Eigen::Matrix2d& A) {
  const double mu2 = -(A(0, 0) * A(1, 1) - A(0, 1) * A(1, 0));  // -det
  Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  if (mu2 > 0) {
    const double mu = std::sqrt(mu2);
    return std::cosh(mu) * I + (std::sinh(mu) / mu) * A;
  }
  if (mu2 < 0) {
    const double mu = std::sqrt(-mu2);
    return std::cos(mu) * I + (std::sin(mu) / mu) * A;
  }
  return I + A;
}

Eigen::Matrix2d rotation(double angle) {
  Eigen::Matrix2d R;
  R << std::cos(angle), std::sin(angle), -std::sin(angle), std::cos(angle);
  return R;
}

void check_no_v1(const TrigPotential& p, const char* who) {
  if (p.coeffs_v1.cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument(std::string(who) + ": V1 must be removed first");
}

// One Magnus-4 step over [x, x+h] in the interaction picture. The system is
// (u, w)' = (om/hb) J (u,w) + C(x) (u,w),  C = (V0(x)/om) e21, J = [[0,1],[-1,0]].
// With B(s) = R(-s om/hb) C(x+s) R(s om/hb):
//   T_step = R(h om/hb) * exp( (h/2)(B1+B2) + (sqrt3/12) h^2 [B2, B1] ).
struct Stepper {
  const TrigPotential* p;
  double omega, hbar, rate;  // rate = omega/hbar

  Eigen::Matrix2d bmat(double x0, double s) const {
    const double v = evaluate(*p, x0 + s, Coeff::V0) / omega;
    const double a = rate * s;
    const double c = std::cos(a), sn = std::sin(a);
    // R(-s) * (v e21) * R(s) with R as in rotation()
    Eigen::Matrix2d B;
    B << -v * sn * c, -v * sn * sn, v * c * c, v * sn * c;
    return B;
  }

  Eigen::Matrix2d step(double x0, double h) const {
    static const double c1 = 0.5 - std::sqrt(3.0) / 6.0;
    static const double c2 = 0.5 + std::sqrt(3.0) / 6.0;
    const Eigen::Matrix2d B1 = bmat(x0, c1 * h);
    const Eigen::Matrix2d B2 = bmat(x0, c2 * h);
    const Eigen::Matrix2d Om =
        (h / 2.0) * (B1 + B2) + (std::sqrt(3.0) / 12.0) * h * h * (B2 * B1 - B1 * B2);
    return rotation(rate * h) * exp_traceless(Om);
  }
};

Eigen::Matrix2d propagate_matrix(const TrigPotential& p, double omega, double hbar, double x0,
                                 double x1, const StepRule& rule) {
  check_no_v1(p, "transfer");
  Stepper st{&p, omega, hbar, omega / hbar};
  const double len = x1 - x0;
  const double hmax = (hbar / omega) * std::min(1.0 / 16.0, rule.step_factor);
  const int n = std::max(1, static_cast<int>(std::ceil(std::fabs(len) / hmax)));
  const double h = len / n;
  Eigen::Matrix2d T = Eigen::Matrix2d::Identity();
  for (int i = 0; i < n; ++i) T = st.step(x0 + i * h, h) * T;
  return T;
}

}  // namespace

Eigen::Matrix2d transfer_matrix(const TrigPotential& p, double omega, double hbar, double x0,
                                double x1, const StepRule& rule) {
  return propagate_matrix(p, omega, hbar, x0, x1, rule);
}

TransferResult transfer_propagate(const TrigPotential& p, const EnergyState& s0, double omega,
                                  double hbar, double x0, double x1, const StepRule& rule) {
  check_no_v1(p, "transfer_propagate");
  TransferResult res;
  const double wavelength = 2.0 * M_PI * hbar / omega;
  const double mesh_step = std::max(wavelength / rule.mesh_per_period, std::fabs(x1 - x0) / 65536.0);
  const int nm = std::max(1, static_cast<int>(std::ceil(std::fabs(x1 - x0) / mesh_step)));

  Eigen::Vector2cd v;
  v << s0.u, s0.w;
  res.ed_max = 0;
  res.ed_min = 1e300;
  res.mesh_x.reserve(nm + 1);
  res.mesh_ed.reserve(nm + 1);
  Eigen::Matrix2d T = Eigen::Matrix2d::Identity();
  for (int i = 0; i <= nm; ++i) {
    const double x = x0 + (x1 - x0) * i / nm;
    if (i > 0) {
      const double xp = x0 + (x1 - x0) * (i - 1) / nm;
      T = propagate_matrix(p, omega, hbar, xp, x, rule) * T;
    }
    const Eigen::Vector2cd vi = T.cast<std::complex<double>>() * v;
    const double ed = std::norm(vi(0)) + std::norm(vi(1));
    res.mesh_x.push_back(x);
    res.mesh_ed.push_back(ed);
    res.ed_max = std::max(res.ed_max, ed);
    res.ed_min = std::min(res.ed_min, ed);
  }
  res.T = T;
  const Eigen::Vector2cd vf = T.cast<std::complex<double>>() * v;
  res.final_state.u = vf(0);
  res.final_state.w = vf(1);
  res.final_state.x = x1;
  return res;
}

double PhaseFunction::operator()(double x) const {
  double acc = mean * x;
  std::complex<double> c = 0.0;
  for (int m = -mtheta; m <= mtheta; ++m) {
    if (m == 0) continue;
    const double th = 2.0 * M_PI * m / period;
    // primitive of e^{i th x} minus its value at 0
    c += periodic(m + mtheta) * (std::exp(kI * (th * x)) - 1.0) / (kI * th);
  }
  return acc + c.real();
}

std::pair<TrigPotential, PhaseFunction> remove_first_order(const TrigPotential& p, double hbar) {
  TrigPotential out(p.period, 2 * p.mtheta);
  // V0' = V0 - hbar V1^2
  Eigen::VectorXcd v1sq = convolve_coeffs(p.coeffs_v1, p.mtheta, p.coeffs_v1, p.mtheta);
  for (int m = -2 * p.mtheta; m <= 2 * p.mtheta; ++m) {
    std::complex<double> c = -hbar * v1sq(m + 2 * p.mtheta);
    if (std::abs(m) <= p.mtheta) c += p.v0(m);
    out.v0(m) = c;
  }
  out.enforce_hermitian();
  PhaseFunction ph;
  ph.mean = p.v1(0).real();
  ph.periodic = p.coeffs_v1;
  ph.mtheta = p.mtheta;
  ph.period = p.period;
  return {out, ph};
}

GronwallReport gronwall_check(const TrigPotential& p, double omega, double hbar, double a, double b,
                              int trials, std::uint64_t seed, const StepRule& rule) {
  check_no_v1(p, "gronwall_check");
  const double v0sup = p.sup_v0();
  const double bound = std::exp(v0sup * std::fabs(b - a) / omega);
  const Eigen::Matrix2d T = propagate_matrix(p, omega, hbar, a, b, rule);
  GronwallReport rep;
  rep.trials = trials;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
  for (int t = 0; t < trials; ++t) {
    const double ph = unif(rng);
    Eigen::Vector2d v(std::cos(ph), std::sin(ph));
    const double ratio = (T * v).squaredNorm() / v.squaredNorm();
    rep.worst_ratio_over_bound = std::max(rep.worst_ratio_over_bound, ratio / bound);
    if (ratio > bound * (1.0 + 1e-9)) rep.all_pass = false;
  }
  return rep;
}

GlueResult glue_solutions(const EnergyState& left, const EnergyState& right, double omega,
                          double hbar) {
  // real solution u(x) = 2A cos(om x/hb) - 2B sin(om x/hb) near the junction:
  // A = u/2, B = -w/2 from the Cauchy data (u, w = hb u'/om).
  const std::complex<double> zl(left.u.real() / 2.0, -left.w.real() / 2.0);
  const std::complex<double> zr(right.u.real() / 2.0, -right.w.real() / 2.0);
  if (std::abs(zl) == 0.0 || std::abs(zr) == 0.0)
    throw std::invalid_argument("glue_solutions: a side carries no energy (undefined phase)");
  // |zl| zr e^{-i s om/hb} = |zr| zl
  const double period = 2.0 * M_PI * hbar / omega;
  double s = (hbar / omega) * (std::arg(zr) - std::arg(zl));
  s = std::fmod(s, period);
  if (s < 0) s += period;
  GlueResult res;
  res.s = s;
  res.matching_residual =
      std::abs(std::abs(zl) * zr * std::exp(-kI * (s * omega / hbar)) - std::abs(zr) * zl);
  return res;
}

EnergyRatioReport energy_ratio_experiment(const TrigPotential& p, const std::vector<double>& rho,
                                          double X, int trials, std::uint64_t seed,
                                          const StepRule& rule) {
  check_no_v1(p, "energy_ratio_experiment");
  EnergyRatioReport rep;
  rep.rho = rho;
  const double L = p.period;
  for (double r : rho) {
    const double hbar = 1.0 / r, omega = 1.0;
    // one period, meshed; whole interval by matrix powers (p is L-periodic)
    const int nper = std::max(1, static_cast<int>(std::floor(X / L)));
    const int mesh = rule.mesh_per_period * std::max(1, static_cast<int>(std::ceil(L / (2.0 * M_PI * hbar))));
    std::vector<Eigen::Matrix2d> within;  // transfer 0 -> mesh point
    within.reserve(mesh);
    Eigen::Matrix2d T = Eigen::Matrix2d::Identity();
    for (int i = 0; i < mesh; ++i) {
      const double xa = L * i / mesh, xb = L * (i + 1) / mesh;
      T = propagate_matrix(p, omega, hbar, xa, xb, rule) * T;
      within.push_back(T);
    }
    const Eigen::Matrix2d Tper = T;

    std::mt19937_64 rng(seed ^ static_cast<std::uint64_t>(r * 1000));
    std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
      const double ph = unif(rng);
      Eigen::Vector2d v(std::cos(ph), std::sin(ph));
      double edmax = v.squaredNorm(), edmin = edmax;
      Eigen::Vector2d vper = v;
      for (int k = 0; k < nper; ++k) {
        for (const auto& W : within) {
          const double ed = (W * vper).squaredNorm();
          edmax = std::max(edmax, ed);
          edmin = std::min(edmin, ed);
        }
        vper = Tper * vper;
      }
      worst = std::max(worst, edmax / edmin - 1.0);
    }
    rep.max_ratio_minus_1.push_back(worst);
  }
  // slope of log(ratio-1) vs log rho, excluding the measurement floor
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < rho.size(); ++i) {
    if (rep.max_ratio_minus_1[i] <= 1e-12) continue;
    const double lx = std::log(rho[i]), ly = std::log(rep.max_ratio_minus_1[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  rep.points_used = n;
  rep.slope = n >= 2 ? (n * sxy - sx * sy) / (n * sxx - sx * sx) : 0.0;
  return rep;
}

LyapunovEstimate lyapunov_estimate(const TrigPotential& p, double rho, double X,
                                   std::uint64_t seed, const StepRule& rule) {
  check_no_v1(p, "lyapunov_estimate");
  const double hbar = 1.0 / rho, omega = 1.0;
  const double L = p.period;
  const Eigen::Matrix2d Tper = propagate_matrix(p, omega, hbar, 0.0, L, rule);

  auto run = [&](double length) {
    const int nper = std::max(1, static_cast<int>(std::floor(length / L)));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
    double acc = 0.0;
    const int phases = 8;
    for (int t = 0; t < phases; ++t) {
      const double ph = unif(rng);
      Eigen::Vector2d v(std::cos(ph), std::sin(ph));
      double logsum = 0.0;
      for (int k = 0; k < nper; ++k) {
        v = Tper * v;
        const double nv = v.norm();
        logsum += std::log(nv);
        v /= nv;
      }
      acc += logsum / (nper * L);
    }
    return std::fabs(acc / phases);
  };

  LyapunovEstimate est;
  est.exponent = run(X);
  est.exponent_double_x = run(2.0 * X);
  return est;
}

}  // namespace speconion
