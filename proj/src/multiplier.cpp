#include "speconion/multiplier.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace speconion {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

double FourierMultiplier::operator()(double xi) const {
  const double pos = xi / grid.dxi + grid.nxi;
  const int n = static_cast<int>(values.size());
  const int i1 = std::clamp(static_cast<int>(std::floor(pos)), 1, n - 3);
  const double t = pos - i1;
  // 4-point Lagrange through i1-1 .. i1+2
  const double w0 = -t * (t - 1) * (t - 2) / 6.0;
  const double w1 = (t + 1) * (t - 1) * (t - 2) / 2.0;
  const double w2 = -(t + 1) * t * (t - 2) / 2.0;
  const double w3 = (t + 1) * t * (t - 1) / 6.0;
  return w0 * values(i1 - 1) + w1 * values(i1) + w2 * values(i1 + 1) + w3 * values(i1 + 2);
}

FourierMultiplier zero_multiplier(const XiGrid& g, double lo, double hi) {
  return FourierMultiplier(g, lo, hi);
}

FourierMultiplier constant_multiplier(const XiGrid& g, double c, double lo, double hi) {
  FourierMultiplier m(g, lo, hi);
  m.values.setConstant(c);
  return m;
}

namespace {

// Int_{x1}^{x2} xi^p e^{i c xi} dxi, recursive integration by parts.
std::complex<double> osc_moment(int p, double c, double x1, double x2) {
  if (c == 0.0) return (std::pow(x2, p + 1) - std::pow(x1, p + 1)) / (p + 1.0);
  const std::complex<double> ic = kI * c;
  std::complex<double> term =
      (std::pow(x2, p) * std::exp(ic * x2) - std::pow(x1, p) * std::exp(ic * x1)) / ic;
  if (p == 0) return term;
  return term - (static_cast<double>(p) / ic) * osc_moment(p - 1, c, x1, x2);
}

}  // namespace

SpectralSample multiplier_kernel(const FourierMultiplier& q, double x, double y, double omega,
                                 int alpha, int beta) {
  const double hbar = q.grid.hbar;
  const double omega2 = omega * omega;
  if (!(omega > 0.0) || omega <= q.window_lo || omega >= q.window_hi)
    throw std::invalid_argument("multiplier_kernel: omega outside the authoritative window");

  auto f = [&](double xi) { return xi * xi + hbar * q(xi) - omega2; };

  // sign changes on the grid, endpoints by bisection on the interpolant
  const int n = q.grid.size();
  std::vector<double> ends;
  double fprev = f(q.grid.xi_col(0));
  if (fprev <= 0.0)
    throw std::invalid_argument("multiplier_kernel: sublevel set reaches the grid edge");
  for (int c = 1; c < n; ++c) {
    const double xi = q.grid.xi_col(c);
    const double fc = f(xi);
    if (fprev * fc < 0.0 || (fc == 0.0 && fprev != 0.0)) {
      double a = q.grid.xi_col(c - 1), b = xi, fa = fprev;
      for (int it = 0; it < 80 && b - a > 1e-15 * (1.0 + std::fabs(a)); ++it) {
        const double mid = 0.5 * (a + b);
        const double fm = f(mid);
        if (fa * fm <= 0.0)
          b = mid;
        else {
          a = mid;
          fa = fm;
        }
      }
      ends.push_back(0.5 * (a + b));
    }
    fprev = fc;
  }
  if (ends.size() % 2 != 0)
    throw std::runtime_error("multiplier_kernel: unresolved sublevel endpoint");

  const double cph = (x - y) / hbar;
  std::complex<double> acc = 0.0;
  for (size_t i = 0; i + 1 < ends.size(); i += 2)
    acc += osc_moment(alpha + beta, cph, ends[i], ends[i + 1]);
  acc *= std::pow(kI / hbar, alpha) * std::pow(-kI / hbar, beta) / (2.0 * M_PI * hbar);

  SpectralSample s;
  s.x = x;
  s.y = y;
  s.omega = omega;
  s.alpha = alpha;
  s.beta = beta;
  s.method = "multiplier";
  s.value = acc;
  return s;
}

namespace {

struct LsFit {
  Eigen::VectorXd coeffs;
  Eigen::VectorXd residuals;
  double cond = 0.0;
};

LsFit least_squares(const Eigen::MatrixXd& B, const Eigen::VectorXd& y) {
  // column-scaled SVD solve
  Eigen::VectorXd sc(B.cols());
  for (int j = 0; j < B.cols(); ++j) sc(j) = std::max(B.col(j).norm(), 1e-300);
  Eigen::MatrixXd Bs = B;
  for (int j = 0; j < B.cols(); ++j) Bs.col(j) /= sc(j);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Bs, Eigen::ComputeThinU | Eigen::ComputeThinV);
  LsFit out;
  out.cond = svd.singularValues()(0) / svd.singularValues()(svd.singularValues().size() - 1);
  if (out.cond > 1e10) throw std::runtime_error("expansion fit: ill-conditioned basis");
  Eigen::VectorXd cs = svd.solve(y);
  out.coeffs = cs.cwiseQuotient(sc);
  out.residuals = (B * out.coeffs - y).cwiseAbs();
  return out;
}

double log_slope(const std::vector<double>& xs, const std::vector<double>& ys, double floor) {
  // least-squares slope of log(y) vs log(x), ignoring points below floor
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (ys[i] <= floor) continue;
    const double lx = std::log(xs[i]), ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return 0.0;
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

ExpansionFit fit_expansion_diag(const std::vector<SpectralSample>& samples,
                                const std::vector<double>& rho, int N, bool force_odd_term) {
  if (samples.size() != rho.size() || static_cast<int>(rho.size()) < 2 * N)
    throw std::invalid_argument("fit_expansion_diag: need >= 2N ladder points");
  const int n = static_cast<int>(rho.size());
  const int cols = N + (force_odd_term ? 1 : 0);
  Eigen::MatrixXd B(n, cols);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = samples[i].value.real() / rho[i];
    for (int k = 0; k < N; ++k) B(i, k) = std::pow(rho[i], -2.0 * k);
    if (force_odd_term) B(i, N) = 1.0 / rho[i];
  }
  LsFit fit = least_squares(B, y);
  ExpansionFit out;
  out.rho = rho;
  out.coeffs_re = fit.coeffs;
  out.coeffs_im = Eigen::VectorXd::Zero(cols);
  out.residuals = fit.residuals;
  out.condition_number = fit.cond;
  std::vector<double> rs(fit.residuals.data(), fit.residuals.data() + n);
  out.residual_exponent = -log_slope(rho, rs, 1e-14);
  out.exponent_ok = out.residual_exponent >= N - 0.5;
  return out;
}

OffdiagFit fit_expansion_offdiag(const std::vector<SpectralSample>& samples,
                                 const std::vector<double>& rho, int N) {
  if (samples.size() != rho.size() || static_cast<int>(rho.size()) < 2 * N)
    throw std::invalid_argument("fit_expansion_offdiag: need >= 2N ladder points");
  const int n = static_cast<int>(rho.size());
  const double d = std::fabs(samples[0].x - samples[0].y);
  if (!(d > 0.0)) throw std::invalid_argument("fit_expansion_offdiag: need x != y");
  Eigen::MatrixXd B(n, 2 * N);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y(i) = samples[i].value.real();
    for (int j = 0; j < N; ++j) {
      const double r = std::pow(rho[i], -static_cast<double>(j));
      B(i, 2 * j) = std::cos(rho[i] * d) * r;
      B(i, 2 * j + 1) = std::sin(rho[i] * d) * r;
    }
  }
  LsFit fit = least_squares(B, y);
  OffdiagFit out;
  out.rho = rho;
  out.residuals = fit.residuals;
  out.condition_number = fit.cond;
  for (int j = 0; j < N; ++j) {
    const double c = fit.coeffs(2 * j), s = fit.coeffs(2 * j + 1);
    out.g_plus.push_back(0.5 * (c - kI * s));
    out.g_minus.push_back(0.5 * (c + kI * s));
  }
  return out;
}

FirstTermReport first_term_check(const TrigPotential& p, double omega,
                                 const std::vector<std::pair<double, double>>& points,
                                 const std::vector<double>& hbar_ladder, int Nk) {
  FirstTermReport rep;
  std::vector<double> hs, errs;
  for (double hbar : hbar_ladder) {
    double worst_off = 0.0;
    for (auto [x, y] : points) {
      if (x == y) {
        const SpectralSample s = bloch_spectral_kernel(p, x, x, omega, hbar, Nk);
        FirstTermReport::Row r;
        r.hbar = hbar;
        r.x = x;
        r.y = y;
        r.diag_scaled = std::fabs(s.value.real() - omega / (M_PI * hbar)) * std::pow(hbar, 0.75);
        rep.rows.push_back(r);
        rep.max_diag_scaled = std::max(rep.max_diag_scaled, r.diag_scaled);
      } else {
        const SpectralSample s = bloch_spectral_kernel(p, x, y, omega, hbar, Nk);
        const double d = std::fabs(x - y);
        FirstTermReport::Row r;
        r.hbar = hbar;
        r.x = x;
        r.y = y;
        r.offdiag_err = std::abs(s.value - std::sin(omega * d / hbar) / (M_PI * d));
        rep.rows.push_back(r);
        rep.max_offdiag_err = std::max(rep.max_offdiag_err, r.offdiag_err);
        worst_off = std::max(worst_off, r.offdiag_err);
      }
    }
    if (worst_off > 0.0) {
      hs.push_back(hbar);
      errs.push_back(worst_off);
    }
  }
  // err ~ hbar^s: positive slope means the off-diagonal error vanishes with hbar
  if (hs.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < hs.size(); ++i) {
      const double lx = std::log(hs[i]), ly = std::log(std::max(errs[i], 1e-300));
      sx += lx;
      sy += ly;
      sxx += lx * lx;
      sxy += lx * ly;
    }
    const double n = static_cast<double>(hs.size());
    rep.offdiag_trend_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  }
  return rep;
}

}  // namespace speconion
