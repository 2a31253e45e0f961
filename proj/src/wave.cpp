#include "speconion/wave.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "speconion/bloch.hpp"
#include "speconion/bump.hpp"

namespace speconion {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

int TridiagOperator::index_of(double x) const {
  const int i = static_cast<int>(std::llround((x + X) / dx)) - 1;
  if (i < 0 || i >= n()) throw std::invalid_argument("TridiagOperator: point outside box");
  return i;
}

void TridiagOperator::apply(const Eigen::VectorXcd& v, Eigen::VectorXcd& out) const {
  const int N = n();
  out.resize(N);
  if (!has_v1) {
    out(0) = diag(0) * v(0) + off_re(0) * v(1);
    for (int i = 1; i + 1 < N; ++i)
      out(i) = off_re(i - 1) * v(i - 1) + diag(i) * v(i) + off_re(i) * v(i + 1);
    out(N - 1) = off_re(N - 2) * v(N - 2) + diag(N - 1) * v(N - 1);
    return;
  }
  auto up = [&](int i) { return std::complex<double>(off_re(i), off_im(i)); };
  out(0) = diag(0) * v(0) + up(0) * v(1);
  for (int i = 1; i + 1 < N; ++i)
    out(i) = std::conj(up(i - 1)) * v(i - 1) + diag(i) * v(i) + up(i) * v(i + 1);
  out(N - 1) = std::conj(up(N - 2)) * v(N - 2) + diag(N - 1) * v(N - 1);
}

std::pair<double, double> TridiagOperator::gershgorin() const {
  const int N = n();
  double lo = 1e300, hi = -1e300;
  for (int i = 0; i < N; ++i) {
    double r = 0;
    if (i > 0) r += std::hypot(off_re(i - 1), off_im(i - 1));
    if (i + 1 < N) r += std::hypot(off_re(i), off_im(i));
    lo = std::min(lo, diag(i) - r);
    hi = std::max(hi, diag(i) + r);
  }
  return {lo, hi};
}

TridiagOperator box_operator(const TrigPotential& p, double X, int n, double hbar,
                             const std::function<double(double)>& extra_v0) {
  TridiagOperator H;
  H.X = X;
  H.hbar = hbar;
  H.dx = 2.0 * X / (n + 1);
  H.diag.resize(n);
  H.off_re = Eigen::VectorXd::Constant(n - 1, -hbar * hbar / (H.dx * H.dx));
  H.off_im = Eigen::VectorXd::Zero(n - 1);
  double v1max = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = H.x_of(i);
    H.diag(i) = 2.0 * hbar * hbar / (H.dx * H.dx) + hbar * evaluate(p, x, Coeff::V0);
    if (extra_v0) H.diag(i) += extra_v0(x);
    v1max = std::max(v1max, std::fabs(evaluate(p, x, Coeff::V1)));
  }
  if (v1max > 0.0) {
    H.has_v1 = true;
    for (int i = 0; i + 1 < n; ++i) {
      const double w = evaluate(p, H.x_of(i), Coeff::V1) + evaluate(p, H.x_of(i + 1), Coeff::V1);
      H.off_im(i) = -hbar * hbar * w / (2.0 * H.dx);
    }
  }
  return H;
}

ChebPropagator make_cos_propagator(const TridiagOperator& H, double t, double hbar) {
  ChebPropagator prop;
  prop.H = &H;
  prop.t = t;
  prop.hbar = hbar;
  auto [lo, hi] = H.gershgorin();
  prop.lmin = lo - 1e-9 * std::max(1.0, std::fabs(lo));
  prop.lmax = hi + 1e-9 * std::max(1.0, std::fabs(hi));

  auto f = [&](double lam) { return std::cos(t * std::sqrt(std::max(lam, 0.0)) / hbar); };
  const double ph_range = std::fabs(t) * std::sqrt(std::max(prop.lmax, 0.0)) / hbar;
  int K = static_cast<int>(std::ceil(1.05 * ph_range)) + 48;
  for (int attempt = 0; attempt < 4; ++attempt) {
    const int Np = K + 1;
    // Chebyshev-Gauss sampling on the mapped interval
    Eigen::VectorXd fv(Np);
    const double c = 0.5 * (prop.lmax + prop.lmin), h = 0.5 * (prop.lmax - prop.lmin);
    for (int j = 0; j < Np; ++j) {
      const double th = M_PI * (j + 0.5) / Np;
      fv(j) = f(c + h * std::cos(th));
    }
    prop.coeffs.resize(Np);
    for (int k = 0; k < Np; ++k) {
      double acc = 0;
      for (int j = 0; j < Np; ++j) acc += fv(j) * std::cos(k * M_PI * (j + 0.5) / Np);
      prop.coeffs(k) = (k == 0 ? 1.0 : 2.0) * acc / Np;
    }
    // tail rule: last few coefficients below 1e-12 of the peak
    const double peak = prop.coeffs.cwiseAbs().maxCoeff();
    double tail = 0;
    for (int k = std::max(0, K - 4); k <= K; ++k) tail = std::max(tail, std::fabs(prop.coeffs(k)));
    if (tail < 1e-12 * peak) break;
    K = K + K / 2 + 64;
  }
  return prop;
}

Eigen::VectorXcd apply_cos_propagator(const ChebPropagator& prop, const Eigen::VectorXcd& u0) {
  // Clenshaw with the affinely rescaled operator
  const TridiagOperator& H = *prop.H;
  const double c = 0.5 * (prop.lmax + prop.lmin), h = 0.5 * (prop.lmax - prop.lmin);
  const int K = prop.degree();
  Eigen::VectorXcd bk1 = Eigen::VectorXcd::Zero(u0.size());
  Eigen::VectorXcd bk2 = Eigen::VectorXcd::Zero(u0.size());
  Eigen::VectorXcd tmp(u0.size());
  for (int k = K; k >= 1; --k) {
    H.apply(bk1, tmp);
    Eigen::VectorXcd bk = prop.coeffs(k) * u0 + (2.0 / h) * (tmp - c * bk1) - bk2;
    bk2.swap(bk1);
    bk1 = std::move(bk);
  }
  H.apply(bk1, tmp);
  return prop.coeffs(0) * u0 + (1.0 / h) * (tmp - c * bk1) - bk2;
}

Eigen::VectorXcd bump_state(const TridiagOperator& H, double center, double radius) {
  Eigen::VectorXcd u(H.n());
  for (int i = 0; i < H.n(); ++i) {
    const double r = (H.x_of(i) - center) / radius;
    u(i) = mollifier_bump(r) * std::exp(1.0);  // normalized so u(center) = 1
  }
  return u;
}

FiniteSpeedResult finite_speed_check(const TrigPotential& p, double hbar, double X, int n,
                                     double x0, double R0, double t, int margin_cells) {
  TridiagOperator H = box_operator(p, X, n, hbar);
  const double margin = margin_cells * H.dx;
  if (std::fabs(x0) + R0 + std::fabs(t) + margin + 2 * H.dx >= X)
    throw std::invalid_argument("finite_speed: box too small for the requested cone");
  Eigen::VectorXcd u0 = bump_state(H, x0, R0);
  ChebPropagator prop = make_cos_propagator(H, t, hbar);
  Eigen::VectorXcd ut = apply_cos_propagator(prop, u0);
  FiniteSpeedResult res;
  res.margin = margin;
  double leak2 = 0, norm2 = 0;
  for (int i = 0; i < H.n(); ++i) {
    norm2 += std::norm(u0(i)) * H.dx;
    if (std::fabs(H.x_of(i) - x0) > R0 + std::fabs(t) + margin) leak2 += std::norm(ut(i)) * H.dx;
  }
  res.leaked_mass = std::sqrt(leak2);
  res.u0_norm = std::sqrt(norm2);
  return res;
}

WaveCompareResult wave_compare(const TridiagOperator& H0, const TridiagOperator& H1, double hbar,
                               const Eigen::VectorXcd& u0, const std::vector<double>& ts) {
  if (H0.n() != H1.n()) throw std::invalid_argument("wave_compare: grids differ");
  WaveCompareResult res;
  res.ts = ts;
  // H1-hbar Sobolev norm of the data: ||u||^2 + ||hbar u'||^2
  double h1 = 0;
  for (int i = 0; i < H0.n(); ++i) {
    h1 += std::norm(u0(i)) * H0.dx;
    if (i + 1 < H0.n()) h1 += std::norm(hbar * (u0(i + 1) - u0(i)) / H0.dx) * H0.dx;
  }
  res.u0_h1_norm = std::sqrt(h1);
  for (double t : ts) {
    ChebPropagator p0 = make_cos_propagator(H0, t, hbar);
    ChebPropagator p1 = make_cos_propagator(H1, t, hbar);
    const Eigen::VectorXcd d = apply_cos_propagator(p0, u0) - apply_cos_propagator(p1, u0);
    res.norm_diff.push_back(std::sqrt(d.squaredNorm() * H0.dx));
  }
  // through-origin fit norm_diff = slope * t
  double stt = 0, sty = 0;
  for (size_t i = 0; i < ts.size(); ++i) {
    stt += ts[i] * ts[i];
    sty += ts[i] * res.norm_diff[i];
  }
  res.slope = stt > 0 ? sty / stt : 0.0;
  return res;
}

double SmoothingKernel::nu_hat(double tau) const { return plateau(tau, 1.0, 2.0); }

namespace {

// composite GL16 quadrature of f over [0, 2], panels chosen for the
// oscillation scale `osc` (radians across the interval)
template <typename F>
double integrate02(F&& f, double osc) {
  static const double gx[8] = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                               0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                               0.9445750230732326, 0.9894009349916499};
  static const double gw[8] = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                               0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                               0.0622535239386479, 0.0271524594117541};
  const int panels = std::max(4, static_cast<int>(std::ceil(std::fabs(osc) / 3.0)));
  double acc = 0;
  for (int p = 0; p < panels; ++p) {
    const double a = 2.0 * p / panels, b = 2.0 * (p + 1) / panels;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int g = 0; g < 8; ++g)
      acc += half * gw[g] * (f(mid + half * gx[g]) + f(mid - half * gx[g]));
  }
  return acc;
}

}  // namespace

double SmoothingKernel::nu(double s) const {
  return integrate02([&](double tau) { return nu_hat(tau) * std::cos(s * tau); }, 2.0 * s) / M_PI;
}

double SmoothingKernel::nu_cdf(double t) const {
  const double integral = integrate02(
      [&](double tau) { return nu_hat(tau) * std::sin(t * tau) / tau; }, 2.0 * t);
  return 0.5 + integral / M_PI;
}

std::vector<double> smoothed_projector(const TridiagOperator& H, const SmoothingKernel& nu,
                                       double x, double y, const std::vector<double>& omegas,
                                       SmoothedMode mode) {
  const int ix = H.index_of(x), iy = H.index_of(y);
  const double hbar = nu.hbar, T = nu.T;
  std::vector<double> out(omegas.size(), 0.0);

  if (mode == SmoothedMode::eigen) {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(H.n(), H.n());
    for (int i = 0; i < H.n(); ++i) {
      M(i, i) = H.diag(i);
      if (i + 1 < H.n()) {
        M(i, i + 1) = std::complex<double>(H.off_re(i), H.off_im(i));
        M(i + 1, i) = std::conj(M(i, i + 1));
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
    for (size_t w = 0; w < omegas.size(); ++w) {
      double acc = 0;
      for (int j = 0; j < H.n(); ++j) {
        const double lam = std::max(es.eigenvalues()(j), 0.0);
        const double weight = nu.scaled_cdf(omegas[w] - std::sqrt(lam));
        if (weight == 0.0) continue;
        acc += weight *
               (es.eigenvectors()(ix, j) * std::conj(es.eigenvectors()(iy, j))).real() / H.dx;
      }
      out[w] = acc;
    }
    return out;
  }

  // wave mode: midpoint quadrature in tau over (0, 2T], even integrand.
  // w_tau = cos(tau sqrt(H)/hbar) delta_y / dx advanced by the exact two-term
  // recursion w_{j+1} = 2 C w_j - w_{j-1}, C = cos(dtau sqrt(H)/hbar).
  auto [lo, hi] = H.gershgorin();
  const double omega_top = *std::max_element(omegas.begin(), omegas.end());
  double dtau = hbar / (8.0 * T * std::max(1.0, omega_top));
  dtau = std::min(dtau, M_PI * H.dx / 6.0);  // resolve the fastest spectral oscillation
  (void)lo;
  (void)hi;
  const int nsteps = static_cast<int>(std::ceil(2.0 * T / dtau));
  dtau = 2.0 * T / nsteps;

  Eigen::VectorXcd w_prev = Eigen::VectorXcd::Zero(H.n());
  w_prev(iy) = 1.0 / H.dx;  // grid delta at y
  // half-step start: w at tau = dtau/2 and 3dtau/2 via direct propagators
  ChebPropagator half = make_cos_propagator(H, 0.5 * dtau, hbar);
  ChebPropagator full = make_cos_propagator(H, dtau, hbar);
  Eigen::VectorXcd w_cur = apply_cos_propagator(half, w_prev);   // tau_0 = dtau/2
  Eigen::VectorXcd w_next;
  // recursion needs w at tau-dtau: w(-dtau/2) = w(dtau/2) by evenness
  Eigen::VectorXcd w_minus = w_cur;
  Eigen::VectorXcd tmp;
  for (int j = 0; j < nsteps; ++j) {
    const double tau = (j + 0.5) * dtau;
    const double weight = nu.nu_hat(tau / T) / tau;
    if (weight != 0.0) {
      for (size_t w = 0; w < omegas.size(); ++w)
        out[w] += dtau * weight * std::sin(tau * omegas[w] / hbar) * w_cur(ix).real();
    }
    // advance: w(tau + dtau) = 2 cos(dtau sqrt(H)/hbar) w(tau) - w(tau - dtau)
    w_next = 2.0 * apply_cos_propagator(full, w_cur) - w_minus;
    w_minus = w_cur;
    w_cur = std::move(w_next);
  }
  for (size_t w = 0; w < omegas.size(); ++w) out[w] *= 2.0 / M_PI;  // even in tau
  return out;
}

TauberianReport tauberian_bounds_check(const std::vector<double>& w, double omega0, double dw,
                                       const SmoothingKernel& nu, double win_lo, double win_hi) {
  const int n = static_cast<int>(w.size());
  const double sigma = nu.T / nu.hbar;
  auto wval = [&](int i) { return w[std::clamp(i, 0, n - 1)]; };
  auto widx = [&](double om) { return static_cast<int>(std::llround((om - omega0) / dw)); };

  // kernel table: nu_{h,T}(j*dw), truncated where it is negligible
  const double s_max = 60.0 / sigma;
  const int ks = std::max(2, static_cast<int>(std::ceil(s_max / dw)));
  std::vector<double> ker(2 * ks + 1);
  for (int j = -ks; j <= ks; ++j) ker[j + ks] = nu.scaled(j * dw);

  TauberianReport rep;
  // measured Lipschitz modulus L_h: |w(t-s)-w(t)| <= L_h <sigma s>
  const double eps0 = 0.2;
  for (int i = widx(win_lo); i <= widx(win_hi); ++i) {
    for (int j = 1; j <= static_cast<int>(eps0 / dw); ++j) {
      const double num = std::fabs(wval(i - j) - wval(i));
      const double den = std::hypot(1.0, sigma * j * dw);
      rep.lipschitz_lh = std::max(rep.lipschitz_lh, num / den);
    }
  }

  // convolution on an extended range so the transfer scan stays inside it
  const double a_h = 1.0 / sigma;
  const int ka = std::max(1, static_cast<int>(std::llround(a_h / dw)));
  const int clo = widx(win_lo) - 2 * ka - 2, chi = widx(win_hi) + 2 * ka + 2;
  std::vector<double> conv(n, 0.0);
  for (int i = std::max(0, clo); i <= std::min(n - 1, chi); ++i) {
    double acc = 0;
    for (int j = -ks; j <= ks; ++j) acc += wval(i - j) * ker[j + ks] * dw;
    conv[i] = acc;
  }
  for (int i = widx(win_lo); i <= widx(win_hi); ++i)
    rep.conv_sup_error = std::max(rep.conv_sup_error, std::fabs(conv[i] - wval(i)));
  rep.C_conv = rep.lipschitz_lh > 0 ? rep.conv_sup_error / rep.lipschitz_lh : 0.0;

  auto cval = [&](int i) { return conv[std::clamp(i, 0, n - 1)]; };
  for (int i = widx(win_lo); i <= widx(win_hi); ++i) {
    double var = 0;
    for (int j = i - ka; j < i + ka; ++j) var += std::fabs(cval(j + 1) - cval(j));
    rep.M_h = std::max(rep.M_h, var / a_h);
    // phi_a-mollified |d(mu - alpha)|: local increments compared at scale a_h
    const double dmu = wval(i + ka) - wval(i - ka);
    const double dal = cval(i + ka) - cval(i - ka);
    rep.B_h = std::max(rep.B_h, std::fabs(dmu - dal) / (2.0 * a_h));
  }
  const double denom_base = a_h * (rep.M_h + rep.B_h);
  for (int i = widx(win_lo); i <= widx(win_hi); ++i) {
    for (int j = 1; j <= static_cast<int>(0.25 / dw); ++j) {
      const double num = std::fabs(wval(i) - wval(i - j));
      const double den = denom_base * std::hypot(1.0, j * dw / a_h);
      if (den > 0) rep.C_transfer = std::max(rep.C_transfer, num / den);
    }
  }
  return rep;
}

LdosCompareReport ldos_compare_experiment(const TrigPotential& p, const LdosCompareConfig& cfg) {
  LdosCompareReport rep;
  const double hbar = cfg.hbar;
  const double omega_top = *std::max_element(cfg.omegas.begin(), cfg.omegas.end());

  auto base_v0 = [&](double x) {
    double v = evaluate(p, x, Coeff::V0);
    if (cfg.v0_tail) v += cfg.v0_tail(x);
    return v;
  };

  if (cfg.kind == ModKind::none) {
    for (double T : cfg.Ts)
      for (double om : cfg.omegas) {
        const SpectralSample e = bloch_spectral_kernel(p, cfg.x, cfg.x, om, hbar, cfg.Nk);
        LdosCompareRow r;
        r.T = T;
        r.omega = om;
        r.e0 = r.e1 = e.value.real();
        r.diff = 0;
        r.bound_unit = hbar / T;
        rep.rows.push_back(r);
      }
    rep.fitted_C = 0;
    return rep;
  }

  if (cfg.kind == ModKind::quadratic_well) {
    rep.delta = cfg.delta_scale * hbar * hbar;
    // reference: exact Bloch values of the periodic base (no tail allowed)
    std::vector<double> e0(cfg.omegas.size());
    for (size_t i = 0; i < cfg.omegas.size(); ++i)
      e0[i] = bloch_spectral_kernel(p, cfg.x, cfg.x, cfg.omegas[i], hbar, cfg.Nk).value.real();
    for (double T : cfg.Ts) {
      const double R = 2.0 * T + cfg.R0 + 2.0;
      BoxKernelOptions opt;
      opt.extra_v0 = [&, R](double x) { return hbar * rep.delta * x * x / (R * R); };
      BoxDiagonalization d = box_diagonalize(p, cfg.X0, omega_top, hbar, {cfg.x}, opt);
      for (size_t i = 0; i < cfg.omegas.size(); ++i) {
        LdosCompareRow r;
        r.T = T;
        r.omega = cfg.omegas[i];
        r.e0 = e0[i];
        r.e1 = box_kernel_value(d, 0, 0, cfg.omegas[i]).real();
        r.diff = std::fabs(r.e0 - r.e1);
        r.bound_unit = hbar / T + rep.delta * T;
        rep.rows.push_back(r);
      }
    }
  } else if (cfg.kind == ModKind::dirichlet_box) {
    rep.delta = 0;
    std::vector<double> e0(cfg.omegas.size());
    for (size_t i = 0; i < cfg.omegas.size(); ++i)
      e0[i] = bloch_spectral_kernel(p, cfg.x, cfg.x, cfg.omegas[i], hbar, cfg.Nk).value.real();
    for (double T : cfg.Ts) {
      const double X = 2.0 * T + cfg.R0 + 2.0;
      BoxDiagonalization d = box_diagonalize(p, X, omega_top, hbar, {cfg.x});
      for (size_t i = 0; i < cfg.omegas.size(); ++i) {
        LdosCompareRow r;
        r.T = T;
        r.omega = cfg.omegas[i];
        r.e0 = e0[i];
        r.e1 = box_kernel_value(d, 0, 0, cfg.omegas[i]).real();
        r.diff = std::fabs(r.e0 - r.e1);
        r.bound_unit = hbar / T;
        rep.rows.push_back(r);
      }
    }
  } else {  // periodize_mod
    rep.delta = 0;
    // sampling extent must cover the widest periodization window
    double Tmax = 0;
    for (double T : cfg.Ts) Tmax = std::max(Tmax, T);
    const double Pmax = 4.0 * (2.0 * Tmax + cfg.R0 + 2.0);
    const double Xs = Pmax / 2.0 + Pmax / 8.0 + 2.0;
    SampledPotential base = sample_potential(base_v0, [](double) { return 0.0; }, Xs,
                                             static_cast<int>(40 * Xs));
    // reference: large box on the true (tail-carrying) potential
    const int nbox =
        static_cast<int>(std::ceil(20.0 * cfg.X0 * omega_top / (M_PI * hbar)));
    TrigPotential dummy(2.0 * M_PI, 0);
    BoxKernelOptions opt0;
    opt0.n = nbox;
    opt0.extra_v0 = [&, hbar](double x) { return hbar * base_v0(x); };
    BoxDiagonalization d0 = box_diagonalize(dummy, cfg.X0, omega_top, hbar, {cfg.x}, opt0);
    for (double T : cfg.Ts) {
      const double R = 2.0 * T + cfg.R0 + 2.0;
      const double P = 4.0 * R;
      TrigPotential per = periodize(base, P, P / 8.0);
      const int M = default_bloch_cutoff(per, omega_top, hbar);
      for (double om : cfg.omegas) {
        LdosCompareRow r;
        r.T = T;
        r.omega = om;
        r.e0 = box_kernel_value(d0, 0, 0, om).real();
        r.e1 = bloch_spectral_kernel(per, cfg.x, cfg.x, om, hbar, cfg.Nk, M).value.real();
        r.diff = std::fabs(r.e0 - r.e1);
        r.bound_unit = hbar / T;
        rep.rows.push_back(r);
      }
    }
  }
  for (const auto& r : rep.rows) rep.fitted_C = std::max(rep.fitted_C, r.diff / r.bound_unit);
  return rep;
}

}  // namespace speconion
