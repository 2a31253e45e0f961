#include "speconion/bloch.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "speconion/gauge.hpp"
#include "speconion/jacobi.hpp"
#include "speconion/multiplier.hpp"
#include "speconion/parallel.hpp"

namespace speconion {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};

// 16-point Gauss-Legendre nodes/weights on [-1, 1]
const double kGLx[16] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
const double kGLw[16] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
}  // namespace

BlochMatrix bloch_matrix(const TrigPotential& p, double k, int M, double hbar) {
  if (M < p.mtheta + 8) throw std::invalid_argument("bloch_matrix: cutoff too small");
  BlochMatrix bm;
  bm.k = k;
  bm.hbar = hbar;
  bm.M = M;
  const int n = 2 * M + 1;
  bm.H = Eigen::MatrixXcd::Zero(n, n);
  for (int mp = -M; mp <= M; ++mp) {
    for (int m = -M; m <= M; ++m) {
      const int d = mp - m;
      std::complex<double> v = 0.0;
      if (std::abs(d) <= p.mtheta)
        v = hbar * (p.v0(d) + hbar * (2.0 * k + p.theta(m) + p.theta(mp)) * p.v1(d));
      if (mp == m) {
        const double km = k + p.theta(m);
        v += hbar * hbar * km * km;
      }
      bm.H(mp + M, m + M) = v;
    }
  }
  return bm;
}

namespace {

// Value of one mode row at an off-lattice position pos (in grid steps).
// On-lattice positions are exact; otherwise an 8-point Lagrange stencil,
// exact for rows polynomial in xi up to degree 7.
std::complex<double> row_value(const WeylSymbol& a, int mode, double pos) {
  const double fl = std::floor(pos);
  const int i0 = static_cast<int>(fl);
  const double w = pos - fl;
  if (w == 0.0) {
    if (i0 < -a.grid.nxi || i0 > a.grid.nxi)
      throw SupportMarginError("realize_symbol_matrix: xi outside grid");
    return a.at(mode, i0);
  }
  const int lo = i0 - 3;
  if (lo < -a.grid.nxi || lo + 7 > a.grid.nxi)
    throw SupportMarginError("realize_symbol_matrix: xi outside grid");
  std::complex<double> acc = 0.0;
  for (int j = 0; j < 8; ++j) {
    double lj = 1.0;
    const double t = pos - lo;  // in (3, 4)
    for (int l = 0; l < 8; ++l)
      if (l != j) lj *= (t - l) / (j - l);
    acc += lj * a.at(mode, lo + j);
  }
  return acc;
}

}  // namespace

Eigen::MatrixXcd realize_symbol_matrix(const WeylSymbol& a, double k, int M) {
  const int n = 2 * M + 1;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
  const double hbar = a.grid.hbar;
  // xi = hbar*(k + (theta_m + theta_mp)/2) sits hbar*k/dxi + (m + mp) grid
  // steps from the center; the k-offset k*L/pi is common to all entries.
  const double koff = hbar * k / a.grid.dxi;
  for (int mp = -M; mp <= M; ++mp) {
    for (int m = -M; m <= M; ++m) {
      const int d = mp - m;
      std::complex<double> v = 0.0;
      if (std::abs(d) <= a.mtheta && a.row_nonzero(d)) v = row_value(a, d, koff + m + mp);
      if (mp == m && a.kinetic_weight != 0.0) {
        const double xi = hbar * (k + a.grid.theta(m));
        v += a.kinetic_weight * xi * xi;
      }
      A(mp + M, m + M) = v;
    }
  }
  return A;
}

int default_bloch_cutoff(const TrigPotential& p, double omega, double hbar, double margin) {
  const double need = (omega + margin) * p.period / (2.0 * M_PI * hbar);
  return std::max<int>(static_cast<int>(std::ceil(need)) + 8, p.mtheta + 8);
}

namespace {

struct BandSolve {
  Eigen::VectorXd lambda;
  Eigen::MatrixXcd vectors;  // columns
};

BandSolve solve_bands(const TrigPotential& p, double k, int M, double hbar, bool vectors) {
  const BlochMatrix bm = bloch_matrix(p, k, M, hbar);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      bm.H, vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  BandSolve out;
  out.lambda = es.eigenvalues();
  if (vectors) out.vectors = es.eigenvectors();
  return out;
}

// Sum over filled bands of d^alpha u(x) * conj(d^beta u(y)) at one k.
std::complex<double> filled_band_sum(const TrigPotential& p, double k, int M, double hbar,
                                     double omega2, double x, double y, int alpha, int beta) {
  const BandSolve bs = solve_bands(p, k, M, hbar, true);
  const int n = 2 * M + 1;
  Eigen::VectorXcd ex(n), ey(n);
  for (int m = -M; m <= M; ++m) {
    const double km = k + p.theta(m);
    const std::complex<double> fx = std::pow(kI * km, alpha);
    const std::complex<double> fy = std::pow(-kI * km, beta);
    ex(m + M) = fx * std::exp(kI * (km * x));
    ey(m + M) = fy * std::exp(-kI * (km * y));
  }
  // u(x) = sum_m v_m e^{i(k+theta_m)x}; the y-side carries conj(v_m) and the
  // (-i km)^beta derivative factor already built into ey.
  std::complex<double> acc = 0.0;
  for (int j = 0; j < n; ++j) {
    if (bs.lambda(j) > omega2) break;
    std::complex<double> vx = 0.0, vy = 0.0;
    for (int m = 0; m < n; ++m) {
      vx += bs.vectors(m, j) * ex(m);
      vy += std::conj(bs.vectors(m, j)) * ey(m);
    }
    acc += vx * vy;
  }
  return acc;
}

}  // namespace

namespace {

// Root of f on [a, b] with f(a)*f(b) <= 0, bisection/secant hybrid.
template <typename F>
double hybrid_root(F&& f, double a, double b, double fa, double fb, double tol) {
  for (int it = 0; it < 200 && b - a > tol; ++it) {
    double mid;
    if (fb != fa) {
      mid = a - fa * (b - a) / (fb - fa);  // secant guess
      const double lo = a + 0.1 * (b - a), hi = b - 0.1 * (b - a);
      if (!(mid > lo && mid < hi) || (it % 3 == 2)) mid = 0.5 * (a + b);
    } else {
      mid = 0.5 * (a + b);
    }
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if (fa * fm < 0.0) {
      b = mid;
      fb = fm;
    } else {
      a = mid;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

// All k in (a, b) with band(k) = level, given samples on a mesh; splits cells
// that contain a local extremum straddling the level (double crossings).
template <typename F>
void band_level_cuts(F&& band, const std::vector<double>& kc, const std::vector<double>& vals,
                     double level, double ktol, std::vector<double>& cuts) {
  const int nc = static_cast<int>(kc.size());
  auto g = [&](double k) { return band(k) - level; };
  for (int i = 0; i + 1 < nc; ++i) {
    double fa = vals[i] - level, fb = vals[i + 1] - level;
    if (fa == 0.0) cuts.push_back(kc[i]);
    if (fa * fb < 0.0) {
      cuts.push_back(hybrid_root(g, kc[i], kc[i + 1], fa, fb, ktol));
      continue;
    }
    // same sign: check for an interior extremum poking through the level
    const bool candidate =
        (i > 0 && i + 2 < nc) &&
        ((vals[i + 1] - vals[i]) * (vals[i + 2] - vals[i + 1]) < 0.0 ||
         (vals[i] - vals[i - 1]) * (vals[i + 1] - vals[i]) < 0.0);
    if (!candidate) continue;
    // golden-section extremum of the band on [kc[i-1], kc[i+2]]
    const bool want_max = fa < 0.0;  // extremum must cross upward if below
    double a = kc[i - 1], b = kc[i + 2];
    auto h = [&](double k) { return want_max ? -g(k) : g(k); };
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = h(c), fd = h(d);
    for (int it = 0; it < 60 && b - a > ktol; ++it) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = h(c);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + gr * (b - a);
        fd = h(d);
      }
    }
    const double kext = 0.5 * (a + b);
    const double fext = g(kext);
    if (fa * fext < 0.0) {
      cuts.push_back(hybrid_root(g, kc[i], kext, fa, fext, ktol));
      cuts.push_back(hybrid_root(g, kext, kc[i + 2], fext, vals[i + 2] - level, ktol));
    }
  }
}

}  // namespace

SpectralSample bloch_spectral_kernel(const TrigPotential& p, double x, double y, double omega,
                                     double hbar, int Nk, int M, int alpha, int beta) {
  if (M < 0) M = default_bloch_cutoff(p, omega, hbar);
  const double omega2 = omega * omega;
  const double kmax = 2.0 * M_PI / p.period;
  const double ktol = 1e-12 * kmax;

  // mesh of eigenvalues to localize band crossings lambda_n(k) = omega^2
  const int nc = std::max(17, std::min(129, Nk / 4 + 1));
  std::vector<Eigen::VectorXd> coarse(nc);
  std::vector<double> kc(nc);
  for (int i = 0; i < nc; ++i) kc[i] = kmax * i / (nc - 1);
  parallel_for(nc, [&](int i) { coarse[i] = solve_bands(p, kc[i], M, hbar, false).lambda; });
  const int nb = static_cast<int>(coarse[0].size());

  std::vector<double> cuts;
  for (int n = 0; n < nb; ++n) {
    double lo = 1e300, hi = -1e300;
    for (int i = 0; i < nc; ++i) {
      lo = std::min(lo, coarse[i](n));
      hi = std::max(hi, coarse[i](n));
    }
    if (omega2 < lo - 1e-7 || omega2 > hi + 1e-7) continue;  // band never near omega^2
    auto band = [&](double k) { return solve_bands(p, k, M, hbar, false).lambda(n); };
    std::vector<double> vals(nc);
    for (int i = 0; i < nc; ++i) vals[i] = coarse[i](n);
    band_level_cuts(band, kc, vals, omega2, ktol, cuts);
  }
  cuts.push_back(0.0);
  cuts.push_back(kmax);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double a, double b) { return std::fabs(a - b) < 1e-13 * kmax; }),
             cuts.end());

  // piecewise Gauss-Legendre between crossings
  std::vector<std::pair<double, double>> nodes;  // (k, weight)
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a < 1e-13 * kmax) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / kmax * Nk / 16.0)));
    for (int pl = 0; pl < panels; ++pl) {
      const double pa = a + (b - a) * pl / panels;
      const double pb = a + (b - a) * (pl + 1) / panels;
      const double half = 0.5 * (pb - pa), mid = 0.5 * (pa + pb);
      for (int g = 0; g < 16; ++g) nodes.emplace_back(mid + half * kGLx[g], half * kGLw[g]);
    }
  }
  std::vector<std::complex<double>> vals(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), [&](int i) {
    vals[i] = filled_band_sum(p, nodes[i].first, M, hbar, omega2, x, y, alpha, beta);
  });
  std::complex<double> acc = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) acc += nodes[i].second * vals[i];

  SpectralSample s;
  s.x = x;
  s.y = y;
  s.omega = omega;
  s.alpha = alpha;
  s.beta = beta;
  s.method = "bloch";
  s.value = acc / (2.0 * M_PI);
  return s;
}

SpectralSample nonsemiclassical_kernel(const TrigPotential& p, double x, double y, double rho,
                                       int Nk, int M, int alpha, int beta) {
  const double hbar = 1.0 / rho;
  TrigPotential ps = p;
  ps.coeffs_v0 *= hbar;  // (V0, V1) -> (hbar V0, V1): hbar^2 H = H_sem
  SpectralSample s = bloch_spectral_kernel(ps, x, y, 1.0, hbar, Nk, M, alpha, beta);
  s.method = "bloch";
  return s;
}

namespace {

struct BoxMatrix {
  double dx;
  int n;
  Eigen::VectorXd diag;
  Eigen::VectorXd off_real;   // symmetric part (Laplacian)
  Eigen::VectorXd off_imag;   // antisymmetric first-order part (times -i)
  bool has_v1 = false;
};

BoxMatrix assemble_box(const TrigPotential& p, double X, double hbar, int n,
                       const std::function<double(double)>& extra_v0) {
  BoxMatrix bm;
  bm.n = n;
  bm.dx = 2.0 * X / (n + 1);
  bm.diag.resize(n);
  bm.off_real = Eigen::VectorXd::Constant(n - 1, -hbar * hbar / (bm.dx * bm.dx));
  bm.off_imag = Eigen::VectorXd::Zero(n - 1);
  double v1max = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = -X + (i + 1) * bm.dx;
    bm.diag(i) = 2.0 * hbar * hbar / (bm.dx * bm.dx) + hbar * evaluate(p, x, Coeff::V0);
    if (extra_v0) bm.diag(i) += extra_v0(x);
    v1max = std::max(v1max, std::fabs(evaluate(p, x, Coeff::V1)));
  }
  if (v1max > 0.0) {
    bm.has_v1 = true;
    for (int i = 0; i + 1 < n; ++i) {
      const double xa = -X + (i + 1) * bm.dx, xb = xa + bm.dx;
      const double w = evaluate(p, xa, Coeff::V1) + evaluate(p, xb, Coeff::V1);
      // hbar * (V1 hbar D + hbar D V1), centrally discretized and symmetrized:
      // coupling (i -> i+1) = -i hbar^2 (V1(i)+V1(i+1)) / (2 dx)
      bm.off_imag(i) = -hbar * hbar * w / (2.0 * bm.dx);
    }
  }
  return bm;
}

}  // namespace

BoxDiagonalization box_diagonalize(const TrigPotential& p, double X, double omega_max, double hbar,
                                   const std::vector<double>& points,
                                   const BoxKernelOptions& opt) {
  int n = opt.n;
  if (n <= 0) n = static_cast<int>(std::ceil(opt.resolution * X * omega_max / (M_PI * hbar)));
  BoxMatrix bm = assemble_box(p, X, hbar, n, opt.extra_v0);

  BoxDiagonalization d;
  d.X = X;
  d.dx = bm.dx;
  d.hbar = hbar;
  for (double pt : points) {
    const int idx = static_cast<int>(std::llround((pt + X) / bm.dx)) - 1;
    if (idx < 0 || idx >= n) throw std::invalid_argument("box: point outside box");
    d.point_index.push_back(idx);
    d.point_x.push_back(-X + (idx + 1) * bm.dx);
  }

  const double inv_sqrt_dx = 1.0 / std::sqrt(bm.dx);
  if (!bm.has_v1) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(bm.diag, bm.off_real);
    d.lambda = es.eigenvalues();
    d.phi_cols.resize(n, points.size());
    for (size_t j = 0; j < points.size(); ++j)
      d.phi_cols.col(j) = es.eigenvectors().row(d.point_index[j]).transpose().cast<std::complex<double>>() *
                          inv_sqrt_dx;
  } else {
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
    for (int i = 0; i < n; ++i) H(i, i) = bm.diag(i);
    for (int i = 0; i + 1 < n; ++i) {
      H(i, i + 1) = bm.off_real(i) + kI * bm.off_imag(i);
      H(i + 1, i) = std::conj(H(i, i + 1));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    d.lambda = es.eigenvalues();
    d.phi_cols.resize(n, points.size());
    for (size_t j = 0; j < points.size(); ++j)
      d.phi_cols.col(j) = es.eigenvectors().row(d.point_index[j]).transpose() * inv_sqrt_dx;
  }
  return d;
}

std::complex<double> box_kernel_value(const BoxDiagonalization& d, int ip, int jp, double omega) {
  const double omega2 = omega * omega;
  std::complex<double> acc = 0.0;
  for (int j = 0; j < d.lambda.size(); ++j) {
    if (d.lambda(j) > omega2) break;
    acc += d.phi_cols(j, ip) * std::conj(d.phi_cols(j, jp));
  }
  return acc;
}

SpectralSample box_spectral_kernel(const TrigPotential& p, double X, double omega, double hbar,
                                   double x, double y, const BoxKernelOptions& opt) {
  std::vector<double> pts = {x, y};
  BoxDiagonalization d = box_diagonalize(p, X, omega, hbar, pts, opt);
  SpectralSample s;
  s.x = d.point_x[0];
  s.y = d.point_x[1];
  s.omega = omega;
  s.method = "box";
  s.value = box_kernel_value(d, 0, 1, omega);
  return s;
}

namespace {

// eigenvalues at one k in extended precision (values only)
std::vector<long double> bands_longdouble(const TrigPotential& p, double k, int M, double hbar) {
  const int n = 2 * M + 1;
  std::vector<std::complex<long double>> a(n * n, std::complex<long double>(0, 0));
  for (int mp = -M; mp <= M; ++mp) {
    for (int m = -M; m <= M; ++m) {
      const int dd = mp - m;
      std::complex<long double> v = 0;
      if (std::abs(dd) <= p.mtheta) {
        const std::complex<long double> c0(p.v0(dd).real(), p.v0(dd).imag());
        const std::complex<long double> c1(p.v1(dd).real(), p.v1(dd).imag());
        const long double hb = hbar;
        v = hb * (c0 + hb * (2.0L * (long double)k + (long double)p.theta(m) +
                             (long double)p.theta(mp)) *
                           c1);
      }
      if (mp == m) {
        const long double km = (long double)k + (long double)p.theta(m);
        v += (long double)hbar * (long double)hbar * km * km;
      }
      a[(mp + M) * n + (m + M)] = v;
    }
  }
  return jacobi_eigenvalues<long double>(std::move(a), n);
}

}  // namespace

std::vector<BandGap> band_gaps(const TrigPotential& p, double hbar, double lambda_min,
                               double lambda_max, int M, int kmesh) {
  if (M < 0) M = default_bloch_cutoff(p, std::sqrt(std::max(1.0, lambda_max)), hbar);
  const double kedge = M_PI / p.period;  // half Brillouin zone (time-reversal symmetry)

  // coarse scan for band extrema locations
  std::vector<Eigen::VectorXd> mesh(kmesh);
  for (int i = 0; i < kmesh; ++i)
    mesh[i] = solve_bands(p, kedge * i / (kmesh - 1), M, hbar, false).lambda;
  const int nb = static_cast<int>(mesh[0].size());

  auto refine_extremum = [&](int band, bool want_max) {
    int best = 0;
    for (int i = 1; i < kmesh; ++i) {
      const bool better = want_max ? mesh[i](band) > mesh[best](band)
                                   : mesh[i](band) < mesh[best](band);
      if (better) best = i;
    }
    double a = kedge * std::max(0, best - 1) / (kmesh - 1);
    double b = kedge * std::min(kmesh - 1, best + 1) / (kmesh - 1);
    auto f = [&](double k) {
      const double v = solve_bands(p, k, M, hbar, false).lambda(band);
      return want_max ? -v : v;
    };
    // golden-section; extremum in k to ~1e-8 is plenty (lambda error is 2nd order)
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a), dpt = a + gr * (b - a);
    double fc = f(c), fd = f(dpt);
    for (int it = 0; it < 48; ++it) {
      if (fc < fd) {
        b = dpt;
        dpt = c;
        fd = fc;
        c = b - gr * (b - a);
        fc = f(c);
      } else {
        a = c;
        c = dpt;
        fc = fd;
        dpt = a + gr * (b - a);
        fd = f(dpt);
      }
    }
    const double kstar = 0.5 * (a + b);
    // polish the eigenvalue itself in extended precision
    const std::vector<long double> ev = bands_longdouble(p, kstar, M, hbar);
    return static_cast<double>(ev[band]);
  };

  std::vector<BandGap> gaps;
  for (int nbd = 0; nbd + 1 < nb; ++nbd) {
    // quick reject on the coarse mesh
    double top = -1e300, bot = 1e300;
    for (int i = 0; i < kmesh; ++i) {
      top = std::max(top, mesh[i](nbd));
      bot = std::min(bot, mesh[i](nbd + 1));
    }
    if (top < lambda_min || top > lambda_max) continue;
    const double top_ref = refine_extremum(nbd, true);
    const double bot_ref = refine_extremum(nbd + 1, false);
    const double width = bot_ref - top_ref;
    BandGap g;
    g.index = nbd + 1;
    g.center = 0.5 * (top_ref + bot_ref);
    g.width = std::max(0.0, width);
    gaps.push_back(g);
  }
  return gaps;
}

SpectralSample conjugated_projector_kernel(const GaugeLog& log, const FourierMultiplier& mult,
                                           const TrigPotential& p, double x, double y, double omega,
                                           double hbar, int Nk, int M) {
  if (M < 0) {
    // realize() needs the symbol grid to cover xi = hbar*(k + (m+m')/2 steps)
    const double xi_cap = mult.grid.xi_max() - 4 * mult.grid.dxi;
    M = static_cast<int>(std::floor(xi_cap * p.period / (2.0 * M_PI * hbar))) - 2;
    if (M < 8) throw std::invalid_argument("conjugated_projector_kernel: grid too small");
  }
  const double omega2 = omega * omega;
  const double kmax = 2.0 * M_PI / p.period;
  const int n = 2 * M + 1;

  auto dvals = [&](double k) {
    Eigen::VectorXd d(n);
    for (int m = -M; m <= M; ++m) {
      const double xi = hbar * (k + 2.0 * M_PI * m / p.period);
      d(m + M) = xi * xi + hbar * mult(xi);
    }
    return d;
  };

  // crossings of the multiplier bands d_m(k) = omega^2 on a fine mesh
  std::vector<double> cuts = {0.0, kmax};
  const int nmesh = 64;
  for (int m = -M; m <= M; ++m) {
    double prev = 0.0;
    for (int i = 0; i <= nmesh; ++i) {
      const double k = kmax * i / nmesh;
      const double xi = hbar * (k + 2.0 * M_PI * m / p.period);
      const double f = xi * xi + hbar * mult(xi) - omega2;
      if (i > 0 && prev * f < 0.0) {
        double a = kmax * (i - 1) / nmesh, b = k, fa = prev;
        for (int it = 0; it < 60 && b - a > 1e-13 * kmax; ++it) {
          const double mid = 0.5 * (a + b);
          const double xim = hbar * (mid + 2.0 * M_PI * m / p.period);
          const double fm = xim * xim + hbar * mult(xim) - omega2;
          (fa * fm <= 0.0) ? (b = mid) : (a = mid, fa = fm);
        }
        cuts.push_back(0.5 * (a + b));
      }
      prev = f;
    }
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double a, double b) { return std::fabs(a - b) < 1e-13 * kmax; }),
             cuts.end());

  auto integrand = [&](double k) -> std::complex<double> {
    // U_k = prod_j exp(i G_j)
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Identity(n, n);
    for (const WeylSymbol& g : log.generators) {
      Eigen::MatrixXcd G = realize_symbol_matrix(g, k, M);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
      Eigen::VectorXcd ph(n);
      for (int i = 0; i < n; ++i) ph(i) = std::exp(kI * es.eigenvalues()(i));
      U = U * (es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint());
    }
    const Eigen::VectorXd d = dvals(k);
    Eigen::VectorXd pj(n);
    for (int i = 0; i < n; ++i) pj(i) = d(i) <= omega2 ? 1.0 : 0.0;
    const Eigen::MatrixXcd Mk = U * pj.asDiagonal() * U.adjoint();
    Eigen::VectorXcd ux(n), vy(n);
    for (int m = -M; m <= M; ++m) {
      const double km = k + 2.0 * M_PI * m / p.period;
      ux(m + M) = std::exp(kI * (km * x));
      vy(m + M) = std::exp(-kI * (km * y));
    }
    return (ux.transpose() * Mk * vy)(0, 0);
  };

  std::vector<std::pair<double, double>> nodes;
  for (size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a < 1e-13 * kmax) continue;
    const int panels = std::max(1, static_cast<int>(std::ceil((b - a) / kmax * Nk / 32.0)));
    for (int pl = 0; pl < panels; ++pl) {
      const double pa = a + (b - a) * pl / panels;
      const double pb = a + (b - a) * (pl + 1) / panels;
      const double half = 0.5 * (pb - pa), mid = 0.5 * (pa + pb);
      for (int g = 0; g < 16; ++g) nodes.emplace_back(mid + half * kGLx[g], half * kGLw[g]);
    }
  }
  std::vector<std::complex<double>> vals(nodes.size());
  parallel_for(static_cast<int>(nodes.size()), [&](int i) { vals[i] = integrand(nodes[i].first); });
  std::complex<double> acc = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) acc += nodes[i].second * vals[i];

  SpectralSample s;
  s.x = x;
  s.y = y;
  s.omega = omega;
  s.method = "conjugated";
  s.value = acc / (2.0 * M_PI);
  return s;
}

}  // namespace speconion
