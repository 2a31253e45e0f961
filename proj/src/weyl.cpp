#include "speconion/weyl.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "speconion/bump.hpp"

namespace speconion {

namespace {
constexpr std::complex<double> kI{0.0, 1.0};
}

double WeylSymbol::hermitian_defect() const {
  double d = 0.0;
  for (int m = 0; m <= mtheta; ++m)
    for (int i = -grid.nxi; i <= grid.nxi; ++i)
      d = std::max(d, std::abs(at(m, i) - std::conj(at(-m, i))));
  return d;
}

void WeylSymbol::check_real_flag(double tol) { real_flag = hermitian_defect() <= tol; }

int WeylSymbol::active_mtheta() const {
  int mx = 0;
  for (int m = -mtheta; m <= mtheta; ++m)
    if (row_nonzero(m)) mx = std::max(mx, std::abs(m));
  return mx;
}

std::pair<int, int> WeylSymbol::xi_support() const {
  int lo = values.cols(), hi = -1;
  for (int c = 0; c < values.cols(); ++c) {
    if (values.col(c).cwiseAbs().maxCoeff() > 0.0) {
      lo = std::min(lo, static_cast<int>(c));
      hi = std::max(hi, static_cast<int>(c));
    }
  }
  if (hi < 0) return {-1, -1};
  return {lo, hi};
}

void WeylSymbol::trim_modes() {
  const int act = active_mtheta();
  if (act == mtheta) return;
  Eigen::MatrixXcd v = values.block(mtheta - act, 0, 2 * act + 1, values.cols());
  values = std::move(v);
  mtheta = act;
}

double sup_norm(const WeylSymbol& a, int alpha, int beta) {
  // Delta_xi^beta: iterated central first differences along rows
  Eigen::MatrixXcd work = a.values;
  const double inv2d = 1.0 / (2.0 * a.grid.dxi);
  for (int b = 0; b < beta; ++b) {
    Eigen::MatrixXcd next = Eigen::MatrixXcd::Zero(work.rows(), work.cols());
    for (int c = 1; c + 1 < work.cols(); ++c) next.col(c) = (work.col(c + 1) - work.col(c - 1)) * inv2d;
    work = std::move(next);
  }
  double mx = 0.0;
  for (int m = -a.mtheta; m <= a.mtheta; ++m) {
    const double th = std::pow(std::abs(a.grid.theta(m)), alpha);
    const double rowmax = work.row(m + a.mtheta).cwiseAbs().maxCoeff();
    mx = std::max(mx, th * rowmax);
  }
  return mx;
}

ClassNormReport class_norm_report(const WeylSymbol& a, double r) {
  if (!(r > 0.0)) throw std::invalid_argument("class_norm_report: radius must be positive");
  ClassNormReport rep;
  rep.radius = r;
  for (int al = 0; al <= 4; ++al)
    for (int be = 0; be <= 4; ++be) rep.table[al][be] = sup_norm(a, al, be) * std::pow(r, -al);
  return rep;
}

WeylSymbol add(const WeylSymbol& a, const WeylSymbol& b) {
  if (!a.grid.same_as(b.grid)) throw GridMismatchError("add: grid mismatch");
  const int mt = std::max(a.mtheta, b.mtheta);
  WeylSymbol c(a.grid, mt);
  c.values.block(mt - a.mtheta, 0, 2 * a.mtheta + 1, a.values.cols()) = a.values;
  c.values.block(mt - b.mtheta, 0, 2 * b.mtheta + 1, b.values.cols()) += b.values;
  c.kinetic_weight = a.kinetic_weight + b.kinetic_weight;
  c.real_flag = a.real_flag && b.real_flag;
  return c;
}

WeylSymbol scale(const WeylSymbol& a, std::complex<double> s) {
  WeylSymbol c = a;
  c.values *= s;
  c.kinetic_weight *= s.real();
  if (s.imag() != 0.0) {
    if (a.kinetic_weight != 0.0)
      throw std::invalid_argument("scale: complex scaling of a kinetic part");
    c.real_flag = false;
  }
  return c;
}

namespace {

// Support-margin guard. The composition is exact on every stored column as
// long as one operand's xi-support sits at least maxA+maxB grid steps inside
// both edges: all shifted reads of the other operand then land on the grid,
// and nothing nonzero is lost past the edge.
void check_margin(const WeylSymbol& a, const WeylSymbol& b, int maxa, int maxb,
                  const char* who) {
  auto margin = [](const WeylSymbol& s) {
    auto [lo, hi] = s.xi_support();
    if (hi < 0) return 1 << 30;  // zero symbol
    const int cols = static_cast<int>(s.values.cols());
    return std::min(lo, cols - 1 - hi);
  };
  const int need = maxa + maxb;
  const int ma = margin(a), mb = margin(b);
  if (ma < need && mb < need) {
    std::ostringstream os;
    os << who << ": both operands' xi-supports are within " << need
       << " grid steps of the edge (margins " << ma << ", " << mb << "); enlarge the grid";
    throw SupportMarginError(os.str());
  }
}

}  // namespace

WeylSymbol weyl_compose(const WeylSymbol& a, const WeylSymbol& b) {
  if (!a.grid.same_as(b.grid)) throw GridMismatchError("weyl_compose: grid mismatch");
  if (a.kinetic_weight != 0.0 || b.kinetic_weight != 0.0)
    throw std::invalid_argument("weyl_compose: kinetic parts are composed analytically only");

  // only nonzero mode rows participate
  std::vector<int> ma, mb;
  for (int m = -a.mtheta; m <= a.mtheta; ++m)
    if (a.row_nonzero(m)) ma.push_back(m);
  for (int m = -b.mtheta; m <= b.mtheta; ++m)
    if (b.row_nonzero(m)) mb.push_back(m);

  int mt = a.mtheta + b.mtheta;
  WeylSymbol c(a.grid, mt);
  if (ma.empty() || mb.empty()) return c;

  int maxa = 0, maxb = 0;
  for (int m : ma) maxa = std::max(maxa, std::abs(m));
  for (int m : mb) maxb = std::max(maxb, std::abs(m));
  check_margin(a, b, maxa, maxb, "weyl_compose");

  const int n = static_cast<int>(a.values.cols());
  for (int m1 : ma) {
    for (int m2 : mb) {
      // c(m1+m2, i) += a(m1, i+m2) * b(m2, i-m1), all in column indices
      const int clo = std::max({0, -m2, m1});
      const int chi = std::min({n - 1, n - 1 - m2, n - 1 + m1});
      if (clo > chi) continue;
      const int len = chi - clo + 1;
      c.values.row(m1 + m2 + mt).segment(clo, len).array() +=
          a.values.row(m1 + a.mtheta).segment(clo + m2, len).array() *
          b.values.row(m2 + b.mtheta).segment(clo - m1, len).array();
    }
  }
  return c;
}

WeylSymbol commutator(const WeylSymbol& a, const WeylSymbol& b) {
  if (!a.grid.same_as(b.grid)) throw GridMismatchError("commutator: grid mismatch");
  WeylSymbol ap = a, bp = b;
  ap.kinetic_weight = 0.0;
  bp.kinetic_weight = 0.0;
  WeylSymbol c = add(weyl_compose(ap, bp), scale(weyl_compose(bp, ap), -1.0));
  // kinetic contributions: [Op(g), w*Op(xi^2)] = w*Op(-2*hbar*theta*xi*ghat)
  const double hbar = a.grid.hbar;
  auto add_kinetic = [&](const WeylSymbol& g, double w, double sign) {
    if (w == 0.0) return;
    for (int m = -g.mtheta; m <= g.mtheta; ++m) {
      if (!g.row_nonzero(m)) continue;
      const double th = g.grid.theta(m);
      for (int i = -g.grid.nxi; i <= g.grid.nxi; ++i) {
        const std::complex<double> v = g.at(m, i);
        if (v == 0.0) continue;
        c.set(m, i, c.at(m, i) + sign * w * (-2.0 * hbar * th * g.grid.xi(i)) * v);
      }
    }
  };
  add_kinetic(a, b.kinetic_weight, 1.0);
  add_kinetic(b, a.kinetic_weight, -1.0);
  c.kinetic_weight = 0.0;
  return c;
}

WeylSymbol commutator_with_laplacian(const WeylSymbol& g) {
  WeylSymbol s(g.grid, g.mtheta);
  for (int m = -g.mtheta; m <= g.mtheta; ++m) {
    const double th = g.grid.theta(m);
    if (th == 0.0) continue;
    for (int i = -g.grid.nxi; i <= g.grid.nxi; ++i)
      s.set(m, i, -2.0 * kI * th * g.grid.xi(i) * g.at(m, i));
  }
  s.real_flag = g.real_flag;
  return s;
}

double xi_band_cutoff(double xi, double band_lo, double band_hi) {
  const double tw = 0.25 * (band_hi - band_lo);
  return plateau_interval(std::fabs(xi), band_lo - tw, band_hi + tw, tw);
}

WeylSymbol solve_homological(const WeylSymbol& q, double band_lo, double band_hi, double theta_lo,
                             double theta_hi) {
  if (!(band_lo > 0.0 && band_hi > band_lo))
    throw std::invalid_argument("solve_homological: need 0 < band_lo < band_hi");
  const double tw = 0.25 * (band_hi - band_lo);
  if (band_lo - tw <= 0.0)
    throw std::invalid_argument("solve_homological: band (with cutoff transition) touches xi = 0");
  if (!(theta_lo > 0.0 && theta_hi >= theta_lo))
    throw std::invalid_argument("solve_homological: need 0 < theta_lo <= theta_hi");

  // precondition: no content at 0 < |theta| < theta_lo inside the band
  for (int m = -q.mtheta; m <= q.mtheta; ++m) {
    const double th = q.grid.theta(m);
    if (th == 0.0 || std::fabs(th) >= theta_lo) continue;
    for (int i = -q.grid.nxi; i <= q.grid.nxi; ++i) {
      const double x = std::fabs(q.grid.xi(i));
      if (x >= band_lo && x <= band_hi && std::abs(q.at(m, i)) >= 1e-13) {
        std::ostringstream os;
        os << "solve_homological: q has content below theta_lo inside the band at (theta="
           << th << ", xi=" << q.grid.xi(i) << "), |q| = " << std::abs(q.at(m, i));
        throw std::invalid_argument(os.str());
      }
    }
  }

  WeylSymbol g(q.grid, q.mtheta);
  for (int m = -q.mtheta; m <= q.mtheta; ++m) {
    const double th = q.grid.theta(m);
    const double ath = std::fabs(th);
    if (ath < theta_lo || ath > theta_hi * (1 + 1e-12)) continue;
    for (int i = -q.grid.nxi; i <= q.grid.nxi; ++i) {
      const double xi = q.grid.xi(i);
      if (xi == 0.0) continue;
      const double chi = xi_band_cutoff(xi, band_lo, band_hi);
      if (chi == 0.0) continue;
      g.set(m, i, kI * q.at(m, i) * chi / (2.0 * th * xi));
    }
  }
  g.real_flag = q.real_flag;
  return g;
}

ConjugationResult conjugate_series(const WeylSymbol& h, const WeylSymbol& g, int K) {
  if (K < 1) throw std::invalid_argument("conjugate_series: K >= 1 required");
  if (g.kinetic_weight != 0.0)
    throw std::invalid_argument("conjugate_series: generator cannot carry a kinetic part");
  ConjugationResult res;
  res.symbol = h;
  WeylSymbol term = h;  // S_j = ad_G(S_{j-1}) / (i*j), S_0 = h
  for (int j = 1; j <= K + 1; ++j) {
    term = scale(commutator(g, term), 1.0 / (kI * static_cast<double>(j)));
    term.trim_modes();
    if (g.real_flag && h.real_flag) term.real_flag = true;
    if (j <= K)
      res.symbol = add(res.symbol, term);
    else
      res.remainder_sup = term.sup_abs();
  }
  res.symbol.real_flag = h.real_flag && g.real_flag;
  return res;
}

double residual_norm(const WeylSymbol& a, double xi_lo, double xi_hi, double theta_floor) {
  double mx = 0.0;
  for (int m = -a.mtheta; m <= a.mtheta; ++m) {
    if (std::fabs(a.grid.theta(m)) < theta_floor) continue;
    for (int i = -a.grid.nxi; i <= a.grid.nxi; ++i) {
      const double x = std::fabs(a.grid.xi(i));
      if (x < xi_lo || x > xi_hi) continue;
      mx = std::max(mx, std::abs(a.at(m, i)));
    }
  }
  return mx;
}

}  // namespace speconion
