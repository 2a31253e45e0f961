#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "speconion/bloch.hpp"
#include "speconion/weyl.hpp"

using namespace speconion;

namespace {

constexpr std::complex<double> kI{0.0, 1.0};

// random symbol with polynomial-in-xi rows (degree <= 2), supported away from
// the grid edge; polynomial rows make the matrix realization exact at any k
WeylSymbol random_poly_symbol(std::uint64_t seed, const XiGrid& g, int mtheta, bool real) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  WeylSymbol s(g, mtheta);
  const int guard = 8 * mtheta + 16;
  for (int m = real ? 0 : -mtheta; m <= mtheta; ++m) {
    std::complex<double> c0(unif(rng), unif(rng));
    std::complex<double> c1(unif(rng), unif(rng));
    std::complex<double> c2(unif(rng), unif(rng));
    for (int i = -g.nxi + guard; i <= g.nxi - guard; ++i) {
      const double xi = g.xi(i);
      const std::complex<double> v = c0 + c1 * xi + c2 * xi * xi;
      s.set(m, i, v);
      if (real && m > 0) s.set(-m, i, std::conj(v));
      if (real && m == 0) s.set(0, i, v.real());
    }
  }
  s.check_real_flag();
  return s;
}

}  // namespace

TEST_CASE("weyl_compose: product of single modes lands at the mode sum") {
  XiGrid g(0.25, 2 * M_PI, 3.0);
  WeylSymbol a(g, 1), b(g, 1);
  for (int i = -g.nxi + 8; i <= g.nxi - 8; ++i) {
    a.set(1, i, 1.0);
    b.set(1, i, 1.0);
  }
  WeylSymbol c = weyl_compose(a, b);
  CHECK(c.mtheta == 2);
  CHECK(std::abs(c.at(2, 0) - 1.0) < 1e-15);
  CHECK(std::abs(c.at(1, 0)) == 0.0);
  CHECK(std::abs(c.at(0, 0)) == 0.0);
}

TEST_CASE("weyl_compose: x-independent symbols multiply pointwise") {
  XiGrid g(0.125, 2 * M_PI, 3.0);
  WeylSymbol a(g, 0), b(g, 0);
  for (int i = -g.nxi; i <= g.nxi; ++i) {
    a.set(0, i, std::sin(0.3 * g.xi(i)));
    b.set(0, i, 1.0 + 0.5 * g.xi(i));
  }
  WeylSymbol c = weyl_compose(a, b);
  for (int i = -g.nxi; i <= g.nxi; i += 3)
    CHECK(std::abs(c.at(0, i) - a.at(0, i) * b.at(0, i)) < 1e-14);
}

TEST_CASE("weyl_compose: matrix realization factorizes (random symbols, 10 quasimomenta)") {
  const double hbar = 1.0 / 8;
  XiGrid g(hbar, 2 * M_PI, 6.0);
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> kdist(0.0, 1.0);
  for (int trial = 0; trial < 6; ++trial) {
    WeylSymbol a = random_poly_symbol(100 + trial, g, 3, false);
    WeylSymbol b = random_poly_symbol(200 + trial, g, 2, false);
    WeylSymbol c = weyl_compose(a, b);
    for (int kk = 0; kk < 10; ++kk) {
      const double k = kdist(rng);
      const int M = 6;
      Eigen::MatrixXcd A = realize_symbol_matrix(a, k, M);
      Eigen::MatrixXcd B = realize_symbol_matrix(b, k, M);
      Eigen::MatrixXcd C = realize_symbol_matrix(c, k, M);
      // truncation-free rows: compare only interior entries |m|,|m'| <= M - 5
      double worst = 0.0;
      for (int mp = -M + 5; mp <= M - 5; ++mp)
        for (int m = -M + 5; m <= M - 5; ++m)
          worst = std::max(worst, std::abs((A * B)(mp + M, m + M) - C(mp + M, m + M)));
      CHECK(worst < 1e-10);
    }
  }
}

TEST_CASE("self-adjointness: real-flagged symbols realize to Hermitian matrices") {
  XiGrid g(0.125, 2 * M_PI, 5.0);
  WeylSymbol a = random_poly_symbol(5, g, 3, true);
  REQUIRE(a.real_flag);
  Eigen::MatrixXcd A = realize_symbol_matrix(a, 0.37, 8);
  CHECK((A - A.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("commutator: multipliers commute") {
  XiGrid g(0.25, 2 * M_PI, 3.0);
  WeylSymbol a(g, 0), b(g, 0);
  for (int i = -g.nxi; i <= g.nxi; ++i) {
    a.set(0, i, g.xi(i));
    b.set(0, i, std::cos(g.xi(i)));
  }
  WeylSymbol c = commutator(a, b);
  CHECK(c.sup_abs() < 1e-15);
}

TEST_CASE("commutator: [e^{i theta x}, f(xi)] shifts the multiplier") {
  const double hbar = 0.25;
  XiGrid g(hbar, 2 * M_PI, 3.0);
  WeylSymbol a(g, 1), b(g, 0);
  const int guard = 10;
  for (int i = -g.nxi + guard; i <= g.nxi - guard; ++i) a.set(1, i, 1.0);
  for (int i = -g.nxi + 2; i <= g.nxi - 2; ++i) b.set(0, i, std::tanh(g.xi(i)));
  WeylSymbol c = commutator(a, b);
  // chat(1, xi) = f(xi - hbar/2) - f(xi + hbar/2) (theta = 1 is 1 grid step)
  for (int i = -g.nxi + guard; i <= g.nxi - guard; i += 3) {
    const std::complex<double> expect = b.at(0, i - 1) - b.at(0, i + 1);
    CHECK(std::abs(c.at(1, i) - expect) < 1e-14);
  }
}

TEST_CASE("commutator: matrix realization matches matrix commutator") {
  const double hbar = 1.0 / 8;
  XiGrid g(hbar, 2 * M_PI, 6.0);
  WeylSymbol a = random_poly_symbol(41, g, 2, false);
  WeylSymbol b = random_poly_symbol(42, g, 2, false);
  WeylSymbol c = commutator(a, b);
  const int M = 6;
  for (double k : {0.1, 0.55, 0.9}) {
    Eigen::MatrixXcd A = realize_symbol_matrix(a, k, M);
    Eigen::MatrixXcd B = realize_symbol_matrix(b, k, M);
    Eigen::MatrixXcd C = realize_symbol_matrix(c, k, M);
    double worst = 0.0;
    for (int mp = -M + 4; mp <= M - 4; ++mp)
      for (int m = -M + 4; m <= M - 4; ++m)
        worst = std::max(worst, std::abs((A * B - B * A)(mp + M, m + M) - C(mp + M, m + M)));
    CHECK(worst < 1e-10);
  }
}

TEST_CASE("jacobi identity on random triples") {
  const double hbar = 1.0 / 8;
  XiGrid g(hbar, 2 * M_PI, 6.0);
  WeylSymbol a = random_poly_symbol(51, g, 1, false);
  WeylSymbol b = random_poly_symbol(52, g, 1, false);
  WeylSymbol c = random_poly_symbol(53, g, 1, false);
  WeylSymbol j = add(add(commutator(a, commutator(b, c)), commutator(b, commutator(c, a))),
                     commutator(c, commutator(a, b)));
  // interior columns only (outer ones see truncated content)
  double worst = 0.0;
  const int guard = 40;
  for (int m = -j.mtheta; m <= j.mtheta; ++m)
    for (int i = -g.nxi + guard; i <= g.nxi - guard; ++i)
      worst = std::max(worst, std::abs(j.at(m, i)));
  CHECK(worst < 1e-9);
}

TEST_CASE("commutator_with_laplacian: theta = 0 content maps to zero") {
  XiGrid g(0.25, 2 * M_PI, 3.0);
  WeylSymbol gsym(g, 0);
  for (int i = -g.nxi; i <= g.nxi; ++i) gsym.set(0, i, std::sin(g.xi(i)));
  CHECK(commutator_with_laplacian(gsym).sup_abs() == 0.0);
}

TEST_CASE("commutator_with_laplacian: single mode gives -2i theta xi") {
  XiGrid g(0.25, 2 * M_PI, 3.0);
  WeylSymbol gsym(g, 1);
  for (int i = -g.nxi; i <= g.nxi; ++i) gsym.set(1, i, 1.0);
  WeylSymbol s = commutator_with_laplacian(gsym);
  for (int i = -g.nxi; i <= g.nxi; i += 4)
    CHECK(std::abs(s.at(1, i) - (-2.0 * kI * g.xi(i))) < 1e-14);
}

TEST_CASE("solve_homological and commutator_with_laplacian invert each other on the band") {
  const double hbar = 1.0 / 16;
  XiGrid g(hbar, 2 * M_PI, 3.5);
  WeylSymbol q(g, 2);
  for (int m : {-2, -1, 1, 2})
    for (int i = -g.nxi + 8; i <= g.nxi - 8; ++i)
      q.set(m, i, std::complex<double>(0.3 * m, 0.1) * std::exp(kI * (0.2 * g.xi(i))));
  // hermitize
  for (int m = 1; m <= 2; ++m)
    for (int i = -g.nxi; i <= g.nxi; ++i) q.set(-m, i, std::conj(q.at(m, i)));
  q.check_real_flag();
  REQUIRE(q.real_flag);

  WeylSymbol gg = solve_homological(q, 0.5, 1.5, 0.5, 10.0);
  CHECK(gg.real_flag);
  WeylSymbol back = commutator_with_laplacian(gg);
  double worst = 0.0;
  for (int m = -2; m <= 2; ++m) {
    if (m == 0) continue;
    for (int i = -g.nxi; i <= g.nxi; ++i) {
      const double axi = std::fabs(g.xi(i));
      if (axi < 0.5 || axi > 1.5) continue;
      worst = std::max(worst, std::abs(back.at(m, i) - q.at(m, i)));
    }
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("solve_homological: qhat(1,xi) = 2 xi on the band gives ghat = i chi") {
  const double hbar = 1.0 / 16;
  XiGrid g(hbar, 2 * M_PI, 3.5);
  WeylSymbol q(g, 1);
  for (int i = -g.nxi + 8; i <= g.nxi - 8; ++i) {
    q.set(1, i, 2.0 * g.xi(i));
    q.set(-1, i, 2.0 * g.xi(i));
  }
  WeylSymbol gg = solve_homological(q, 0.5, 1.5, 0.5, 2.0);
  for (int i = -g.nxi; i <= g.nxi; ++i) {
    const double axi = std::fabs(g.xi(i));
    if (axi >= 0.5 && axi <= 1.5) CHECK(std::abs(gg.at(1, i) - kI) < 1e-13);
    if (axi > 2.0) CHECK(std::abs(gg.at(1, i)) == 0.0);
  }
}

TEST_CASE("solve_homological: zero in, zero out; errors on bad bands") {
  XiGrid g(0.25, 2 * M_PI, 3.0);
  WeylSymbol q(g, 1);
  CHECK(solve_homological(q, 0.5, 1.5, 0.5, 2.0).sup_abs() == 0.0);
  CHECK_THROWS(solve_homological(q, 0.05, 1.0, 0.5, 2.0));  // band touches 0 after cutoff
  WeylSymbol bad(g, 2);
  for (int i = -g.nxi; i <= g.nxi; ++i) bad.set(1, i, 1.0);
  // content at |theta| = 1 < theta_lo = 1.5 inside the band
  CHECK_THROWS(solve_homological(bad, 0.5, 1.5, 1.5, 3.0));
}

TEST_CASE("conjugate_series: zero generator leaves h unchanged") {
  XiGrid g(0.25, 2 * M_PI, 3.0);
  WeylSymbol h(g, 1);
  for (int i = -g.nxi + 8; i <= g.nxi - 8; ++i) h.set(1, i, 0.7);
  h.kinetic_weight = 1.0;
  WeylSymbol zero(g, 0);
  ConjugationResult res = conjugate_series(h, zero, 3);
  CHECK((res.symbol.values - h.values).cwiseAbs().maxCoeff() == 0.0);
  CHECK(res.symbol.kinetic_weight == 1.0);
  CHECK(res.remainder_sup == 0.0);
}

TEST_CASE("conjugate_series: first-order cancellation on the band") {
  // K = 1, h = xi^2, g from solve_homological(q): result = xi^2 - hbar*q*chi
  const double hbar = 1.0 / 32;
  XiGrid g(hbar, 2 * M_PI, 3.5);
  WeylSymbol q(g, 1);
  for (int i = -g.nxi + 8; i <= g.nxi - 8; ++i) {
    q.set(1, i, 1.0);
    q.set(-1, i, 1.0);
  }
  q.check_real_flag();
  WeylSymbol gg = solve_homological(q, 0.5, 1.5, 0.5, 2.0);
  WeylSymbol h(g, 0);
  h.kinetic_weight = 1.0;
  h.real_flag = true;
  ConjugationResult res = conjugate_series(h, gg, 1);
  double worst = 0.0;
  for (int i = -g.nxi; i <= g.nxi; ++i) {
    const double axi = std::fabs(g.xi(i));
    if (axi < 0.5 || axi > 1.5) continue;
    worst = std::max(worst, std::abs(res.symbol.at(1, i) - (-hbar * 1.0)));
  }
  CHECK(worst < 1e-12);
}

TEST_CASE("conjugate_series: matrix exponential oracle within 10x remainder estimate") {
  const double hbar = 1.0 / 16;
  XiGrid g(hbar, 2 * M_PI, 4.5);
  WeylSymbol q(g, 1);
  const int guard = 12;
  for (int i = -g.nxi + guard; i <= g.nxi - guard; ++i) {
    const double chi = xi_band_cutoff(g.xi(i), 0.5, 1.5);
    q.set(1, i, 0.8 * chi);
    q.set(-1, i, 0.8 * chi);
  }
  q.check_real_flag();
  WeylSymbol gg = solve_homological(q, 0.5, 1.5, 0.5, 2.0);
  WeylSymbol h = scale(q, hbar);
  h.kinetic_weight = 1.0;
  h.real_flag = true;
  const int K = 6;
  ConjugationResult res = conjugate_series(h, gg, K);

  const int M = 16;
  for (double k : {0.2, 0.7}) {
    Eigen::MatrixXcd G = realize_symbol_matrix(gg, k, M);
    Eigen::MatrixXcd H = realize_symbol_matrix(h, k, M);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    Eigen::VectorXcd ph(2 * M + 1);
    for (int i = 0; i <= 2 * M; ++i)
      ph(i) = std::exp(std::complex<double>(0, es.eigenvalues()(i)));
    Eigen::MatrixXcd U = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    Eigen::MatrixXcd lhs = U.adjoint() * H * U;
    Eigen::MatrixXcd rhs = realize_symbol_matrix(res.symbol, k, M);
    // interior block comparison (outer rows feel the M-truncation)
    double worst = 0.0;
    for (int mp = -M + 8; mp <= M - 8; ++mp)
      for (int m = -M + 8; m <= M - 8; ++m)
        worst = std::max(worst, std::abs(lhs(mp + M, m + M) - rhs(mp + M, m + M)));
    CHECK(worst <= 10.0 * std::max(res.remainder_sup, 1e-14));
  }
}

TEST_CASE("class_norm_report: zero symbol, mode scaling, monotone in r") {
  XiGrid g(0.25, 2 * M_PI, 3.0);
  WeylSymbol z(g, 1);
  ClassNormReport zr = class_norm_report(z, 0.5);
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b) CHECK(zr.table[a][b] == 0.0);

  WeylSymbol s(g, 2);
  for (int i = -g.nxi; i <= g.nxi; ++i) s.set(2, i, 1.0);
  ClassNormReport r1 = class_norm_report(s, 1.0);
  for (int a = 1; a <= 4; ++a)
    CHECK(r1.table[a][0] == doctest::Approx(std::pow(2.0, a)).epsilon(1e-12));

  ClassNormReport r2 = class_norm_report(s, 2.0);
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b) CHECK(r2.table[a][b] <= r1.table[a][b] + 1e-15);
}

TEST_CASE("support margin: composition with edge-touching support throws") {
  XiGrid g(0.25, 2 * M_PI, 2.0);
  WeylSymbol a(g, 1), b(g, 1);
  for (int i = -g.nxi; i <= g.nxi; ++i) {
    a.set(1, i, 1.0);  // support touches the grid edge
    if (std::abs(i) <= g.nxi - 8) b.set(1, i, 1.0);
  }
  CHECK_THROWS_AS((void)weyl_compose(a, b), SupportMarginError);
}

TEST_CASE("grid mismatch raises") {
  XiGrid g1(0.25, 2 * M_PI, 2.0), g2(0.125, 2 * M_PI, 2.0);
  WeylSymbol a(g1, 0), b(g2, 0);
  CHECK_THROWS_AS((void)weyl_compose(a, b), GridMismatchError);
}
