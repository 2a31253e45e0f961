#include <doctest.h>

#include <cmath>
#include <random>

#include "speconion/bloch.hpp"
#include "speconion/potential.hpp"
#include "speconion/weyl.hpp"

using namespace speconion;

namespace {

TrigPotential cosine_potential(double amp = 2.0) {
  TrigPotential p(2 * M_PI, 1);
  p.v0(1) = amp / 2.0;
  p.v0(-1) = amp / 2.0;
  return p;
}

}  // namespace

TEST_CASE("evaluate: single pair of modes sums at x = 0") {
  TrigPotential p(2 * M_PI, 1);
  p.v0(1) = 1.0;
  p.v0(-1) = 1.0;
  CHECK(evaluate(p, 0.0, Coeff::V0) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("evaluate: derivative of 2cos(x) at pi/2 is -2") {
  TrigPotential p = cosine_potential();
  CHECK(evaluate(p, M_PI / 2, Coeff::dV0) == doctest::Approx(-2.0).epsilon(1e-13));
}

TEST_CASE("evaluate: random Hermitian coefficients give a real function") {
  TrigPotential p = random_trig_potential(7, 2 * M_PI, 5, 1.3, 0.7);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-10.0, 10.0);
  for (int i = 0; i < 50; ++i) {
    const double x = unif(rng);
    // evaluate() returns the real part; reconstruct the imaginary part directly
    std::complex<double> acc = 0.0;
    for (int m = -p.mtheta; m <= p.mtheta; ++m)
      acc += p.v0(m) * std::exp(std::complex<double>(0, p.theta(m) * x));
    CHECK(std::fabs(acc.imag()) < 1e-12);
  }
}

TEST_CASE("evaluate: periodicity |f(x+P) - f(x)| < 1e-12 at 100 random x") {
  TrigPotential p = random_trig_potential(11, 5.0, 4, 0.9, 0.2);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unif(-20.0, 20.0);
  for (int i = 0; i < 100; ++i) {
    const double x = unif(rng);
    for (Coeff c : {Coeff::V0, Coeff::V1})
      CHECK(std::fabs(evaluate(p, x + p.period, c) - evaluate(p, x, c)) < 1e-12);
  }
}

TEST_CASE("periodize: P-periodic trig polynomial reproduces its coefficients") {
  TrigPotential p(8.0, 2);
  p.v0(1) = {0.4, 0.1};
  p.v0(-1) = {0.4, -0.1};
  p.v0(2) = {0.05, -0.02};
  p.v0(-2) = {0.05, 0.02};
  p.v1(1) = {0.12, 0.0};
  p.v1(-1) = {0.12, 0.0};
  SampledPotential s = sample_potential(p, 16.0, 3201);  // dx = 0.01, P multiple of dx
  TrigPotential out = periodize(s, 8.0, 1.5);
  REQUIRE(out.mtheta >= 2);
  for (int m = -2; m <= 2; ++m) {
    CHECK(std::abs(out.v0(m) - p.v0(m)) < 1e-10);
    CHECK(std::abs(out.v1(m) - p.v1(m)) < 1e-10);
  }
  for (int m = 3; m <= out.mtheta; ++m) CHECK(std::abs(out.v0(m)) < 1e-10);
}

TEST_CASE("periodize: Gaussian bump, P = 40, matches on |x| <= 10 to 1e-8") {
  auto gauss = [](double x) { return std::exp(-x * x); };
  SampledPotential s = sample_potential(gauss, [](double) { return 0.0; }, 30.0, 6001);
  TrigPotential out = periodize(s, 40.0, 9.0);
  double worst = 0.0;
  for (double x = -10.0; x <= 10.0; x += 0.37)
    worst = std::max(worst, std::fabs(evaluate(out, x, Coeff::V0) - gauss(x)));
  CHECK(worst < 1e-8);
}

TEST_CASE("periodize: constant potential stays constant on the core") {
  SampledPotential s = sample_potential([](double) { return 0.7; }, [](double) { return 0.0; },
                                        20.0, 4001);
  TrigPotential out = periodize(s, 16.0, 3.0);
  for (double x = -4.0; x <= 4.0; x += 0.5)
    CHECK(evaluate(out, x, Coeff::V0) == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("periodize: idempotent on the core") {
  auto f = [](double x) { return std::exp(-0.1 * x * x) * std::cos(x); };
  SampledPotential s = sample_potential(f, [](double) { return 0.0; }, 30.0, 6001);
  TrigPotential once = periodize(s, 24.0, 5.0);
  SampledPotential s2 = sample_potential(once, 30.0, 6001);
  TrigPotential twice = periodize(s2, 24.0, 5.0);
  double worst = 0.0;
  for (double x = -6.0; x <= 6.0; x += 0.29)
    worst = std::max(worst,
                     std::fabs(evaluate(twice, x, Coeff::V0) - evaluate(once, x, Coeff::V0)));
  CHECK(worst < 1e-10);
}

TEST_CASE("periodize: errors") {
  SampledPotential s = sample_potential([](double) { return 1.0; }, [](double) { return 0.0; },
                                        5.0, 1001);
  CHECK_THROWS(periodize(s, 12.0, 1.0));   // extent too small
  CHECK_THROWS(periodize(s, 8.0, 3.0));    // cutoff width >= P/4
}

TEST_CASE("weyl_symbol_of: V0 = 2cos(x) puts 1 at modes +-1, all xi") {
  TrigPotential p = cosine_potential();
  XiGrid g(1.0 / 16, 2 * M_PI, 3.0);
  WeylSymbol q = weyl_symbol_of(p, g);
  for (int i = -g.nxi; i <= g.nxi; i += 7) {
    CHECK(std::abs(q.at(1, i) - 1.0) < 1e-14);
    CHECK(std::abs(q.at(-1, i) - 1.0) < 1e-14);
    CHECK(std::abs(q.at(0, i)) == 0.0);
  }
  CHECK(q.real_flag);
}

TEST_CASE("weyl_symbol_of: V1 = cos(x) gives qhat(+-1, xi) = xi") {
  TrigPotential p(2 * M_PI, 1);
  p.v1(1) = 0.5;
  p.v1(-1) = 0.5;
  XiGrid g(1.0 / 16, 2 * M_PI, 3.0);
  WeylSymbol q = weyl_symbol_of(p, g);
  for (int i = -g.nxi; i <= g.nxi; i += 5)
    CHECK(std::abs(q.at(1, i) - g.xi(i)) < 1e-14);
}

TEST_CASE("weyl_symbol_of: matrix realization equals Bloch matrix minus free diagonal") {
  TrigPotential p = random_trig_potential(23, 2 * M_PI, 3, 0.8, 0.4);
  const double hbar = 1.0 / 16;
  XiGrid g(hbar, 2 * M_PI, 4.0);
  WeylSymbol q = weyl_symbol_of(p, g);
  const int M = 12;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> kdist(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const double k = kdist(rng);
    Eigen::MatrixXcd A = realize_symbol_matrix(q, k, M);
    BlochMatrix bm = bloch_matrix(p, k, M, hbar);
    Eigen::MatrixXcd expect = bm.H / hbar;
    for (int m = -M; m <= M; ++m) {
      const double km = k + 2 * M_PI * m / p.period;
      expect(m + M, m + M) -= hbar * km * km;
    }
    CHECK((A - expect).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("potential file round-trip") {
  TrigPotential p = random_trig_potential(31, 7.5, 3, 1.1, 0.3);
  const std::string path = "/tmp/speconion_test_potential.txt";
  write_potential_file(p, path);
  TrigPotential q = read_potential_file(path);
  CHECK(q.period == doctest::Approx(p.period).epsilon(1e-15));
  for (int m = -3; m <= 3; ++m) {
    CHECK(std::abs(q.v0(m) - p.v0(m)) < 1e-15);
    CHECK(std::abs(q.v1(m) - p.v1(m)) < 1e-15);
  }
}
