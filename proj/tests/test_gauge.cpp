#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>

#include "speconion/bloch.hpp"
#include "speconion/gauge.hpp"
#include "speconion/io.hpp"
#include "speconion/multiplier.hpp"
#include "speconion/potential.hpp"

using namespace speconion;

namespace {

TrigPotential cosine_potential(double amp = 2.0) {
  TrigPotential p(2 * M_PI, 1);
  p.v0(1) = amp / 2.0;
  p.v0(-1) = amp / 2.0;
  return p;
}

WeylSymbol cosine_symbol(double hbar, double amp = 2.0, double ximax = 3.5) {
  TrigPotential p = cosine_potential(amp);
  XiGrid g(hbar, 2 * M_PI, ximax);
  return weyl_symbol_of(p, g);
}

PeelConfig default_cfg() {
  PeelConfig cfg;
  cfg.window_a = 0.5;
  cfg.window_b = 1.5;
  cfg.parallel_steps = 6;
  cfg.series_order = 8;
  cfg.tol_rel = 1e-8;
  return cfg;
}

}  // namespace

TEST_CASE("residual_norm basics") {
  XiGrid g(0.25, 2 * M_PI, 3.0);
  WeylSymbol z(g, 1);
  CHECK(residual_norm(z, 0.5, 1.5, 1.0) == 0.0);
  WeylSymbol s(g, 1);
  s.set(1, g.nxi / 2, 0.3);
  const double xi = g.xi(g.nxi / 2);
  if (xi >= 0.5 && xi <= 1.5) CHECK(residual_norm(s, 0.5, 1.5, 1.0) == doctest::Approx(0.3));
  WeylSymbol t(g, 1);
  t.set(1, g.nxi - 1, 0.7);
  CHECK(residual_norm(t, 0.5, 1.5, 1.0) == 0.0);
}

TEST_CASE("peel_layer0: x-independent symbol passes through") {
  XiGrid g(1.0 / 32, 2 * M_PI, 3.5);
  WeylSymbol q(g, 0);
  for (int i = -g.nxi; i <= g.nxi; ++i) q.set(0, i, 0.4);
  q.check_real_flag();
  PeelStepResult r = peel_layer0(q, default_cfg());
  CHECK(r.g.sup_abs() == 0.0);
  CHECK((r.q1.values - q.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("peel_layer0: 2cos(x) residual contraction and hbar scaling") {
  PeelConfig cfg = default_cfg();
  std::vector<double> first_step_resid;
  for (double hbar : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    WeylSymbol q = cosine_symbol(hbar);
    PeelStepResult r = peel_layer0(q, cfg);
    REQUIRE(r.report.residuals.size() >= 2);
    CHECK(r.report.steps_to_tau >= 0);
    CHECK(r.report.steps_to_tau <= 6);
    first_step_resid.push_back(r.report.residuals[1]);
    for (size_t s = 1; s < r.report.residuals.size(); ++s)
      if (r.report.residuals[s] > cfg.tol_rel && r.report.residuals[s - 1] > cfg.tol_rel)
        CHECK(r.report.residuals[s] < 0.5 * r.report.residuals[s - 1]);
  }
  const double slope01 = std::log(first_step_resid[0] / first_step_resid[1]) / std::log(2.0);
  const double slope12 = std::log(first_step_resid[1] / first_step_resid[2]) / std::log(2.0);
  CHECK(slope01 >= 1.0);
  CHECK(slope12 >= 1.0);
}

TEST_CASE("peel_layer0: conjugated Bloch matrices lose their window off-diagonal") {
  const double hbar = 1.0 / 64;
  PeelConfig cfg = default_cfg();
  WeylSymbol q = cosine_symbol(hbar);
  PeelStepResult r = peel_layer0(q, cfg);
  const double tau = cfg.tol_rel * q.sup_abs();

  TrigPotential p = cosine_potential();
  const int M = static_cast<int>(2.8 / hbar);
  for (double k : {0.13, 0.71}) {
    Eigen::MatrixXcd G = realize_symbol_matrix(r.g, k, M);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    Eigen::VectorXcd ph(2 * M + 1);
    for (int i = 0; i <= 2 * M; ++i)
      ph(i) = std::exp(std::complex<double>(0, es.eigenvalues()(i)));
    Eigen::MatrixXcd U = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    CHECK((U.adjoint() * U - Eigen::MatrixXcd::Identity(2 * M + 1, 2 * M + 1))
              .cwiseAbs()
              .maxCoeff() < 1e-10);
    BlochMatrix bm = bloch_matrix(p, k, M, hbar);
    Eigen::MatrixXcd Hc = U.adjoint() * bm.H * U;
    double worst = 0.0;
    for (int mp = -M; mp <= M; ++mp) {
      for (int m = -M; m <= M; ++m) {
        if (mp == m) continue;
        const double xi = hbar * (k + 0.5 * (m + mp));
        if (std::fabs(xi) < 0.5 || std::fabs(xi) > 1.5) continue;
        worst = std::max(worst, std::abs(Hc(mp + M, m + M)) / hbar);
      }
    }
    CHECK(worst <= 10.0 * tau);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e1(bm.H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> e2(Hc);
    CHECK((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("peel_layer: no content in the annulus leaves q unchanged") {
  const double hbar = 1.0 / 32;
  TrigPotential p(8 * M_PI, 1);
  p.v0(1) = 0.3;
  p.v0(-1) = 0.3;
  XiGrid g(hbar, 8 * M_PI, 3.5);
  WeylSymbol q = weyl_symbol_of(p, g);
  PeelConfig cfg = default_cfg();
  PeelStepResult r = peel_layer(q, 1.0, 0.5, cfg);
  CHECK(r.g.sup_abs() == 0.0);
  CHECK((r.q1.values - q.values).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("peel_layer: periodic input stays on the mode lattice") {
  const double hbar = 1.0 / 32;
  TrigPotential p(4 * M_PI, 3);
  p.v0(1) = 0.2;
  p.v0(-1) = 0.2;
  p.v0(3) = 0.1;
  p.v0(-3) = 0.1;
  XiGrid g(hbar, 4 * M_PI, 3.5);
  WeylSymbol q = weyl_symbol_of(p, g);
  PeelConfig cfg = default_cfg();
  PeelStepResult r0 = peel_layer0(q, cfg);
  PeelStepResult r1 = peel_layer(r0.q1, 1.0, 0.5, cfg);
  CHECK(residual_norm(r1.q1, cfg.window_a, cfg.window_b, 0.5) <=
        cfg.tol_rel * q.sup_abs() * 1.0001);
  CHECK(r1.q1.grid.L == 4 * M_PI);
  CHECK(r1.g.grid.L == 4 * M_PI);
}

TEST_CASE("onion_peel: x-independent symbol gives the symbol back as multiplier") {
  const double hbar = 1.0 / 32;
  XiGrid g(hbar, 2 * M_PI, 3.5);
  WeylSymbol q(g, 0);
  for (int i = -g.nxi; i <= g.nxi; ++i) q.set(0, i, 0.3 + 0.1 * std::sin(g.xi(i)));
  q.check_real_flag();
  PeelConfig cfg = default_cfg();
  OnionPeelResult res = onion_peel(q, cfg);
  for (const auto& gsym : res.log.generators) CHECK(gsym.sup_abs() == 0.0);
  for (int i = -g.nxi; i <= g.nxi; ++i) {
    const double axi = std::fabs(g.xi(i));
    if (axi >= cfg.window_a + 0.15 && axi <= cfg.window_b - 0.15)
      CHECK(std::abs(res.multiplier.values(i + g.nxi) - q.at(0, i).real()) < 1e-14);
  }
}

TEST_CASE("onion_peel: 2cos(x) end-to-end residual and log structure") {
  const double hbar = 1.0 / 64;
  WeylSymbol q = cosine_symbol(hbar);
  PeelConfig cfg = default_cfg();
  OnionPeelResult res = onion_peel(q, cfg);
  CHECK(residual_norm(res.final_symbol, cfg.window_a, cfg.window_b, 0.999) <= res.log.tau);
  res.log.validate();
  CHECK(res.multiplier.values.cwiseAbs().maxCoeff() <= 3.0);
  for (const auto& gsym : res.log.generators) {
    for (int i = -q.grid.nxi; i <= q.grid.nxi; ++i) {
      const double axi = std::fabs(q.grid.xi(i));
      if (axi < 0.25 - 1e-12 || axi > 2.5 + 1e-12)
        for (int m = -gsym.mtheta; m <= gsym.mtheta; ++m)
          CHECK(std::abs(gsym.at(m, i)) == 0.0);
    }
  }
}

TEST_CASE("onion_peel: first-order V1 input accepted") {
  const double hbar = 1.0 / 32;
  TrigPotential p(2 * M_PI, 1);
  p.v1(1) = 0.05;
  p.v1(-1) = 0.05;
  XiGrid g(hbar, 2 * M_PI, 3.5);
  WeylSymbol q = weyl_symbol_of(p, g);
  PeelConfig cfg = default_cfg();
  OnionPeelResult res = onion_peel(q, cfg);
  CHECK(residual_norm(res.final_symbol, cfg.window_a, cfg.window_b, 0.999) <= res.log.tau);
}

TEST_CASE("onion_peel: deep layers on a long-period potential") {
  const double hbar = 1.0 / 32;
  const double L = 16 * M_PI;
  TrigPotential p(L, 10);
  p.v0(2) = 0.15;
  p.v0(-2) = 0.15;
  p.v0(10) = 0.3;
  p.v0(-10) = 0.3;
  XiGrid g(hbar, L, 3.5);
  WeylSymbol q = weyl_symbol_of(p, g);
  PeelConfig cfg = default_cfg();
  cfg.parallel_steps = 8;
  OnionPeelResult res = onion_peel(q, cfg);
  CHECK(res.log.reports.size() >= 2);
  for (size_t i = 1; i < res.log.reports.size(); ++i)
    CHECK(res.log.reports[i].radius < res.log.reports[i - 1].radius);
  CHECK(residual_norm(res.final_symbol, cfg.window_a, cfg.window_b, 0.999 * 0.125) <=
        res.log.tau);
}

TEST_CASE("gauge log serialization round-trips the generators") {
  const double hbar = 1.0 / 32;
  WeylSymbol q = cosine_symbol(hbar);
  PeelConfig cfg = default_cfg();
  OnionPeelResult res = onion_peel(q, cfg);
  const std::string dir = "/tmp/speconion_test_gaugelog";
  std::filesystem::remove_all(dir);
  save_gauge_log(res.log, res.multiplier, dir);
  CHECK(std::filesystem::exists(dir + "/manifest.txt"));
  WeylSymbol g0 = io::read_symbol_dump(dir + "/layer_0.sym");
  CHECK((g0.values - res.log.generators[0].values).cwiseAbs().maxCoeff() < 1e-16);
  FourierMultiplier m = io::read_multiplier(dir + "/multiplier.txt");
  CHECK((m.values - res.multiplier.values).cwiseAbs().maxCoeff() < 1e-16);
}
