#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "speconion/bloch.hpp"
#include "speconion/potential.hpp"

using namespace speconion;

namespace {

TrigPotential cosine_potential(double amp = 2.0) {
  TrigPotential p(2 * M_PI, 1);
  p.v0(1) = amp / 2.0;
  p.v0(-1) = amp / 2.0;
  return p;
}

TrigPotential constant_potential(double c) {
  TrigPotential p(2 * M_PI, 0);
  p.v0(0) = c;
  return p;
}

}  // namespace

TEST_CASE("bloch_matrix: free potential is the free diagonal") {
  TrigPotential p(2 * M_PI, 0);
  BlochMatrix bm = bloch_matrix(p, 0.3, 10, 0.125);
  for (int m = -10; m <= 10; ++m) {
    const double km = 0.3 + m;
    CHECK(std::abs(bm.H(m + 10, m + 10) - 0.125 * 0.125 * km * km) < 1e-15);
  }
  CHECK(bm.H.cwiseAbs().sum() ==
        doctest::Approx(bm.H.diagonal().cwiseAbs().sum()).epsilon(1e-14));
}

TEST_CASE("bloch_matrix: constant shifts the diagonal by hbar*c") {
  TrigPotential p = constant_potential(0.4);
  TrigPotential z(2 * M_PI, 0);
  BlochMatrix a = bloch_matrix(p, 0.1, 9, 0.25);
  BlochMatrix b = bloch_matrix(z, 0.1, 9, 0.25);
  CHECK(((a.H - b.H).diagonal().array() - 0.25 * 0.4).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("bloch_matrix: 2cos(x) is tridiagonal with off-diagonal hbar") {
  TrigPotential p = cosine_potential();
  BlochMatrix bm = bloch_matrix(p, 0.2, 9, 0.5);
  for (int m = -9; m < 9; ++m) {
    CHECK(std::abs(bm.H(m + 10, m + 9) - 0.5) < 1e-15);
    CHECK(std::abs(bm.H(m + 9, m + 10) - 0.5) < 1e-15);
  }
}

TEST_CASE("bloch kernel: free diagonal = omega/(pi hbar) to 1e-10") {
  TrigPotential p(2 * M_PI, 0);
  const double hbar = 1.0 / 16;
  for (double om : {0.7, 1.0, 1.35}) {
    SpectralSample s = bloch_spectral_kernel(p, 0.3, 0.3, om, hbar, 256);
    CHECK(std::fabs(s.value.real() - om / (M_PI * hbar)) < 1e-10 * om / (M_PI * hbar));
    CHECK(std::fabs(s.value.imag()) < 1e-10);
  }
}

TEST_CASE("bloch kernel: free off-diagonal = sin(omega|x-y|/hbar)/(pi|x-y|)") {
  TrigPotential p(2 * M_PI, 0);
  const double hbar = 1.0 / 16;
  const double x = 0.2, y = 0.9, om = 1.0;
  SpectralSample s = bloch_spectral_kernel(p, x, y, om, hbar, 256);
  const double expect = std::sin(om * std::fabs(x - y) / hbar) / (M_PI * std::fabs(x - y));
  CHECK(std::fabs(s.value.real() - expect) < 1e-10);
  CHECK(std::fabs(s.value.imag()) < 1e-10);
}

TEST_CASE("bloch kernel: constant potential diagonal = sqrt(omega^2-hbar c)/(pi hbar)") {
  const double hbar = 1.0 / 16, c = 0.4, om = 1.0;
  TrigPotential p = constant_potential(c);
  SpectralSample s = bloch_spectral_kernel(p, 0.0, 0.0, om, hbar, 256);
  const double expect = std::sqrt(om * om - hbar * c) / (M_PI * hbar);
  CHECK(std::fabs(s.value.real() - expect) < 1e-8 * expect);
}

TEST_CASE("bloch kernel: Hermitian in (x,y) and monotone in omega") {
  TrigPotential p = cosine_potential();
  const double hbar = 1.0 / 8;
  SpectralSample a = bloch_spectral_kernel(p, 0.3, 1.1, 1.0, hbar, 128);
  SpectralSample b = bloch_spectral_kernel(p, 1.1, 0.3, 1.0, hbar, 128);
  CHECK(std::abs(a.value - std::conj(b.value)) < 1e-10);
  double prev = 0.0;
  for (double om : {0.6, 0.8, 1.0, 1.2}) {
    const double v = bloch_spectral_kernel(p, 0.4, 0.4, om, hbar, 128).value.real();
    CHECK(v >= prev - 1e-10);
    prev = v;
  }
}

TEST_CASE("bloch kernel: cutoff stability (doubling M moves the kernel < 1e-8)") {
  TrigPotential p = cosine_potential();
  const double hbar = 1.0 / 8;
  const int M0 = default_bloch_cutoff(p, 1.0, hbar);
  SpectralSample a = bloch_spectral_kernel(p, 0.0, 0.0, 1.0, hbar, 128, M0);
  SpectralSample b = bloch_spectral_kernel(p, 0.0, 0.0, 1.0, hbar, 128, 2 * M0);
  CHECK(std::abs(a.value - b.value) < 1e-8);
}

TEST_CASE("bloch kernel: derivatives of the free kernel match closed forms") {
  TrigPotential p(2 * M_PI, 0);
  const double hbar = 1.0 / 8, om = 1.0;
  // d/dx d/dy E at x = y: (1/2 pi hbar) Int_{|xi|<omega} (xi/hbar)^2 = omega^3/(3 pi hbar^3)
  SpectralSample s = bloch_spectral_kernel(p, 0.1, 0.1, om, hbar, 192, -1, 1, 1);
  const double expect = om * om * om / (3.0 * M_PI * hbar * hbar * hbar);
  CHECK(std::fabs(s.value.real() - expect) < 1e-8 * expect);
}

TEST_CASE("nonsemiclassical wrapper: free operator gives rho/pi") {
  TrigPotential p(2 * M_PI, 0);
  SpectralSample s = nonsemiclassical_kernel(p, 0.0, 0.0, 16.0, 128);
  CHECK(std::fabs(s.value.real() - 16.0 / M_PI) < 1e-9 * 16.0 / M_PI);
}

TEST_CASE("box kernel: free box matches the closed-form Dirichlet sine sum") {
  TrigPotential p(2 * M_PI, 0);
  const double hbar = 1.0 / 8, om = 1.0, X = 12.0;
  BoxKernelOptions opt;
  opt.resolution = 40.0;  // doubled resolution
  SpectralSample s = box_spectral_kernel(p, X, om, hbar, 0.4, -0.7, opt);
  // exact eigenpairs: phi_n = sqrt(1/X) sin(n pi (x+X)/(2X)), lambda_n = (hbar n pi/(2X))^2
  double expect = 0.0;
  for (int n = 1;; ++n) {
    const double lam = std::pow(hbar * n * M_PI / (2 * X), 2);
    if (lam > om * om) break;
    expect +=
        std::sin(n * M_PI * (s.x + X) / (2 * X)) * std::sin(n * M_PI * (s.y + X) / (2 * X)) / X;
  }
  CHECK(std::fabs(s.value.real() - expect) < 2e-8);
}

TEST_CASE("box kernel: omega below the spectrum gives zero") {
  TrigPotential p = constant_potential(2.0);
  SpectralSample s = box_spectral_kernel(p, 10.0, 0.3, 0.5, 0.0, 0.0);
  CHECK(s.value == std::complex<double>(0.0, 0.0));
}

TEST_CASE("box vs bloch: periodic potential, large box") {
  TrigPotential p = cosine_potential();
  const double hbar = 0.25, om = 1.0;
  SpectralSample sb = bloch_spectral_kernel(p, 0.0, 0.0, om, hbar, 192);
  SpectralSample sx = box_spectral_kernel(p, 60.0, om, hbar, 0.0, 0.0);
  // box error ~ C/X staircase
  CHECK(std::fabs(sb.value.real() - sx.value.real()) < 0.05);
}

TEST_CASE("projector property at fixed k: P^2 = P, P Hermitian") {
  TrigPotential p = cosine_potential();
  const double hbar = 0.25;
  const int M = default_bloch_cutoff(p, 1.0, hbar);
  BlochMatrix bm = bloch_matrix(p, 0.23, M, hbar);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(bm.H);
  Eigen::MatrixXcd P = Eigen::MatrixXcd::Zero(2 * M + 1, 2 * M + 1);
  for (int j = 0; j <= 2 * M; ++j)
    if (es.eigenvalues()(j) <= 1.0)
      P += es.eigenvectors().col(j) * es.eigenvectors().col(j).adjoint();
  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((P - P.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gauge invariance: mean-zero V1 substitution preserves the spectra") {
  // bands of (V0, V1) equal bands of (V0 - hbar V1^2, 0) for mean-zero V1
  const double hbar = 0.25;
  TrigPotential p(2 * M_PI, 1);
  p.v0(1) = 0.3;
  p.v0(-1) = 0.3;
  p.v1(1) = 0.2;
  p.v1(-1) = 0.2;
  TrigPotential q(2 * M_PI, 2);
  Eigen::VectorXcd v1sq = convolve_coeffs(p.coeffs_v1, 1, p.coeffs_v1, 1);
  for (int m = -2; m <= 2; ++m) {
    std::complex<double> c = -hbar * v1sq(m + 2);
    if (std::abs(m) <= 1) c += p.v0(m);
    q.v0(m) = c;
  }
  const int M = default_bloch_cutoff(p, 1.2, hbar);
  for (double k : {0.0, 0.31, 0.77}) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ea(bloch_matrix(p, k, M, hbar).H);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eb(bloch_matrix(q, k, M, hbar).H);
    for (int j = 0; j < 12; ++j)
      CHECK(std::fabs(ea.eigenvalues()(j) - eb.eigenvalues()(j)) < 1e-8);
  }
}

TEST_CASE("band_gaps: free operator has no gaps") {
  TrigPotential p(2 * M_PI, 0);
  std::vector<BandGap> gaps = band_gaps(p, 1.0, 0.0, 20.0);
  for (const auto& g : gaps) CHECK(g.width < 1e-9);
}

TEST_CASE("band_gaps: Mathieu gaps positive and decreasing") {
  TrigPotential p = cosine_potential();
  std::vector<BandGap> gaps = band_gaps(p, 1.0, 0.0, 30.0);
  REQUIRE(gaps.size() >= 8);
  for (size_t i = 0; i + 1 < 6; ++i) {
    CHECK(gaps[i].width > 0.0);
    CHECK(gaps[i + 1].width < gaps[i].width);
  }
}
