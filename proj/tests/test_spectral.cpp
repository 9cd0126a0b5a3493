#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "oracle_helpers.hpp"
#include "rlogse/errors.hpp"
#include "rlogse/field.hpp"
#include "rlogse/grid.hpp"
#include "rlogse/spectral.hpp"
#include "rlogse/tableau.hpp"

using namespace rlogse;
using oracle::cd;
using oracle::cld;

namespace {

ComplexField plane_wave_1d(const Grid& g, int m, Complex amp = {1.0, 0.0}) {
  ComplexField f(g);
  for (int j = 0; j < g.nx(); ++j) {
    f.at(j, 0) = amp * std::exp(Complex{0.0, g.mu_x() * m * g.x(j)});
  }
  return f;
}

double max_abs_diff(const ComplexField& a, const ComplexField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("signed mode numbering") {
  CHECK(signed_mode(0, 8) == 0);
  CHECK(signed_mode(3, 8) == 3);
  CHECK(signed_mode(4, 8) == 4);   // Nyquist keeps the positive label
  CHECK(signed_mode(5, 8) == -3);
  CHECK(signed_mode(7, 8) == -1);
}

TEST_CASE("derivative symbol tables") {
  const int n = 8;
  const double mu = 0.5;

  SUBCASE("first derivative: imaginary, antisymmetric, Nyquist dropped") {
    auto sym = derivative_symbols(n, mu, 1);
    CHECK(sym[0] == Complex{0.0, 0.0});
    CHECK(sym[n / 2] == Complex{0.0, 0.0});
    for (int l = 1; l < n / 2; ++l) {
      CHECK(sym[l].real() == 0.0);
      CHECK(sym[l].imag() == doctest::Approx(mu * l));
      CHECK(sym[n - l].imag() == doctest::Approx(-mu * l));
    }
  }
  SUBCASE("second derivative: real, nonpositive, Nyquist retained") {
    auto sym = derivative_symbols(n, mu, 2);
    for (int l = 0; l < n; ++l) {
      CHECK(sym[l].imag() == 0.0);
      const double lt = signed_mode(l, n);
      CHECK(sym[l].real() == doctest::Approx(-(mu * lt) * (mu * lt)));
    }
    CHECK(sym[n / 2].real() == doctest::Approx(-mu * mu * 16.0));
  }
  SUBCASE("invalid order") {
    CHECK_THROWS_AS(derivative_symbols(n, mu, 0), ConfigError);
  }
}

TEST_CASE("laplacian symbols: zero mean mode, nonpositive, Nyquist present") {
  Grid g = Grid::make_2d(0.0, 2.0 * std::numbers::pi, 8, -1.0, 1.0, 6);
  SpectralOperator op(g);
  auto sym = op.laplacian_symbols();
  REQUIRE(sym.size() == g.size());
  CHECK(sym[0] == 0.0);
  for (double s : sym) CHECK(s <= 0.0);
  // mode (nx/2, ny/2): -( (mu_x*4)^2 + (mu_y*3)^2 )
  const double expect = -(g.mu_x() * 4.0 * g.mu_x() * 4.0 + g.mu_y() * 3.0 * g.mu_y() * 3.0);
  CHECK(sym[g.index(4, 3)] == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("forward transform matches the long-double DFT oracle") {
  SUBCASE("1-D") {
    Grid g = Grid::make_1d(-2.0, 3.0, 16);
    ComplexField u = oracle::random_field(g, 101);
    SpectralOperator op(g);
    auto lib = op.forward(u);
    auto ref = oracle::dft_1d(u.values());
    for (std::size_t l = 0; l < lib.size(); ++l) {
      CHECK(std::abs(lib[l] - cd(static_cast<double>(ref[l].real()),
                                 static_cast<double>(ref[l].imag()))) <= 1e-12 * 16);
    }
  }
  SUBCASE("2-D, non-square") {
    Grid g = Grid::make_2d(0.0, 1.0, 8, -1.0, 2.0, 4);
    ComplexField u = oracle::random_field(g, 202);
    SpectralOperator op(g);
    auto lib = op.forward(u);
    auto ref = oracle::dft_2d(u.values(), 8, 4);
    for (std::size_t l = 0; l < lib.size(); ++l) {
      CHECK(std::abs(lib[l] - cd(static_cast<double>(ref[l].real()),
                                 static_cast<double>(ref[l].imag()))) <= 1e-12 * 32);
    }
  }
}

TEST_CASE("forward/inverse round trip is the identity") {
  Grid g = Grid::make_2d(0.0, 1.0, 16, 0.0, 2.0, 8);
  ComplexField u = oracle::random_field(g, 7);
  SpectralOperator op(g);
  ComplexField back = op.inverse_to_field(op.forward(u));
  CHECK(max_abs_diff(u, back) <= 1e-13);
}

TEST_CASE("transforms are deterministic") {
  Grid g = Grid::make_1d(0.0, 1.0, 64);
  ComplexField u = oracle::random_field(g, 99);
  SpectralOperator op(g);
  auto s1 = op.forward(u);
  auto s2 = op.forward(u);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].real() == s2[i].real());
    CHECK(s1[i].imag() == s2[i].imag());
  }
  // ... including across two independent operators on the same grid
  SpectralOperator op2(g);
  auto s3 = op2.forward(u);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    CHECK(s1[i].real() == s3[i].real());
    CHECK(s1[i].imag() == s3[i].imag());
  }
}

TEST_CASE("plane wave is an eigenvector: concentrated spectrum, exact eigenvalue") {
  Grid g = Grid::make_1d(0.0, 2.0 * std::numbers::pi, 32);
  SpectralOperator op(g);
  ComplexField u = plane_wave_1d(g, 3);

  auto spec = op.forward(u);
  for (int l = 0; l < 32; ++l) {
    if (l == 3) {
      CHECK(std::abs(spec[l] - cd{32.0, 0.0}) <= 1e-10);
    } else {
      CHECK(std::abs(spec[l]) <= 1e-10);
    }
  }

  // mu = 1 here, so the Laplacian of e^{i*3*x} is exactly -9 times it
  ComplexField lap = op.laplacian(u);
  ComplexField expect = (-9.0) * u;
  CHECK(max_abs_diff(lap, expect) <= 1e-11);
}

TEST_CASE("2-D laplacian of a plane wave on a non-square box") {
  Grid g = Grid::make_2d(0.0, 2.0 * std::numbers::pi, 16, -1.0, 1.0, 8);
  SpectralOperator op(g);
  const int mx = 2, my = -3;
  ComplexField u(g);
  for (int j = 0; j < g.nx(); ++j) {
    for (int k = 0; k < g.ny(); ++k) {
      u.at(j, k) = std::exp(Complex{0.0, g.mu_x() * mx * g.x(j) + g.mu_y() * my * g.y(k)});
    }
  }
  const double eig = -(g.mu_x() * mx * g.mu_x() * mx + g.mu_y() * my * g.mu_y() * my);
  ComplexField lap = op.laplacian(u);
  ComplexField expect = eig * u;
  CHECK(max_abs_diff(lap, expect) <= 1e-10 * std::abs(eig));
}

TEST_CASE("laplacian of a constant vanishes") {
  Grid g = Grid::make_1d(-5.0, 5.0, 16);
  SpectralOperator op(g);
  ComplexField u(g);
  for (auto& v : u.values()) v = {2.5, -1.0};
  ComplexField lap = op.laplacian(u);
  for (std::size_t i = 0; i < lap.size(); ++i) CHECK(std::abs(lap[i]) <= 1e-13);
}

TEST_CASE("laplacian of a narrow gaussian matches the closed form") {
  // e^{-x^2/2} on [-16,16): tails and spectrum both decay far below double
  // precision at N = 128, so the periodic spectral derivative must agree
  // with the real-line formula (x^2 - 1) e^{-x^2/2}.
  Grid g = Grid::make_1d(-16.0, 16.0, 128);
  SpectralOperator op(g);
  ComplexField u(g), expect(g);
  for (int j = 0; j < g.nx(); ++j) {
    const double x = g.x(j);
    u.at(j, 0) = {std::exp(-0.5 * x * x), 0.0};
    expect.at(j, 0) = {(x * x - 1.0) * std::exp(-0.5 * x * x), 0.0};
  }
  CHECK(max_abs_diff(op.laplacian(u), expect) <= 1e-12);
}

TEST_CASE("kinetic inner product equals the symbol-weighted spectral sum") {
  // <Laplacian u, u>_h = (hx*hy/(nx*ny)) * sum_m sigma_m |u^_m|^2 — the
  // discrete Parseval identity that makes the energy functional well defined.
  // RHS evaluated with the long-double DFT oracle, independent of FFTW.
  auto check = [](const Grid& g, unsigned seed) {
    ComplexField u = oracle::random_field(g, seed);
    SpectralOperator op(g);
    const double lhs = inner_product(op.laplacian(u), u).real();

    auto ref = oracle::dft_2d(u.values(), g.nx(), g.ny());
    auto sym = op.laplacian_symbols();
    long double acc = 0.0L;
    for (std::size_t m = 0; m < ref.size(); ++m) {
      acc += static_cast<long double>(sym[m]) * std::norm(ref[m]);
    }
    const double rhs = static_cast<double>(
        acc * static_cast<long double>(g.cell_weight()) /
        static_cast<long double>(g.size()));
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-11));

    // and the imaginary residue of the assembled product is roundoff-level
    CHECK(std::abs(inner_product(op.laplacian(u), u).imag()) <=
          1e-12 * (1.0 + std::abs(lhs)));
  };
  check(Grid::make_1d(-4.0, 4.0, 16), 31);
  check(Grid::make_2d(0.0, 2.0, 8, -3.0, 1.0, 8), 32);
}

TEST_CASE("operator/field grid mismatch throws") {
  Grid g1 = Grid::make_1d(0.0, 1.0, 8);
  Grid g2 = Grid::make_1d(0.0, 1.0, 16);
  SpectralOperator op(g1);
  ComplexField u(g2);
  CHECK_THROWS_AS(op.laplacian(u), DimensionError);
  CHECK_THROWS_AS(op.forward(u), DimensionError);
}

// ---------------------------------------------------------------------------
// stage solver
// ---------------------------------------------------------------------------

TEST_CASE("stage solver with tau = 0 returns the right-hand sides") {
  Grid g = Grid::make_1d(0.0, 1.0, 16);
  SpectralOperator op(g);
  StageSolver solver(op, ButcherTableau::gauss(2), 0.0);
  std::vector<ComplexField> rhs = {oracle::random_field(g, 1), oracle::random_field(g, 2)};
  auto k = solver.solve(rhs);
  REQUIRE(k.size() == 2);
  CHECK(max_abs_diff(k[0], rhs[0]) <= 1e-13);
  CHECK(max_abs_diff(k[1], rhs[1]) <= 1e-13);
}

TEST_CASE("stage solution satisfies the defining equations in real space") {
  // K_i = B_i + i*tau*sum_j a_ij * Laplacian(K_j), checked with the library
  // laplacian only — no reliance on the solver's own mode decomposition.
  auto check = [](const Grid& g, const ButcherTableau& tab, double tau) {
    SpectralOperator op(g);
    StageSolver solver(op, tab, tau);
    std::vector<ComplexField> rhs;
    for (int i = 0; i < tab.stages; ++i) rhs.push_back(oracle::random_field(g, 40 + i));
    auto k = solver.solve(rhs);
    for (int i = 0; i < tab.stages; ++i) {
      ComplexField recon = rhs[i];
      for (int j = 0; j < tab.stages; ++j) {
        axpy(Complex{0.0, tau * tab.a_at(i, j)}, op.laplacian(k[j]), recon);
      }
      CHECK(max_abs_diff(recon, k[i]) <= 1e-11);
    }
  };
  check(Grid::make_1d(0.0, 2.0 * std::numbers::pi, 16), ButcherTableau::gauss(2), 0.37);
  check(Grid::make_1d(-1.0, 1.0, 32), ButcherTableau::gauss(1), 0.05);
  check(Grid::make_2d(0.0, 2.0, 8, 0.0, 3.0, 8), ButcherTableau::gauss(2), 0.12);
  check(Grid::make_1d(0.0, 1.0, 16), ButcherTableau::gauss(3), 0.021);
}

TEST_CASE("per-mode stage systems match the dense oracle") {
  // A plane-wave right-hand side isolates one mode, so the full solve must
  // reproduce the 2x2 solution of that mode's system.
  Grid g = Grid::make_1d(0.0, 2.0 * std::numbers::pi, 16);
  SpectralOperator op(g);
  ButcherTableau tab = ButcherTableau::gauss(2);
  const double tau = 0.29;
  const int mode = 3;  // sigma = -9
  const cld z{0.0L, tau * (-9.0)};

  const cd w0{0.8, -0.3}, w1{-0.15, 0.55};
  std::vector<ComplexField> rhs = {plane_wave_1d(g, mode, w0), plane_wave_1d(g, mode, w1)};
  auto ks = StageSolver(op, tab, tau).solve(rhs);

  auto ld = [](double x) { return static_cast<long double>(x); };
  std::vector<cld> M = {1.0L - z * ld(tab.a_at(0, 0)), -z * ld(tab.a_at(0, 1)),
                        -z * ld(tab.a_at(1, 0)), 1.0L - z * ld(tab.a_at(1, 1))};
  auto y = oracle::solve_dense(M, {cld(w0.real(), w0.imag()), cld(w1.real(), w1.imag())});

  for (int i = 0; i < 2; ++i) {
    ComplexField expect = plane_wave_1d(
        g, mode, cd(static_cast<double>(y[i].real()), static_cast<double>(y[i].imag())));
    CHECK(max_abs_diff(ks[i], expect) <= 1e-12);
  }
}

TEST_CASE("singular stage matrix is caught and names the mode") {
  // A tableau whose a-matrix has eigenvalues +-i makes I - i*tau*sigma*A
  // singular exactly when |tau*sigma| = 1; on [0, 2pi) mode 1 has sigma = -1,
  // so tau = 1 must trip the pivot guard there.
  ButcherTableau t;
  t.name = "rotation";
  t.stages = 2;
  t.a = {0.0, 1.0, -1.0, 0.0};
  t.b = {0.5, 0.5};
  t.c = {1.0, -1.0};
  t.validate();

  Grid g = Grid::make_1d(0.0, 2.0 * std::numbers::pi, 8);
  SpectralOperator op(g);
  CHECK_NOTHROW(StageSolver(op, t, 0.5));
  try {
    StageSolver solver(op, t, 1.0);
    FAIL("expected SingularModeError");
  } catch (const SingularModeError& e) {
    CHECK(e.mode() == 1);
  }
}

TEST_CASE("stage solver argument validation") {
  Grid g = Grid::make_1d(0.0, 1.0, 8);
  SpectralOperator op(g);
  StageSolver solver(op, ButcherTableau::gauss(2), 0.1);

  std::vector<ComplexField> one = {ComplexField(g)};
  CHECK_THROWS_AS(solver.solve(one), DimensionError);

  Grid g2 = Grid::make_1d(0.0, 1.0, 16);
  std::vector<ComplexField> wrong = {ComplexField(g2), ComplexField(g2)};
  CHECK_THROWS_AS(solver.solve(wrong), DimensionError);

  CHECK_THROWS_AS(StageSolver(op, ButcherTableau::gauss(2), -0.1), ConfigError);
}

TEST_CASE("threaded solve matches serial bit for bit") {
  Grid g = Grid::make_2d(0.0, 1.0, 64, 0.0, 1.0, 64);  // 4096 modes: threshold
  SpectralOperator op(g);
  ButcherTableau tab = ButcherTableau::gauss(2);
  std::vector<ComplexField> rhs = {oracle::random_field(g, 5), oracle::random_field(g, 6)};
  auto serial = StageSolver(op, tab, 0.01, 1).solve(rhs);
  auto threaded = StageSolver(op, tab, 0.01, 4).solve(rhs);
  for (int i = 0; i < 2; ++i) {
    for (std::size_t m = 0; m < serial[i].size(); ++m) {
      CHECK(serial[i][m].real() == threaded[i][m].real());
      CHECK(serial[i][m].imag() == threaded[i][m].imag());
    }
  }
}
