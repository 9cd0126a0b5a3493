#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>

#include "oracle_helpers.hpp"
#include "rlogse/errors.hpp"
#include "rlogse/field.hpp"
#include "rlogse/grid.hpp"
#include "rlogse/model.hpp"
#include "rlogse/spectral.hpp"

using namespace rlogse;
using oracle::cld;

namespace {

// Fully independent long-double energy: O(N^2) DFT for the kinetic part,
// straight summation for the potential part.
long double energy_oracle(const ComplexField& u, const ModelParams& p) {
  const Grid& g = u.grid();
  auto spec = oracle::dft_2d(u.values(), g.nx(), g.ny());
  long double kinetic = 0.0L;
  const long double mux = g.mu_x();
  const long double muy = g.mu_y();
  for (int j = 0; j < g.nx(); ++j) {
    const long double kx = mux * signed_mode(j, g.nx());
    for (int k = 0; k < g.ny(); ++k) {
      const long double ky = muy * signed_mode(k, g.ny());
      kinetic += (kx * kx + ky * ky) * std::norm(spec[g.index(j, k)]);
    }
  }
  kinetic *= static_cast<long double>(g.cell_weight()) /
             static_cast<long double>(g.size());

  long double pot = 0.0L;
  const long double eps = p.epsilon;
  const long double lam = p.lambda;
  for (const Complex& z : u.values()) {
    const long double r = std::abs(z);
    pot += 2.0L * lam * (eps * r + (r * r - eps * eps) * std::log(eps + r));
  }
  pot *= static_cast<long double>(g.cell_weight());
  return kinetic + pot;
}

ComplexField constant_field(const Grid& g, Complex v) {
  ComplexField f(g);
  for (auto& z : f.values()) z = v;
  return f;
}

}  // namespace

TEST_CASE("parameter validation") {
  CHECK_NOTHROW(validate(ModelParams{-1.0, 1e-15}));
  CHECK_NOTHROW(validate(ModelParams{0.0, 1e-12}));  // linear limit is legal
  CHECK_THROWS_AS(validate(ModelParams{-1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(validate(ModelParams{-1.0, -1e-12}), ConfigError);
  CHECK_THROWS_AS(validate(ModelParams{std::nan(""), 1e-12}), ConfigError);
  CHECK_THROWS_AS(validate(ModelParams{-1.0, std::nan("")}), ConfigError);
}

TEST_CASE("nonlinear term: frozen constant-field value") {
  // For u identically e - eps and lambda = 2:
  //   2*lambda*u*ln(eps + |u|) = 4*(e-eps)*ln(e) = 4*(e-eps).
  const double eps = 1e-15;
  const double e = std::numbers::e;
  Grid g = Grid::make_1d(0.0, 1.0, 4);
  ComplexField u = constant_field(g, {e - eps, 0.0});
  ComplexField f = nonlinear_term(u, ModelParams{2.0, eps});
  for (std::size_t i = 0; i < f.size(); ++i) {
    CHECK(f[i].real() == doctest::Approx(4.0 * (e - eps)).epsilon(1e-14));
    CHECK(f[i].imag() == 0.0);
  }
}

TEST_CASE("nonlinear term is finite and zero at u = 0") {
  Grid g = Grid::make_1d(0.0, 1.0, 4);
  ComplexField zero(g);
  ComplexField f = nonlinear_term(zero, ModelParams{-1.0, 1e-15});
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == Complex{0.0, 0.0});
  CHECK(all_finite(f));
}

TEST_CASE("nonlinear term scales with the regularized log of the modulus") {
  // |u| = 1 makes ln(eps + |u|) ~ eps, so the term nearly vanishes; the
  // imaginary direction of u is preserved.
  Grid g = Grid::make_1d(0.0, 1.0, 4);
  ComplexField u = constant_field(g, {0.0, 1.0});
  const double eps = 1e-12;
  ComplexField f = nonlinear_term(u, ModelParams{-3.0, eps});
  const double expect = -6.0 * std::log1p(eps);
  CHECK(f[0].imag() == doctest::Approx(expect).epsilon(1e-10));
  CHECK(f[0].real() == 0.0);
}

TEST_CASE("mass equals the squared norm") {
  Grid g = Grid::make_1d(-16.0, 16.0, 32);
  ComplexField u = constant_field(g, {0.6, -0.8});  // |u| = 1
  CHECK(mass(u) == doctest::Approx(32.0).epsilon(1e-14));
  CHECK(mass(ComplexField(g)) == 0.0);
  ComplexField r = oracle::random_field(g, 4);
  CHECK(mass(r) == doctest::Approx(norm_sq(r)).epsilon(1e-15));
}

TEST_CASE("energy: frozen closed-form values") {
  const double lam = -1.0;

  SUBCASE("zero field on [-16,16): E = -2*lambda*eps^2*ln(eps)*|domain|") {
    const double eps = 1e-15;
    Grid g = Grid::make_1d(-16.0, 16.0, 64);
    SpectralOperator op(g);
    const double expect = -2.0 * lam * eps * eps * std::log(eps) * 32.0;
    CHECK(energy(ComplexField(g), ModelParams{lam, eps}, op) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
  SUBCASE("|u| = 1 - eps: log factor vanishes, only the eps*|u| term remains") {
    const double eps = 1e-15;
    Grid g = Grid::make_1d(-16.0, 16.0, 64);
    SpectralOperator op(g);
    ComplexField u = constant_field(g, {1.0 - eps, 0.0});
    const double expect = 2.0 * eps * lam * (1.0 - eps) * 32.0;
    CHECK(energy(u, ModelParams{lam, eps}, op) ==
          doctest::Approx(expect).epsilon(1e-9));
  }
  SUBCASE("plane wave: kinetic (mu*m)^2*|domain| plus constant potential") {
    const double eps = 1e-12;
    Grid g = Grid::make_1d(0.0, 2.0 * std::numbers::pi, 32);
    SpectralOperator op(g);
    ComplexField u(g);
    for (int j = 0; j < g.nx(); ++j) {
      u.at(j, 0) = std::exp(Complex{0.0, 2.0 * g.x(j)});  // m = 2, mu = 1
    }
    const double measure = 2.0 * std::numbers::pi;
    const double expect = 4.0 * measure +
                          (2.0 * eps * lam + 2.0 * lam * (1.0 - eps * eps) *
                                                 std::log1p(eps)) *
                              measure;
    CHECK(energy(u, ModelParams{lam, eps}, op) ==
          doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("energy matches the independent extended-precision oracle") {
  const ModelParams p{-1.0, 1e-13};
  SUBCASE("1-D random field") {
    Grid g = Grid::make_1d(-4.0, 4.0, 32);
    SpectralOperator op(g);
    ComplexField u = oracle::random_field(g, 77);
    const long double ref = energy_oracle(u, p);
    CHECK(energy(u, p, op) ==
          doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }
  SUBCASE("2-D random field, non-square box") {
    Grid g = Grid::make_2d(-2.0, 2.0, 16, 0.0, 3.0, 8);
    SpectralOperator op(g);
    ComplexField u = oracle::random_field(g, 78);
    const long double ref = energy_oracle(u, p);
    CHECK(energy(u, p, op) ==
          doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }
  SUBCASE("positive lambda flips the potential sign consistently") {
    Grid g = Grid::make_1d(-4.0, 4.0, 32);
    SpectralOperator op(g);
    ComplexField u = oracle::random_field(g, 79);
    const ModelParams q{2.5, 1e-13};
    const long double ref = energy_oracle(u, q);
    CHECK(energy(u, q, op) ==
          doctest::Approx(static_cast<double>(ref)).epsilon(1e-12));
  }
}

TEST_CASE("energy assembles from its kinetic and potential parts") {
  Grid g = Grid::make_1d(0.0, 1.0, 16);
  SpectralOperator op(g);
  const ModelParams p{-1.0, 1e-12};
  ComplexField u = oracle::random_field(g, 5);
  const double k = kinetic_energy_from_spectrum(op.forward(u), op);
  const double v = potential_energy(u, p);
  CHECK(energy(u, p, op) == doctest::Approx(k + v).epsilon(1e-15));
  // kinetic part is also -<Lap u, u>_h (Parseval, both through the library)
  CHECK(k == doctest::Approx(-inner_product(op.laplacian(u), u).real())
                 .epsilon(1e-12));
}

TEST_CASE("grad_mass is the field itself") {
  Grid g = Grid::make_1d(0.0, 1.0, 8);
  ComplexField u = oracle::random_field(g, 3);
  ComplexField gm = grad_mass(u);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(gm[i] == u[i]);
}

TEST_CASE("gradients are the variational derivatives: finite differences") {
  // Central difference of the functional along a random direction v must
  // match 2*Re<v, grad>_h. This pins both the formula and the 2-Re
  // convention used by the correction stage's Jacobian.
  auto directional = [](auto&& functional, const ComplexField& u,
                        const ComplexField& v, double h) {
    ComplexField up = u;
    axpy(Complex{h, 0.0}, v, up);
    ComplexField dn = u;
    axpy(Complex{-h, 0.0}, v, dn);
    return (functional(up) - functional(dn)) / (2.0 * h);
  };

  Grid g = Grid::make_2d(-2.0, 2.0, 8, -1.0, 1.0, 8);
  SpectralOperator op(g);
  const ModelParams p{-1.3, 1e-10};
  // offset keeps |u| away from 0 so the FD sees the smooth branch
  ComplexField u = oracle::random_field(g, 21);
  for (auto& z : u.values()) z += Complex{1.5, 0.0};
  ComplexField v = oracle::random_field(g, 22);

  SUBCASE("mass") {
    const double fd = directional([](const ComplexField& w) { return mass(w); },
                                  u, v, 1e-6);
    const double an = 2.0 * inner_product(v, grad_mass(u)).real();
    CHECK(fd == doctest::Approx(an).epsilon(1e-9));
  }
  SUBCASE("energy") {
    const double fd = directional(
        [&](const ComplexField& w) { return energy(w, p, op); }, u, v, 1e-6);
    const double an = 2.0 * inner_product(v, grad_energy(u, p, op)).real();
    CHECK(fd == doctest::Approx(an).epsilon(3e-7));
  }
}

TEST_CASE("grad_energy of a plane wave is a scalar multiple of it") {
  // -Lap u = (mu*m)^2 u and |u| = 1 pointwise, so
  // grad_energy = ((mu*m)^2 + 2*lambda*ln(eps+1) + lambda) u.
  const double lam = -1.0;
  const double eps = 1e-12;
  Grid g = Grid::make_1d(0.0, 2.0 * std::numbers::pi, 32);
  SpectralOperator op(g);
  ComplexField u(g);
  for (int j = 0; j < g.nx(); ++j) {
    u.at(j, 0) = std::exp(Complex{0.0, 3.0 * g.x(j)});
  }
  const double factor = 9.0 + 2.0 * lam * std::log1p(eps) + lam;
  ComplexField ge = grad_energy(u, ModelParams{lam, eps}, op);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(std::abs(ge[i] - factor * u[i]) <= 1e-10);
  }
}

TEST_CASE("grad_energy is finite (and zero) at the zero field") {
  Grid g = Grid::make_1d(0.0, 1.0, 8);
  SpectralOperator op(g);
  ComplexField ge = grad_energy(ComplexField(g), ModelParams{-1.0, 1e-15}, op);
  CHECK(all_finite(ge));
  for (std::size_t i = 0; i < ge.size(); ++i) {
    CHECK(std::abs(ge[i]) <= 1e-15);
  }
}

TEST_CASE("grad_energy decomposes into local part minus laplacian") {
  Grid g = Grid::make_1d(-1.0, 3.0, 16);
  SpectralOperator op(g);
  const ModelParams p{0.7, 1e-11};
  ComplexField u = oracle::random_field(g, 9);
  ComplexField whole = grad_energy(u, p, op);
  ComplexField parts = grad_energy_local(u, p);
  axpy(Complex{-1.0, 0.0}, op.laplacian(u), parts);
  for (std::size_t i = 0; i < u.size(); ++i) {
    CHECK(std::abs(whole[i] - parts[i]) <= 1e-15);
  }
}

TEST_CASE("model operations reject mismatched grids") {
  Grid g1 = Grid::make_1d(0.0, 1.0, 8);
  Grid g2 = Grid::make_1d(0.0, 1.0, 16);
  SpectralOperator op(g1);
  ComplexField u(g2);
  const ModelParams p{-1.0, 1e-12};
  CHECK_THROWS_AS(energy(u, p, op), DimensionError);
  CHECK_THROWS_AS(grad_energy(u, p, op), DimensionError);
}

TEST_CASE("invalid parameters are rejected at the model boundary") {
  Grid g = Grid::make_1d(0.0, 1.0, 8);
  SpectralOperator op(g);
  ComplexField u(g);
  CHECK_THROWS_AS(nonlinear_term(u, ModelParams{-1.0, 0.0}), ConfigError);
  CHECK_THROWS_AS(energy(u, ModelParams{-1.0, -1.0}, op), ConfigError);
  CHECK_THROWS_AS(grad_energy(u, ModelParams{-1.0, 0.0}, op), ConfigError);
}
