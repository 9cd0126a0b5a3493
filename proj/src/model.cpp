#include "rlogse/model.hpp"

#include <cmath>
#include <sstream>

#include "rlogse/errors.hpp"

namespace rlogse {

void validate(const ModelParams& p) {
  if (!std::isfinite(p.lambda)) {
    throw ConfigError("model: lambda must be finite");
  }
  if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon)) {
    std::ostringstream os;
    os << "model: epsilon must be a positive finite number, got " << p.epsilon;
    throw ConfigError(os.str());
  }
}

ComplexField nonlinear_term(const ComplexField& u, const ModelParams& p) {
  validate(p);
  const double lam = p.lambda;
  const double eps = p.epsilon;
  return map(u, [lam, eps](Complex z) {
    return 2.0 * lam * std::log(eps + std::abs(z)) * z;
  });
}

double mass(const ComplexField& u) { return norm_sq(u); }

double kinetic_energy_from_spectrum(std::span<const Complex> spectrum,
                                    const SpectralOperator& op) {
  const auto sigma = op.laplacian_symbols();
  if (spectrum.size() != sigma.size()) {
    throw DimensionError("kinetic energy: spectrum size does not match grid");
  }
  KahanSum acc;
  for (std::size_t m = 0; m < spectrum.size(); ++m) {
    acc.add(static_cast<long double>(-sigma[m]) * std::norm(spectrum[m]));
  }
  const Grid& g = op.grid();
  const long double scale = static_cast<long double>(g.cell_weight()) /
                            static_cast<long double>(g.size());
  return static_cast<double>(scale * acc.value());
}

double potential_energy(const ComplexField& u, const ModelParams& p) {
  validate(p);
  const double lam = p.lambda;
  const double eps = p.epsilon;
  KahanSum acc;
  const long double le = eps;
  for (const Complex& z : u.values()) {
    const long double r = std::abs(z);
    acc.add(2.0L * lam * (le * r + (r * r - le * le) * std::log(le + r)));
  }
  return static_cast<double>(static_cast<long double>(u.grid().cell_weight()) *
                             acc.value());
}

double energy(const ComplexField& u, const ModelParams& p,
              const SpectralOperator& op) {
  require_same_grid(u.grid(), op.grid(), "energy");
  return kinetic_energy_from_spectrum(op.forward(u), op) +
         potential_energy(u, p);
}

ComplexField grad_mass(const ComplexField& u) { return u; }

ComplexField grad_energy_local(const ComplexField& u, const ModelParams& p) {
  validate(p);
  const double lam = p.lambda;
  const double eps = p.epsilon;
  return map(u, [lam, eps](Complex z) {
    return (2.0 * lam * std::log(eps + std::abs(z)) + lam) * z;
  });
}

ComplexField grad_energy(const ComplexField& u, const ModelParams& p,
                         const SpectralOperator& op) {
  require_same_grid(u.grid(), op.grid(), "grad_energy");
  ComplexField g = grad_energy_local(u, p);
  axpy(Complex{-1.0, 0.0}, op.laplacian(u), g);
  return g;
}

}  // namespace rlogse
