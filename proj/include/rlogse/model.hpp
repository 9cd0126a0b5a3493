#pragma once

#include <span>

#include "rlogse/field.hpp"
#include "rlogse/spectral.hpp"

namespace rlogse {

// Parameters of i u_t + Lap u = lambda * u * ln((eps + |u|)^2) on a periodic
// box. epsilon > 0 keeps the logarithm finite at u = 0; lambda = 0 is the
// linear limit and is accepted by the library (catalogued studies always use
// lambda != 0).
struct ModelParams {
  double lambda = -1.0;
  double epsilon = 1e-12;
};

// Throws ConfigError unless epsilon > 0 and both entries are finite.
void validate(const ModelParams& p);

// lambda * u * ln((eps+|u|)^2) = 2*lambda*u*ln(eps+|u|); finite everywhere,
// and exactly 0 where u = 0.
ComplexField nonlinear_term(const ComplexField& u, const ModelParams& p);

// M(u) = <u, u>_h.
double mass(const ComplexField& u);

// E(u) = -<Lap u, u>_h
//        + <2*eps*lambda*|u| + 2*lambda*(|u|^2 - eps^2) .* ln(eps+|u|), 1>_h.
// The kinetic term is evaluated as the symbol-weighted spectral sum, which
// equals -<Lap u, u>_h identically for the discrete operator.
double energy(const ComplexField& u, const ModelParams& p,
              const SpectralOperator& op);

// Kinetic part sum_m (-sigma_m) |spectrum_m|^2 * hx*hy/(nx*ny), taking an
// already-computed unnormalized forward transform.
double kinetic_energy_from_spectrum(std::span<const Complex> spectrum,
                                    const SpectralOperator& op);

// Potential part of the energy (everything except the kinetic term).
double potential_energy(const ComplexField& u, const ModelParams& p);

// Variational derivative of M with respect to conj(u): just u.
ComplexField grad_mass(const ComplexField& u);

// Variational derivative of E with respect to conj(u):
//   -Lap u + 2*lambda*u*ln(eps+|u|) + lambda*u.
// The modulus-derivative terms (+-eps*lambda*u/|u|) cancel analytically, so
// no 0/0 arises at u = 0 and the gradient is continuous (and 0) there.
ComplexField grad_energy(const ComplexField& u, const ModelParams& p,
                         const SpectralOperator& op);

// The FFT-free part of grad_energy: grad_energy(u) + Lap u. Used where the
// Laplacian contribution is assembled in Fourier space instead.
ComplexField grad_energy_local(const ComplexField& u, const ModelParams& p);

}  // namespace rlogse
