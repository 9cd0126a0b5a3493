#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "rlogse/field.hpp"
#include "rlogse/grid.hpp"
#include "rlogse/tableau.hpp"

// Opaque FFTW handle; keeps <fftw3.h> out of public headers.
struct fftw_plan_s;

namespace rlogse {

// Signed mode number for DFT bin `index` of an n-point transform:
// 0..n/2 map to themselves, n/2+1..n-1 map to index-n.
int signed_mode(int index, int n);

// Symbol table of d^order/dx^order for an n-point axis with fundamental
// wavenumber mu: entry l is (i*mu*l~)^order with l~ = signed_mode(l, n).
// Odd orders zero the Nyquist bin (its derivative is not representable with
// a consistent sign); even orders keep it, so the Laplacian sees the full
// resolved spectrum.
std::vector<Complex> derivative_symbols(int n, double mu, int order);

// Fourier pseudo-spectral workhorse bound to one grid: unnormalized forward
// transform, 1/(nx*ny)-normalized inverse, and the (real, nonpositive)
// Laplacian symbol table.
//
// Thread safety: const methods are safe to call concurrently; construction
// and destruction serialize on a global planner lock. Transform workspaces
// are allocated per call, so one operator may be used reentrantly.
class SpectralOperator {
 public:
  explicit SpectralOperator(Grid grid);
  ~SpectralOperator();
  SpectralOperator(SpectralOperator&&) noexcept;
  SpectralOperator& operator=(SpectralOperator&&) noexcept;
  SpectralOperator(const SpectralOperator&) = delete;
  SpectralOperator& operator=(const SpectralOperator&) = delete;

  const Grid& grid() const noexcept { return grid_; }

  // out_l = sum_j in_j exp(-i*...), no normalization.
  void forward(std::span<const Complex> in, std::span<Complex> out) const;
  // Inverse of forward, including the 1/(nx*ny) factor.
  void inverse(std::span<const Complex> in, std::span<Complex> out) const;

  std::vector<Complex> forward(const ComplexField& u) const;
  ComplexField inverse_to_field(std::span<const Complex> spectrum) const;

  // Laplacian symbol sigma_m = -(mu_x*lx~)^2 - (mu_y*ly~)^2, row-major over
  // modes; all entries are <= 0 and sigma_0 == 0.
  std::span<const double> laplacian_symbols() const noexcept { return sigma_; }

  ComplexField laplacian(const ComplexField& u) const;

 private:
  Grid grid_;
  fftw_plan_s* fwd_ = nullptr;
  fftw_plan_s* bwd_ = nullptr;
  std::vector<double> sigma_;
};

// Precomputed per-mode LU factorizations of the stage system
//   (I_s - i*tau*sigma_m*A) K^_m = B^_m,
// one small dense complex system per Fourier mode m, shared by every solve
// with the same (grid, tableau, tau). Construction factors every mode once;
// solve() is then s forward transforms, a per-mode substitution sweep, and
// s inverse transforms.
class StageSolver {
 public:
  StageSolver(const SpectralOperator& op, const ButcherTableau& tableau,
              double tau, int threads = 1);

  int stages() const noexcept { return stages_; }
  double tau() const noexcept { return tau_; }

  // rhs.size() must equal stages(); returns the stage fields K_i satisfying
  // K_i = rhs_i + i*tau*sum_j a_ij*Laplacian(K_j).
  std::vector<ComplexField> solve(std::span<const ComplexField> rhs) const;

  // Solves the same system but returns only the weighted combination
  // sum_i w_i K_i, in real space together with its (unnormalized) spectrum.
  // Costs s forward transforms and a single inverse one.
  struct Combined {
    ComplexField field;
    std::vector<Complex> spectrum;
  };
  Combined solve_weighted(std::span<const ComplexField> rhs,
                          std::span<const double> weights) const;

 private:
  void substitute_mode(std::size_t m, Complex* x) const;
  const SpectralOperator* op_;
  int stages_;
  double tau_;
  int threads_;
  std::vector<Complex> lu_;       // modes x s x s, factored in place
  std::vector<std::uint8_t> piv_; // modes x s pivot rows
};

}  // namespace rlogse
