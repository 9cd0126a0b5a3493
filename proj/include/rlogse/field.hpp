#pragma once

#include <cmath>
#include <complex>
#include <span>
#include <utility>
#include <vector>

#include "rlogse/grid.hpp"

namespace rlogse {

using Complex = std::complex<double>;

// Compensated (Kahan) accumulator in extended precision. Discrete inner
// products feed conservation residuals that must hold to ~1e-12 relative
// over 1e4..1e6 nodes and 1e4+ steps, so plain double accumulation is not
// enough headroom.
class KahanSum {
 public:
  void add(long double x) noexcept {
    const long double y = x - c_;
    const long double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  long double value() const noexcept { return s_; }

 private:
  long double s_ = 0.0L;
  long double c_ = 0.0L;
};

// Complex samples on a Grid, row-major: value(j, k) = values[j*ny + k].
class ComplexField {
 public:
  explicit ComplexField(Grid grid)
      : grid_(std::move(grid)), values_(grid_.size(), Complex{0.0, 0.0}) {}

  ComplexField(Grid grid, std::vector<Complex> values);

  const Grid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<Complex> values() noexcept { return values_; }
  std::span<const Complex> values() const noexcept { return values_; }

  Complex& operator[](std::size_t i) noexcept { return values_[i]; }
  const Complex& operator[](std::size_t i) const noexcept { return values_[i]; }

  Complex& at(int j, int k) noexcept { return values_[grid_.index(j, k)]; }
  const Complex& at(int j, int k) const noexcept {
    return values_[grid_.index(j, k)];
  }

 private:
  Grid grid_;
  std::vector<Complex> values_;
};

// --- elementwise construction helpers -------------------------------------

template <class F>
ComplexField map(const ComplexField& u, F f) {
  ComplexField out(u.grid());
  auto src = u.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = f(src[i]);
  return out;
}

template <class F>
ComplexField zip(const ComplexField& u, const ComplexField& v, F f) {
  require_same_grid(u.grid(), v.grid(), "zip");
  ComplexField out(u.grid());
  auto a = u.values();
  auto b = v.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < a.size(); ++i) dst[i] = f(a[i], b[i]);
  return out;
}

// --- arithmetic ------------------------------------------------------------

ComplexField operator+(const ComplexField& u, const ComplexField& v);
ComplexField operator-(const ComplexField& u, const ComplexField& v);
ComplexField operator-(const ComplexField& u);
ComplexField operator*(Complex alpha, const ComplexField& u);
ComplexField operator*(double alpha, const ComplexField& u);

// y += alpha * x
void axpy(Complex alpha, const ComplexField& x, ComplexField& y);

// Pointwise product u .* v.
ComplexField hadamard(const ComplexField& u, const ComplexField& v);

// Pointwise |u| (stored with zero imaginary part).
ComplexField abs_field(const ComplexField& u);

// Pointwise ln(shift + |u|); shift must be > 0 so the map is finite at 0.
ComplexField log_shifted_abs(const ComplexField& u, double shift);

// --- reductions ------------------------------------------------------------

// Discrete inner product <u, v> = hx*hy * sum_i u_i * conj(v_i).
Complex inner_product(const ComplexField& u, const ComplexField& v);

// <u, u>, returned as a real number.
double norm_sq(const ComplexField& u);

bool all_finite(const ComplexField& u) noexcept;

}  // namespace rlogse
