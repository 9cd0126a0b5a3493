#include "rlogse/field.hpp"

#include <sstream>

#include "rlogse/errors.hpp"

namespace rlogse {

ComplexField::ComplexField(Grid grid, std::vector<Complex> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    std::ostringstream os;
    os << "field data has " << values_.size() << " entries but the grid has "
       << grid_.size() << " nodes";
    throw DimensionError(os.str());
  }
}

ComplexField operator+(const ComplexField& u, const ComplexField& v) {
  return zip(u, v, [](Complex a, Complex b) { return a + b; });
}

ComplexField operator-(const ComplexField& u, const ComplexField& v) {
  return zip(u, v, [](Complex a, Complex b) { return a - b; });
}

ComplexField operator-(const ComplexField& u) {
  return map(u, [](Complex a) { return -a; });
}

ComplexField operator*(Complex alpha, const ComplexField& u) {
  return map(u, [alpha](Complex a) { return alpha * a; });
}

ComplexField operator*(double alpha, const ComplexField& u) {
  return map(u, [alpha](Complex a) { return alpha * a; });
}

void axpy(Complex alpha, const ComplexField& x, ComplexField& y) {
  require_same_grid(x.grid(), y.grid(), "axpy");
  auto xs = x.values();
  auto ys = y.values();
  for (std::size_t i = 0; i < xs.size(); ++i) ys[i] += alpha * xs[i];
}

ComplexField hadamard(const ComplexField& u, const ComplexField& v) {
  return zip(u, v, [](Complex a, Complex b) { return a * b; });
}

ComplexField abs_field(const ComplexField& u) {
  return map(u, [](Complex a) { return Complex{std::abs(a), 0.0}; });
}

ComplexField log_shifted_abs(const ComplexField& u, double shift) {
  if (!(shift > 0.0)) {
    std::ostringstream os;
    os << "log_shifted_abs requires a positive shift, got " << shift;
    throw ConfigError(os.str());
  }
  return map(u, [shift](Complex a) {
    return Complex{std::log(shift + std::abs(a)), 0.0};
  });
}

Complex inner_product(const ComplexField& u, const ComplexField& v) {
  require_same_grid(u.grid(), v.grid(), "inner_product");
  auto a = u.values();
  auto b = v.values();
  KahanSum re;
  KahanSum im;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Complex p = a[i] * std::conj(b[i]);
    re.add(p.real());
    im.add(p.imag());
  }
  const long double w = u.grid().cell_weight();
  return Complex{static_cast<double>(w * re.value()),
                 static_cast<double>(w * im.value())};
}

double norm_sq(const ComplexField& u) {
  auto a = u.values();
  KahanSum s;
  for (const Complex& z : a) s.add(std::norm(z));
  return static_cast<double>(static_cast<long double>(u.grid().cell_weight()) *
                             s.value());
}

bool all_finite(const ComplexField& u) noexcept {
  for (const Complex& z : u.values()) {
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

}  // namespace rlogse
