#pragma once

#include <cstddef>
#include <memory>

namespace rlogse {

// Uniform periodic grid on [x_lo, x_hi) x [y_lo, y_hi), node-at-left-edge
// convention: x_j = x_lo + j*hx for j = 0..nx-1 (the right endpoint is the
// periodic image of the left one and carries no node).
//
// One-dimensional problems are stored as ny == 1 with a unit dummy y-axis, so
// every consumer can run a single 2-D code path. Values associated with a
// grid are laid out row-major: index(j, k) = j*ny + k.
//
// Grid is an immutable value type; copies share state and compare cheaply.
class Grid {
 public:
  static Grid make_1d(double x_lo, double x_hi, int nx);
  static Grid make_2d(double x_lo, double x_hi, int nx,
                      double y_lo, double y_hi, int ny);

  int dims() const noexcept { return d_->dims; }
  int nx() const noexcept { return d_->nx; }
  int ny() const noexcept { return d_->ny; }
  std::size_t size() const noexcept {
    return static_cast<std::size_t>(d_->nx) * static_cast<std::size_t>(d_->ny);
  }

  double x_lo() const noexcept { return d_->x_lo; }
  double x_hi() const noexcept { return d_->x_hi; }
  double y_lo() const noexcept { return d_->y_lo; }
  double y_hi() const noexcept { return d_->y_hi; }

  double hx() const noexcept { return d_->hx; }
  double hy() const noexcept { return d_->hy; }

  // Fundamental wavenumbers 2*pi/L per axis (0 for the dummy axis of a 1-D
  // grid, where no derivative is ever taken).
  double mu_x() const noexcept { return d_->mu_x; }
  double mu_y() const noexcept { return d_->mu_y; }

  double x(int j) const noexcept { return d_->x_lo + j * d_->hx; }
  double y(int k) const noexcept { return d_->y_lo + k * d_->hy; }

  // Quadrature weight of one node: hx*hy (hy == 1 in 1-D).
  double cell_weight() const noexcept { return d_->hx * d_->hy; }
  // Measure of the full domain.
  double measure() const noexcept { return cell_weight() * size(); }

  std::size_t index(int j, int k) const noexcept {
    return static_cast<std::size_t>(j) * d_->ny + k;
  }

  friend bool operator==(const Grid& a, const Grid& b) noexcept {
    if (a.d_ == b.d_) return true;
    const Data& p = *a.d_;
    const Data& q = *b.d_;
    return p.dims == q.dims && p.nx == q.nx && p.ny == q.ny &&
           p.x_lo == q.x_lo && p.x_hi == q.x_hi && p.y_lo == q.y_lo &&
           p.y_hi == q.y_hi;
  }
  friend bool operator!=(const Grid& a, const Grid& b) noexcept { return !(a == b); }

 private:
  struct Data {
    int dims, nx, ny;
    double x_lo, x_hi, y_lo, y_hi;
    double hx, hy, mu_x, mu_y;
  };
  explicit Grid(Data d) : d_(std::make_shared<const Data>(d)) {}
  std::shared_ptr<const Data> d_;
};

// Throws DimensionError when the two grids differ.
void require_same_grid(const Grid& a, const Grid& b, const char* context);

}  // namespace rlogse
