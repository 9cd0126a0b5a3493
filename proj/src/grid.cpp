#include "rlogse/grid.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "rlogse/errors.hpp"

namespace rlogse {

namespace {

void check_axis(const char* axis, double lo, double hi, int n) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    std::ostringstream os;
    os << axis << "-axis bounds must be finite with lo < hi, got [" << lo
       << ", " << hi << ")";
    throw ConfigError(os.str());
  }
  if (n < 4 || n % 2 != 0) {
    std::ostringstream os;
    os << axis << "-axis node count must be an even integer >= 4, got " << n;
    throw ConfigError(os.str());
  }
}

}  // namespace

Grid Grid::make_1d(double x_lo, double x_hi, int nx) {
  check_axis("x", x_lo, x_hi, nx);
  Data d{};
  d.dims = 1;
  d.nx = nx;
  d.ny = 1;
  d.x_lo = x_lo;
  d.x_hi = x_hi;
  d.y_lo = 0.0;
  d.y_hi = 1.0;
  d.hx = (x_hi - x_lo) / nx;
  d.hy = 1.0;
  d.mu_x = 2.0 * std::numbers::pi / (x_hi - x_lo);
  d.mu_y = 0.0;
  return Grid(d);
}

Grid Grid::make_2d(double x_lo, double x_hi, int nx,
                   double y_lo, double y_hi, int ny) {
  check_axis("x", x_lo, x_hi, nx);
  check_axis("y", y_lo, y_hi, ny);
  Data d{};
  d.dims = 2;
  d.nx = nx;
  d.ny = ny;
  d.x_lo = x_lo;
  d.x_hi = x_hi;
  d.y_lo = y_lo;
  d.y_hi = y_hi;
  d.hx = (x_hi - x_lo) / nx;
  d.hy = (y_hi - y_lo) / ny;
  d.mu_x = 2.0 * std::numbers::pi / (x_hi - x_lo);
  d.mu_y = 2.0 * std::numbers::pi / (y_hi - y_lo);
  return Grid(d);
}

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
  if (a != b) {
    std::ostringstream os;
    os << context << ": fields live on different grids (" << a.nx() << "x"
       << a.ny() << " vs " << b.nx() << "x" << b.ny() << ")";
    throw DimensionError(os.str());
  }
}

}  // namespace rlogse
