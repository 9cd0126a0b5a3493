#pragma once

#include <string>
#include <vector>

namespace rlogse {

// Butcher tableau of an implicit Runge-Kutta method. Row-major a, size
// stages x stages. The solver assumes nothing about structure beyond what
// validate() checks, but conservation of the corrected step relies on the
// symplecticity identity b_i a_ij + b_j a_ji = b_i b_j, which holds for the
// Gauss collocation family provided here.
struct ButcherTableau {
  std::string name;
  int stages = 0;
  std::vector<double> a;
  std::vector<double> b;
  std::vector<double> c;

  double a_at(int i, int j) const { return a[static_cast<std::size_t>(i) * stages + j]; }

  // Throws ConfigError on inconsistent sizes, row sums that do not match c,
  // or weights that do not sum to 1.
  void validate() const;

  // Gauss collocation with `stages` in {1, 2, 3}; classical order 2*stages.
  static ButcherTableau gauss(int stages);
};

}  // namespace rlogse
