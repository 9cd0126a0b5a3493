#include "rlogse/tableau.hpp"

#include <cmath>
#include <sstream>

#include "rlogse/errors.hpp"

namespace rlogse {

void ButcherTableau::validate() const {
  const auto s = static_cast<std::size_t>(stages);
  if (stages < 1 || stages > 4) {
    throw ConfigError("tableau '" + name + "': stage count must be in 1..4");
  }
  if (a.size() != s * s || b.size() != s || c.size() != s) {
    throw ConfigError("tableau '" + name + "': coefficient arrays have wrong sizes");
  }
  const double tol = 1e-14;
  double bsum = 0.0;
  for (int i = 0; i < stages; ++i) {
    bsum += b[i];
    double row = 0.0;
    for (int j = 0; j < stages; ++j) row += a_at(i, j);
    if (std::abs(row - c[i]) > tol) {
      std::ostringstream os;
      os << "tableau '" << name << "': row " << i << " of a sums to " << row
         << " but c[" << i << "] = " << c[i];
      throw ConfigError(os.str());
    }
  }
  if (std::abs(bsum - 1.0) > tol) {
    std::ostringstream os;
    os << "tableau '" << name << "': weights sum to " << bsum;
    throw ConfigError(os.str());
  }
}

ButcherTableau ButcherTableau::gauss(int stages) {
  ButcherTableau t;
  t.stages = stages;
  switch (stages) {
    case 1: {
      t.name = "gauss1";
      t.a = {0.5};
      t.b = {1.0};
      t.c = {0.5};
      break;
    }
    case 2: {
      t.name = "gauss2";
      const double r = std::sqrt(3.0) / 6.0;
      t.a = {0.25, 0.25 - r,
             0.25 + r, 0.25};
      t.b = {0.5, 0.5};
      t.c = {0.5 - r, 0.5 + r};
      break;
    }
    case 3: {
      t.name = "gauss3";
      const double r15 = std::sqrt(15.0);
      t.a = {5.0 / 36.0,            2.0 / 9.0 - r15 / 15.0, 5.0 / 36.0 - r15 / 30.0,
             5.0 / 36.0 + r15 / 24.0, 2.0 / 9.0,            5.0 / 36.0 - r15 / 24.0,
             5.0 / 36.0 + r15 / 30.0, 2.0 / 9.0 + r15 / 15.0, 5.0 / 36.0};
      t.b = {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0};
      t.c = {0.5 - r15 / 10.0, 0.5, 0.5 + r15 / 10.0};
      break;
    }
    default:
      throw ConfigError("gauss tableau: stage count must be 1, 2, or 3");
  }
  t.validate();
  return t;
}

}  // namespace rlogse
