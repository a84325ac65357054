#include "hrtsim/rng.hpp"

#include <cmath>
#include <numbers>

namespace hrtsim {

double Rng::normal(double mean, double sd) {
  // u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - uniform01();
  const double u2 = uniform01();
  const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  return mean + sd * z;
}

}  // namespace hrtsim
