#include "chdyn/potential.hpp"

namespace chdyn {

PotentialSplit double_well() {
  PotentialSplit w;
  w.name = "double_well";
  w.value = [](double u) {
    const double d = u * u - 1.0;
    return 0.25 * d * d;
  };
  w.derivative = [](double u) { return (u * u - 1.0) * u; };
  w.convex_value = [](double u) { return 0.25 * (u * u * u * u + 1.0); };
  w.concave_value = [](double u) { return 0.5 * u * u; };
  w.convex_derivative = [](double u) { return u * u * u; };
  w.concave_derivative = [](double u) { return u; };
  w.convex_second_derivative = [](double u) { return 3.0 * u * u; };
  w.concave_second_derivative = [](double) { return 1.0; };
  return w;
}

double cn_slope(double a, double b) { return (0.5 * (a * a + b * b) - 1.0) * 0.5 * (a + b); }

std::pair<double, double> cn_slope_partials(double a, double b) {
  const double shape = 0.5 * (a * a + b * b) - 1.0;
  const double mid = 0.5 * (a + b);
  return {a * mid + 0.5 * shape, b * mid + 0.5 * shape};
}

}  // namespace chdyn
