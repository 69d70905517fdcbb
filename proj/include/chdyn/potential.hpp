#pragma once

#include <functional>
#include <string>
#include <utility>

namespace chdyn {

/// A potential W together with a convex-concave splitting W = W₊ - W₋.
///
/// First-order schemes treat `convex_derivative` implicitly and
/// `concave_derivative` explicitly; the second derivatives feed the Newton
/// Jacobian. Both parts must be convex for the scheme to dissipate energy.
struct PotentialSplit {
  using Fn = std::function<double(double)>;

  std::string name;
  Fn value;
  Fn derivative;
  Fn convex_value;
  Fn concave_value;
  Fn convex_derivative;
  Fn concave_derivative;
  Fn convex_second_derivative;
  Fn concave_second_derivative;

  [[nodiscard]] bool is_double_well() const { return name == "double_well"; }
};

/// W(u) = (u² - 1)² / 4 split as W₊ = (u⁴ + 1) / 4, W₋ = u² / 2.
PotentialSplit double_well();

/// Secant slope of the double well between a and b:
/// s(a, b) = ((a² + b²)/2 - 1)(a + b)/2, so that s(a, b)(b - a) = W(b) - W(a).
double cn_slope(double a, double b);

/// (∂s/∂a, ∂s/∂b)
std::pair<double, double> cn_slope_partials(double a, double b);

}  // namespace chdyn
