#pragma once

#include <functional>
#include <vector>

namespace nullctrl {

/// Fixed nodes and weights on (0,1] with an embedded lower-order rule for
/// error estimation. Panels are graded geometrically toward x = 0 and
/// subdivided on [1/2, 1] to follow oscillation.
struct UnitRule {
  std::vector<double> x;
  std::vector<double> w;      // Kronrod weights
  std::vector<double> w_low;  // embedded Gauss weights (0 where absent)
  int levels = 40;
};

/// The integrand is assumed to oscillate like cos(freq * x^kappa); panel
/// counts follow the number of half-periods on each dyadic interval.
UnitRule graded_unit_rule(double freq, double kappa, int levels = 40);

struct RuleResult {
  double value = 0.0;
  double error = 0.0;  // |Kronrod - Gauss|
};

RuleResult apply_rule(const UnitRule& rule, const std::vector<double>& fx);

/// Composite Gauss-Legendre nodes on [a,b] with n panels of `order` points.
void gauss_panels(double a, double b, int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace nullctrl
