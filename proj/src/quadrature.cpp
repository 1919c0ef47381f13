#include "nullctrl/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nullctrl {

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
using GL = boost::math::quadrature::gauss<double, 20>;

void add_gk_panel(UnitRule& r, double a, double b) {
  const auto& xa = GK::abscissa();
  const auto& wk = GK::weights();
  const auto& wg = boost::math::quadrature::gauss<double, 10>::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  // Kronrod abscissae: odd indices are the embedded Gauss points
  for (std::size_t i = 0; i < xa.size(); ++i) {
    double wgi = (i % 2 == 1) ? wg[i / 2] : 0.0;
    if (i == 0) {
      r.x.push_back(c);
      r.w.push_back(h * wk[0]);
      r.w_low.push_back(0.0);
      continue;
    }
    for (int s : {-1, 1}) {
      r.x.push_back(c + s * h * xa[i]);
      r.w.push_back(h * wk[i]);
      r.w_low.push_back(h * wgi);
    }
  }
}

}  // namespace

UnitRule graded_unit_rule(double freq, double kappa, int levels) {
  if (levels < 1 || levels > 60) throw std::invalid_argument("graded_unit_rule: levels out of range");
  if (!(freq >= 0.0) || !(kappa > 0.0)) throw std::invalid_argument("graded_unit_rule: bad oscillation model");
  UnitRule r;
  r.levels = levels;
  for (int i = levels - 1; i >= 0; --i) {
    double a = std::ldexp(1.0, -i - 1), b = std::ldexp(1.0, -i);
    double osc = freq * (std::pow(b, kappa) - std::pow(a, kappa)) / std::numbers::pi;
    int n = std::max(2, static_cast<int>(std::ceil(osc)) + 1);
    for (int p = 0; p < n; ++p) add_gk_panel(r, a + (b - a) * p / n, a + (b - a) * (p + 1) / n);
  }
  return r;
}

RuleResult apply_rule(const UnitRule& rule, const std::vector<double>& fx) {
  if (fx.size() != rule.x.size()) throw std::invalid_argument("apply_rule: size mismatch");
  double hi = 0.0, lo = 0.0;
  for (std::size_t i = 0; i < fx.size(); ++i) {
    hi += rule.w[i] * fx[i];
    lo += rule.w_low[i] * fx[i];
  }
  return {hi, std::fabs(hi - lo)};
}

void gauss_panels(double a, double b, int n, std::vector<double>& x, std::vector<double>& w) {
  const auto& xa = GL::abscissa();
  const auto& wa = GL::weights();
  x.clear();
  w.clear();
  for (int p = 0; p < n; ++p) {
    double pa = a + (b - a) * p / n, pb = a + (b - a) * (p + 1) / n;
    double c = 0.5 * (pa + pb), h = 0.5 * (pb - pa);
    for (std::size_t i = 0; i < xa.size(); ++i) {
      if (xa[i] == 0.0) {
        x.push_back(c);
        w.push_back(h * wa[i]);
        continue;
      }
      x.push_back(c - h * xa[i]);
      w.push_back(h * wa[i]);
      x.push_back(c + h * xa[i]);
      w.push_back(h * wa[i]);
    }
  }
}

}  // namespace nullctrl
