#pragma once

#include <functional>
#include <vector>

#include "nullctrl/spectrum.hpp"

namespace nullctrl {

/// Boundary control sampled on a grid over [0,T], piecewise linear between samples.
struct ControlSignal {
  std::vector<double> t;        // nodes, strictly increasing, t.front() = 0, t.back() = T
  std::vector<double> w;        // trapezoid weights
  std::vector<double> samples;  // f(t_i)
  double norm_l2 = 0.0;
  double norm_sup = 0.0;

  static ControlSignal on_grid(std::vector<double> nodes, std::vector<double> values);
  static ControlSignal uniform(double T, int panels, const std::function<double(double)>& f);
  static ControlSignal zero(double T, int panels);

  double horizon() const { return t.back(); }
  void recompute_norms();
  double at(double s) const;  // linear interpolation
};

std::vector<double> uniform_nodes(double T, int panels);

constexpr int kDefaultPanels = 2048;

CoefficientState evolve_free(const SpectralSystem& sys, const CoefficientState& state, double t);

/// int_0^tau f(t) exp(lambda (t - tau)) dt with f piecewise linear on its grid.
double exp_kernel_integral(const ControlSignal& f, double lambda, double tau);

CoefficientState input_map(const SpectralSystem& sys, const ControlSignal& f, double tau, Endpoint endpoint, int K = -1);

CoefficientState solve(const SpectralSystem& sys, const CoefficientState& u0, const ControlSignal& f, double tau, Endpoint endpoint);

/// sqrt(sum_k g_k^2 lambda_k^{-s} (1 - e^{-2 lambda_k tau}) / (2 lambda_k)), k = 0 term g_0^2 tau.
double input_gain(const SpectralSystem& sys, double tau, Endpoint endpoint, double s = 0.0, int K = -1);

}  // namespace nullctrl
