#include "nullctrl/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nullctrl {

std::vector<double> uniform_nodes(double T, int panels) {
  if (!(T > 0.0) || panels < 1) throw std::invalid_argument("uniform_nodes: need T > 0 and panels >= 1");
  std::vector<double> t(static_cast<std::size_t>(panels + 1));
  for (int i = 0; i <= panels; ++i) t[i] = T * i / panels;
  t.back() = T;
  return t;
}

ControlSignal ControlSignal::on_grid(std::vector<double> nodes, std::vector<double> values) {
  if (nodes.size() < 2 || nodes.size() != values.size()) throw std::invalid_argument("ControlSignal: bad grid");
  if (nodes.front() != 0.0) throw std::invalid_argument("ControlSignal: grid must start at 0");
  for (std::size_t i = 1; i < nodes.size(); ++i)
    if (!(nodes[i] > nodes[i - 1])) throw std::invalid_argument("ControlSignal: nodes must be strictly increasing");
  ControlSignal c;
  c.t = std::move(nodes);
  c.samples = std::move(values);
  c.w.assign(c.t.size(), 0.0);
  for (std::size_t i = 0; i + 1 < c.t.size(); ++i) {
    const double h = c.t[i + 1] - c.t[i];
    c.w[i] += 0.5 * h;
    c.w[i + 1] += 0.5 * h;
  }
  c.recompute_norms();
  return c;
}

ControlSignal ControlSignal::uniform(double T, int panels, const std::function<double(double)>& f) {
  std::vector<double> t = uniform_nodes(T, panels);
  std::vector<double> v(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) v[i] = f(t[i]);
  return on_grid(std::move(t), std::move(v));
}

ControlSignal ControlSignal::zero(double T, int panels) {
  return uniform(T, panels, [](double) { return 0.0; });
}

void ControlSignal::recompute_norms() {
  double s2 = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    s2 += w[i] * samples[i] * samples[i];
    sup = std::max(sup, std::fabs(samples[i]));
  }
  norm_l2 = std::sqrt(s2);
  norm_sup = sup;
}

double ControlSignal::at(double s) const {
  if (s <= t.front()) return samples.front();
  if (s >= t.back()) return samples.back();
  auto it = std::upper_bound(t.begin(), t.end(), s);
  std::size_t i = static_cast<std::size_t>(it - t.begin()) - 1;
  const double r = (s - t[i]) / (t[i + 1] - t[i]);
  return (1.0 - r) * samples[i] + r * samples[i + 1];
}

CoefficientState evolve_free(const SpectralSystem& sys, const CoefficientState& state, double t) {
  if (!(t >= 0.0)) throw std::invalid_argument("evolve_free: t must be >= 0");
  if (state.K() > sys.K) throw std::invalid_argument("evolve_free: state longer than spectral system");
  CoefficientState out = state;
  for (int k = 1; k <= state.K(); ++k) out.coeffs[k] *= std::exp(-sys.lambdas[k] * t);
  return out;
}

namespace {

// Weights of f_i and f_{i+1} for int_0^h (linear) e^{lambda (s - h)} ds, divided by h.
void panel_weights(double x, double& wa, double& wb) {
  if (x < 0.1) {
    // e^{-x} * sum x^n/(n+2)!  and  e^{-x} * sum (n+1) x^n/(n+2)!
    double a = 0.0, b = 0.0, p = 1.0, fact = 2.0;
    for (int n = 0; n < 14; ++n) {
      a += p / fact;
      b += (n + 1) * p / fact;
      p *= x;
      fact *= (n + 3);
    }
    const double e = std::exp(-x);
    wa = a * e;
    wb = b * e;
    return;
  }
  const double y = std::exp(-x);
  wa = (1.0 - y - x * y) / (x * x);
  wb = (x - 1.0 + y) / (x * x);
}

}  // namespace

double exp_kernel_integral(const ControlSignal& f, double lambda, double tau) {
  if (!(tau > 0.0) || tau > f.horizon() * (1.0 + 1e-14)) throw std::invalid_argument("exp_kernel_integral: tau must lie in (0,T]");
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < f.t.size(); ++i) {
    const double a = f.t[i];
    if (a >= tau) break;
    double b = f.t[i + 1];
    double fb = f.samples[i + 1];
    if (b > tau) {
      fb = f.samples[i] + (f.samples[i + 1] - f.samples[i]) * (tau - a) / (b - a);
      b = tau;
    }
    const double h = b - a;
    if (lambda == 0.0) {
      acc += 0.5 * h * (f.samples[i] + fb);
      continue;
    }
    double wa, wb;
    panel_weights(lambda * h, wa, wb);
    acc += h * std::exp(lambda * (b - tau)) * (wa * f.samples[i] + wb * fb);
  }
  return acc;
}

CoefficientState input_map(const SpectralSystem& sys, const ControlSignal& f, double tau, Endpoint endpoint, int K) {
  if (K < 0) K = sys.K;
  if (K > sys.K) throw std::invalid_argument("input_map: K exceeds system order");
  CoefficientState out = CoefficientState::zero(K);
  for (int k = 0; k <= K; ++k) out.coeffs[k] = sys.trace(endpoint, k) * exp_kernel_integral(f, sys.lambdas[k], tau);
  return out;
}

CoefficientState solve(const SpectralSystem& sys, const CoefficientState& u0, const ControlSignal& f, double tau, Endpoint endpoint) {
  CoefficientState out = evolve_free(sys, u0, tau);
  CoefficientState in = input_map(sys, f, tau, endpoint, u0.K());
  for (int k = 0; k <= u0.K(); ++k) out.coeffs[k] += in.coeffs[k];
  return out;
}

double input_gain(const SpectralSystem& sys, double tau, Endpoint endpoint, double s, int K) {
  if (K < 0) K = sys.K;
  double acc = 0.0;
  for (int k = 0; k <= K; ++k) {
    const double g = sys.trace(endpoint, k);
    if (k == 0) {
      acc += g * g * tau;
      continue;
    }
    const double l = sys.lambdas[k];
    acc += g * g * std::pow(l, -s) * (-std::expm1(-2.0 * l * tau)) / (2.0 * l);
  }
  return std::sqrt(acc);
}

}  // namespace nullctrl
