#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "nullctrl/moment.hpp"

namespace nullctrl {

namespace {

constexpr int kMaxNodesLog2 = 17;
constexpr int kMaxNodes = 1 << kMaxNodesLog2;
constexpr int kEnvelopeOrders = 40;

long double bump_ld(long double theta, long double u) {
  const long double d = 1.0L - u * u;
  if (d <= 0.0L) return 0.0L;
  return std::exp(-theta / d);
}

// ||sigma^{(n)}||_1 for n < count, from the Taylor recurrence of exp(g) on a grid.
std::vector<double> derivative_norms(double theta, int count) {
  const int N = 1 << 13;
  const long double h = 2.0L / N;
  std::vector<long double> acc(static_cast<std::size_t>(count), 0.0L);
  std::vector<long double> p(static_cast<std::size_t>(count + 1)), a(static_cast<std::size_t>(count + 1));
  for (int i = 1; i < N; ++i) {
    const long double u = -1.0L + h * i;
    const long double i1 = 1.0L / (1.0L - u), i2 = 1.0L / (1.0L + u);
    long double w1 = i1, w2 = i2;
    for (int j = 0; j <= count; ++j) {
      p[j] = -0.5L * theta * (w1 + ((j % 2) ? -w2 : w2));
      w1 *= i1;
      w2 *= i2;
    }
    a[0] = std::exp(p[0]);
    if (a[0] == 0.0L) continue;
    long double fact = 1.0L;
    for (int n = 0; n + 1 < count; ++n) {
      long double s = 0.0L;
      for (int q = 0; q <= n; ++q) s += (q + 1) * p[q + 1] * a[n - q];
      a[n + 1] = s / (n + 1);
    }
    for (int n = 0; n < count; ++n) {
      acc[n] += h * std::fabs(a[n]) * fact;
      fact *= (n + 1);
    }
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int n = 0; n < count; ++n) out[n] = static_cast<double>(acc[n]);
  return out;
}

}  // namespace

double bump(double theta, double u) { return static_cast<double>(bump_ld(theta, u)); }

MultiplierParams make_params(const SpectralSystem& sys, double T, double delta) {
  if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("make_params: T must be > 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("make_params: delta must lie in (0,1)");
  MultiplierParams p;
  p.T = T;
  p.delta = delta;
  p.omega = 0.5 * T * (1.0 - delta);
  p.theta = (1.0 + delta) * (1.0 + delta) / (sys.kappa * sys.kappa * T * (1.0 - delta));
  p.c_theta = bump_params(p.omega, p.theta).c_theta;
  return p;
}

MultiplierParams bump_params(double omega, double theta) {
  if (!(omega > 0.0) || !(theta > 0.0)) throw std::invalid_argument("bump_params: omega and theta must be > 0");
  MultiplierParams p;
  p.T = 0.0;
  p.delta = 0.0;
  p.omega = omega;
  p.theta = theta;
  const int N = 1 << 15;
  long double s = 0.0L;
  for (int i = 1; i < N; ++i) s += bump_ld(theta, -1.0L + 2.0L * i / N);
  p.c_theta = static_cast<double>(1.0L / (s * 2.0L / N));
  return p;
}

std::complex<double> HMultiplier::Value::value() const { return scaled * std::exp(log_scale); }

double HMultiplier::Value::log_abs() const { return std::log(std::abs(scaled)) + log_scale; }

HMultiplier::HMultiplier(const MultiplierParams& p) : p_(p) {
  if (!(p.omega > 0.0) || !(p.theta > 0.0) || !(p.c_theta > 0.0)) throw std::invalid_argument("HMultiplier: invalid parameters");
  sigma_.resize(kMaxNodes + 1);
  for (int i = 0; i <= kMaxNodes; ++i) sigma_[i] = bump_ld(p.theta, -1.0L + 2.0L * i / kMaxNodes);
  dl1_ = derivative_norms(p.theta, kEnvelopeOrders);
}

int HMultiplier::nodes_for(std::complex<double> z) const {
  const double ax = std::fabs(z.real());
  const double L = 55.0 + std::sqrt(p_.omega * p_.theta * ax);
  const double need = (p_.omega * ax + L * L / p_.theta) / std::numbers::pi;
  int n = 64;
  while (n < need && n < kMaxNodes) n *= 2;
  return n;
}

std::complex<long double> HMultiplier::sum(std::complex<double> z, int stride) const {
  const int N = kMaxNodes / stride;
  const long double h = 2.0L / N;
  const long double om = p_.omega;
  const long double x = z.real(), y = z.imag();
  const long double s = y >= 0.0 ? 1.0L : -1.0L;
  // term i at u = s (1 - i h): exp(-i om u z - om |y|), magnitudes decrease with i
  auto factor = [&](int i) {
    const long double u = s * (1.0L - h * i);
    return std::exp(std::complex<long double>(om * (u * y - std::fabs(y)), -om * u * x));
  };
  const std::complex<long double> r = std::exp(std::complex<long double>(-om * h * std::fabs(y), om * s * h * x));
  std::complex<long double> f = factor(0), acc = 0.0L;
  for (int i = 0; i <= N; ++i) {
    if (i % 256 == 0) f = factor(i);
    acc += sigma_[static_cast<std::size_t>(i) * stride] * f;
    f *= r;
  }
  return acc * h * static_cast<long double>(p_.c_theta);
}

HMultiplier::Value HMultiplier::eval(std::complex<double> z, bool verify, double tol) const {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw std::invalid_argument("h_multiplier: non-finite argument");
  Value v;
  v.log_scale = p_.omega * std::fabs(z.imag());
  int n = nodes_for(z);
  std::complex<long double> S = sum(z, kMaxNodes / n);
  const double floor = 1e-17;
  if (verify) {
    std::complex<long double> S2 = sum(z, kMaxNodes / (n / 2));
    double err = static_cast<double>(std::abs(S - S2));
    while (err > tol * static_cast<double>(std::abs(S)) + floor && n < kMaxNodes) {
      n *= 2;
      S2 = S;
      S = sum(z, kMaxNodes / n);
      err = static_cast<double>(std::abs(S - S2));
    }
    v.error = err;
    v.converged = err <= tol * static_cast<double>(std::abs(S)) + floor;
  }
  v.scaled = std::complex<double>(static_cast<double>(S.real()), static_cast<double>(S.imag()));
  return v;
}

std::complex<double> HMultiplier::operator()(std::complex<double> z) const {
  Value v = eval(z);
  if (!v.converged) throw std::runtime_error("h_multiplier: quadrature did not converge");
  return v.value();
}

double HMultiplier::derivative_l1(int n) const {
  if (n < 0 || n >= static_cast<int>(dl1_.size())) throw std::out_of_range("derivative_l1: order out of range");
  return dl1_[n];
}

double HMultiplier::decay_envelope(double x) const {
  const double ax = std::fabs(x);
  double best = 1.0;
  for (int n = 1; n < static_cast<int>(dl1_.size()); ++n) {
    const double v = p_.c_theta * dl1_[n] * std::pow(p_.omega * ax, -n);
    best = std::min(best, v);
  }
  return best;
}

std::complex<double> h_multiplier(const MultiplierParams& params, std::complex<double> z) { return HMultiplier(params)(z); }

FMultiplier::FMultiplier(const SpectralSystem& sys, const MultiplierParams& p, int order) : lam_(sys, order), h_(p) {
  const int top = order >= 0 ? order : sys.K;
  log_h_eigen_.resize(static_cast<std::size_t>(top + 1));
  for (int k = 0; k <= top; ++k) log_h_eigen_[k] = h_.eval({0.0, sys.lambdas[k]}).log_abs();
}

double FMultiplier::log_h_at_eigen(int k) const { return log_h_eigen_.at(static_cast<std::size_t>(k)); }

std::complex<double> FMultiplier::psi(int k, std::complex<double> z) const {
  return lam_.deflated(z, k).value / lam_.derivative_at_eigen(k);
}

std::complex<double> FMultiplier::operator()(int k, std::complex<double> z) const {
  const HMultiplier::Value hv = h_.eval(z);
  return psi(k, z) * hv.scaled * std::exp(hv.log_scale - log_h_at_eigen(k));
}

double FMultiplier::log_abs(int k, std::complex<double> z) const {
  const HMultiplier::Value hv = h_.eval(z);
  return std::log(std::abs(psi(k, z))) + hv.log_abs() - log_h_at_eigen(k);
}

std::complex<double> f_multiplier(const SpectralSystem& sys, const MultiplierParams& params, int k, std::complex<double> z) {
  return FMultiplier(sys, params)(k, z);
}

InverseFourierResult inverse_fourier_eta(const FMultiplier& F, int k, const std::vector<double>& s, double tail_tol) {
  if (!F.lambda().truncated()) throw std::invalid_argument("inverse_fourier_eta: needs the truncated product (polynomial Psi_k)");
  const int d = F.lambda().order();
  const MultiplierParams& p = F.h().params();
  double smax = 0.0;
  for (double v : s) smax = std::max(smax, std::fabs(v));
  const double width = std::numbers::pi / (4.0 * std::max(p.omega, smax));

  // log of the bound on int_R^inf |F_k| (both sides), divided by 2 pi
  const double lh = F.log_h_at_eigen(k);
  auto log_tail = [&](double R) {
    const double lA = std::log(std::abs(F.psi(k, {R, 0.0}))) - d * std::log(R);
    double best = HUGE_VAL;
    for (int n = d + 2; n < kEnvelopeOrders; ++n) {
      const double v = std::log(p.c_theta * F.h().derivative_l1(n)) - n * std::log(p.omega) + (d + 1.0 - n) * std::log(R) - std::log(n - d - 1.0);
      best = std::min(best, v);
    }
    return std::log(2.0) + lA + best - lh - std::log(2.0 * std::numbers::pi);
  };

  using GL = boost::math::quadrature::gauss<double, 20>;
  const auto& xa = GL::abscissa();
  const auto& wa = GL::weights();
  const std::size_t ns = s.size();
  std::vector<std::complex<double>> acc(ns, 0.0);
  InverseFourierResult out;
  auto add_panel = [&](double a, double b) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (std::size_t i = 0; i < xa.size(); ++i) {
      for (int sg : {-1, 1}) {
        if (xa[i] == 0.0 && sg == 1) continue;
        const double tau = c + sg * h * xa[i];
        const HMultiplier::Value hv = F.h().eval({tau, 0.0}, false);
        const std::complex<double> f = F.psi(k, {tau, 0.0}) * hv.scaled * std::exp(-lh);
        for (std::size_t j = 0; j < ns; ++j) acc[j] += h * wa[i] * std::polar(1.0, s[j] * tau) * f;
      }
    }
    ++out.panels;
  };
  double R = 0.0;
  double scale = 0.0;
  for (int step = 0;; ++step) {
    add_panel(R, R + width);
    add_panel(-R - width, -R);
    R += width;
    if (R < 32.0) continue;
    if (step % 16 != 0) continue;
    scale = 0.0;
    for (std::size_t j = 0; j < ns; ++j) scale = std::max(scale, std::abs(acc[j]) / (2.0 * std::numbers::pi));
    const double lt = log_tail(R);
    if (lt <= std::log(tail_tol * std::max(scale, 1e-300))) {
      out.tail_bound = std::exp(lt);
      break;
    }
    if (R > 1e6) throw std::runtime_error("inverse_fourier_eta: tail bound not reached below |tau| = 1e6");
  }
  out.R = R;
  for (std::size_t j = 0; j < ns; ++j) {
    out.eta.push_back(acc[j].real() / (2.0 * std::numbers::pi));
    out.eta_imag.push_back(acc[j].imag() / (2.0 * std::numbers::pi));
  }
  return out;
}

double family_constant(const SpectralSystem& sys, const MultiplierParams& p) {
  const double r = std::sqrt(p.theta + 1.0);
  const double k = sys.kappa;
  return r * (std::exp(1.0 / (std::numbers::sqrt2 * k)) + r * (k * k / std::pow(p.delta, 5)) * std::exp(0.75 * p.theta));
}

}  // namespace nullctrl
