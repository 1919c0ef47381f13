#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nullctrl/moment.hpp"

namespace nullctrl {

namespace {

constexpr int kPowers = 60;     // terms of the log(1+w) series
constexpr int kDirect = 200;    // surrogate terms summed before the integral remainder

double surrogate_lambda(const SpectralSystem& s, int m, double* err = nullptr) {
  double next = 0.0;
  const double j = mcmahon_zero(s.nu + 1.0, m, &next);
  if (err) *err = 2.0 * s.kappa * s.kappa * j * next;
  return s.kappa * s.kappa * j * j;
}

// sum_{m >= start} lambda~_m^{-p}, p = 1..kPowers: direct part plus a midpoint
// Euler-Maclaurin remainder on j ~ pi(m + c) - (mu-1)/(8 pi (m + c)).
std::vector<double> zeta_from(const SpectralSystem& s, int start) {
  std::vector<double> z(kPowers + 1, 0.0);
  for (int m = start; m < start + kDirect; ++m) {
    const double inv = 1.0 / surrogate_lambda(s, m);
    double pw = inv;
    for (int p = 1; p <= kPowers; ++p) {
      z[p] += pw;
      pw *= inv;
      if (pw == 0.0) break;
    }
  }
  const double c = 0.5 * (s.nu + 1.0) - 0.25;
  const double mu = 4.0 * (s.nu + 1.0) * (s.nu + 1.0);
  const double A = start + kDirect - 0.5 + c;
  const double k2 = s.kappa * s.kappa;
  const double pi = std::numbers::pi;
  for (int p = 1; p <= kPowers; ++p) {
    // int_A^inf (k pi y)^{-2p} (1 + p (mu-1)/(4 pi^2 y^2)) dy + g'(A)/24
    const double lead = std::pow(k2 * pi * pi, -p);
    double r = lead * std::pow(A, 1.0 - 2.0 * p) / (2.0 * p - 1.0);
    r += lead * p * (mu - 1.0) / (4.0 * pi * pi) * std::pow(A, -1.0 - 2.0 * p) / (2.0 * p + 1.0);
    r -= lead * (2.0 * p) / 24.0 * std::pow(A, -1.0 - 2.0 * p);
    z[p] += r;
    if (r == 0.0 && p > 2) break;
  }
  return z;
}

}  // namespace

LambdaEvaluator::LambdaEvaluator(const SpectralSystem& sys, int order) : sys_(sys), order_(order) {
  if (order_ > sys.K) throw std::invalid_argument("LambdaEvaluator: order exceeds stored zeros");
  stored_ = order_ >= 0 ? order_ : sys.K;
  if (order_ < 0) zeta_ = zeta_from(sys_, sys.K + 1);
}

std::complex<double> LambdaEvaluator::log_tail(std::complex<double> z, double& err) const {
  err = 0.0;
  if (order_ >= 0) return 0.0;
  const std::complex<double> w(-z.imag(), z.real());  // i z
  const double aw = std::abs(w);
  std::complex<double> acc = 0.0;
  int m = sys_.K + 1;
  // direct factors while |w|/lambda~_m >= 1/2
  double dlam = 0.0;
  for (; m < sys_.K + 1000000; ++m) {
    const double l = surrogate_lambda(sys_, m, &dlam);
    const std::complex<double> f = 1.0 + w / l;
    if (aw < 0.5 * l) break;
    acc += std::log(f);
    err += std::abs(w) / (l * std::abs(f * l)) * dlam;
  }
  const std::vector<double>& zeta = m == sys_.K + 1 ? zeta_ : zeta_from(sys_, m);
  // sum_{p} (-1)^{p+1} w^p zeta_p / p
  std::complex<double> wp = w;
  double rem = 0.0;
  for (int p = 1; p <= kPowers; ++p) {
    std::complex<double> t = wp * zeta[p] / static_cast<double>(p);
    acc += (p % 2 == 1) ? t : -t;
    rem = std::abs(t);
    if (rem < 1e-18 * std::max(1.0, std::abs(acc))) break;
    wp *= w;
  }
  // surrogate error of the remaining factors: |w| lambda^-2 d lambda, first kDirect terms
  for (int q = m; q < m + kDirect; ++q) {
    const double l = surrogate_lambda(sys_, q, &dlam);
    err += aw / (l * (l - aw)) * dlam;
  }
  err += rem + 1e-16 * std::abs(acc);
  return acc;
}

LambdaValue LambdaEvaluator::eval(std::complex<double> z) const {
  const std::complex<double> w(-z.imag(), z.real());
  std::complex<double> prod = z;
  for (int m = 1; m <= stored_; ++m) prod *= 1.0 + w / sys_.lambdas[m];
  double err = 0.0;
  const std::complex<double> lt = log_tail(z, err);
  if (err > 1e-8) {
    std::ostringstream os;
    os << "lambda_eval: estimated relative tail error " << err << " exceeds 1e-8 at |z| = " << std::abs(z);
    throw std::runtime_error(os.str());
  }
  return {prod * std::exp(lt), err};
}

LambdaValue LambdaEvaluator::deflated(std::complex<double> z, int k) const {
  if (k < 0 || k > stored_) throw std::out_of_range("LambdaEvaluator::deflated: index outside the product");
  const std::complex<double> w(-z.imag(), z.real());
  std::complex<double> prod = 1.0;
  if (k >= 1) prod = z * std::complex<double>(0.0, 1.0 / sys_.lambdas[k]);
  for (int m = 1; m <= stored_; ++m)
    if (m != k) prod *= 1.0 + w / sys_.lambdas[m];
  double err = 0.0;
  const std::complex<double> lt = log_tail(z, err);
  if (err > 1e-8) {
    std::ostringstream os;
    os << "lambda_eval: estimated relative tail error " << err << " exceeds 1e-8 at |z| = " << std::abs(z);
    throw std::runtime_error(os.str());
  }
  return {prod * std::exp(lt), err};
}

double LambdaEvaluator::derivative_at_eigen(int k) const {
  if (k < 0 || k > stored_) throw std::out_of_range("derivative_at_eigen: index outside the product");
  if (k == 0) return 1.0;
  if (order_ < 0) return lambda_prime_at_eigen(sys_, k);
  double p = -1.0;
  for (int m = 1; m <= stored_; ++m)
    if (m != k) p *= 1.0 - sys_.lambdas[k] / sys_.lambdas[m];
  return p;
}

LambdaValue lambda_eval(const SpectralSystem& sys, std::complex<double> z) { return LambdaEvaluator(sys).eval(z); }

std::complex<double> lambda_explicit(const SpectralSystem& sys, std::complex<double> z) {
  const double k2 = sys.kappa * sys.kappa;
  const std::complex<double> q = std::complex<double>(-z.imag(), z.real()) / (4.0 * k2);
  return z * hyp0f1(sys.nu + 2.0, q);
}

double lambda_prime_at_eigen(const SpectralSystem& sys, int k) {
  if (k < 1 || k > sys.K) throw std::out_of_range("lambda_prime_at_eigen: need 1 <= k <= K");
  const double j = sys.zeros[k];
  return std::pow(2.0, sys.nu) * gamma_fn(sys.nu + 2.0) * sys.jnu_at_zero[k] / std::pow(j, sys.nu);
}

}  // namespace nullctrl
