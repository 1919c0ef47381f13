#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nullctrl/moment.hpp"

using namespace nullctrl;

namespace {

const SpectralSystem& flagship() {
  static const SpectralSystem s = derive_system({}, 32);
  return s;
}

}  // namespace

TEST_CASE("Lambda: zeros, derivative at the origin, explicit form") {
  const SpectralSystem& s = flagship();
  const LambdaEvaluator L(s);
  CHECK(std::abs(L.eval(0.0).value) == 0.0);
  const double h = 1e-6;
  CHECK(std::abs((L.eval(h).value - L.eval(-h).value) / (2 * h) - 1.0) < 1e-9);
  for (int m = 1; m <= 32; ++m) CHECK(std::abs(L.eval({0.0, s.lambdas[m]}).value) < 1e-12);
  const std::complex<double> one = L.eval(1.0).value, ref = lambda_explicit(s, 1.0);
  CHECK(std::abs(one - ref) <= 1e-8 * std::abs(ref));
  for (auto z : {std::complex<double>(30, 5), std::complex<double>(-100, 20), std::complex<double>(200, -50)}) {
    const std::complex<double> a = L.eval(z).value, b = lambda_explicit(s, z);
    CHECK(std::abs(a - b) <= 1e-8 * std::abs(b));
  }
  const SpectralSystem s2 = derive_system({1.0, 1.0, -1.0, 1.0, Endpoint::Left}, 32);
  for (auto z : {std::complex<double>(1, 0), std::complex<double>(40, 10)})
    CHECK(std::abs(lambda_eval(s2, z).value - lambda_explicit(s2, z)) <= 1e-8 * std::abs(lambda_explicit(s2, z)));
}

TEST_CASE("Lambda growth bound |Lambda(z)| <= |z| exp(|z|^{1/2}/kappa)") {
  const SpectralSystem s = derive_system({0.5, 0.0, -0.5, 1.0, Endpoint::Left}, 32);
  for (double R : {1.0, 10.0, 100.0, 1000.0})
    for (int r = 0; r < 8; ++r) {
      const std::complex<double> z = std::polar(R, 2.0 * std::numbers::pi * r / 8.0 + 0.1);
      CHECK(std::abs(lambda_eval(s, z).value) <= std::abs(z) * std::exp(std::sqrt(std::abs(z)) / s.kappa));
    }
}

TEST_CASE("Lambda tail error is reported and bounded") {
  const LambdaValue v = lambda_eval(flagship(), {500.0, 30.0});
  CHECK(v.tail_error <= 1e-8);
  CHECK(v.tail_error >= 0.0);
}

TEST_CASE("Lambda'(i lambda_k)") {
  const SpectralSystem& s = flagship();
  const double j = s.zeros[1];
  const double expected = std::sqrt(2.0) * gamma_fn(2.5) / std::sqrt(j) * bessel_j(0.5, j);
  CHECK(lambda_prime_at_eigen(s, 1) == doctest::Approx(expected).epsilon(1e-13));
  for (int k = 1; k <= 12; ++k) {
    CHECK((lambda_prime_at_eigen(s, k) > 0) == (s.jnu_at_zero[k] > 0));
    CHECK(std::fabs(s.trace_left[k] * lambda_prime_at_eigen(s, k)) == doctest::Approx((s.nu + 1.0) * std::sqrt(2.0 * s.kappa)).epsilon(1e-10));
    // numerical derivative of the product along the imaginary axis
    const LambdaEvaluator L(s);
    const double h = 1e-5 * s.lambdas[k];
    const std::complex<double> d = (L.eval({h, s.lambdas[k]}).value - L.eval({-h, s.lambdas[k]}).value) / (2 * h);
    CHECK(std::abs(d - lambda_prime_at_eigen(s, k)) <= 1e-6 * std::fabs(lambda_prime_at_eigen(s, k)));
  }
  CHECK_THROWS(lambda_prime_at_eigen(s, 0));
}

TEST_CASE("H multiplier: normalisation, growth on the imaginary axis, exponential type") {
  const MultiplierParams p = make_params(flagship(), 1.0, 0.5);
  CHECK(p.omega == 0.25);
  CHECK(p.theta == doctest::Approx(4.5));
  const HMultiplier H(p);
  CHECK(std::abs(H({0.0, 0.0}) - 1.0) < 1e-13);
  const double rt = std::sqrt(p.theta + 1.0);
  for (double x = -50.0; x <= 50.0; x += 0.5) CHECK(H({0.0, x}).real() >= std::exp(p.omega * std::fabs(x) / (2 * rt)) / (11 * rt));
  for (double a = -60.0; a <= 60.0; a += 7.5)
    for (double b = -60.0; b <= 60.0; b += 7.5) {
      const HMultiplier::Value v = H.eval({a, b});
      CHECK(v.converged);
      CHECK(std::abs(v.scaled) <= 1.0 + 1e-13);
    }
  CHECK(H({30.0, 0.0}).imag() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("H decay envelope dominates |H(x)|") {
  const MultiplierParams p = make_params(flagship(), 1.0, 0.5);
  const HMultiplier H(p);
  for (double x = 5.0; x <= 5000.0; x *= 1.5) CHECK(std::abs(H({x, 0.0})) <= H.decay_envelope(x) * (1.0 + 1e-9) + 1e-17);
}

TEST_CASE("F_k(i lambda_l) = delta_kl, and the F_0 bound near the origin") {
  const SpectralSystem& s = flagship();
  const MultiplierParams p = make_params(s, 1.0, 0.5);
  const FMultiplier F(s, p);
  for (int k = 0; k <= 8; ++k)
    for (int l = 0; l <= 8; ++l) CHECK(std::abs(F(k, {0.0, s.lambdas[l]}) - (k == l ? 1.0 : 0.0)) < 1e-12);
  const double e0 = std::exp(1.0 / (std::numbers::sqrt2 * s.kappa));
  for (double x = -1.0; x <= 1.0; x += 0.125) CHECK(std::abs(F(0, {x, 0.0})) <= e0);
  // no singularity at the removable point
  CHECK(std::abs(F(3, {1e-9, s.lambdas[3]}) - 1.0) < 1e-8);
}

TEST_CASE("F_k has exponential type T/2") {
  const SpectralSystem& s = flagship();
  const MultiplierParams p = make_params(s, 1.0, 0.5);
  const FMultiplier F(s, p);
  for (int k : {0, 1, 4}) {
    std::vector<double> worst;
    for (double R : {1e2, 1e3, 1e4}) {
      double w = -HUGE_VAL;
      for (int r = 0; r < 8; ++r) w = std::max(w, F.log_abs(k, std::polar(R, 2.0 * std::numbers::pi * r / 8.0 + 0.3)) / R);
      worst.push_back(w);
    }
    // T/2 + o(1), with the o(1) shrinking
    CHECK(worst[2] <= 0.5 + 0.05);
    CHECK(worst[2] - 0.5 <= std::max(worst[1] - 0.5, 0.0) + 1e-12);
    CHECK(worst[1] <= 0.5 + 0.2);
  }
}

TEST_CASE("biorthogonal family, flagship K = 6") {
  const SpectralSystem& s = flagship();
  const MultiplierParams p = make_params(s, 1.0, 0.5);
  const BiorthogonalFamily fam = biorthogonal_family(s, p, 6);
  CHECK(fam.usable());
  CHECK(fam.max_defect() <= 1e-6);
  CHECK(fam.moment(0, 0.0).value == doctest::Approx(1.0).epsilon(1e-12));
  for (int k = 0; k <= 6; ++k)
    for (int l = 0; l <= 6; ++l) CHECK(std::fabs(fam.moment(k, s.lambdas[l]).value - (k == l ? 1.0 : 0.0)) <= 1e-6);
  // measured sup against the bound with a fitted constant
  CHECK(fam.fitted_c() > 0.0);
  for (int k = 1; k <= 6; ++k) CHECK(fam.log_sup_norms()[k] <= fam.log_sup_bound()[k] + std::log(fam.fitted_c()) + 1e-12);
  // support in [0, T]
  CHECK(fam.eval(2, 0.0) == 0.0);
  CHECK(fam.eval(2, 1.0) == 0.0);
  CHECK(fam.diagnosis().find("usable") == 0);
}

TEST_CASE("family flags an unusable configuration") {
  const SpectralSystem& s = flagship();
  const MultiplierParams p = make_params(s, 1.0, 0.5);
  FamilyOptions o;
  o.digits = 100;
  o.quad_nodes = 256;
  const BiorthogonalFamily fam = biorthogonal_family(s, p, 6, o);
  CHECK_FALSE(fam.usable());
  CHECK(fam.diagnosis().find("unusable") == 0);
  CHECK(fam.worst_k() >= 0);
}

TEST_CASE("dual route: inverse Fourier transform of F_k against the real-space family") {
  const SpectralSystem& s = flagship();
  const MultiplierParams p = make_params(s, 1.0, 0.5);
  const BiorthogonalFamily fam = biorthogonal_family(s, p, 6);
  const FMultiplier F(s, p, 6);
  const std::vector<double> in{-0.2, -0.1, 0.0, 0.07, 0.15, 0.2};
  const std::vector<double> out{-0.45, -0.3, 0.26, 0.5};
  for (int k : {0, 1, 3}) {
    const InverseFourierResult a = inverse_fourier_eta(F, k, in);
    double peak = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
      const double hp = fam.eval(k, in[i] + 0.5) * std::exp(-s.lambdas[k] * 0.5);
      peak = std::max(peak, std::fabs(hp));
      CHECK(std::fabs(a.eta[i] - hp) <= 1e-8 * std::max(1.0, std::fabs(hp)) + 10 * a.tail_bound);
      CHECK(std::fabs(a.eta_imag[i]) <= 1e-12 * std::max(1.0, std::fabs(hp)));
    }
    const InverseFourierResult b = inverse_fourier_eta(F, k, out);
    for (double v : b.eta) CHECK(std::fabs(v) <= 1e-5 * peak);
  }
}
