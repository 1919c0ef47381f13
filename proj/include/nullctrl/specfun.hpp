#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

namespace nullctrl {

/// Positive zeros j_{nu,1} < j_{nu,2} < ... of J_nu.
struct ZeroTable {
  double nu = 0.0;
  std::vector<double> zeros;

  int count() const { return static_cast<int>(zeros.size()); }
  double operator[](int k) const { return zeros.at(static_cast<std::size_t>(k - 1)); }  // 1-based
};

/// Thrown by bessel_j_complex when |z| exceeds the series budget.
class SeriesBudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kComplexSeriesBudget = 40.0;

double gamma_fn(double x);

/// Argument above which bessel_j uses the Hankel expansion.
inline double bessel_switch_point(double nu) { return 30.0 + 5.0 * nu; }

double bessel_j(double nu, double x);
double bessel_j_series(double nu, double x);
/// Hankel expansion; throws std::domain_error if it cannot reach ~1e-15.
double bessel_j_asymptotic(double nu, double x);

/// (nu/x) J_nu(x) - J_{nu+1}(x)
double bessel_j_prime(double nu, double x);

/// Power series with principal branch of (z/2)^nu.
std::complex<double> bessel_j_complex(double nu, std::complex<double> z);

/// sum_m q^m / (m! (b)_m), evaluated in binary128; |q| <= budget^2/4.
std::complex<double> hyp0f1(double b, std::complex<double> q);

/// McMahon expansion of j_{nu,k}. If next_term is given it receives the
/// magnitude of the first omitted term.
double mcmahon_zero(double nu, int k, double* next_term = nullptr);

ZeroTable bessel_zeros(double nu, int K);

struct EnvelopeCheck {
  std::vector<double> values;  // sqrt(j) |J_nu(j)| at j = j_{nu+1,k}
  double fitted_c = 0.0;       // max over the last 10% of |v - sqrt(2/pi)| * j
};

EnvelopeCheck sqrt_j_envelope_check(double nu, int K);

}  // namespace nullctrl
