#pragma once

#include <functional>
#include <string>
#include <vector>

#include "nullctrl/specfun.hpp"

namespace nullctrl {

enum class Endpoint { Left, Right };

std::string to_string(Endpoint e);
Endpoint endpoint_from_string(const std::string& s);

/// mu(d) = (1-d)^2/4
inline double mu_crit(double d) { return 0.25 * (1.0 - d) * (1.0 - d); }

struct ProblemConfig {
  double alpha = 0.0;
  double beta = 0.0;
  double mu = 0.0;
  double T = 1.0;
  Endpoint endpoint = Endpoint::Left;
};

/// Throws std::invalid_argument naming the violated condition.
void validate(const ProblemConfig& cfg);

struct SpectralSystem {
  double alpha = 0.0, beta = 0.0, mu = 0.0;
  double kappa = 1.0;
  double nu = 0.5;
  double a = -1.0;
  int K = 0;
  ZeroTable zeros;                  // zeros of J_{nu+1}
  std::vector<double> lambdas;      // 0..K
  std::vector<double> trace_left;   // O_a(Phi_k), 0..K
  std::vector<double> trace_right;  // Phi_k(1), 0..K
  std::vector<double> jnu_at_zero;  // J_nu(j_{nu+1,k}), 1..K stored at index k (index 0 unused)

  /// sqrt(mu(alpha+beta) - mu)
  double root() const { return kappa * nu; }
  /// sqrt(mu(alpha+beta)-mu) < kappa, reported only
  bool limit_circle() const { return nu < 1.0; }
  double trace(Endpoint e, int k) const;
};

struct CoefficientState {
  std::vector<double> coeffs;

  CoefficientState() = default;
  explicit CoefficientState(std::vector<double> c) : coeffs(std::move(c)) {}
  static CoefficientState zero(int K) { return CoefficientState(std::vector<double>(static_cast<std::size_t>(K + 1), 0.0)); }
  static CoefficientState unit(int K, int k);

  int K() const { return static_cast<int>(coeffs.size()) - 1; }
  double norm() const;
};

SpectralSystem derive_system(const ProblemConfig& cfg, int K = 64);

double eigenfunction_eval(const SpectralSystem& sys, int k, double x);

struct EigenDerivs {
  double phi = 0.0, d1 = 0.0, d2 = 0.0;
};

/// Phi_k and its first two derivatives, analytic via the Bessel recurrence.
EigenDerivs eigenfunction_derivs(const SpectralSystem& sys, int k, double x);

/// -(x^alpha u')' - beta x^(alpha-1) u' - mu x^(alpha-2) u applied to Phi_k.
double apply_operator(const SpectralSystem& sys, int k, double x);

struct ProjectionResult {
  CoefficientState state;
  double norm2 = 0.0;            // ||u0||_beta^2
  double parseval_defect = 0.0;  // norm2 - sum b_k^2
  double quad_error = 0.0;       // max embedded-rule difference over all integrals
  bool converged = true;
};

ProjectionResult project(const SpectralSystem& sys, const std::function<double(double)>& u0, double tol = 1e-10);

/// (b_0^2 + sum_{k>=1} b_k^2 lambda_k^s)^{1/2}
double hs_norm(const SpectralSystem& sys, const CoefficientState& state, double s);

/// <Phi_k, Phi_l>_beta for k,l <= K by composite Gauss-Kronrod.
std::vector<std::vector<double>> gram_matrix(const SpectralSystem& sys, int K, double* quad_error = nullptr);

/// (U u)(x) = kappa^{1/2} x^{-alpha/4-beta/2} u(x^kappa)
double unitary_map(const SpectralSystem& sys, const std::function<double(double)>& u, double x);

/// Dini basis Theta_k on (0,1) for order nu.
double dini_eval(const SpectralSystem& sys, int k, double x);

struct DiniReport {
  int K = 0;
  double gram_max_dev = 0.0;      // max |G - I|
  double unitary_max_dev = 0.0;   // max |U Theta_k - Phi_k| over the grid
  double quad_error = 0.0;
};

DiniReport dini_check(const SpectralSystem& sys, int K);

/// Limit of x^a Phi_k(x) as x -> 0+ by polynomial extrapolation in x^{2 kappa}.
double trace_left_extrapolated(const SpectralSystem& sys, int k);

/// max over `points` midpoints of |A Phi_k - lambda_k Phi_k| / ((1 + lambda_k) max|Phi_k|)
double eigen_residual(const SpectralSystem& sys, int k, int points = 200);

/// |a Phi_k(1) + Phi_k'(1)|
double robin_defect(const SpectralSystem& sys, int k);

/// sum_k b_k Phi_k(x)
double reconstruct(const SpectralSystem& sys, const CoefficientState& state, double x);

}  // namespace nullctrl
