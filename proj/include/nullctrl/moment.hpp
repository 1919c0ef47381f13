#pragma once

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "nullctrl/spectrum.hpp"

namespace nullctrl {

/// omega = T(1-delta)/2, theta = (1+delta)^2/(kappa^2 T (1-delta)), C_theta = 1/int sigma_theta.
struct MultiplierParams {
  double T = 1.0;
  double delta = 0.5;
  double omega = 0.25;
  double theta = 4.5;
  double c_theta = 0.0;
};

MultiplierParams make_params(const SpectralSystem& sys, double T, double delta);

/// Bare (omega, theta) pair with its normalisation; T and delta are left at 0.
MultiplierParams bump_params(double omega, double theta);

/// sigma_theta(u) = exp(-theta/(1-u^2)) on (-1,1), zero outside.
double bump(double theta, double u);

// ---------------------------------------------------------------------------
// Lambda(z) = z prod_k (1 + i z/(kappa j_k)^2)

struct LambdaValue {
  std::complex<double> value;
  double tail_error = 0.0;  // estimated relative error from the surrogate tail
};

class LambdaEvaluator {
 public:
  /// order < 0: all stored zeros plus a tail over McMahon surrogates (the full
  /// product). order >= 0: the polynomial built from the first `order` zeros.
  explicit LambdaEvaluator(const SpectralSystem& sys, int order = -1);

  LambdaValue eval(std::complex<double> z) const;
  /// Lambda(z)/(z - i lambda_k); lambda_0 = 0. No singularity at z = i lambda_k.
  LambdaValue deflated(std::complex<double> z, int k) const;
  /// Closed form 2^nu Gamma(nu+2) J_nu(j_k)/j_k^nu for the full product,
  /// -prod_{m != k}(1 - lambda_k/lambda_m) for the truncated one. Lambda'(0) = 1.
  double derivative_at_eigen(int k) const;

  bool truncated() const { return order_ >= 0; }
  int order() const { return order_; }
  const SpectralSystem& system() const { return sys_; }

 private:
  std::complex<double> log_tail(std::complex<double> z, double& err) const;

  SpectralSystem sys_;
  int order_;
  int stored_;
  std::vector<double> zeta_;  // sum_{m>K} lambda~_m^{-p}, p = 1..P
};

LambdaValue lambda_eval(const SpectralSystem& sys, std::complex<double> z);

/// z Gamma(nu+2) 0F1(; nu+2; i z/(4 kappa^2)), the Bessel form; throws
/// SeriesBudgetExceeded when sqrt|z|/kappa exceeds the series budget.
std::complex<double> lambda_explicit(const SpectralSystem& sys, std::complex<double> z);

double lambda_prime_at_eigen(const SpectralSystem& sys, int k);

// ---------------------------------------------------------------------------
// H(z) = C_theta int_{-1}^{1} sigma_theta(u) exp(-i omega u z) du

class HMultiplier {
 public:
  explicit HMultiplier(const MultiplierParams& p);

  struct Value {
    std::complex<double> scaled;  // H(z) exp(-omega |Im z|)
    double log_scale = 0.0;       // omega |Im z|
    double error = 0.0;           // estimated absolute error of `scaled`
    bool converged = true;
    std::complex<double> value() const;
    double log_abs() const;
  };

  Value eval(std::complex<double> z, bool verify = true, double tol = 1e-13) const;
  std::complex<double> operator()(std::complex<double> z) const;

  const MultiplierParams& params() const { return p_; }
  /// int |sigma^{(n)}(u)| du
  double derivative_l1(int n) const;
  /// Smallest integration-by-parts bound C_theta ||sigma^{(n)}||_1/(omega |x|)^n, n <= nmax.
  double decay_envelope(double x) const;

 private:
  std::complex<long double> sum(std::complex<double> z, int stride) const;
  int nodes_for(std::complex<double> z) const;

  MultiplierParams p_;
  std::vector<long double> sigma_;  // on u_i = -1 + 2i/N_max
  std::vector<double> dl1_;         // ||sigma^{(n)}||_1, n = 0..
};

std::complex<double> h_multiplier(const MultiplierParams& params, std::complex<double> z);

// ---------------------------------------------------------------------------
// F_k(z) = Psi_k(z) H(z)/H(i lambda_k),  Psi_k = Lambda/(Lambda'(i lambda_k)(z - i lambda_k))

class FMultiplier {
 public:
  /// order < 0 uses the full product; order >= 0 the truncated polynomial.
  FMultiplier(const SpectralSystem& sys, const MultiplierParams& p, int order = -1);

  std::complex<double> operator()(int k, std::complex<double> z) const;
  double log_abs(int k, std::complex<double> z) const;
  std::complex<double> psi(int k, std::complex<double> z) const;
  double log_h_at_eigen(int k) const;

  const LambdaEvaluator& lambda() const { return lam_; }
  const HMultiplier& h() const { return h_; }
  const SpectralSystem& system() const { return lam_.system(); }

 private:
  LambdaEvaluator lam_;
  HMultiplier h_;
  std::vector<double> log_h_eigen_;
};

std::complex<double> f_multiplier(const SpectralSystem& sys, const MultiplierParams& params, int k, std::complex<double> z);

/// eta_k(s) = (1/2pi) int exp(i s tau) F_k(tau) d tau by panel Gauss-Legendre on [-R,R].
struct InverseFourierResult {
  std::vector<double> eta;
  std::vector<double> eta_imag;  // should vanish
  double R = 0.0;
  double tail_bound = 0.0;  // bound on the neglected |tau| > R part (already divided by 2pi)
  int panels = 0;
};

InverseFourierResult inverse_fourier_eta(const FMultiplier& F, int k, const std::vector<double>& s, double tail_tol = 1e-10);

// ---------------------------------------------------------------------------
// Biorthogonal family

struct FamilyOptions {
  int product_order = -1;  // M; defaults to K
  int digits = 0;          // working decimal digits; 0 = automatic
  int quad_nodes = 0;      // trapezoid intervals on the bump support; 0 = automatic
  int grid_panels = 2048;  // uniform panels of the sampled [0,T] grid
};

struct MomentValue {
  double value = 0.0;
  double roundoff = 0.0;  // working precision times the absolute integral
};

class FamilyCore;

class BiorthogonalFamily {
 public:
  int K() const { return K_; }
  int product_order() const;
  int digits() const;
  int quad_nodes() const;
  const MultiplierParams& params() const { return params_; }
  double T() const { return params_.T; }

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& psi(int k) const { return psi_.at(static_cast<std::size_t>(k)); }
  double eval(int k, double t) const;

  /// int_0^T psi_k(t) exp(-lambda (T - t)) dt
  MomentValue moment(int k, double lambda) const;
  /// int_0^T (sum_k c_k e^{-lambda_k T} psi_k(t)) exp(lambda t) dt, summed at working precision
  MomentValue combo_exp_moment(const std::vector<double>& c, double lambda) const;
  /// sum_k c_k e^{-lambda_k T} psi_k(t_i) on the grid, at working precision
  std::vector<double> decayed_combination(const std::vector<double>& c, const std::vector<double>& t) const;

  const std::vector<std::vector<double>>& defect_matrix() const { return defect_; }
  double max_defect() const { return max_defect_; }
  int worst_k() const { return worst_k_; }
  int worst_l() const { return worst_l_; }
  double leakage() const { return leakage_; }  // max |moment| for product_order < l <= sys.K
  double roundoff_floor() const { return floor_; }
  bool usable() const { return max_defect_ <= 1e-4; }
  std::string diagnosis() const;

  const std::vector<double>& sup_norms() const { return sup_; }
  const std::vector<double>& log_sup_norms() const { return log_sup_; }
  /// log of C(T,alpha,delta) exp(T lambda_k/2 - omega lambda_k/(2 sqrt(theta+1)))/(lambda_k Lambda'(i lambda_k)), c = 1
  const std::vector<double>& log_sup_bound() const { return log_bound_; }
  double fitted_c() const { return fitted_c_; }
  const std::vector<double>& lambdas() const { return lambdas_; }

 private:
  friend BiorthogonalFamily biorthogonal_family(const SpectralSystem&, const MultiplierParams&, int, const FamilyOptions&);
  std::shared_ptr<const FamilyCore> core_;
  MultiplierParams params_;
  int K_ = 0;
  std::vector<double> lambdas_;
  std::vector<double> grid_;
  std::vector<std::vector<double>> psi_;
  std::vector<std::vector<double>> defect_;
  double max_defect_ = 0.0, leakage_ = 0.0, floor_ = 0.0, fitted_c_ = 0.0;
  int worst_k_ = 0, worst_l_ = 0;
  std::vector<double> sup_, log_sup_, log_bound_;
};

BiorthogonalFamily biorthogonal_family(const SpectralSystem& sys, const MultiplierParams& params, int K, const FamilyOptions& opts = {});

/// C(T, alpha, delta) = sqrt(theta+1)[e^{1/(sqrt2 kappa)} + sqrt(theta+1)(kappa^2/delta^5) e^{3 theta/4}] with c = 1
double family_constant(const SpectralSystem& sys, const MultiplierParams& p);

}  // namespace nullctrl
