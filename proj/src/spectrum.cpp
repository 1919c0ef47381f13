#include "nullctrl/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "nullctrl/quadrature.hpp"

namespace nullctrl {

std::string to_string(Endpoint e) { return e == Endpoint::Left ? "left" : "right"; }

Endpoint endpoint_from_string(const std::string& s) {
  if (s == "left" || s == "Left") return Endpoint::Left;
  if (s == "right" || s == "Right") return Endpoint::Right;
  throw std::invalid_argument("endpoint must be 'left' or 'right' (got '" + s + "')");
}

void validate(const ProblemConfig& cfg) {
  std::ostringstream os;
  os.precision(17);
  if (!std::isfinite(cfg.alpha) || cfg.alpha < 0.0 || cfg.alpha >= 2.0) {
    os << "0 <= alpha < 2 violated (alpha = " << cfg.alpha << ")";
    throw std::invalid_argument(os.str());
  }
  if (!std::isfinite(cfg.beta)) throw std::invalid_argument("beta must be finite");
  double mc = mu_crit(cfg.alpha + cfg.beta);
  if (!std::isfinite(cfg.mu) || !(cfg.mu < mc)) {
    os << "mu < mu(alpha+beta) violated: mu = " << cfg.mu << ", mu(alpha+beta) = " << mc;
    throw std::invalid_argument(os.str());
  }
  if (!std::isfinite(cfg.T) || !(cfg.T > 0.0)) {
    os << "T > 0 violated (T = " << cfg.T << ")";
    throw std::invalid_argument(os.str());
  }
}

double SpectralSystem::trace(Endpoint e, int k) const {
  const auto& t = e == Endpoint::Left ? trace_left : trace_right;
  return t.at(static_cast<std::size_t>(k));
}

CoefficientState CoefficientState::unit(int K, int k) {
  CoefficientState s = zero(K);
  s.coeffs.at(static_cast<std::size_t>(k)) = 1.0;
  return s;
}

double CoefficientState::norm() const {
  double s = 0.0;
  for (double b : coeffs) s += b * b;
  return std::sqrt(s);
}

SpectralSystem derive_system(const ProblemConfig& cfg, int K) {
  validate(cfg);
  if (K < 1) throw std::invalid_argument("derive_system: K must be >= 1");
  SpectralSystem s;
  s.alpha = cfg.alpha;
  s.beta = cfg.beta;
  s.mu = cfg.mu;
  s.K = K;
  s.kappa = 0.5 * (2.0 - cfg.alpha);
  const double r = std::sqrt(mu_crit(cfg.alpha + cfg.beta) - cfg.mu);
  s.nu = r / s.kappa;
  s.a = 0.5 * (cfg.alpha + cfg.beta - 1.0) - r;
  s.zeros = bessel_zeros(s.nu + 1.0, K);

  const double n0 = std::sqrt(2.0 - cfg.alpha + 2.0 * r);
  const double sk = std::sqrt(2.0 * s.kappa);
  const double lead = std::pow(2.0, s.nu) * gamma_fn(s.nu + 1.0);
  s.lambdas.assign(static_cast<std::size_t>(K + 1), 0.0);
  s.trace_left.assign(static_cast<std::size_t>(K + 1), n0);
  s.trace_right.assign(static_cast<std::size_t>(K + 1), n0);
  s.jnu_at_zero.assign(static_cast<std::size_t>(K + 1), 0.0);
  for (int k = 1; k <= K; ++k) {
    const double j = s.zeros[k];
    const double jn = bessel_j(s.nu, j);
    s.jnu_at_zero[k] = jn;
    s.lambdas[k] = s.kappa * s.kappa * j * j;
    s.trace_left[k] = sk * std::pow(j, s.nu) / (lead * std::fabs(jn));
    s.trace_right[k] = std::copysign(sk, jn);
  }
  return s;
}

namespace {

void check_index(const SpectralSystem& sys, int k) {
  if (k < 0 || k > sys.K) throw std::out_of_range("eigenfunction index out of range");
}

double p_exp(const SpectralSystem& sys) { return 0.5 * (1.0 - sys.alpha - sys.beta); }

}  // namespace

double eigenfunction_eval(const SpectralSystem& sys, int k, double x) {
  check_index(sys, k);
  if (!(x > 0.0) || x > 1.0) throw std::invalid_argument("eigenfunction_eval: x must lie in (0,1]");
  const double p = p_exp(sys);
  if (k == 0) return sys.trace_right[0] * std::pow(x, p + sys.root());
  const double j = sys.zeros[k];
  return std::sqrt(2.0 * sys.kappa) / std::fabs(sys.jnu_at_zero[k]) * std::pow(x, p) * bessel_j(sys.nu, j * std::pow(x, sys.kappa));
}

EigenDerivs eigenfunction_derivs(const SpectralSystem& sys, int k, double x) {
  check_index(sys, k);
  if (!(x > 0.0) || x > 1.0) throw std::invalid_argument("eigenfunction_derivs: x must lie in (0,1]");
  const double p = p_exp(sys);
  EigenDerivs d;
  if (k == 0) {
    const double q = p + sys.root();
    const double v = sys.trace_right[0] * std::pow(x, q);
    d.phi = v;
    d.d1 = q * v / x;
    d.d2 = q * (q - 1.0) * v / (x * x);
    return d;
  }
  const double kap = sys.kappa, nu = sys.nu;
  const double N = std::sqrt(2.0 * kap) / std::fabs(sys.jnu_at_zero[k]);
  const double y = sys.zeros[k] * std::pow(x, kap);
  const double J = bessel_j(nu, y);
  const double yJp = nu * J - y * bessel_j(nu + 1.0, y);  // y J'(y)
  const double xp = std::pow(x, p);
  d.phi = N * xp * J;
  d.d1 = N * xp / x * (p * J + kap * yJp);
  d.d2 = N * xp / (x * x) * ((p * (p - 1.0) + kap * kap * (nu * nu - y * y)) * J + kap * (2.0 * p - 1.0) * yJp);
  return d;
}

double apply_operator(const SpectralSystem& sys, int k, double x) {
  EigenDerivs d = eigenfunction_derivs(sys, k, x);
  const double xa = std::pow(x, sys.alpha);
  return -xa * d.d2 - (sys.alpha + sys.beta) * xa / x * d.d1 - sys.mu * xa / (x * x) * d.phi;
}

ProjectionResult project(const SpectralSystem& sys, const std::function<double(double)>& u0, double tol) {
  const UnitRule rule = graded_unit_rule(sys.zeros[sys.K], sys.kappa);
  const std::size_t n = rule.x.size();
  std::vector<double> g(n);
  ProjectionResult r;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rule.x[i];
    g[i] = u0(x) * std::pow(x, sys.beta);
    f[i] = g[i] * g[i] / std::pow(x, sys.beta);
  }
  RuleResult nr = apply_rule(rule, f);
  r.norm2 = nr.value;
  r.quad_error = nr.error;
  r.state = CoefficientState::zero(sys.K);
  double sum2 = 0.0;
  for (int k = 0; k <= sys.K; ++k) {
    for (std::size_t i = 0; i < n; ++i) f[i] = g[i] * eigenfunction_eval(sys, k, rule.x[i]);
    RuleResult br = apply_rule(rule, f);
    r.state.coeffs[k] = br.value;
    r.quad_error = std::max(r.quad_error, br.error);
    sum2 += br.value * br.value;
  }
  r.parseval_defect = r.norm2 - sum2;
  r.converged = r.quad_error <= tol * std::max(1.0, std::sqrt(std::fabs(r.norm2)));
  return r;
}

double hs_norm(const SpectralSystem& sys, const CoefficientState& state, double s) {
  if (state.K() > sys.K) throw std::invalid_argument("hs_norm: state longer than spectral system");
  double acc = 0.0;
  for (int k = 0; k <= state.K(); ++k) {
    const double b = state.coeffs[k];
    acc += k == 0 ? b * b : b * b * std::pow(sys.lambdas[k], s);
  }
  return std::sqrt(acc);
}

std::vector<std::vector<double>> gram_matrix(const SpectralSystem& sys, int K, double* quad_error) {
  if (K > sys.K) throw std::invalid_argument("gram_matrix: K exceeds system order");
  const UnitRule rule = graded_unit_rule(2.0 * sys.zeros[std::max(K, 1)], sys.kappa);
  const std::size_t n = rule.x.size();
  std::vector<std::vector<double>> phi(static_cast<std::size_t>(K + 1), std::vector<double>(n));
  for (int k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < n; ++i) phi[k][i] = eigenfunction_eval(sys, k, rule.x[i]);
  std::vector<double> wb(n);
  for (std::size_t i = 0; i < n; ++i) wb[i] = std::pow(rule.x[i], sys.beta);
  std::vector<std::vector<double>> G(static_cast<std::size_t>(K + 1), std::vector<double>(static_cast<std::size_t>(K + 1)));
  double err = 0.0;
  std::vector<double> f(n);
  for (int k = 0; k <= K; ++k)
    for (int l = k; l <= K; ++l) {
      for (std::size_t i = 0; i < n; ++i) f[i] = wb[i] * phi[k][i] * phi[l][i];
      RuleResult r = apply_rule(rule, f);
      G[k][l] = G[l][k] = r.value;
      err = std::max(err, r.error);
    }
  if (quad_error) *quad_error = err;
  return G;
}

double unitary_map(const SpectralSystem& sys, const std::function<double(double)>& u, double x) {
  return std::sqrt(sys.kappa) * std::pow(x, -0.25 * sys.alpha - 0.5 * sys.beta) * u(std::pow(x, sys.kappa));
}

double dini_eval(const SpectralSystem& sys, int k, double x) {
  check_index(sys, k);
  if (k == 0) return std::sqrt(2.0 * (sys.nu + 1.0)) * std::pow(x, 0.5 + sys.nu);
  return std::sqrt(2.0) / std::fabs(sys.jnu_at_zero[k]) * std::sqrt(x) * bessel_j(sys.nu, sys.zeros[k] * x);
}

DiniReport dini_check(const SpectralSystem& sys, int K) {
  if (K < 2) throw std::invalid_argument("dini_check: K must be >= 2");
  if (K > sys.K) throw std::invalid_argument("dini_check: K exceeds system order");
  DiniReport rep;
  rep.K = K;
  const UnitRule rule = graded_unit_rule(2.0 * sys.zeros[K], 1.0);
  const std::size_t n = rule.x.size();
  std::vector<std::vector<double>> th(static_cast<std::size_t>(K + 1), std::vector<double>(n));
  for (int k = 0; k <= K; ++k)
    for (std::size_t i = 0; i < n; ++i) th[k][i] = dini_eval(sys, k, rule.x[i]);
  std::vector<double> f(n);
  for (int k = 0; k <= K; ++k)
    for (int l = k; l <= K; ++l) {
      for (std::size_t i = 0; i < n; ++i) f[i] = th[k][i] * th[l][i];
      RuleResult r = apply_rule(rule, f);
      rep.gram_max_dev = std::max(rep.gram_max_dev, std::fabs(r.value - (k == l ? 1.0 : 0.0)));
      rep.quad_error = std::max(rep.quad_error, r.error);
    }
  for (int k = 0; k <= K; ++k)
    for (int i = 1; i <= 20; ++i) {
      const double x = 0.05 * i;
      const double u = unitary_map(sys, [&](double y) { return dini_eval(sys, k, y); }, x);
      rep.unitary_max_dev = std::max(rep.unitary_max_dev, std::fabs(u - eigenfunction_eval(sys, k, x)));
    }
  return rep;
}

double trace_left_extrapolated(const SpectralSystem& sys, int k) {
  check_index(sys, k);
  const double j = k == 0 ? 1.0 : sys.zeros[k];
  const double y0 = 0.5 / (j * j);
  constexpr int n = 10;
  double ys[n], v[n];
  for (int i = 0; i < n; ++i) {
    ys[i] = y0 * std::ldexp(1.0, -i);
    const double x = std::pow(ys[i], 0.5 / sys.kappa);
    v[i] = std::pow(x, sys.a) * eigenfunction_eval(sys, k, x);
  }
  // Neville at y = 0
  for (int m = 1; m < n; ++m)
    for (int i = 0; i < n - m; ++i) v[i] = (ys[i] * v[i + 1] - ys[i + m] * v[i]) / (ys[i] - ys[i + m]);
  return v[0];
}

double reconstruct(const SpectralSystem& sys, const CoefficientState& state, double x) {
  double s = 0.0;
  for (int k = 0; k <= state.K() && k <= sys.K; ++k)
    if (state.coeffs[k] != 0.0) s += state.coeffs[k] * eigenfunction_eval(sys, k, x);
  return s;
}

}  // namespace nullctrl

namespace nullctrl {

double eigen_residual(const SpectralSystem& sys, int k, int points) {
  double sup = 0.0;
  std::vector<double> xs(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    xs[i] = (i + 0.5) / points;
    sup = std::max(sup, std::fabs(eigenfunction_eval(sys, k, xs[i])));
  }
  double worst = 0.0;
  for (double x : xs) {
    const double r = std::fabs(apply_operator(sys, k, x) - sys.lambdas[k] * eigenfunction_eval(sys, k, x));
    worst = std::max(worst, r / ((1.0 + sys.lambdas[k]) * sup));
  }
  return worst;
}

double robin_defect(const SpectralSystem& sys, int k) {
  const EigenDerivs d = eigenfunction_derivs(sys, k, 1.0);
  return std::fabs(sys.a * d.phi + d.d1);
}

}  // namespace nullctrl
