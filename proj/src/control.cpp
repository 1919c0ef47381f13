#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nullctrl/control.hpp"

namespace nullctrl {

namespace {

double log_psi_bound(const SpectralSystem& sys, const MultiplierParams& p, int k) {
  const double logC = std::log(family_constant(sys, p));
  if (k == 0) return logC;
  const double lk = sys.lambdas[k];
  return logC + p.T * lk / 2.0 - p.omega * lk / (2.0 * std::sqrt(p.theta + 1.0)) - std::log(lk * std::fabs(lambda_prime_at_eigen(sys, k)));
}

double free_norm(const SpectralSystem& sys, const CoefficientState& u0, double T) { return evolve_free(sys, u0, T).norm(); }

CoefficientState padded(const CoefficientState& u0, int K) {
  CoefficientState out = CoefficientState::zero(K);
  for (int k = 0; k <= std::min(K, u0.K()); ++k) out.coeffs[k] = u0.coeffs[k];
  return out;
}

}  // namespace

std::vector<double> series_coefficients(const SpectralSystem& sys, const CoefficientState& u0, Endpoint endpoint, int K) {
  std::vector<double> c(static_cast<std::size_t>(K + 1), 0.0);
  for (int k = 0; k <= std::min(K, u0.K()); ++k) c[k] = -u0.coeffs[k] / sys.trace(endpoint, k);
  return c;
}

ControlSignal synthesize(const SpectralSystem& sys, const BiorthogonalFamily& family, const CoefficientState& u0, Endpoint endpoint,
                         std::vector<TermEntry>* ledger) {
  const int K = family.K();
  const double T = family.T();
  std::vector<TermEntry> rows;
  for (int k = 0; k <= std::min(u0.K(), sys.K); ++k) {
    const double b = u0.coeffs[k];
    if (b == 0.0) continue;
    TermEntry e;
    e.k = k;
    e.b = b;
    e.gain = sys.trace(endpoint, k);
    e.log_coeff = std::log(std::fabs(b / e.gain)) - sys.lambdas[k] * T;
    e.included = k <= K;
    e.log_sup = e.included ? family.log_sup_norms()[k] : log_psi_bound(sys, family.params(), k);
    e.log_magnitude = e.log_coeff + e.log_sup;
    if (e.included && e.log_magnitude > kOverflowBudget) {
      std::ostringstream os;
      os << "synthesize: term k = " << k << " has log-magnitude " << e.log_magnitude << " above the overflow budget";
      throw std::overflow_error(os.str());
    }
    rows.push_back(e);
  }
  if (ledger) *ledger = rows;
  const std::vector<double> c = series_coefficients(sys, u0, endpoint, K);
  return ControlSignal::on_grid(family.grid(), family.decayed_combination(c, family.grid()));
}

NullCheck verify_null(const SpectralSystem& sys, const CoefficientState& u0, const ControlSignal& f, Endpoint endpoint) {
  const double T = f.horizon();
  NullCheck out;
  const CoefficientState uT = solve(sys, u0, f, T, endpoint);
  const double n0 = u0.norm();
  out.free_norm = free_norm(sys, u0, T);
  out.final_coeffs = uT.coeffs;
  const double nT = uT.norm();
  out.residual = n0 > 0.0 ? nT / n0 : nT;
  out.residual_vs_free = out.free_norm > 0.0 ? nT / out.free_norm : nT;
  for (double c : uT.coeffs) out.per_mode.push_back(n0 > 0.0 ? std::fabs(c) / n0 : std::fabs(c));
  return out;
}

double upper_bound_factor(const SpectralSystem& sys, double T, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("upper_bound: delta must lie in (0,1)");
  if (!(T > 0.0)) throw std::invalid_argument("upper_bound: T must be > 0");
  const double k = sys.kappa;
  const double j1 = sys.zeros[1];
  const double q = (1.0 - delta) * k * k * T;
  const double bracket = std::exp(1.0 / (std::numbers::sqrt2 * k)) + std::pow(delta, -5.0) * std::exp(3.0 / q);
  const double decay = std::pow(1.0 - delta, 1.5) * std::pow(T, 1.5) * k * k * k * j1 * j1 / (8.0 * std::sqrt(1.0 + T));
  return (1.0 + 1.0 / q) * bracket * std::exp(-decay);
}

double upper_bound(const SpectralSystem& sys, double T, double delta, Endpoint endpoint) {
  const double M = upper_bound_factor(sys, T, delta);
  const double k = sys.kappa, nu = sys.nu;
  const double j1 = sys.zeros[1];
  if (endpoint == Endpoint::Left) return M * std::sqrt(T) / ((nu + 1.0) * std::pow(k, 2.5)) * std::exp(-0.5 * T * k * k * j1 * j1);
  const double e = (2.0 * nu + 1.0) / 4.0;
  return M * std::sqrt(T) / (std::pow(k, nu + 1.0) * gamma_fn(nu + 2.0)) * std::pow((2.0 * nu + 1.0) / (4.0 * T * std::numbers::e), e) *
         std::exp(-0.25 * T * k * k * j1 * j1);
}

std::string to_string(LowerReading r) { return r == LowerReading::AsPrinted ? "as_printed" : "nu_plus_one"; }

LowerReading lower_reading_from_string(const std::string& s) {
  if (s == "as_printed") return LowerReading::AsPrinted;
  if (s == "nu_plus_one") return LowerReading::NuPlusOne;
  throw std::invalid_argument("lower reading must be as_printed or nu_plus_one, got '" + s + "'");
}

double lower_bound(const SpectralSystem& sys, double T, Endpoint endpoint, LowerReading reading) {
  if (!(T > 0.0)) throw std::invalid_argument("lower_bound: T must be > 0");
  if (sys.K < 2) throw std::invalid_argument("lower_bound: needs two stored zeros");
  const double k = sys.kappa, nu = sys.nu;
  const double j1 = sys.zeros[1], j2 = sys.zeros[2];
  const double head = (1.0 + j2 * j2 / (j1 * j1)) * std::exp((0.5 - std::numbers::ln2 / std::numbers::pi) * j2) / std::sqrt(2.0 * T * k);
  if (endpoint == Endpoint::Left) {
    const double mid = std::pow(2.0, nu) * std::fabs(sys.jnu_at_zero[1]) * gamma_fn(nu + 1.0) / std::pow(j1, nu);
    return head * mid * std::exp(-(j1 * j1 + 0.5 * j2 * j2) * k * k * T);
  }
  const double js = reading == LowerReading::AsPrinted ? bessel_zeros(nu, 2)[2] : j2;
  return head * std::exp(-(j1 * j1 + 0.5 * js * js) * k * k * T);
}

double choose_delta(const SpectralSystem& sys, double T, Endpoint endpoint, const DeltaPolicy& policy) {
  if (!policy.optimize) {
    if (!(policy.delta > 0.0 && policy.delta < 1.0)) throw std::invalid_argument("delta must lie in (0,1)");
    return policy.delta;
  }
  double best = 0.0, best_val = HUGE_VAL;
  for (int i = 1; i <= 17; ++i) {
    const double d = 0.05 + 0.9 * i / 18.0;
    const double v = upper_bound(sys, T, d, endpoint);
    if (v < best_val) {
      best_val = v;
      best = d;
    }
  }
  return best;
}

std::vector<double> moment_identity_defects(const SpectralSystem& sys, const CoefficientState& u0, const ControlSignal& f, Endpoint endpoint, int K) {
  const double T = f.horizon();
  const double scale = free_norm(sys, u0, T);
  std::vector<double> out;
  for (int k = 0; k <= K; ++k) {
    const double b = k <= u0.K() ? u0.coeffs[k] : 0.0;
    const double v = sys.trace(endpoint, k) * exp_kernel_integral(f, sys.lambdas[k], T) + b * std::exp(-sys.lambdas[k] * T);
    out.push_back(std::fabs(v) / scale);
  }
  return out;
}

std::vector<double> moment_identity_defects(const SpectralSystem& sys, const BiorthogonalFamily& family, const CoefficientState& u0,
                                            Endpoint endpoint) {
  const double T = family.T();
  const double scale = free_norm(sys, u0, T);
  const std::vector<double> c = series_coefficients(sys, u0, endpoint, family.K());
  std::vector<double> out;
  for (int k = 0; k <= family.K(); ++k) {
    const double b = k <= u0.K() ? u0.coeffs[k] : 0.0;
    const double lk = sys.lambdas[k];
    const double v = sys.trace(endpoint, k) * std::exp(-lk * T) * family.combo_exp_moment(c, lk).value + b * std::exp(-lk * T);
    out.push_back(std::fabs(v) / scale);
  }
  return out;
}

SupChain sup_chain(const SpectralSystem& sys, const MultiplierParams& params, const CoefficientState& u0, double f_sup, Endpoint endpoint) {
  SupChain out;
  out.lhs = f_sup / family_constant(sys, params);
  out.head = u0.K() >= 0 ? std::fabs(u0.coeffs[0] / sys.trace(endpoint, 0)) : 0.0;
  const double rt = std::sqrt(params.theta + 1.0);
  const int K = std::min(u0.K(), sys.K);
  if (endpoint == Endpoint::Left) {
    double s2 = 0.0;
    for (int k = 1; k <= K; ++k) s2 += u0.coeffs[k] * u0.coeffs[k];
    const double l1 = sys.lambdas[1];
    out.tail = std::sqrt(s2) / ((sys.nu + 1.0) * std::pow(sys.kappa, 2.5)) * std::exp(-params.T * l1 / 2.0 - params.omega * l1 / (2.0 * rt));
  } else {
    for (int k = 1; k <= K; ++k) {
      const double lk = sys.lambdas[k];
      out.tail += std::fabs(u0.coeffs[k]) / (lk * std::fabs(lambda_prime_at_eigen(sys, k)) * std::fabs(sys.trace(endpoint, k))) *
                  std::exp(-params.T * lk / 2.0 - params.omega * lk / (2.0 * rt));
    }
  }
  out.fitted_c = out.tail > 0.0 ? std::max(0.0, out.lhs - out.head) / out.tail : std::nan("");
  return out;
}

CostReport cost_report(const ProblemConfig& cfg, const CoefficientState& u0, const CostOptions& opts) {
  SpectralSystem sys;
  try {
    validate(cfg);
    sys = derive_system(cfg, std::max(opts.K, 2));
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("derive", e.what());
  }
  return cost_report(sys, cfg, u0, opts);
}

CostReport cost_report(const SpectralSystem& sys, const ProblemConfig& cfg, const CoefficientState& u0_in, const CostOptions& opts) {
  CostReport r;
  r.config = cfg;
  r.T = cfg.T;
  r.K = std::min(opts.K, sys.K);
  r.reading = opts.reading;
  const CoefficientState u0 = padded(u0_in, r.K);
  for (int k = r.K + 1; k <= u0_in.K(); ++k)
    if (u0_in.coeffs[k] != 0.0) throw std::invalid_argument("u0 has nonzero coefficients beyond the model order K");

  MultiplierParams params;
  try {
    r.delta_used = choose_delta(sys, cfg.T, cfg.endpoint, opts.delta);
    params = make_params(sys, cfg.T, r.delta_used);
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError("delta", e.what());
  }

  // family size: modes whose bounded term is within 1e-16 of the leading one, with a 20-decade margin
  int K_f = std::min(opts.K_f, r.K);
  if (opts.trim) {
    double lead = -HUGE_VAL;
    std::vector<double> est(static_cast<std::size_t>(r.K + 1), -HUGE_VAL);
    for (int k = 0; k <= r.K; ++k) {
      if (u0.coeffs[k] == 0.0) continue;
      est[k] = std::log(std::fabs(u0.coeffs[k] / sys.trace(cfg.endpoint, k))) - sys.lambdas[k] * cfg.T + log_psi_bound(sys, params, k);
      lead = std::max(lead, est[k]);
    }
    int top = 0;
    for (int k = 0; k <= r.K; ++k)
      if (est[k] + 20.0 * std::numbers::ln10 >= lead - 16.0 * std::numbers::ln10) top = k;
    K_f = std::min(K_f, top);
  }
  r.K_f = K_f;

  BiorthogonalFamily fam;
  try {
    FamilyOptions fo;
    fo.grid_panels = opts.grid_panels;
    fam = biorthogonal_family(sys, params, K_f, fo);
  } catch (const std::exception& e) {
    throw StageError("family", e.what());
  }
  r.family_defect = fam.max_defect();
  r.family_floor = fam.roundoff_floor();
  r.family_digits = fam.digits();
  r.family_nodes = fam.quad_nodes();
  r.family_diagnosis = fam.diagnosis();
  if (!fam.usable()) throw StageError("family", fam.diagnosis());

  try {
    r.control = synthesize(sys, fam, u0, cfg.endpoint, &r.ledger);
  } catch (const std::exception& e) {
    throw StageError("synthesize", e.what());
  }
  r.measured_l2 = r.control.norm_l2;
  r.measured_sup = r.control.norm_sup;

  try {
    const NullCheck nc = verify_null(sys, u0, r.control, cfg.endpoint);
    r.residual = nc.residual;
    r.residual_vs_free = nc.residual_vs_free;
    r.per_mode_residual = nc.per_mode;
    r.moment_defects = moment_identity_defects(sys, u0, r.control, cfg.endpoint, K_f);
    r.moment_defects_hp = moment_identity_defects(sys, fam, u0, cfg.endpoint);
    r.chain = sup_chain(sys, params, u0, r.measured_sup, cfg.endpoint);
  } catch (const std::exception& e) {
    throw StageError("verify", e.what());
  }

  try {
    r.upper_bound = upper_bound(sys, cfg.T, r.delta_used, cfg.endpoint);
    r.lower_bound = lower_bound(sys, cfg.T, cfg.endpoint, opts.reading);
    r.lower_bound_alternate =
        lower_bound(sys, cfg.T, cfg.endpoint, opts.reading == LowerReading::AsPrinted ? LowerReading::NuPlusOne : LowerReading::AsPrinted);
  } catch (const std::exception& e) {
    throw StageError("bounds", e.what());
  }
  r.bound_applicable = u0.coeffs[0] == 0.0;
  r.bounds_ordered = r.lower_bound <= r.upper_bound;
  return r;
}

}  // namespace nullctrl
