#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "nullctrl/moment.hpp"
#include "nullctrl/semigroup.hpp"

namespace nullctrl {

/// Failure inside a pipeline stage; `stage` names it ("derive", "family", ...).
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what) : std::runtime_error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

/// One row of the synthesis ledger: the k-th series term -b_k e^{-lambda_k T}/g_k psi_k.
struct TermEntry {
  int k = 0;
  double b = 0.0;
  double gain = 0.0;           // g_k = O_a(Phi_k) or Phi_k(1)
  double log_coeff = 0.0;      // log|b_k/g_k| - lambda_k T
  double log_sup = 0.0;        // log sup|psi_k|, measured when included, the sup bound with c = 1 otherwise
  double log_magnitude = 0.0;  // log_coeff + log_sup
  bool included = false;
};

constexpr double kOverflowBudget = 700.0;

/// f(t) = -sum_{k <= family.K} b_k e^{-lambda_k T}/g_k psi_k(t) on the family grid.
/// Throws if a term's log-magnitude exceeds kOverflowBudget.
ControlSignal synthesize(const SpectralSystem& sys, const BiorthogonalFamily& family, const CoefficientState& u0, Endpoint endpoint,
                         std::vector<TermEntry>* ledger = nullptr);

/// Coefficients -b_k/g_k of the series, k <= family.K (the e^{-lambda_k T} factor excluded).
std::vector<double> series_coefficients(const SpectralSystem& sys, const CoefficientState& u0, Endpoint endpoint, int K);

struct NullCheck {
  double residual = 0.0;           // ||u(T)|| / ||u0||
  double residual_vs_free = 0.0;   // ||u(T)|| / ||S(T) u0||
  double free_norm = 0.0;          // ||S(T) u0||
  std::vector<double> final_coeffs;
  std::vector<double> per_mode;    // |<u(T), Phi_k>| / ||u0||
};

NullCheck verify_null(const SpectralSystem& sys, const CoefficientState& u0, const ControlSignal& f, Endpoint endpoint);

/// (1 + 1/((1-delta)kappa^2 T))[e^{1/(sqrt2 kappa)} + delta^{-5} e^{3/((1-delta)kappa^2 T)}]
/// exp(-(1-delta)^{3/2} T^{3/2} kappa^3 j_1^2/(8 (1+T)^{1/2}))
double upper_bound_factor(const SpectralSystem& sys, double T, double delta);

/// Cost upper bound with c = 1.
double upper_bound(const SpectralSystem& sys, double T, double delta, Endpoint endpoint);

/// Which second zero enters the right-endpoint lower bound: j_{nu,2} as printed, or j_{nu+1,2}.
enum class LowerReading { AsPrinted, NuPlusOne };

std::string to_string(LowerReading r);
LowerReading lower_reading_from_string(const std::string& s);

/// Cost lower bound with c = 1.
double lower_bound(const SpectralSystem& sys, double T, Endpoint endpoint, LowerReading reading = LowerReading::AsPrinted);

struct DeltaPolicy {
  bool optimize = false;
  double delta = 0.5;
};

/// delta on 17 interior points of (0.05, 0.95) minimizing upper_bound, or the fixed value.
double choose_delta(const SpectralSystem& sys, double T, Endpoint endpoint, const DeltaPolicy& policy);

/// |g_k int f e^{-lambda_k(T-t)} + b_k e^{-lambda_k T}| / ||S(T) u0||, k <= K, from the sampled signal.
std::vector<double> moment_identity_defects(const SpectralSystem& sys, const CoefficientState& u0, const ControlSignal& f, Endpoint endpoint, int K);

/// Same identities from the family's own quadrature at working precision.
std::vector<double> moment_identity_defects(const SpectralSystem& sys, const BiorthogonalFamily& family, const CoefficientState& u0,
                                            Endpoint endpoint);

/// C(T,alpha,delta)^{-1} ||f||_inf <= |b_0|/|g_0| + c (sum_{k>=1} b_k^2)^{1/2}/((nu+1) kappa^{5/2})
/// exp(-T lambda_1/2 - omega lambda_1/(2 sqrt(theta+1))); the right endpoint replaces the last
/// term by sum_{k>=1} |b_k|/(lambda_k |Lambda'(i lambda_k)| |g_k|) exp(-T lambda_k/2 - omega lambda_k/(2 sqrt(theta+1))).
struct SupChain {
  double lhs = 0.0;
  double head = 0.0;  // |b_0|/|g_0|
  double tail = 0.0;  // the term multiplied by c
  double fitted_c = 0.0;
};

SupChain sup_chain(const SpectralSystem& sys, const MultiplierParams& params, const CoefficientState& u0, double f_sup, Endpoint endpoint);

struct CostOptions {
  int K = 64;              // forward model order
  int K_f = 12;            // family cap
  bool trim = true;        // drop modes below 1e-16 of the leading term
  int grid_panels = 2048;
  DeltaPolicy delta;
  LowerReading reading = LowerReading::AsPrinted;
};

struct CostReport {
  ProblemConfig config;
  int K = 0;
  int K_f = 0;
  double T = 0.0;
  double delta_used = 0.0;
  double measured_l2 = 0.0;
  double measured_sup = 0.0;
  double upper_bound = 0.0;
  double lower_bound = 0.0;
  bool bound_applicable = true;  // false when b_0 != 0
  bool bounds_ordered = true;    // lower <= upper, reported only
  LowerReading reading = LowerReading::AsPrinted;
  double lower_bound_alternate = 0.0;
  double residual = 0.0;
  double residual_vs_free = 0.0;
  std::vector<double> per_mode_residual;
  std::vector<double> moment_defects;     // sampled signal
  std::vector<double> moment_defects_hp;  // family quadrature
  SupChain chain;
  std::vector<TermEntry> ledger;
  double family_defect = 0.0;
  double family_floor = 0.0;
  int family_digits = 0;
  int family_nodes = 0;
  std::string family_diagnosis;
  ControlSignal control;
};

CostReport cost_report(const ProblemConfig& cfg, const CoefficientState& u0, const CostOptions& opts = {});

/// Same pipeline on an already derived system.
CostReport cost_report(const SpectralSystem& sys, const ProblemConfig& cfg, const CoefficientState& u0, const CostOptions& opts = {});

}  // namespace nullctrl
