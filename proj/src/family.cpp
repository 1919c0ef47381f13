#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <boost/multiprecision/mpfr.hpp>

#include "nullctrl/moment.hpp"

namespace nullctrl {

namespace bmp = boost::multiprecision;

class FamilyCore {
 public:
  virtual ~FamilyCore() = default;
  virtual int digits() const = 0;
  virtual int product_order() const = 0;
  virtual int quad_nodes() const = 0;
  virtual MomentValue moment(int k, double lambda) const = 0;
  virtual MomentValue combo_exp_moment(const std::vector<double>& c, double lambda) const = 0;
  // e^{lambda_k T/2} eta_k at u = (t - T/2)/omega, as (value, log|value|) pairs per k
  virtual std::vector<double> psi_at(double t) const = 0;
  virtual std::vector<double> log_psi_at(double t) const = 0;
  virtual std::vector<double> decayed_combination(const std::vector<double>& c, const std::vector<double>& t) const = 0;
  virtual std::vector<double> log_eta_max() const = 0;
};

namespace {

constexpr int kDigitSet[] = {100, 150, 200, 300, 400, 600};
constexpr int kRenormalize = 1024;

double logsumexp(const std::vector<double>& v) {
  double m = -HUGE_VAL;
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

template <unsigned D>
class FamilyImpl final : public FamilyCore {
  using R = bmp::number<bmp::mpfr_float_backend<D>, bmp::et_off>;

 public:
  FamilyImpl(const SpectralSystem& sys, const MultiplierParams& p, int K, int M, int N) : K_(K), M_(M), N_(N), T_(p.T) {
    omega_ = R(p.omega);
    theta_ = R(p.theta);
    h_ = R(2) / N;
    lam_.resize(static_cast<std::size_t>(M + 1));
    for (int m = 0; m <= M; ++m) lam_[m] = R(sys.lambdas[m]);
    lam_d_.assign(sys.lambdas.begin(), sys.lambdas.begin() + M + 1);

    double lmax = sys.lambdas[std::min(sys.K, M + 8)];
    const double budget0 = D * std::numbers::ln10 + 2.0 * std::sqrt(p.theta * lmax * p.omega) + 60.0;
    int ilo = 1;
    for (; ilo < N / 2; ++ilo) {
      const double u = -1.0 + 2.0 * ilo / N;
      const double tol = budget0 + 2.0 * (M + 1) * std::log(2.0 / (1.0 - std::fabs(u)));
      if (p.theta / (1.0 - u * u) <= tol) break;
    }
    const int ihi = N - ilo;
    const std::size_t n = static_cast<std::size_t>(ihi - ilo + 1);
    s_.resize(n);
    std::vector<R> sigma(n);
    for (std::size_t i = 0; i < n; ++i) {
      const R u = R(-1) + h_ * static_cast<int>(ilo + static_cast<int>(i));
      s_[i] = omega_ * u;
      sigma[i] = exp(-theta_ / (R(1) - u * u));
    }
    R total = 0;
    for (const R& v : sigma) total += v;
    const R C = R(1) / (h_ * total);

    // polynomial coefficients of R_k(D) and the normalisation 1/(Lambda_M'(i lambda_k) H(i lambda_k))
    e_.assign(static_cast<std::size_t>(K + 1), std::vector<R>(static_cast<std::size_t>(M + 1), R(0)));
    log_h_.resize(static_cast<std::size_t>(K + 1));
    for (int k = 0; k <= K; ++k) {
      std::vector<R> poly{R(1)};
      for (int m = 1; m <= M; ++m) {
        if (m == k) continue;
        poly.push_back(R(0));
        const R inv = R(1) / lam_[m];
        for (std::size_t q = poly.size() - 1; q >= 1; --q) poly[q] += poly[q - 1] * inv;
      }
      R lp = 1;
      if (k >= 1) {
        poly.insert(poly.begin(), R(0));
        for (auto& c : poly) c /= lam_[k];
        lp = -1;
        for (int m = 1; m <= M; ++m)
          if (m != k) lp *= R(1) - lam_[k] / lam_[m];
      }
      const R H = C * h_ * exp_sum(sigma, lam_[k]);
      log_h_[k] = static_cast<double>(log(H));
      R scale = C / (omega_ * lp * H);
      R fact = 1;
      for (std::size_t q = 0; q < poly.size(); ++q) {
        e_[k][q] = poly[q] * scale * fact;
        fact *= static_cast<int>(q + 1);
        scale /= omega_;
      }
    }

    eta_.assign(static_cast<std::size_t>(K + 1), std::vector<R>(n));
    log_abs_.assign(static_cast<std::size_t>(K + 1), std::vector<double>(n));
    std::vector<R> a(static_cast<std::size_t>(M + 1)), pj(static_cast<std::size_t>(M + 1));
    for (std::size_t i = 0; i < n; ++i) {
      const R u = s_[i] / omega_;
      taylor(u, sigma[i], pj, a);
      for (int k = 0; k <= K; ++k) {
        R v = 0, av = 0;
        for (int q = 0; q <= M; ++q) {
          const R t = e_[k][q] * a[q];
          v += t;
          av += abs(t);
        }
        eta_[k][i] = v;
        log_abs_[k][i] = static_cast<double>(log(av));
      }
    }
  }

  int digits() const override { return static_cast<int>(D); }
  int product_order() const override { return M_; }
  int quad_nodes() const override { return N_; }

  MomentValue moment(int k, double lambda) const override {
    if (k < 0 || k > K_) throw std::out_of_range("moment: mode index outside the family");
    const R lam(lambda);
    const R pref = exp((lam_[k] - lam) * (T_ / 2)) * h_ * omega_;
    MomentValue out;
    out.value = static_cast<double>(pref * exp_sum(eta_[k], lam));
    out.roundoff = roundoff(std::vector<double>{static_cast<double>(log(pref))}, {k}, lambda);
    return out;
  }

  MomentValue combo_exp_moment(const std::vector<double>& c, double lambda) const override {
    if (c.size() > static_cast<std::size_t>(K_ + 1)) throw std::invalid_argument("combo_exp_moment: more coefficients than family modes");
    const R lam(lambda);
    std::vector<R> g(s_.size(), R(0));
    std::vector<double> logs;
    std::vector<int> ks;
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (c[k] == 0.0) continue;
      const R w = R(c[k]) * exp(-lam_[k] * (T_ / 2));
      for (std::size_t i = 0; i < s_.size(); ++i) g[i] += w * eta_[k][i];
      logs.push_back(static_cast<double>(log(abs(w)) + lam * (T_ / 2) + log(h_ * omega_)));
      ks.push_back(static_cast<int>(k));
    }
    MomentValue out;
    out.value = static_cast<double>(exp(lam * (T_ / 2)) * h_ * omega_ * exp_sum(g, lam));
    out.roundoff = roundoff(logs, ks, lambda);
    return out;
  }

  std::vector<double> psi_at(double t) const override {
    std::vector<R> eta = eta_at(t);
    std::vector<double> out(eta.size());
    for (std::size_t k = 0; k < eta.size(); ++k) out[k] = static_cast<double>(eta[k] * exp(lam_[k] * (T_ / 2)));
    return out;
  }

  std::vector<double> log_psi_at(double t) const override {
    std::vector<R> eta = eta_at(t);
    std::vector<double> out(eta.size());
    for (std::size_t k = 0; k < eta.size(); ++k)
      out[k] = eta[k] == 0 ? -HUGE_VAL : static_cast<double>(log(abs(eta[k])) + lam_[k] * (T_ / 2));
    return out;
  }

  std::vector<double> decayed_combination(const std::vector<double>& c, const std::vector<double>& t) const override {
    if (c.size() > static_cast<std::size_t>(K_ + 1)) throw std::invalid_argument("decayed_combination: more coefficients than family modes");
    std::vector<R> w(c.size());
    for (std::size_t k = 0; k < c.size(); ++k) w[k] = R(c[k]) * exp(-lam_[k] * (T_ / 2));
    std::vector<double> out(t.size(), 0.0);
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::vector<R> eta = eta_at(t[i]);
      R v = 0;
      for (std::size_t k = 0; k < c.size(); ++k) v += w[k] * eta[k];
      out[i] = static_cast<double>(v);
    }
    return out;
  }

  std::vector<double> log_eta_max() const override {
    std::vector<double> out(static_cast<std::size_t>(K_ + 1));
    for (int k = 0; k <= K_; ++k) {
      R m = 0;
      for (const R& v : eta_[k]) m = std::max(m, R(abs(v)));
      out[k] = static_cast<double>(log(m));
    }
    return out;
  }

 private:
  // Taylor coefficients a_n = sigma^{(n)}(u)/n! of exp(-theta/(1-u^2))
  void taylor(const R& u, const R& a0, std::vector<R>& p, std::vector<R>& a) const {
    const R i1 = R(1) / (R(1) - u), i2 = R(1) / (R(1) + u);
    R w1 = i1, w2 = i2;
    for (int j = 0; j <= M_; ++j) {
      p[j] = -(theta_ / 2) * (j % 2 ? w1 - w2 : w1 + w2);
      w1 *= i1;
      w2 *= i2;
    }
    a[0] = a0;
    for (int n = 0; n < M_; ++n) {
      R s = 0;
      for (int q = 0; q <= n; ++q) s += p[q + 1] * a[n - q] * (q + 1);
      a[n + 1] = s / (n + 1);
    }
  }

  std::vector<R> eta_at(double t) const {
    std::vector<R> out(static_cast<std::size_t>(K_ + 1), R(0));
    const R u = (R(t) - R(T_) / 2) / omega_;
    if (abs(u) >= 1) return out;
    std::vector<R> a(static_cast<std::size_t>(M_ + 1)), p(static_cast<std::size_t>(M_ + 1));
    taylor(u, exp(-theta_ / (R(1) - u * u)), p, a);
    for (int k = 0; k <= K_; ++k)
      for (int q = 0; q <= M_; ++q) out[k] += e_[k][q] * a[q];
    return out;
  }

  // sum_i g_i exp(lambda s_i) by a geometric progression, re-anchored periodically
  R exp_sum(const std::vector<R>& g, const R& lam) const {
    const R ratio = exp(lam * omega_ * h_);
    R acc = 0, E = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (i % kRenormalize == 0) E = exp(lam * s_[i]);
      acc += g[i] * E;
      E *= ratio;
    }
    return acc;
  }

  // 10^{-D} times the absolute sum, in logs
  double roundoff(const std::vector<double>& log_pref, const std::vector<int>& ks, double lambda) const {
    std::vector<double> terms;
    terms.reserve(ks.size() * s_.size());
    for (std::size_t j = 0; j < ks.size(); ++j)
      for (std::size_t i = 0; i < s_.size(); ++i)
        terms.push_back(log_pref[j] + log_abs_[ks[j]][i] + lambda * static_cast<double>(s_[i]));
    return std::exp(logsumexp(terms) - D * std::numbers::ln10);
  }

  int K_, M_, N_;
  double T_;
  R omega_, theta_, h_;
  std::vector<R> lam_;
  std::vector<double> lam_d_;
  std::vector<R> s_;
  std::vector<std::vector<R>> e_;
  std::vector<std::vector<R>> eta_;
  std::vector<std::vector<double>> log_abs_;
  std::vector<double> log_h_;
};

int pick_digits(int wanted) {
  for (int d : kDigitSet)
    if (d >= wanted) return d;
  std::ostringstream os;
  os << "biorthogonal_family: needs " << wanted << " working digits, more than the supported " << kDigitSet[std::size(kDigitSet) - 1];
  throw std::runtime_error(os.str());
}

int auto_nodes(double digits, int M, const MultiplierParams& p) {
  double N = 1000.0;
  for (int it = 0; it < 8; ++it) {
    const double L = digits * std::numbers::ln10 + M * std::log(std::numbers::pi * N / p.omega) + 20.0;
    N = L * L / (p.theta * std::numbers::pi);
  }
  const int n = static_cast<int>(std::ceil(N / 256.0)) * 256;
  return std::max(n, 1024);
}

std::shared_ptr<const FamilyCore> make_core(int D, const SpectralSystem& sys, const MultiplierParams& p, int K, int M, int N) {
  switch (D) {
    case 100: return std::make_shared<FamilyImpl<100>>(sys, p, K, M, N);
    case 150: return std::make_shared<FamilyImpl<150>>(sys, p, K, M, N);
    case 200: return std::make_shared<FamilyImpl<200>>(sys, p, K, M, N);
    case 300: return std::make_shared<FamilyImpl<300>>(sys, p, K, M, N);
    case 400: return std::make_shared<FamilyImpl<400>>(sys, p, K, M, N);
    default: return std::make_shared<FamilyImpl<600>>(sys, p, K, M, N);
  }
}

}  // namespace

int BiorthogonalFamily::product_order() const { return core_->product_order(); }
int BiorthogonalFamily::digits() const { return core_->digits(); }
int BiorthogonalFamily::quad_nodes() const { return core_->quad_nodes(); }

double BiorthogonalFamily::eval(int k, double t) const {
  if (k < 0 || k > K_) throw std::out_of_range("BiorthogonalFamily::eval: mode index outside the family");
  return core_->psi_at(t)[k];
}

MomentValue BiorthogonalFamily::moment(int k, double lambda) const { return core_->moment(k, lambda); }

MomentValue BiorthogonalFamily::combo_exp_moment(const std::vector<double>& c, double lambda) const { return core_->combo_exp_moment(c, lambda); }

std::vector<double> BiorthogonalFamily::decayed_combination(const std::vector<double>& c, const std::vector<double>& t) const {
  return core_->decayed_combination(c, t);
}

std::string BiorthogonalFamily::diagnosis() const {
  std::ostringstream os;
  os << (usable() ? "usable" : "unusable") << ": max defect " << max_defect_ << " at (k,l) = (" << worst_k_ << "," << worst_l_ << ")"
     << ", roundoff floor " << floor_ << ", leakage " << leakage_ << ", digits " << digits() << ", nodes " << quad_nodes();
  return os.str();
}

BiorthogonalFamily biorthogonal_family(const SpectralSystem& sys, const MultiplierParams& params, int K, const FamilyOptions& opts) {
  if (K < 0 || K > sys.K) throw std::invalid_argument("biorthogonal_family: K must lie in [0, sys.K]");
  const int M = opts.product_order < 0 ? K : opts.product_order;
  if (M < K || M > sys.K) throw std::invalid_argument("biorthogonal_family: product order must lie in [K, sys.K]");
  if (opts.grid_panels < 1) throw std::invalid_argument("biorthogonal_family: grid_panels must be positive");

  const double lmax = sys.lambdas[std::max(K, 1)];
  const int wanted = opts.digits > 0 ? opts.digits : static_cast<int>(std::ceil(lmax * params.T / 2.0 / std::numbers::ln10 + 40.0));
  const int D = pick_digits(wanted);
  const int N = opts.quad_nodes > 0 ? opts.quad_nodes : auto_nodes(D, M, params);

  BiorthogonalFamily fam;
  fam.core_ = make_core(D, sys, params, K, M, N);
  fam.params_ = params;
  fam.K_ = K;
  fam.lambdas_.assign(sys.lambdas.begin(), sys.lambdas.begin() + K + 1);

  const int P = opts.grid_panels;
  fam.grid_.resize(static_cast<std::size_t>(P + 1));
  for (int i = 0; i <= P; ++i) fam.grid_[i] = params.T * i / P;
  fam.psi_.assign(static_cast<std::size_t>(K + 1), std::vector<double>(static_cast<std::size_t>(P + 1)));
  fam.sup_.assign(static_cast<std::size_t>(K + 1), 0.0);
  fam.log_sup_ = fam.core_->log_eta_max();
  for (int k = 0; k <= K; ++k) fam.log_sup_[k] += sys.lambdas[k] * params.T / 2.0;
  for (int i = 0; i <= P; ++i) {
    const std::vector<double> v = fam.core_->psi_at(fam.grid_[i]);
    const std::vector<double> lv = fam.core_->log_psi_at(fam.grid_[i]);
    for (int k = 0; k <= K; ++k) {
      fam.psi_[k][i] = v[k];
      fam.sup_[k] = std::max(fam.sup_[k], std::fabs(v[k]));
      fam.log_sup_[k] = std::max(fam.log_sup_[k], lv[k]);
    }
  }

  fam.defect_.assign(static_cast<std::size_t>(K + 1), std::vector<double>(static_cast<std::size_t>(K + 1)));
  for (int k = 0; k <= K; ++k)
    for (int l = 0; l <= K; ++l) {
      const MomentValue mv = fam.core_->moment(k, sys.lambdas[l]);
      const double d = mv.value - (k == l ? 1.0 : 0.0);
      fam.defect_[k][l] = d;
      fam.floor_ = std::max(fam.floor_, mv.roundoff);
      if (!(std::fabs(d) <= fam.max_defect_)) {
        fam.max_defect_ = std::isnan(d) ? HUGE_VAL : std::fabs(d);
        fam.worst_k_ = k;
        fam.worst_l_ = l;
      }
    }
  for (int l = M + 1; l <= std::min(sys.K, M + 8); ++l)
    for (int k = 0; k <= K; ++k) fam.leakage_ = std::max(fam.leakage_, std::fabs(fam.core_->moment(k, sys.lambdas[l]).value));

  fam.log_bound_.assign(static_cast<std::size_t>(K + 1), std::numeric_limits<double>::quiet_NaN());
  const double logC = std::log(family_constant(sys, params));
  const double rt = std::sqrt(params.theta + 1.0);
  double worst = -HUGE_VAL;
  for (int k = 1; k <= K; ++k) {
    const double lk = sys.lambdas[k];
    fam.log_bound_[k] = logC + params.T * lk / 2.0 - params.omega * lk / (2.0 * rt) - std::log(lk * std::fabs(lambda_prime_at_eigen(sys, k)));
    worst = std::max(worst, fam.log_sup_[k] - fam.log_bound_[k]);
  }
  fam.fitted_c_ = K >= 1 ? std::exp(worst) : 0.0;
  return fam;
}

}  // namespace nullctrl
