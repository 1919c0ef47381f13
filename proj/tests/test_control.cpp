#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nullctrl/control.hpp"

using namespace nullctrl;

namespace {

struct Setup {
  SpectralSystem sys;
  MultiplierParams params;
  BiorthogonalFamily fam;
};

const Setup& left6() {
  static const Setup s = [] {
    Setup r;
    r.sys = derive_system({}, 32);
    r.params = make_params(r.sys, 1.0, 0.5);
    r.fam = biorthogonal_family(r.sys, r.params, 6);
    return r;
  }();
  return s;
}

CostOptions small_opts() {
  CostOptions o;
  o.K = 32;
  o.K_f = 6;
  return o;
}

}  // namespace

TEST_CASE("zero datum gives the zero control") {
  const Setup& s = left6();
  const ControlSignal f = synthesize(s.sys, s.fam, CoefficientState::zero(32), Endpoint::Left);
  CHECK(f.norm_sup == 0.0);
  CHECK(f.norm_l2 == 0.0);
}

TEST_CASE("unit datum gives a single scaled family element") {
  const Setup& s = left6();
  std::vector<TermEntry> ledger;
  const ControlSignal f = synthesize(s.sys, s.fam, CoefficientState::unit(32, 1), Endpoint::Left, &ledger);
  const double scale = -std::exp(-s.sys.lambdas[1]) / s.sys.trace_left[1];
  for (std::size_t i = 0; i < f.samples.size(); i += 37) CHECK(f.samples[i] == doctest::Approx(scale * s.fam.psi(1)[i]).epsilon(1e-10).scale(1e-300));
  int included = 0;
  for (const TermEntry& t : ledger) included += t.included;
  CHECK(included == 1);
  CHECK(series_coefficients(s.sys, CoefficientState::unit(32, 1), Endpoint::Left, 6)[1] == doctest::Approx(-1.0 / s.sys.trace_left[1]));
}

TEST_CASE("zero control leaves the free decay") {
  const SpectralSystem sys = derive_system({}, 32);
  const NullCheck c = verify_null(sys, CoefficientState::unit(32, 1), ControlSignal::zero(1.0, 64), Endpoint::Left);
  CHECK(c.residual == doctest::Approx(std::exp(-sys.lambdas[1])).epsilon(1e-12));
  CHECK(c.residual_vs_free == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("null residuals, both endpoints") {
  for (Endpoint e : {Endpoint::Left, Endpoint::Right}) {
    const ProblemConfig cfg{0.0, 0.0, 0.0, 1.0, e};
    for (const CoefficientState& u0 : {CoefficientState::unit(32, 1), CoefficientState(std::vector<double>{0.0, 1.0, -0.5, 0.25, 0.125})}) {
      CoefficientState v = u0;
      v.coeffs.resize(33, 0.0);
      const CostReport r = cost_report(cfg, v, small_opts());
      CAPTURE(to_string(e));
      CHECK(r.residual <= 1e-4);
      CHECK(r.bound_applicable);
      CHECK(r.family_defect <= 1e-6);
      for (double d : r.moment_defects_hp) CHECK(d <= 1e-6);
      CHECK(std::isfinite(r.chain.fitted_c));
    }
  }
}

TEST_CASE("applying a left control at the right endpoint is detected") {
  const Setup& s = left6();
  const CoefficientState u0 = CoefficientState::unit(32, 1);
  const ControlSignal f = synthesize(s.sys, s.fam, u0, Endpoint::Left);
  const NullCheck good = verify_null(s.sys, u0, f, Endpoint::Left);
  const NullCheck bad = verify_null(s.sys, u0, f, Endpoint::Right);
  CHECK(good.residual_vs_free <= 1e-4);
  CHECK(bad.residual_vs_free > 1e-2);
}

TEST_CASE("nonzero mean datum marks the bounds as not applicable") {
  CoefficientState u0 = CoefficientState::zero(32);
  u0.coeffs[0] = 1.0;
  u0.coeffs[1] = 0.5;
  const CostReport r = cost_report({}, u0, small_opts());
  CHECK_FALSE(r.bound_applicable);
  CHECK(r.residual <= 1e-4);
}

TEST_CASE("upper bound recomputed independently in log form") {
  for (Endpoint e : {Endpoint::Left, Endpoint::Right}) {
    for (double nu_cfg : {0.0, 0.5}) {
      const SpectralSystem sys = derive_system({nu_cfg, 0.0, nu_cfg == 0.0 ? 0.0 : -0.5, 1.0, e}, 8);
      for (double T : {0.5, 1.0, 3.0})
        for (double d : {0.2, 0.5, 0.8}) {
          const long double k = sys.kappa, nu = sys.nu, j1 = sys.zeros[1];
          const long double q = (1 - d) * k * k * T;
          long double lg = std::log(1 + 1 / q) + std::log(std::exp(1 / (std::sqrt(2.0L) * k)) + std::exp(3 / q - 5 * std::log((long double)d))) -
                           std::pow(1 - d, 1.5L) * std::pow((long double)T, 1.5L) * k * k * k * j1 * j1 / (8 * std::sqrt(1.0L + T)) +
                           0.5L * std::log((long double)T);
          if (e == Endpoint::Left) {
            lg += -std::log(nu + 1) - 2.5L * std::log(k) - T * k * k * j1 * j1 / 2;
          } else {
            lg += -(nu + 1) * std::log(k) - std::lgamma(nu + 2) + (2 * nu + 1) / 4 * std::log((2 * nu + 1) / (4 * T * std::numbers::e_v<long double>)) -
                  T * k * k * j1 * j1 / 4;
          }
          CHECK(upper_bound(sys, T, d, e) == doctest::Approx(static_cast<double>(std::exp(lg))).epsilon(1e-12));
        }
    }
  }
}

TEST_CASE("upper bound blows up at both ends of delta and decays in T") {
  const SpectralSystem sys = derive_system({}, 8);
  const double mid = upper_bound(sys, 1.0, 0.5, Endpoint::Left);
  CHECK(upper_bound(sys, 1.0, 1e-3, Endpoint::Left) > 1e6 * mid);
  CHECK(upper_bound(sys, 1.0, 0.999, Endpoint::Left) > 1e6 * mid);
  double prev = HUGE_VAL;
  for (double T : {2.0, 4.0, 8.0, 16.0}) {
    const double v = upper_bound(sys, T, 0.5, Endpoint::Left);
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(upper_bound(sys, 1.0, 0.0, Endpoint::Left), std::invalid_argument);
  const double opt = choose_delta(sys, 1.0, Endpoint::Left, {true, 0.5});
  for (int i = 1; i <= 17; ++i) CHECK(upper_bound(sys, 1.0, opt, Endpoint::Left) <= upper_bound(sys, 1.0, 0.05 + 0.9 * i / 18.0, Endpoint::Left));
}

TEST_CASE("lower bound: exponential rate in T") {
  const SpectralSystem sys = derive_system({}, 8);
  const double j1 = sys.zeros[1], j2 = sys.zeros[2];
  const double rate = -(j1 * j1 + 0.5 * j2 * j2) * sys.kappa * sys.kappa;
  const double Ts[] = {0.5, 1.0, 2.0, 4.0};
  for (int i = 0; i + 1 < 4; ++i) {
    const double a = std::log(lower_bound(sys, Ts[i], Endpoint::Left)) + 0.5 * std::log(Ts[i]);
    const double b = std::log(lower_bound(sys, Ts[i + 1], Endpoint::Left)) + 0.5 * std::log(Ts[i + 1]);
    CHECK((b - a) / (Ts[i + 1] - Ts[i]) == doctest::Approx(rate).epsilon(1e-10));
  }
}

TEST_CASE("right-endpoint lower bound readings") {
  const SpectralSystem sys = derive_system({}, 8);
  CHECK(lower_bound(sys, 1.0, Endpoint::Left, LowerReading::AsPrinted) == lower_bound(sys, 1.0, Endpoint::Left, LowerReading::NuPlusOne));
  const double a = lower_bound(sys, 1.0, Endpoint::Right, LowerReading::AsPrinted);
  const double b = lower_bound(sys, 1.0, Endpoint::Right, LowerReading::NuPlusOne);
  CHECK(a > b);
  const double j2nu = bessel_zeros(sys.nu, 2)[2], j2 = sys.zeros[2];
  CHECK(std::log(a / b) == doctest::Approx(0.5 * (j2 * j2 - j2nu * j2nu)).epsilon(1e-10));
  CHECK(lower_reading_from_string(to_string(LowerReading::NuPlusOne)) == LowerReading::NuPlusOne);
  CHECK_THROWS_AS(lower_reading_from_string("other"), std::invalid_argument);
}

TEST_CASE("moment identities: exact decay for the first-mode datum") {
  const Setup& s = left6();
  const double J = std::fabs(s.sys.jnu_at_zero[1]);
  CoefficientState u0 = CoefficientState::zero(32);
  u0.coeffs[1] = J / std::sqrt(2.0 * s.sys.kappa);
  const std::vector<double> c = series_coefficients(s.sys, u0, Endpoint::Left, 6);
  const double target = -std::pow(2.0, s.sys.nu) * gamma_fn(s.sys.nu + 1.0) * J * J / (2.0 * s.sys.kappa * std::pow(s.sys.zeros[1], s.sys.nu));
  for (int k = 1; k <= 6; ++k) {
    const double v = s.fam.combo_exp_moment(c, s.sys.lambdas[k]).value;
    if (k == 1) CHECK(v == doctest::Approx(target).epsilon(1e-6));
    else CHECK(std::fabs(v) <= 1e-6 * std::fabs(target));
  }
  const std::vector<double> d = moment_identity_defects(s.sys, s.fam, u0, Endpoint::Left);
  for (double x : d) CHECK(x <= 1e-6);
}

TEST_CASE("sampled moment identities converge under grid refinement") {
  const SpectralSystem sys = derive_system({}, 32);
  const MultiplierParams p = make_params(sys, 1.0, 0.5);
  const CoefficientState u0 = CoefficientState::unit(32, 1);
  double prev = HUGE_VAL;
  for (int panels : {512, 1024, 2048}) {
    FamilyOptions o;
    o.grid_panels = panels;
    const BiorthogonalFamily fam = biorthogonal_family(sys, p, 6, o);
    const ControlSignal f = synthesize(sys, fam, u0, Endpoint::Left);
    double worst = 0.0;
    for (double x : moment_identity_defects(sys, u0, f, Endpoint::Left, 6)) worst = std::max(worst, x);
    CAPTURE(panels);
    CHECK(worst < 0.3 * prev);
    prev = worst;
  }
}

TEST_CASE("sup chain has a finite fitted constant") {
  const Setup& s = left6();
  const CoefficientState u0(std::vector<double>{0.0, 1.0, -0.5, 0.25, 0.125});
  const ControlSignal f = synthesize(s.sys, s.fam, u0, Endpoint::Left);
  const SupChain c = sup_chain(s.sys, s.params, u0, f.norm_sup, Endpoint::Left);
  CHECK(c.head == 0.0);
  CHECK(c.tail > 0.0);
  CHECK(std::isfinite(c.fitted_c));
  CHECK(c.fitted_c > 0.0);
}

TEST_CASE("stage errors carry the stage name") {
  const StageError e("family", "boom");
  CHECK(e.stage() == "family");
  CHECK(std::string(e.what()) == "family: boom");
}
