// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "nullctrl/control.hpp"

using namespace nullctrl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  failures += !o.pass;
  std::printf("%s %2d %s | %s | %.2fs\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string num(double v) {
  char b[32];
  std::snprintf(b, sizeof b, "%.3e", v);
  return b;
}

const ProblemConfig kMatrix[] = {
    {0.0, 0.0, 0.0, 1.0, Endpoint::Left},  {0.5, 0.0, -0.5, 1.0, Endpoint::Left}, {1.0, 1.0, -1.0, 1.0, Endpoint::Left},
    {0.0, 1.0, -0.3, 1.0, Endpoint::Left}, {0.5, 1.0, -2.0, 1.0, Endpoint::Left}, {1.0, 0.0, -0.2, 1.0, Endpoint::Left},
};

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sxy += (x[i] - mx) * (y[i] - my), sxx += (x[i] - mx) * (x[i] - mx);
  return sxy / sxx;
}

Outcome null_control(Endpoint e) {
  const auto t0 = std::chrono::steady_clock::now();
  const ProblemConfig cfg{0.0, 0.0, 0.0, 1.0, e};
  const SpectralSystem sys = derive_system(cfg, 32);
  CostOptions o;
  o.K = 32;
  o.K_f = 6;
  CoefficientState mixed = CoefficientState::zero(32);
  mixed.coeffs[1] = 1.0;
  mixed.coeffs[2] = -0.5;
  mixed.coeffs[3] = 0.25;
  mixed.coeffs[4] = 0.125;
  const CostReport a = cost_report(sys, cfg, CoefficientState::unit(32, 1), o);
  const CostReport b = cost_report(sys, cfg, mixed, o);
  const double t = elapsed_since(t0);
  const double worst = std::max(a.residual, b.residual);
  return {worst <= 1e-4 && t < 120.0, "residual e_1 " + num(a.residual) + ", mixed " + num(b.residual) + " (limit 1e-4, K=32, K_f=6)"};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

int main() {
  criterion(1, "Bessel zeros: nu=1/2 closed form and tan x = x root", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const ZeroTable z = bessel_zeros(0.5, 20);
    double worst = 0.0;
    for (int k = 1; k <= 20; ++k) worst = std::max(worst, std::fabs(z[k] - k * std::numbers::pi));
    double a = std::numbers::pi, b = 1.5 * std::numbers::pi;
    for (int i = 0; i < 200; ++i) {
      const double m = 0.5 * (a + b);
      ((std::tan(m) - m) < 0 ? a : b) = m;
    }
    const double root = 0.5 * (a + b);
    const double d = std::fabs(bessel_zeros(1.5, 1)[1] - root);
    const double t = elapsed_since(t0);
    return Outcome{worst <= 1e-12 && d <= 1e-10 && t < 1.0, "max |j_k - k pi| " + num(worst) + ", |j_{3/2,1} - root| " + num(d)};
  });

  criterion(2, "Gram matrix K=12 over six configurations", [] {
    const auto t0 = std::chrono::steady_clock::now();
    double dev = 0.0;
    for (const ProblemConfig& c : kMatrix) {
      const auto G = gram_matrix(derive_system(c, 16), 12);
      for (int k = 0; k <= 12; ++k)
        for (int l = 0; l <= 12; ++l) dev = std::max(dev, std::fabs(G[k][l] - (k == l ? 1.0 : 0.0)));
    }
    const double t = elapsed_since(t0);
    return Outcome{dev <= 1e-8 && t < 30.0, "max |G - I| " + num(dev) + " (limit 1e-8)"};
  });

  criterion(3, "eigen-residual k<=12 over six configurations", [] {
    double r = 0.0;
    for (const ProblemConfig& c : kMatrix) {
      const SpectralSystem s = derive_system(c, 16);
      for (int k = 0; k <= 12; ++k) r = std::max(r, eigen_residual(s, k));
    }
    return Outcome{r <= 1e-6, "max residual " + num(r) + " (limit 1e-6)"};
  });

  criterion(4, "|trace_left * Lambda'(i lambda_k)| = (nu+1) sqrt(2 kappa)", [] {
    double r = 0.0;
    for (const ProblemConfig& c : kMatrix) {
      const SpectralSystem s = derive_system(c, 16);
      const double target = (s.nu + 1.0) * std::sqrt(2.0 * s.kappa);
      for (int k = 1; k <= 12; ++k) r = std::max(r, std::fabs(std::fabs(s.trace_left[k] * lambda_prime_at_eigen(s, k)) - target) / target);
    }
    return Outcome{r <= 1e-10, "max relative deviation " + num(r) + " (limit 1e-10)"};
  });

  criterion(5, "biorthogonal family K=6, flagship", [] {
    const auto t0 = std::chrono::steady_clock::now();
    const SpectralSystem s = derive_system({}, 32);
    const BiorthogonalFamily f = biorthogonal_family(s, make_params(s, 1.0, 0.5), 6);
    const double t = elapsed_since(t0);
    return Outcome{f.max_defect() <= 1e-6 && t < 120.0, "max defect " + num(f.max_defect()) + " (limit 1e-6), " + f.diagnosis()};
  });

  criterion(6, "left null control", [] { return null_control(Endpoint::Left); });
  criterion(7, "right null control", [] { return null_control(Endpoint::Right); });

  criterion(8, "moment identity for the first-eigenfunction datum", [] {
    const SpectralSystem s = derive_system({}, 32);
    const BiorthogonalFamily f = biorthogonal_family(s, make_params(s, 1.0, 0.5), 6);
    const double J = std::fabs(s.jnu_at_zero[1]);
    CoefficientState u0 = CoefficientState::zero(32);
    u0.coeffs[1] = J / std::sqrt(2.0 * s.kappa);
    const std::vector<double> c = series_coefficients(s, u0, Endpoint::Left, 6);
    const double target = -std::pow(2.0, s.nu) * gamma_fn(s.nu + 1.0) * J * J / (2.0 * s.kappa * std::pow(s.zeros[1], s.nu));
    double worst = 0.0;
    for (int k = 1; k <= 6; ++k) {
      const double v = f.combo_exp_moment(c, s.lambdas[k]).value;
      worst = std::max(worst, std::fabs(v - (k == 1 ? target : 0.0)) / std::fabs(target));
    }
    return Outcome{worst <= 1e-6, "max relative deviation " + num(worst) + " (limit 1e-6)"};
  });

  criterion(9, "bound exponents in T", [] {
    const SpectralSystem s = derive_system({}, 8);
    const double j1 = s.zeros[1], j2 = s.zeros[2], k2 = s.kappa * s.kappa;
    std::vector<double> Ts{0.5, 1.0, 2.0, 4.0}, yu, yl;
    for (double T : Ts) {
      yu.push_back(std::log(upper_bound(s, T, 0.5, Endpoint::Left) / upper_bound_factor(s, T, 0.5)));
      yl.push_back(std::log(lower_bound(s, T, Endpoint::Left)) + 0.5 * std::log(T));
    }
    const double su = ls_slope(Ts, yu), sl = ls_slope(Ts, yl);
    const double eu = -k2 * j1 * j1 / 2.0, el = -(j1 * j1 + 0.5 * j2 * j2) * k2;
    const double du = std::fabs(su / eu - 1.0), dl = std::fabs(sl / el - 1.0);
    return Outcome{du <= 0.05 && dl <= 1e-10, "upper slope " + num(su) + " vs " + num(eu) + " (rel " + num(du) + ", limit 5%), lower slope " +
                                                  num(sl) + " vs " + num(el) + " (rel " + num(dl) + ", limit 1e-10)"};
  });

  criterion(10, "multiplier inequalities, omega=0.25, theta in {0.5,1,2}", [] {
    const double omega = 0.25;
    bool growth = true, type = true;
    std::vector<double> cs;
    for (double theta : {0.5, 1.0, 2.0}) {
      const HMultiplier H(bump_params(omega, theta));
      const double rt = std::sqrt(theta + 1.0);
      for (double x = -50.0; x <= 50.0; x += 0.25)
        growth = growth && H({0.0, x}).real() >= std::exp(omega * std::fabs(x) / (2 * rt)) / (11 * rt);
      for (double a = -40.0; a <= 40.0; a += 2.5)
        for (double b = -40.0; b <= 40.0; b += 2.5) type = type && std::abs(H.eval({a, b}).scaled) <= 1.0 + 1e-12;
      double c = 0.0;
      for (double x = 1.05; x <= 4000.0; x *= 1.05) {
        const double h = std::abs(H({x, 0.0}));
        if (h < 1e-14) break;
        const double r = std::sqrt(omega * theta * x);
        c = std::max(c, h / (rt * r * std::exp(0.75 * theta - r)));
      }
      cs.push_back(c);
    }
    std::vector<double> sorted = cs;
    std::sort(sorted.begin(), sorted.end());
    const double med = sorted[1];
    bool stable = true;
    for (double c : cs) stable = stable && std::fabs(c / med - 1.0) <= 0.2;
    return Outcome{growth && type && stable, std::string("imaginary-axis growth ") + (growth ? "ok" : "violated") + ", exponential type " +
                                                 (type ? "ok" : "violated") + ", real-axis decay constant c = " + num(cs[0]) + ", " + num(cs[1]) + ", " +
                                                 num(cs[2]) + (stable ? " (stable within 20%)" : " (not stable within 20%)")};
  });

  criterion(11, "CLI determinism on the flagship configuration", [] {
    std::random_device rd;
    const fs::path d = fs::temp_directory_path() / ("nullctrl_acc_" + std::to_string(rd()));
    fs::create_directories(d);
    std::ofstream(d / "flagship.ini") << "[problem]\nalpha = 0\nbeta = 0\nmu = 0\nT = 1\nendpoint = left\n[model]\nK = 32\n[family]\nK_f = 6\n"
                                         "delta = 0.5\n[u0]\nunit = 1\n";
    int rc = 0;
    for (const char* sub : {"a", "b"}) {
      const std::string cmd = "\"" + std::string(NULLCTRL_EXE) + "\" run \"" + (d / "flagship.ini").string() + "\" --out \"" + (d / sub).string() +
                              "\" > /dev/null 2>&1";
      const int st = std::system(cmd.c_str());
      rc |= WIFEXITED(st) ? WEXITSTATUS(st) : 1;
    }
    const std::string a = slurp(d / "a" / "report.json"), b = slurp(d / "b" / "report.json");
    const bool same = rc == 0 && !a.empty() && a == b;
    fs::remove_all(d);
    return Outcome{same, rc ? "run failed" : (same ? "report.json byte-identical" : "report.json differs")};
  });

  std::printf("%d criterion(s) failed\n", failures);
  return failures ? 1 : 0;
}
