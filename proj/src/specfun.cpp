#include "nullctrl/specfun.hpp"

#include <mpfr.h>
#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace nullctrl {

namespace {

using quad = __float128;

void check_order(double nu) {
  if (!(nu > -1.0) || !std::isfinite(nu)) {
    std::ostringstream os;
    os << "Bessel order must satisfy nu > -1 (got " << nu << ")";
    throw std::invalid_argument(os.str());
  }
}

// (x/2)^nu / Gamma(nu+1)
double series_prefactor(double nu, double x) {
  double p = std::pow(0.5 * x, nu);
  double g = std::tgamma(nu + 1.0);
  if (std::isfinite(p) && std::isfinite(g) && p > 0.0) return p / g;
  return std::exp(nu * std::log(0.5 * x) - std::lgamma(nu + 1.0));
}

// sum_m (-x^2/4)^m / (m! (nu+1)_m) in binary128
double series_sum_quad(double nu, double x) {
  const quad q = -static_cast<quad>(x) * static_cast<quad>(x) / 4;
  const quad a = static_cast<quad>(nu);
  quad term = 1;
  quad sum = 1;
  quad big = 1;
  for (int m = 1; m < 2000; ++m) {
    term *= q / (static_cast<quad>(m) * (a + static_cast<quad>(m)));
    sum += term;
    quad t = fabsq(term);
    if (t > big) big = t;
    if (m > 0.5 * x + 2 && t < big * static_cast<quad>(1e-36)) break;
  }
  return static_cast<double>(sum);
}

// Same sum in MPFR with enough bits to absorb the cancellation.
double series_sum_mpfr(double nu, double x, long bits) {
  mpfr_t q, term, sum, big, tmp;
  mpfr_inits2(bits, q, term, sum, big, tmp, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(q, x, MPFR_RNDN);
  mpfr_sqr(q, q, MPFR_RNDN);
  mpfr_div_si(q, q, -4, MPFR_RNDN);
  mpfr_set_ui(term, 1, MPFR_RNDN);
  mpfr_set_ui(sum, 1, MPFR_RNDN);
  mpfr_set_ui(big, 1, MPFR_RNDN);
  for (long m = 1; m < 100000; ++m) {
    mpfr_mul(term, term, q, MPFR_RNDN);
    mpfr_set_d(tmp, nu, MPFR_RNDN);
    mpfr_add_si(tmp, tmp, m, MPFR_RNDN);
    mpfr_mul_si(tmp, tmp, m, MPFR_RNDN);
    mpfr_div(term, term, tmp, MPFR_RNDN);
    mpfr_add(sum, sum, term, MPFR_RNDN);
    mpfr_abs(tmp, term, MPFR_RNDN);
    if (mpfr_cmp(tmp, big) > 0) mpfr_set(big, tmp, MPFR_RNDN);
    if (m > 0.5 * x + 2) {
      mpfr_mul_2si(tmp, tmp, bits, MPFR_RNDN);
      if (mpfr_cmp(tmp, big) < 0) break;
    }
  }
  double r = mpfr_get_d(sum, MPFR_RNDN);
  mpfr_clears(q, term, sum, big, tmp, static_cast<mpfr_ptr>(nullptr));
  return r;
}

struct Hankel {
  double value;
  double last_term;  // relative size of the smallest term used
};

Hankel hankel_eval(double nu, double x) {
  const double mu = 4.0 * nu * nu;
  double p = 0.0, q = 0.0;
  double a = 1.0;  // a_k / x^k
  double prev = HUGE_VAL;
  double scale = 0.0;
  int k = 0;
  for (; k < 400; ++k) {
    if (k > 0) {
      double odd = 2.0 * k - 1.0;
      a *= (mu - odd * odd) / (8.0 * k * x);
    }
    double t = std::fabs(a);
    if (t > prev && k > 1) break;  // divergence sets in
    switch (k % 4) {
      case 0: p += a; break;
      case 1: q += a; break;
      case 2: p -= a; break;
      case 3: q -= a; break;
    }
    scale = std::max(scale, t);
    prev = t;
    if (t < 1e-18 * scale || a == 0.0) break;
  }
  const double c = 0.5 * nu * std::numbers::pi + 0.25 * std::numbers::pi;
  const double cx = std::cos(x), sx = std::sin(x);
  const double cc = std::cos(c), sc = std::sin(c);
  const double cchi = cx * cc + sx * sc;  // cos(x - c)
  const double schi = sx * cc - cx * sc;  // sin(x - c)
  double v = std::sqrt(2.0 / (std::numbers::pi * x)) * (p * cchi - q * schi);
  return {v, prev / std::max(scale, 1.0)};
}

// quad complex helpers
struct cq {
  quad re, im;
};
inline cq mul(cq a, cq b) { return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re}; }

}  // namespace

double gamma_fn(double x) { return std::tgamma(x); }

double bessel_j_series(double nu, double x) {
  check_order(nu);
  if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("bessel_j: x must be finite and >= 0");
  if (x == 0.0) {
    if (nu == 0.0) return 1.0;
    return nu > 0.0 ? 0.0 : HUGE_VAL;
  }
  // log10 of the largest term relative to the result is about x*log10(e)
  const double lost = x * std::numbers::log10e;
  double s;
  if (lost <= 16.0) {
    s = series_sum_quad(nu, x);
  } else {
    long bits = static_cast<long>((lost + 24.0) * 3.33) + 16;
    s = series_sum_mpfr(nu, x, bits);
  }
  return series_prefactor(nu, x) * s;
}

double bessel_j_asymptotic(double nu, double x) {
  check_order(nu);
  if (!(x > 0.0) || !std::isfinite(x)) throw std::invalid_argument("bessel_j_asymptotic: x must be positive");
  Hankel h = hankel_eval(nu, x);
  if (h.last_term > 1e-15) throw std::domain_error("Hankel expansion does not converge at this argument");
  return h.value;
}

double bessel_j(double nu, double x) {
  check_order(nu);
  if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("bessel_j: x must be finite and >= 0");
  if (x > bessel_switch_point(nu)) {
    Hankel h = hankel_eval(nu, x);
    if (h.last_term <= 1e-15) return h.value;
  }
  return bessel_j_series(nu, x);
}

double bessel_j_prime(double nu, double x) {
  if (!(x > 0.0)) throw std::invalid_argument("bessel_j_prime: x must be > 0");
  return (nu / x) * bessel_j(nu, x) - bessel_j(nu + 1.0, x);
}

std::complex<double> hyp0f1(double b, std::complex<double> q) {
  if (!(b > 0.0)) throw std::invalid_argument("hyp0f1: b must be > 0");
  const double aq = std::abs(q);
  if (aq > 0.25 * kComplexSeriesBudget * kComplexSeriesBudget) throw SeriesBudgetExceeded("hyp0f1: argument beyond series budget");
  cq qq{q.real(), q.imag()};
  const quad bb = static_cast<quad>(b);
  cq term{1, 0};
  cq sum{1, 0};
  quad big = 1;
  const double stop = std::sqrt(aq) + 2.0;
  for (int m = 1; m < 4000; ++m) {
    term = mul(term, qq);
    quad d = static_cast<quad>(m) * (bb + static_cast<quad>(m - 1));
    term.re /= d;
    term.im /= d;
    sum.re += term.re;
    sum.im += term.im;
    quad t = fabsq(term.re) + fabsq(term.im);
    if (t > big) big = t;
    if (m > stop && t < big * static_cast<quad>(1e-36)) break;
  }
  return {static_cast<double>(sum.re), static_cast<double>(sum.im)};
}

std::complex<double> bessel_j_complex(double nu, std::complex<double> z) {
  check_order(nu);
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw std::invalid_argument("bessel_j_complex: non-finite z");
  if (std::abs(z) > kComplexSeriesBudget) throw SeriesBudgetExceeded("bessel_j_complex: |z| beyond series budget, use product form");
  if (z == std::complex<double>(0.0, 0.0)) {
    if (nu == 0.0) return 1.0;
    return nu > 0.0 ? 0.0 : HUGE_VAL;
  }
  std::complex<double> s = hyp0f1(nu + 1.0, -0.25 * z * z);
  std::complex<double> pre;
  if (z.imag() == 0.0 && z.real() > 0.0)
    pre = series_prefactor(nu, z.real());
  else
    pre = std::exp(nu * std::log(0.5 * z) - std::lgamma(nu + 1.0));
  return pre * s;
}

double mcmahon_zero(double nu, int k, double* next_term) {
  const double mu = 4.0 * nu * nu;
  const double b = (k + 0.5 * nu - 0.25) * std::numbers::pi;
  const double e = 8.0 * b;
  const double e3 = e * e * e;
  const double e5 = e3 * e * e;
  const double e7 = e5 * e * e;
  double j = b - (mu - 1.0) / e - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * e3) -
             32.0 * (mu - 1.0) * (83.0 * mu * mu - 982.0 * mu + 3779.0) / (15.0 * e5);
  double t7 = 64.0 * (mu - 1.0) * (6949.0 * mu * mu * mu - 153855.0 * mu * mu + 1585743.0 * mu - 6277237.0) / (105.0 * e7);
  if (next_term) *next_term = std::fabs(t7);
  return j - t7;
}

namespace {

// Newton with bisection safeguard inside a sign-change bracket.
double refine_zero(double nu, double lo, double hi, double guess) {
  double flo = bessel_j(nu, lo);
  double fhi = bessel_j(nu, hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw std::runtime_error("refine_zero: no sign change in bracket");
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  bool converged = false;
  for (int it = 0; it < 50; ++it) {
    double f = bessel_j(nu, x);
    if (f == 0.0) return x;
    if ((f > 0) == (flo > 0)) {
      lo = x;
      flo = f;
    } else {
      hi = x;
    }
    double d = (nu / x) * f - bessel_j(nu + 1.0, x);
    double xn = (d != 0.0) ? x - f / d : 0.5 * (lo + hi);
    if (!(xn >= lo && xn <= hi)) xn = 0.5 * (lo + hi);
    double step = std::fabs(xn - x);
    x = xn;
    if (converged) break;  // one polishing step after reaching tolerance
    if (step <= 1e-13 * x) converged = true;
  }
  if (!converged) throw std::runtime_error("refine_zero: Newton/bisection did not reach 1e-13 in 50 steps");
  return x;
}

}  // namespace

ZeroTable bessel_zeros(double nu, int K) {
  check_order(nu);
  if (K < 1) throw std::invalid_argument("bessel_zeros: K must be >= 1");
  ZeroTable t;
  t.nu = nu;
  t.zeros.reserve(static_cast<std::size_t>(K));
  // no zero below max(nu, 0) for nu >= 0; for -1 < nu < 0 start near 0
  double lo = std::max(nu, 0.0) + 1e-3;
  const double step = std::numbers::pi / 8.0;
  for (int k = 1; k <= K; ++k) {
    double g = mcmahon_zero(nu, k);
    double a = lo, b = 0.0;
    bool found = false;
    // try the bracket between neighbouring asymptotic guesses first
    double left = k == 1 ? lo : std::max(lo, 0.5 * (mcmahon_zero(nu, k - 1) + g));
    double right = 0.5 * (g + mcmahon_zero(nu, k + 1));
    if (right > left) {
      double fl = bessel_j(nu, left), fr = bessel_j(nu, right);
      if ((fl > 0) != (fr > 0)) {
        // make sure there is exactly one sign change by sampling
        int changes = 0;
        double prev = fl;
        double x0 = left;
        int n = std::max(2, static_cast<int>(std::ceil((right - left) / step)));
        double pa = left, pb = right;
        for (int i = 1; i <= n; ++i) {
          double x1 = left + (right - left) * i / n;
          double f1 = bessel_j(nu, x1);
          if ((f1 > 0) != (prev > 0)) {
            ++changes;
            pa = x0;
            pb = x1;
          }
          prev = f1;
          x0 = x1;
        }
        if (changes == 1) {
          a = pa;
          b = pb;
          found = true;
        }
      }
    }
    if (!found) {
      // scan forward from the previous zero
      double x0 = lo, f0 = bessel_j(nu, lo);
      double limit = lo + 4.0 * std::numbers::pi + std::max(0.0, g - lo) + 10.0;
      for (double x1 = lo + step; x1 <= limit; x1 += step) {
        double f1 = bessel_j(nu, x1);
        if ((f1 > 0) != (f0 > 0)) {
          a = x0;
          b = x1;
          found = true;
          break;
        }
        x0 = x1;
        f0 = f1;
      }
    }
    if (!found) {
      std::ostringstream os;
      os << "bessel_zeros: could not bracket zero k=" << k << " of J_" << nu;
      throw std::runtime_error(os.str());
    }
    double z = refine_zero(nu, a, b, g);
    if (!t.zeros.empty() && !(z > t.zeros.back())) {
      std::ostringstream os;
      os << "bessel_zeros: zero k=" << k << " of J_" << nu << " not increasing";
      throw std::runtime_error(os.str());
    }
    t.zeros.push_back(z);
    lo = z + 1e-6 * std::max(1.0, z);
  }
  return t;
}

EnvelopeCheck sqrt_j_envelope_check(double nu, int K) {
  ZeroTable z = bessel_zeros(nu + 1.0, K);
  EnvelopeCheck r;
  const double target = std::sqrt(2.0 / std::numbers::pi);
  int tail_from = K - std::max(1, K / 10);
  for (int k = 1; k <= K; ++k) {
    double j = z[k];
    double v = std::sqrt(j) * std::fabs(bessel_j(nu, j));
    r.values.push_back(v);
    if (k > tail_from) r.fitted_c = std::max(r.fitted_c, std::fabs(v - target) * j);
  }
  return r;
}

}  // namespace nullctrl
