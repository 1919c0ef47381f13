#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <mutex>
#include <ostream>
#include <thread>

#include "nullctrl/io.hpp"
#include "nullctrl/runner.hpp"

namespace nullctrl {

namespace {

using io::Json;

Json meta(const RunConfig& rc, const Json& achieved) {
  Json m;
  m["tool"] = "nullctrl";
  m["format"] = 1;
  m["mode"] = to_string(rc.mode);
  m["problem"] = io::to_json(rc.problem);
  m["K"] = rc.K;
  m["K_f"] = rc.K_f;
  if (rc.delta.optimize) m["delta"] = "optimize";
  else m["delta"] = rc.delta.delta;
  m["grid_panels"] = rc.grid_panels;
  m["bound_constants"] = "c = 1";
  m["tolerances"] = achieved;
  return m;
}

std::string path(const RunConfig& rc, const std::string& name) { return (std::filesystem::path(rc.output_dir) / name).string(); }

SpectralSystem derive(const ProblemConfig& p, int K) {
  try {
    return derive_system(p, K);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  } catch (const std::exception& e) {
    throw StageError("derive", e.what());
  }
}

void run_spectrum(const RunConfig& rc, std::ostream& log) {
  const SpectralSystem sys = derive(rc.problem, rc.K);
  double robin = 0.0, quad = 0.0, dev = 0.0;
  for (int k = 0; k <= sys.K; ++k) robin = std::max(robin, robin_defect(sys, k) / (1.0 + sys.lambdas[k]));
  const int Kg = std::min(sys.K, 32);
  const auto G = gram_matrix(sys, Kg, &quad);
  for (int k = 0; k <= Kg; ++k)
    for (int l = 0; l <= Kg; ++l) dev = std::max(dev, std::fabs(G[k][l] - (k == l ? 1.0 : 0.0)));
  Json tol;
  tol["robin_relative"] = robin;
  tol["gram_max_dev"] = dev;
  tol["gram_modes"] = Kg;
  tol["quad_error"] = quad;
  Json j;
  j["meta"] = meta(rc, tol);
  const Json body = io::to_json(sys);
  for (const auto& it : body.items()) j[it.key()] = it.value();
  io::write_file(path(rc, "spectrum.json"), io::dump(j));
  io::Tidy t;
  for (int k = 0; k <= sys.K; ++k) t.add("spectrum", "lambda_" + std::to_string(k), sys.lambdas[k]);
  t.add("spectrum", "gram_max_dev", dev);
  t.add("spectrum", "robin_relative", robin);
  io::write_file(path(rc, "tidy.csv"), t.str());
  log << "spectrum: K = " << sys.K << ", lambda_1 = " << io::fmt(sys.lambdas[1]) << ", gram deviation " << dev << "\n";
}

void run_family(const RunConfig& rc, std::ostream& log) {
  const SpectralSystem sys = derive(rc.problem, rc.K);
  BiorthogonalFamily fam;
  try {
    const double delta = choose_delta(sys, rc.problem.T, rc.problem.endpoint, rc.delta);
    FamilyOptions fo;
    fo.grid_panels = rc.grid_panels;
    fam = biorthogonal_family(sys, make_params(sys, rc.problem.T, delta), rc.K_f, fo);
  } catch (const std::exception& e) {
    throw StageError("family", e.what());
  }
  Json tol;
  tol["max_defect"] = fam.max_defect();
  tol["roundoff_floor"] = fam.roundoff_floor();
  Json j;
  j["meta"] = meta(rc, tol);
  j["family"] = io::family_json(fam);
  j["diagnosis"] = fam.diagnosis();
  io::write_file(path(rc, "family.json"), io::dump(j));
  io::Csv c;
  c.header = {"t", "k", "psi"};
  for (int k = 0; k <= fam.K(); ++k)
    for (std::size_t i = 0; i < fam.grid().size(); ++i) c.add({io::fmt(fam.grid()[i]), std::to_string(k), io::fmt(fam.psi(k)[i])});
  io::write_file(path(rc, "psi_k.csv"), c.str());
  io::Tidy t;
  t.add("family", "max_defect", fam.max_defect());
  t.add("family", "fitted_c", fam.fitted_c());
  for (int k = 0; k <= fam.K(); ++k) t.add("family", "log_sup_psi_" + std::to_string(k), fam.log_sup_norms()[k]);
  io::write_file(path(rc, "tidy.csv"), t.str());
  log << "family: " << fam.diagnosis() << "\n";
  if (!fam.usable()) throw StageError("family", fam.diagnosis());
}

CostOptions cost_options(const RunConfig& rc) {
  CostOptions o;
  o.K = rc.K;
  o.K_f = rc.K_f;
  o.trim = rc.trim;
  o.grid_panels = rc.grid_panels;
  o.delta = rc.delta;
  o.reading = rc.reading;
  return o;
}

void add_report(io::Tidy& t, const std::string& run, const CostReport& r) {
  t.add(run, "measured_l2", r.measured_l2);
  t.add(run, "measured_sup", r.measured_sup);
  t.add(run, "upper_bound", r.upper_bound);
  t.add(run, "lower_bound", r.lower_bound);
  t.add(run, "residual", r.residual);
  t.add(run, "residual_vs_free", r.residual_vs_free);
  t.add(run, "delta_used", r.delta_used);
  t.add(run, "family_defect", r.family_defect);
}

void run_control(const RunConfig& rc, std::ostream& log) {
  const SpectralSystem sys = derive(rc.problem, rc.K);
  CoefficientState u0;
  try {
    u0 = make_datum(sys, rc.u0, sys.K);
  } catch (const std::exception& e) {
    throw StageError("project", e.what());
  }
  const CostReport r = cost_report(sys, rc.problem, u0, cost_options(rc));
  Json tol;
  tol["residual"] = r.residual;
  tol["family_defect"] = r.family_defect;
  tol["family_roundoff_floor"] = r.family_floor;
  Json j;
  j["meta"] = meta(rc, tol);
  j["report"] = io::to_json(r);
  io::write_file(path(rc, "report.json"), io::dump(j));
  io::Csv c;
  c.header = {"t", "f"};
  for (std::size_t i = 0; i < r.control.t.size(); ++i) c.add({io::fmt(r.control.t[i]), io::fmt(r.control.samples[i])});
  io::write_file(path(rc, "f_trace.csv"), c.str());
  io::Tidy t;
  add_report(t, "control", r);
  io::write_file(path(rc, "tidy.csv"), t.str());
  log << "control: residual " << r.residual << " (vs free decay " << r.residual_vs_free << "), ||f||_2 = " << r.measured_l2 << ", K_f = " << r.K_f
      << "\n";
}

struct Point {
  RunConfig rc;
  double axis = 0.0;
};

std::vector<Point> sweep_points(const RunConfig& rc) {
  std::vector<Point> out;
  for (double v : rc.sweep_values) {
    Point p{rc, v};
    if (rc.sweep_axis == SweepAxis::T) p.rc.problem.T = v;
    else if (rc.sweep_axis == SweepAxis::Delta) p.rc.delta = {false, v};
    else p.rc.problem.mu = v;
    out.push_back(p);
  }
  return out;
}

void write_bounds(const RunConfig& rc, const std::vector<Point>& pts, const std::vector<double>& measured, const std::vector<double>& up,
                  const std::vector<double>& lo, const std::vector<double>& deltas) {
  io::Csv c;
  c.header = {"axis_value", "measured", "upper", "lower"};
  for (std::size_t i = 0; i < pts.size(); ++i) c.add({io::fmt(pts[i].axis), io::fmt(measured[i]), io::fmt(up[i]), io::fmt(lo[i])});
  io::write_file(path(rc, "bounds.csv"), c.str());
  Json j;
  j["meta"] = meta(rc, Json::object());
  j["axis"] = to_string(rc.sweep_axis);
  j["axis_values"] = rc.sweep_values;
  j["measured"] = measured;
  j["upper"] = up;
  j["lower"] = lo;
  j["delta_used"] = deltas;
  j["lower_reading"] = to_string(rc.reading);
  io::write_file(path(rc, "bounds.json"), io::dump(j));
}

void run_bounds(const RunConfig& rc, std::ostream& log) {
  const auto pts = sweep_points(rc);
  std::vector<double> measured(pts.size(), std::nan("")), up, lo, deltas;
  io::Tidy t;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const SpectralSystem sys = derive(pts[i].rc.problem, std::max(pts[i].rc.K, 2));
    const double T = pts[i].rc.problem.T;
    const double d = choose_delta(sys, T, rc.problem.endpoint, pts[i].rc.delta);
    deltas.push_back(d);
    up.push_back(upper_bound(sys, T, d, rc.problem.endpoint));
    lo.push_back(lower_bound(sys, T, rc.problem.endpoint, rc.reading));
    const std::string run = "bounds_" + std::to_string(i);
    t.add(run, to_string(rc.sweep_axis), pts[i].axis);
    t.add(run, "upper_bound", up.back());
    t.add(run, "lower_bound", lo.back());
  }
  write_bounds(rc, pts, measured, up, lo, deltas);
  io::write_file(path(rc, "tidy.csv"), t.str());
  log << "bounds: " << pts.size() << " points\n";
}

void run_sweep(const RunConfig& rc, std::ostream& log) {
  const auto pts = sweep_points(rc);
  const std::size_t n = pts.size();
  std::vector<CostReport> reports(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        const RunConfig& p = pts[i].rc;
        const SpectralSystem sys = derive(p.problem, p.K);
        const CoefficientState u0 = make_datum(sys, p.u0, sys.K);
        reports[i] = cost_report(sys, p.problem, u0, cost_options(p));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = worker_count(static_cast<int>(n));
  std::vector<std::thread> pool;
  for (int w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const ConfigError&) {
      throw;
    } catch (const StageError& e) {
      throw StageError("sweep[" + std::to_string(i) + "]." + e.stage(), e.what());
    } catch (const std::exception& e) {
      throw StageError("sweep[" + std::to_string(i) + "]", e.what());
    }
  }
  std::vector<double> measured, up, lo, deltas;
  io::Tidy t;
  for (std::size_t i = 0; i < n; ++i) {
    const CostReport& r = reports[i];
    const SpectralSystem sys = derive(pts[i].rc.problem, pts[i].rc.K);
    const double n0 = make_datum(sys, pts[i].rc.u0, sys.K).norm();
    measured.push_back(n0 > 0.0 ? r.measured_l2 / n0 : 0.0);
    up.push_back(r.upper_bound);
    lo.push_back(r.lower_bound);
    deltas.push_back(r.delta_used);
    Json j;
    j["meta"] = meta(pts[i].rc, Json{{"residual", r.residual}, {"family_defect", r.family_defect}});
    j["axis_value"] = pts[i].axis;
    j["report"] = io::to_json(r);
    io::write_file(path(rc, "report_" + std::to_string(i) + ".json"), io::dump(j));
    const std::string run = "sweep_" + std::to_string(i);
    t.add(run, to_string(rc.sweep_axis), pts[i].axis);
    add_report(t, run, r);
  }
  write_bounds(rc, pts, measured, up, lo, deltas);
  io::write_file(path(rc, "tidy.csv"), t.str());
  log << "sweep: " << n << " points on " << workers << " worker(s)\n";
}

}  // namespace

int worker_count(int jobs) {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n <= 0) n = 1;
  if (const char* env = std::getenv("NULLCTRL_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) n = std::min<long>(n, v);
  }
  return std::max(1, std::min(n, jobs));
}

void run(const RunConfig& rc, std::ostream& log) {
  validate(rc);
  std::error_code ec;
  std::filesystem::create_directories(rc.output_dir, ec);
  if (ec) throw ConfigError("output.dir: cannot create '" + rc.output_dir + "': " + ec.message());
  switch (rc.mode) {
    case Mode::Spectrum: run_spectrum(rc, log); break;
    case Mode::Family: run_family(rc, log); break;
    case Mode::Control: run_control(rc, log); break;
    case Mode::Bounds: run_bounds(rc, log); break;
    case Mode::Sweep: run_sweep(rc, log); break;
  }
}

std::vector<CheckLine> run_checks(std::ostream& log) {
  struct Cfg {
    double alpha, beta, mu;
  };
  const Cfg matrix[] = {{0, 0, 0}, {0.5, 0, -0.5}, {1, 1, -1}, {0, 1, -0.3}, {0.5, 1, -2}, {1, 0, -0.2}};
  std::vector<CheckLine> out;
  auto add = [&](std::string name, double v, double lim) {
    out.push_back({std::move(name), v <= lim, v, lim});
    const CheckLine& c = out.back();
    log << (c.passed ? "PASS " : "FAIL ") << c.name << " = " << io::fmt(c.value) << " (limit " << c.limit << ")\n";
  };
  for (const Cfg& c : matrix) {
    ProblemConfig p{c.alpha, c.beta, c.mu, 1.0, Endpoint::Left};
    char buf[96];
    std::snprintf(buf, sizeof buf, "[alpha=%g beta=%g mu=%g] ", c.alpha, c.beta, c.mu);
    const std::string tag = buf;
    const SpectralSystem sys = derive_system(p, 32);
    const auto G = gram_matrix(sys, 12);
    double dev = 0.0, res = 0.0, robin = 0.0, prod = 0.0;
    for (int k = 0; k <= 12; ++k)
      for (int l = 0; l <= 12; ++l) dev = std::max(dev, std::fabs(G[k][l] - (k == l ? 1.0 : 0.0)));
    for (int k = 0; k <= 12; ++k) {
      res = std::max(res, eigen_residual(sys, k));
      robin = std::max(robin, robin_defect(sys, k) / (1.0 + sys.lambdas[k]));
    }
    for (int k = 1; k <= 12; ++k)
      prod = std::max(prod, std::fabs(std::fabs(sys.trace_left[k] * lambda_prime_at_eigen(sys, k)) / ((sys.nu + 1.0) * std::sqrt(2.0 * sys.kappa)) - 1.0));
    add(tag + "gram deviation K=12", dev, 1e-8);
    add(tag + "eigen residual k<=12", res, 1e-6);
    add(tag + "robin condition k<=12", robin, 1e-8);
    add(tag + "trace times Lambda' k<=12", prod, 1e-10);
    const MultiplierParams mp = make_params(sys, 1.0, 0.5);
    const BiorthogonalFamily fam = biorthogonal_family(sys, mp, 6);
    add(tag + "family defect K=6", fam.max_defect(), 1e-6);
    const CoefficientState u0 = CoefficientState::unit(32, 1);
    CostOptions o;
    o.K = 32;
    o.K_f = 6;
    for (Endpoint e : {Endpoint::Left, Endpoint::Right}) {
      p.endpoint = e;
      const CostReport r = cost_report(sys, p, u0, o);
      add(tag + to_string(e) + " null residual", r.residual, 1e-4);
    }
  }
  return out;
}

}  // namespace nullctrl
