#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "nullctrl/io.hpp"
#include "nullctrl/runner.hpp"

using namespace nullctrl;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  std::random_device rd;
  const fs::path p = fs::temp_directory_path() / ("nullctrl_cli_" + std::to_string(rd()) + std::to_string(rd()));
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

int run_cli(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" + std::string(NULLCTRL_EXE) + "\" " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string first_line(const fs::path& p) {
  std::ifstream f(p);
  std::string l;
  std::getline(f, l);
  return l;
}

const char* kFlagship =
    "[problem]\nalpha = 0\nbeta = 0\nmu = 0\nT = 1\nendpoint = left\n"
    "[model]\nK = 32\n"
    "[family]\nK_f = 6\ndelta = 0.5\n"
    "[u0]\nunit = 1\n";

}  // namespace

TEST_CASE("config parsing: sections and dotted keys") {
  std::istringstream a("problem.alpha = 0.5\nproblem.mu = -0.5\nmodel.K = 16\nfamily.delta = optimize\nu0.coeffs = 0 1 -0.5\nrun.mode = control\n");
  const RunConfig rc = parse_config(a);
  CHECK(rc.problem.alpha == 0.5);
  CHECK(rc.problem.mu == -0.5);
  CHECK(rc.K == 16);
  CHECK(rc.delta.optimize);
  CHECK(rc.u0.kind == DatumSpec::Kind::Coeffs);
  CHECK(rc.u0.coeffs == std::vector<double>{0.0, 1.0, -0.5});
  std::istringstream b("[problem]\nendpoint = right\n[bounds]\nreading = nu_plus_one\n[sweep]\naxis = delta\nvalues = 0.2 0.4\n");
  const RunConfig rb = parse_config(b);
  CHECK(rb.problem.endpoint == Endpoint::Right);
  CHECK(rb.reading == LowerReading::NuPlusOne);
  CHECK(rb.sweep_axis == SweepAxis::Delta);
  CHECK(rb.sweep_values.size() == 2);
}

TEST_CASE("config errors name the key") {
  auto msg = [](const std::string& text) -> std::string {
    std::istringstream in(text);
    try {
      validate(parse_config(in));
    } catch (const ConfigError& e) {
      return e.what();
    }
    return "";
  };
  CHECK(msg("problem.gamma = 1\n").find("problem.gamma") != std::string::npos);
  CHECK(msg("problem.alpha = abc\n").find("problem.alpha") != std::string::npos);
  CHECK(msg("u0.unit = 2\nu0.power = 1\n").find("u0") != std::string::npos);
  CHECK(msg("problem.alpha = 2.5\n").find("problem") != std::string::npos);
  CHECK(msg("family.delta = 1.5\n").find("family.delta") != std::string::npos);
  CHECK(msg("run.mode = sweep\n").find("sweep.values") != std::string::npos);
  CHECK(msg("problem.alpha = 0\nproblem.alpha = 0.5\n").find("repeated") != std::string::npos);
  CHECK(msg("problem.alpha = 0.5\n").empty());
}

TEST_CASE("datum construction") {
  const SpectralSystem sys = derive_system({}, 16);
  DatumSpec d;
  d.kind = DatumSpec::Kind::FirstMode;
  const CoefficientState s = make_datum(sys, d, 16);
  CHECK(s.coeffs[1] == doctest::Approx(std::fabs(sys.jnu_at_zero[1]) / std::sqrt(2.0)));
  d.kind = DatumSpec::Kind::Power;
  d.power = 1.0;
  CHECK(make_datum(sys, d, 16).coeffs[0] == doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-10));
}

TEST_CASE("worker count honours NULLCTRL_THREADS") {
  ::setenv("NULLCTRL_THREADS", "1", 1);
  CHECK(worker_count(8) == 1);
  ::setenv("NULLCTRL_THREADS", "junk", 1);
  CHECK(worker_count(1) == 1);
  ::unsetenv("NULLCTRL_THREADS");
  CHECK(worker_count(0) == 1);
}

TEST_CASE("exit codes") {
  const fs::path d = scratch_dir();
  put(d / "bad.ini", "problem.gamma = 1\n");
  CHECK(run_cli("run " + (d / "bad.ini").string() + " --out " + (d / "o1").string()) == 2);
  put(d / "conflict.ini", "u0.unit = 1\nu0.coeffs = 1 2\n");
  CHECK(run_cli("run " + (d / "conflict.ini").string() + " --out " + (d / "o2").string()) == 2);
  CHECK(run_cli("run " + (d / "missing.ini").string()) == 2);
  CHECK(run_cli("frobnicate") == 2);
  put(d / "huge.ini", "model.K = 64\nfamily.K_f = 60\nrun.mode = family\n");
  CHECK(run_cli("run " + (d / "huge.ini").string() + " --out " + (d / "o3").string()) == 3);
  fs::remove_all(d);
}

TEST_CASE("spectrum mode writes a round-trippable spectrum") {
  const fs::path d = scratch_dir();
  put(d / "s.ini", std::string(kFlagship) + "[run]\nmode = spectrum\n");
  REQUIRE(run_cli("run " + (d / "s.ini").string() + " --out " + (d / "out").string()) == 0);
  const io::Json j = io::Json::parse(slurp(d / "out" / "spectrum.json"));
  CHECK(j.contains("meta"));
  CHECK(j["meta"]["bound_constants"] == "c = 1");
  const SpectralSystem r = io::spectrum_from_json(j);
  const SpectralSystem s = derive_system({}, 32);
  CHECK(r.lambdas == s.lambdas);
  CHECK(r.trace_left == s.trace_left);
  CHECK(first_line(d / "out" / "tidy.csv") == "run,quantity,value");
  fs::remove_all(d);
}

TEST_CASE("control mode: artifacts, precision, determinism") {
  const fs::path d = scratch_dir();
  put(d / "c.ini", kFlagship);
  REQUIRE(run_cli("run " + (d / "c.ini").string() + " --out " + (d / "a").string()) == 0);
  REQUIRE(run_cli("run " + (d / "c.ini").string() + " --out " + (d / "b").string(), "NULLCTRL_THREADS=1") == 0);
  const std::string ja = slurp(d / "a" / "report.json");
  CHECK(ja == slurp(d / "b" / "report.json"));
  CHECK(slurp(d / "a" / "f_trace.csv") == slurp(d / "b" / "f_trace.csv"));
  CHECK(first_line(d / "a" / "f_trace.csv") == "t,f");
  const io::Json j = io::Json::parse(ja);
  const double res = j["report"]["residual"].get<double>();
  CHECK(res <= 1e-4);
  // values are written with 17 significant digits
  const std::string needle = io::fmt(res);
  CHECK(ja.find(needle) != std::string::npos);
  CHECK(io::fmt(0.1) == "0.10000000000000001");
  CHECK(j["meta"]["mode"] == "control");
  fs::remove_all(d);
}

TEST_CASE("family mode and bounds mode artifacts") {
  const fs::path d = scratch_dir();
  put(d / "f.ini", std::string(kFlagship) + "[run]\nmode = family\n");
  REQUIRE(run_cli("run " + (d / "f.ini").string() + " --out " + (d / "f").string()) == 0);
  CHECK(first_line(d / "f" / "psi_k.csv") == "t,k,psi");
  CHECK(fs::exists(d / "f" / "family.json"));
  put(d / "b.ini", std::string(kFlagship) + "[run]\nmode = bounds\n[sweep]\naxis = T\nvalues = 0.5 1 2 4\n");
  REQUIRE(run_cli("run " + (d / "b.ini").string() + " --out " + (d / "b").string()) == 0);
  CHECK(first_line(d / "b" / "bounds.csv") == "axis_value,measured,upper,lower");
  const io::Json j = io::Json::parse(slurp(d / "b" / "bounds.json"));
  CHECK(j["upper"].size() == 4);
  fs::remove_all(d);
}

TEST_CASE("sweep mode is independent of the thread count") {
  const fs::path d = scratch_dir();
  put(d / "w.ini", std::string(kFlagship) + "[run]\nmode = sweep\n[sweep]\naxis = delta\nvalues = 0.4 0.6\n");
  REQUIRE(run_cli("run " + (d / "w.ini").string() + " --out " + (d / "p").string(), "NULLCTRL_THREADS=2") == 0);
  REQUIRE(run_cli("run " + (d / "w.ini").string() + " --out " + (d / "q").string(), "NULLCTRL_THREADS=1") == 0);
  CHECK(slurp(d / "p" / "bounds.json") == slurp(d / "q" / "bounds.json"));
  CHECK(slurp(d / "p" / "report_1.json") == slurp(d / "q" / "report_1.json"));
  fs::remove_all(d);
}
