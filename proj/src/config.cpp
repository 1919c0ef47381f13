#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include <CLI11.hpp>

#include "nullctrl/config.hpp"

namespace nullctrl {

namespace {

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

int to_int(const std::string& key, const std::string& v) {
  const double d = to_double(key, v);
  if (d != std::floor(d) || std::fabs(d) > 1e9) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<int>(d);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

const std::string& single(const std::string& key, const std::vector<std::string>& in) {
  if (in.size() != 1) throw ConfigError(key + ": expected a single value, got " + std::to_string(in.size()) + " (key repeated or given as a list)");
  return in.front();
}

std::vector<double> numbers(const std::string& key, const std::vector<std::string>& in) {
  std::vector<double> out;
  for (const auto& s : in) {
    std::stringstream ss(s);
    std::string tok;
    while (ss >> tok) out.push_back(to_double(key, tok));
  }
  return out;
}

}  // namespace

std::string to_string(Mode m) {
  switch (m) {
    case Mode::Spectrum: return "spectrum";
    case Mode::Family: return "family";
    case Mode::Control: return "control";
    case Mode::Bounds: return "bounds";
    case Mode::Sweep: return "sweep";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  for (Mode m : {Mode::Spectrum, Mode::Family, Mode::Control, Mode::Bounds, Mode::Sweep})
    if (to_string(m) == s) return m;
  throw ConfigError("mode must be one of spectrum, family, control, bounds, sweep; got '" + s + "'");
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::T: return "T";
    case SweepAxis::Delta: return "delta";
    case SweepAxis::Mu: return "mu";
  }
  return "?";
}

RunConfig parse_config(std::istream& in) {
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  RunConfig rc;
  std::map<std::string, bool> seen;
  for (const auto& it : items) {
    if (it.name == "++" || it.name == "--") continue;
    const std::string key = it.fullname();
    if (seen[key]) throw ConfigError(key + ": given twice");
    seen[key] = true;
    const auto& v = it.inputs;
    if (key == "problem.alpha") rc.problem.alpha = to_double(key, single(key, v));
    else if (key == "problem.beta") rc.problem.beta = to_double(key, single(key, v));
    else if (key == "problem.mu") rc.problem.mu = to_double(key, single(key, v));
    else if (key == "problem.T") rc.problem.T = to_double(key, single(key, v));
    else if (key == "problem.endpoint") {
      try {
        rc.problem.endpoint = endpoint_from_string(single(key, v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
      }
    } else if (key == "model.K") rc.K = to_int(key, single(key, v));
    else if (key == "family.K_f") rc.K_f = to_int(key, single(key, v));
    else if (key == "family.trim") rc.trim = to_bool(key, single(key, v));
    else if (key == "family.grid_panels") rc.grid_panels = to_int(key, single(key, v));
    else if (key == "family.delta") {
      const std::string& s = single(key, v);
      if (s == "optimize") rc.delta.optimize = true;
      else rc.delta = {false, to_double(key, s)};
    } else if (key == "bounds.reading") {
      try {
        rc.reading = lower_reading_from_string(single(key, v));
      } catch (const std::invalid_argument& e) {
        throw ConfigError(key + ": " + e.what());
      }
    } else if (key == "run.mode") rc.mode = mode_from_string(single(key, v));
    else if (key == "sweep.axis") {
      const std::string& s = single(key, v);
      if (s == "T") rc.sweep_axis = SweepAxis::T;
      else if (s == "delta") rc.sweep_axis = SweepAxis::Delta;
      else if (s == "mu") rc.sweep_axis = SweepAxis::Mu;
      else throw ConfigError(key + ": must be T, delta or mu; got '" + s + "'");
    } else if (key == "sweep.values") rc.sweep_values = numbers(key, v);
    else if (key == "u0.coeffs") {
      rc.u0.kind = DatumSpec::Kind::Coeffs;
      rc.u0.coeffs = numbers(key, v);
    } else if (key == "u0.unit") {
      rc.u0.kind = DatumSpec::Kind::Unit;
      rc.u0.unit = to_int(key, single(key, v));
    } else if (key == "u0.first_mode") {
      if (to_bool(key, single(key, v))) rc.u0.kind = DatumSpec::Kind::FirstMode;
    } else if (key == "u0.power") {
      rc.u0.kind = DatumSpec::Kind::Power;
      rc.u0.power = to_double(key, single(key, v));
    } else if (key == "output.dir") rc.output_dir = single(key, v);
    else throw ConfigError("unknown key '" + key + "'");
  }
  const int forms = seen["u0.coeffs"] + seen["u0.unit"] + seen["u0.first_mode"] + seen["u0.power"];
  if (forms > 1) throw ConfigError("u0: give only one of u0.coeffs, u0.unit, u0.first_mode, u0.power");
  return rc;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file '" + path + "'");
  return parse_config(f);
}

void validate(const RunConfig& rc) {
  if (!std::isfinite(rc.problem.alpha) || !std::isfinite(rc.problem.beta) || !std::isfinite(rc.problem.mu))
    throw ConfigError("problem: parameters must be finite");
  try {
    validate(rc.problem);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("problem: ") + e.what());
  }
  if (rc.K < 2 || rc.K > 4096) throw ConfigError("model.K must lie in [2, 4096]");
  if (rc.K_f < 0 || rc.K_f > rc.K) throw ConfigError("family.K_f must lie in [0, model.K]");
  if (rc.grid_panels < 16 || rc.grid_panels > (1 << 20)) throw ConfigError("family.grid_panels must lie in [16, 2^20]");
  if (!rc.delta.optimize && !(rc.delta.delta > 0.0 && rc.delta.delta < 1.0)) throw ConfigError("family.delta must lie in (0,1) or be 'optimize'");
  if (rc.u0.kind == DatumSpec::Kind::Coeffs) {
    if (rc.u0.coeffs.empty()) throw ConfigError("u0.coeffs is empty");
    if (static_cast<int>(rc.u0.coeffs.size()) > rc.K + 1) throw ConfigError("u0.coeffs has more entries than model.K + 1");
    for (double c : rc.u0.coeffs)
      if (!std::isfinite(c)) throw ConfigError("u0.coeffs must be finite");
  }
  if (rc.u0.kind == DatumSpec::Kind::Unit && (rc.u0.unit < 0 || rc.u0.unit > rc.K)) throw ConfigError("u0.unit must lie in [0, model.K]");
  if (rc.u0.kind == DatumSpec::Kind::Power && !std::isfinite(rc.u0.power)) throw ConfigError("u0.power must be finite");
  if (rc.mode == Mode::Sweep || rc.mode == Mode::Bounds) {
    if (rc.sweep_values.empty()) throw ConfigError("sweep.values must be non-empty for modes sweep and bounds");
    for (std::size_t i = 1; i < rc.sweep_values.size(); ++i)
      if (!(rc.sweep_values[i] > rc.sweep_values[i - 1])) throw ConfigError("sweep.values must be strictly increasing");
    for (double v : rc.sweep_values) {
      if (rc.sweep_axis == SweepAxis::T && !(v > 0.0)) throw ConfigError("sweep.values: T must be > 0");
      if (rc.sweep_axis == SweepAxis::Delta && !(v > 0.0 && v < 1.0)) throw ConfigError("sweep.values: delta must lie in (0,1)");
      if (rc.sweep_axis == SweepAxis::Mu && !(v < mu_crit(rc.problem.alpha + rc.problem.beta)))
        throw ConfigError("sweep.values: mu < mu(alpha+beta) violated");
    }
  }
}

CoefficientState make_datum(const SpectralSystem& sys, const DatumSpec& d, int K) {
  CoefficientState s = CoefficientState::zero(K);
  switch (d.kind) {
    case DatumSpec::Kind::Coeffs:
      for (std::size_t k = 0; k < d.coeffs.size() && static_cast<int>(k) <= K; ++k) s.coeffs[k] = d.coeffs[k];
      break;
    case DatumSpec::Kind::Unit: s.coeffs.at(static_cast<std::size_t>(d.unit)) = 1.0; break;
    case DatumSpec::Kind::FirstMode: s.coeffs.at(1) = std::fabs(sys.jnu_at_zero[1]) / std::sqrt(2.0 * sys.kappa); break;
    case DatumSpec::Kind::Power: {
      const double p = d.power;
      ProjectionResult pr = project(sys, [p](double x) { return std::pow(x, p); });
      if (!pr.converged) throw std::runtime_error("u0 projection did not converge");
      for (int k = 0; k <= std::min(K, pr.state.K()); ++k) s.coeffs[k] = pr.state.coeffs[k];
      break;
    }
  }
  return s;
}

}  // namespace nullctrl
