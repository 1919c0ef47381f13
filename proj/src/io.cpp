#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "nullctrl/io.hpp"

namespace nullctrl::io {

namespace {

void emit(const Json& j, std::string& out, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(2 * depth), ' ');
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad + Json(it.key()).dump() + ": ";
        emit(it.value(), out, depth + 1);
      }
      out += "\n" + close + "}";
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      bool scalar = true;
      for (const auto& v : j)
        if (v.is_structured()) scalar = false;
      if (scalar) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          emit(j[i], out, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += pad;
        emit(j[i], out, depth + 1);
      }
      out += "\n" + close + "]";
      return;
    }
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (!std::isfinite(v)) {
        out += "null";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", v);
      std::string s = buf;
      if (s.find_first_of(".eE") == std::string::npos) s += ".0";
      out += s;
      return;
    }
    default:
      out += j.dump();
  }
}

std::vector<double> doubles(const Json& j, const char* key) {
  std::vector<double> v;
  for (const auto& x : j.at(key)) v.push_back(x.is_null() ? std::nan("") : x.get<double>());
  return v;
}

}  // namespace

std::string dump(const Json& j) {
  std::string out;
  emit(j, out, 0);
  out += "\n";
  return out;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

Json to_json(const SpectralSystem& sys) {
  Json j;
  j["alpha"] = sys.alpha;
  j["beta"] = sys.beta;
  j["mu"] = sys.mu;
  j["kappa"] = sys.kappa;
  j["nu"] = sys.nu;
  j["a"] = sys.a;
  j["K"] = sys.K;
  j["zeros"] = sys.zeros.zeros;
  j["lambdas"] = sys.lambdas;
  j["trace_left"] = sys.trace_left;
  j["trace_right"] = sys.trace_right;
  std::vector<double> jn(sys.jnu_at_zero.begin() + 1, sys.jnu_at_zero.end());
  j["jnu_at_zero"] = jn;
  return j;
}

SpectralSystem spectrum_from_json(const Json& j) {
  SpectralSystem s;
  s.alpha = j.at("alpha").get<double>();
  s.beta = j.at("beta").get<double>();
  s.mu = j.at("mu").get<double>();
  s.kappa = j.at("kappa").get<double>();
  s.nu = j.at("nu").get<double>();
  s.a = j.at("a").get<double>();
  s.K = j.at("K").get<int>();
  s.zeros.nu = s.nu + 1.0;
  s.zeros.zeros = doubles(j, "zeros");
  s.lambdas = doubles(j, "lambdas");
  s.trace_left = doubles(j, "trace_left");
  s.trace_right = doubles(j, "trace_right");
  s.jnu_at_zero = {0.0};
  if (j.contains("jnu_at_zero"))
    for (double v : doubles(j, "jnu_at_zero")) s.jnu_at_zero.push_back(v);
  const std::size_t n = static_cast<std::size_t>(s.K) + 1;
  if (s.zeros.zeros.size() != n - 1 || s.lambdas.size() != n || s.trace_left.size() != n || s.trace_right.size() != n)
    throw std::invalid_argument("spectrum json: array lengths disagree with K");
  return s;
}

Json to_json(const ProblemConfig& cfg) {
  Json j;
  j["alpha"] = cfg.alpha;
  j["beta"] = cfg.beta;
  j["mu"] = cfg.mu;
  j["T"] = cfg.T;
  j["endpoint"] = to_string(cfg.endpoint);
  return j;
}

Json to_json(const CostReport& r) {
  Json j;
  j["config"] = to_json(r.config);
  j["K"] = r.K;
  j["K_f"] = r.K_f;
  j["T"] = r.T;
  j["delta_used"] = r.delta_used;
  j["measured_l2"] = r.measured_l2;
  j["measured_sup"] = r.measured_sup;
  j["upper_bound"] = r.upper_bound;
  j["lower_bound"] = r.lower_bound;
  j["bound_kind"] = "shape bound (c = 1)";
  j["bound_applicable"] = r.bound_applicable;
  j["bounds_ordered"] = r.bounds_ordered;
  j["lower_reading"] = to_string(r.reading);
  j["lower_bound_alternate"] = r.lower_bound_alternate;
  j["residual"] = r.residual;
  j["residual_vs_free"] = r.residual_vs_free;
  j["per_mode_residual"] = r.per_mode_residual;
  j["moment_defects"] = r.moment_defects;
  j["moment_defects_hp"] = r.moment_defects_hp;
  Json c;
  c["lhs"] = r.chain.lhs;
  c["head"] = r.chain.head;
  c["tail"] = r.chain.tail;
  c["fitted_c"] = r.chain.fitted_c;
  j["sup_chain"] = c;
  Json ledger = Json::array();
  for (const auto& e : r.ledger) {
    Json t;
    t["k"] = e.k;
    t["b"] = e.b;
    t["gain"] = e.gain;
    t["log_coeff"] = e.log_coeff;
    t["log_sup"] = e.log_sup;
    t["log_magnitude"] = e.log_magnitude;
    t["included"] = e.included;
    ledger.push_back(t);
  }
  j["terms"] = ledger;
  Json f;
  f["max_defect"] = r.family_defect;
  f["roundoff_floor"] = r.family_floor;
  f["digits"] = r.family_digits;
  f["quad_nodes"] = r.family_nodes;
  f["diagnosis"] = r.family_diagnosis;
  j["family"] = f;
  return j;
}

Json family_json(const BiorthogonalFamily& fam) {
  Json j;
  j["K"] = fam.K();
  j["product_order"] = fam.product_order();
  j["digits"] = fam.digits();
  j["quad_nodes"] = fam.quad_nodes();
  j["T"] = fam.T();
  j["delta"] = fam.params().delta;
  j["omega"] = fam.params().omega;
  j["theta"] = fam.params().theta;
  j["max_defect"] = fam.max_defect();
  j["worst_k"] = fam.worst_k();
  j["worst_l"] = fam.worst_l();
  j["roundoff_floor"] = fam.roundoff_floor();
  j["leakage"] = fam.leakage();
  j["usable"] = fam.usable();
  j["defect_matrix"] = fam.defect_matrix();
  j["sup_norms"] = fam.sup_norms();
  j["log_sup_norms"] = fam.log_sup_norms();
  j["log_sup_bound"] = fam.log_sup_bound();
  j["fitted_c"] = fam.fitted_c();
  return j;
}

std::string Csv::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
    os << "\n";
  }
  return os.str();
}

void Tidy::add(const std::string& run, const std::string& quantity, double value) { rows.push_back({run, quantity, fmt(value)}); }

std::string Tidy::str() const {
  Csv c;
  c.header = {"run", "quantity", "value"};
  c.rows = rows;
  return c.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

}  // namespace nullctrl::io
