#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nullctrl/control.hpp"

namespace nullctrl::io {

using Json = nlohmann::ordered_json;

/// Deterministic JSON text: floats as %.17g, non-finite as null, two-space indent.
std::string dump(const Json& j);

Json to_json(const SpectralSystem& sys);
/// Inverse of to_json; reproduces every stored double exactly.
SpectralSystem spectrum_from_json(const Json& j);

Json to_json(const ProblemConfig& cfg);
Json to_json(const CostReport& r);
Json family_json(const BiorthogonalFamily& fam);

/// %.17g, or "nan"/"inf"/"-inf"
std::string fmt(double v);

struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  void add(std::vector<std::string> row) { rows.push_back(std::move(row)); }
  std::string str() const;
};

/// One row per (run, quantity).
struct Tidy {
  std::vector<std::vector<std::string>> rows;
  void add(const std::string& run, const std::string& quantity, double value);
  std::string str() const;
};

void write_file(const std::string& path, const std::string& text);

}  // namespace nullctrl::io
