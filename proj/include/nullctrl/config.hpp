#pragma once

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "nullctrl/control.hpp"

namespace nullctrl {

/// Bad configuration; the message names the offending key or invariant.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Mode { Spectrum, Family, Control, Bounds, Sweep };
enum class SweepAxis { T, Delta, Mu };

std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);
std::string to_string(SweepAxis a);

/// Initial datum: explicit coefficients, a unit vector, the first-eigenfunction datum
/// |J_nu(j_1)|/sqrt(2 kappa) Phi_1, or x^p projected onto the basis.
struct DatumSpec {
  enum class Kind { Coeffs, Unit, FirstMode, Power } kind = Kind::Unit;
  std::vector<double> coeffs;
  int unit = 1;
  double power = 1.0;
};

struct RunConfig {
  ProblemConfig problem;
  int K = 64;
  int K_f = 12;
  bool trim = true;
  DeltaPolicy delta;
  int grid_panels = 2048;
  LowerReading reading = LowerReading::AsPrinted;
  Mode mode = Mode::Control;
  SweepAxis sweep_axis = SweepAxis::T;
  std::vector<double> sweep_values;
  DatumSpec u0;
  std::string output_dir = ".";
};

/// INI-style text with dotted keys ("problem.alpha = 0") or [sections]. Unknown keys are errors.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Range and consistency checks; throws ConfigError.
void validate(const RunConfig& rc);

CoefficientState make_datum(const SpectralSystem& sys, const DatumSpec& d, int K);

}  // namespace nullctrl
