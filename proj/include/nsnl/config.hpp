#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nsnl/dynamics.hpp"
#include "nsnl/experiments.hpp"

namespace nsnl {

enum class Scenario { mass_point, mass_sweep, interference, pointer_collapse, branch_correlation };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

/// Initial state for single runs.
struct StateSpec {
  std::string kind = "gaussian";  // gaussian | periodic
  std::vector<double> x0;         // per axis, defaults to 0
  std::vector<double> k0;
  double sigma0 = 1.0;
};

/// Everything one invocation needs. `echo` holds every recognised key with
/// its materialized value, so rendering it back gives an equivalent config.
struct RunSpec {
  std::vector<AxisSpec> grid;
  StateSpec state;
  PhysParams params;
  StepperConfig stepper;
  double t_final = 1.0;
  Scenario scenario = Scenario::mass_point;
  std::string output_dir = "out";
  std::uint64_t seed = 0;  // reserved; the dynamics is deterministic

  SweepSpec sweep;
  SlitConfig slits;
  std::vector<double> slit_ratios{0.0, 0.005, 2.0};
  PointerSpec pointer;
  BranchSpec branch;

  std::map<std::string, std::string> echo;
};

/// Parses the flat `section.key = value` grammar. Blank lines and text after
/// `#` are ignored. Throws ParseError (with line), UnknownKey and
/// ValidationError for cross-field problems, including the step-size guard
/// hbar k_max^2 |1/M - 1/mu| dt / 2 < 0.5.
RunSpec load_config(const std::string& text);
RunSpec load_config_file(const std::string& path);

/// Renders an echo map back into config text (sorted keys).
std::string render_config(const std::map<std::string, std::string>& echo);

/// Shortest decimal text that reads back to the same double (17 significant digits).
std::string format_double(double v);

GridPtr make_run_grid(const RunSpec& spec);
WaveField make_initial_state(const RunSpec& spec);

}  // namespace nsnl
