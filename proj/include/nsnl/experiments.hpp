#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "nsnl/dynamics.hpp"
#include "nsnl/verify.hpp"

namespace nsnl {

/// Mass sweep over free real Gaussians. Every row uses M = ratio, mu = 1.
struct SweepSpec {
  std::vector<double> ratios{0.25, 0.5, 1.0, 2.0, 4.0};
  std::size_t n = 256;
  double length = 32.0;
  double sigma0 = 1.0;
  double hbar = 1.0;
  double eps_reg = 1e-10;
  StepperConfig stepper{Scheme::strang, 2e-4, 250, 10'000'000, 1e-3, 5.0};
  double t_max = 6.0;             // stop time when sigma neither halves nor doubles
  double slope_begin = 0.1;
  double slope_end = 0.5;
  double zero_slope = 1e-6;       // |slope| below this reads as 0
  bool parallel = false;

  /// Throws ValidationError unless ratios are positive, sorted and unique.
  void validate() const;
};

struct SweepRow {
  double ratio = 0.0;
  int sign = 0;                   // sign of dsigma/dt on [slope_begin, slope_end]
  double slope = 0.0;
  int oracle_sign = 0;
  double oracle_slope = 0.0;
  /// Time at which the oracle width halves or doubles, when that happens before t_max.
  std::optional<double> t_event;
  double t_end = 0.0;             // end of the compared window
  double max_rel_error = 0.0;     // max |sigma_pde - sigma_ode| / sigma_ode over the window
  std::string error;              // integrator error, empty on success
  Trajectory trajectory;
  std::vector<CheckReport> checks;
};

/// Least-squares slope of width(t) over the snapshots in [t0, t1].
double width_slope(const std::vector<double>& t, const std::vector<double>& width, double t0,
                   double t1);

/// Rows come back in the order of spec.ratios. Integrator errors are stored
/// per row.
std::vector<SweepRow> run_mass_sweep(const SweepSpec& spec);

/// Slits are Gaussians of width sigma = slit_width / 2 placed symmetrically
/// with spacing slit_separation, evolved freely with M = 1 and mu = M/ratio.
struct SlitConfig {
  std::size_t slit_count = 2;
  double slit_width = 2.0;
  double slit_separation = 6.0;
  double t_screen = 10.0;
  double k0 = 0.0;
  std::size_t n = 1024;
  double length = 128.0;
  double hbar = 1.0;
  double eps_reg = 1e-4;  // fringe minima are near-nodes; the floor caps the rate there
  double dt = 2e-4;
  double k_cutoff = 0.0;

  void validate() const;
};

/// Initial slit superposition, normalized.
WaveField slit_state(const SlitConfig& cfg);

struct FringeMeasure {
  double visibility = 0.0;  // 0 when no complete fringe is found
  double x_max = 0.0;
  double i_max = 0.0;
  double i_min = 0.0;       // mean of the two adjacent minima
};

/// Contrast (Imax - Imin)/(Imax + Imin) of the fringe whose maximum lies
/// nearest to the density centroid, with Imin the mean of the neighbouring
/// minima. Only the central half of the box is searched.
FringeMeasure central_fringe(const RealField& intensity);

struct InterferenceResult {
  double ratio = 0.0;            // 0 stands for the linear control
  RealField screen;              // |Psi|^2 at t_screen
  FringeMeasure fringe;
  double envelope_width = 0.0;   // rms width of the screen density
  std::optional<FringeMeasure> analytic;  // closed-form linear sum (linear control only)
  Trajectory trajectory;
  std::vector<CheckReport> checks;
};

/// ratio = 0 runs the linear control (mu = inf). Throws TailOverflow when the
/// linearly spread slit packets reach the box edge by t_screen.
InterferenceResult run_interference(const SlitConfig& cfg, double ratio);

/// Double well V = a x^4 - b x^2 with minima at +-4 and a barrier of height 2.
struct PointerSpec {
  std::size_t n = 256;
  double length = 24.0;
  double a = 0.0078125;
  double b = 0.25;
  double x0 = 0.0;
  double sigma0 = 1.0;
  double mass = 2.0;
  double mu = 1.0;         // +inf runs the linear control
  double t_final = 2.0;
  double eps_reg = 1e-6;
  StepperConfig stepper{Scheme::strang, 1e-4, 100, 10'000'000, 1e-6, 5.0, true};
};

struct PointerResult {
  Trajectory trajectory;
  std::vector<double> time;
  std::vector<double> left;   // mass at x < 0, half weight on x = 0 and x = -L/2
  std::vector<double> right;
  std::vector<CheckReport> checks;
};

/// Mass on each side of the barrier, splitting the two parity-fixed points
/// (x = 0 and x = -L/2) evenly.
std::pair<double, double> well_partition(const ComplexField& psi);

PointerResult run_pointer_collapse(const PointerSpec& spec);

/// Two detectors on a 2D grid: Psi = (u1 (x) u1 + e^{i delta} u2 (x) u2)/sqrt(2)
/// with u1, u2 Gaussians at -offset and +offset on both axes.
struct BranchSpec {
  std::size_t n = 128;
  double length = 32.0;
  double offset = 5.0;
  double sigma0 = 1.0;
  double sigma1 = 1.0;     // width of the second branch
  double delta = std::numbers::pi / 2.0;
  double mass = 2.0;
  double mu = 1.0;
  double t_final = 2.0;
  double eps_reg = 1e-6;
  StepperConfig stepper{Scheme::strang, 1e-3, 100, 10'000'000, 1e-6, 0.0};
};

struct BranchResult {
  BranchPhaseResult phases;
  double max_branch_mass_drift = 0.0;
  std::vector<CheckReport> checks;
  Trajectory trajectory;
};

BranchResult run_branch_correlation(const BranchSpec& spec);

}  // namespace nsnl
