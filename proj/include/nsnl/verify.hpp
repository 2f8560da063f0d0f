#pragma once

#include <complex>
#include <string>
#include <vector>

#include "nsnl/dynamics.hpp"

namespace nsnl {

/// Structural identities are held to rounding level, scheme-limited
/// properties to the discretization level.
enum class CheckClass { machine, discretization };

std::string to_string(CheckClass c);

struct CheckReport {
  std::string name;
  double max_residual = 0.0;
  double threshold = 0.0;
  bool pass = false;  // max_residual <= threshold
  std::string context;
  CheckClass check_class = CheckClass::machine;
};

CheckReport make_report(std::string name, double residual, double threshold,
                        std::string context, CheckClass cls);

/// sqrt(sum |a - b|^2 dV) on a shared grid.
double l2_distance(const ComplexField& a, const ComplexField& b);
double max_abs_distance(const ComplexField& a, const ComplexField& b);

/// max |2 Re(Psi* (-i omega Psi))| / (max|Psi|^2 max|omega|) for an arbitrary
/// (possibly complex) rate field. Returns 0 when omega vanishes.
double nonsignaling_residual(const ComplexField& psi, const std::vector<cplx>& omega);

/// Density rate contributed by the nonlinear term, with omega from omega_nl.
/// Threshold 1e-12.
CheckReport check_nonsignaling(const WaveField& wf, const PhysParams& params);

/// Evolves psi_a (x) psi_b on the product grid and each factor on its own
/// grid, then compares. Threshold 1e-8.
CheckReport check_separability(const WaveField& psi_a, const WaveField& psi_b,
                               const PhysParams& params, double t_final,
                               const StepperConfig& stepper);

/// Factorizes a 2D state through its peak row and column and refuses it
/// (NotProductState) unless the overlap with that product is 1 to 1e-10.
std::pair<WaveField, WaveField> factorize_product(const WaveField& psi2d);

/// max |d|Psi|^2/dt - (-div j)| / max(max|div j|, hbar max|Psi|^2 / M), with
/// d|Psi|^2/dt taken from the full right-hand side. Threshold 1e-8.
CheckReport check_current_linearity(const WaveField& wf, const PhysParams& params);

/// Evolves a node-free state once per floor value and reports the largest L2
/// distance to the first run. Throws ValidationError when the state is not
/// node-free for the largest floor. Threshold 1e-9.
CheckReport eps_insensitivity(const WaveField& wf, const PhysParams& params, double t_final,
                              const StepperConfig& stepper, const std::vector<double>& eps_list);

/// Per-snapshot branch phases of a two-branch run.
struct BranchPhaseSeries {
  std::vector<double> time;
  std::vector<double> phase_difference;  // theta_2 - theta_1, unwrapped
  std::vector<double> control_difference;
  std::vector<double> mass_1;  // mass of the full run inside each mask
  std::vector<double> mass_2;
};

struct BranchPhaseResult {
  BranchPhaseSeries series;
  double max_offset_error = 0.0;  // max_t |theta_2 - theta_1 - delta|
  CheckReport report;             // drift against the linear control
};

/// Inputs of branch_phase_drift. All trajectories share one snapshot
/// schedule. ref_1/ref_2 are single-branch runs of each branch alone with the
/// same parameters as `run`; `control` is the two-branch run with mu = inf.
/// control_ref_1/2 are the single-branch runs with mu = inf.
struct BranchRuns {
  const Trajectory* run = nullptr;
  const Trajectory* ref_1 = nullptr;
  const Trajectory* ref_2 = nullptr;
  const Trajectory* control = nullptr;
  const Trajectory* control_ref_1 = nullptr;
  const Trajectory* control_ref_2 = nullptr;
};

/// Branch phase theta_k = arg sum_{mask k} Psi conj(R_k), the density-weighted
/// circular mean of phi - phi_ref. Residual: max_t |D(t) - D(0) - (Dc(t) - Dc(0))|
/// with D the phase difference of the run and Dc that of the control.
/// Threshold 1e-3 rad. Throws BranchOverlap when a reference keeps less than
/// 99.9% of its mass inside its mask.
BranchPhaseResult branch_phase_drift(const BranchRuns& runs, const std::vector<bool>& mask_1,
                                     const std::vector<bool>& mask_2, double delta);

/// Residual columns written next to every snapshot.
struct SnapshotResiduals {
  double nonsignaling = 0.0;
  double current_linearity = 0.0;
  double norm_drift = 0.0;
};

std::vector<SnapshotResiduals> snapshot_residuals(const Trajectory& traj);

/// Nonsignaling, current linearity and norm drift over all snapshots.
/// norm_drift_threshold applies to |norm(t) - norm(0)|.
std::vector<CheckReport> verify_trajectory(const Trajectory& traj,
                                           double norm_drift_threshold = 1e-6);

bool all_pass(const std::vector<CheckReport>& reports);

}  // namespace nsnl
