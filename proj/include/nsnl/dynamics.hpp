#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "nsnl/wavefield.hpp"

namespace nsnl {

enum class Scheme { strang, rk4, madelung };

std::string to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

struct StepperConfig {
  Scheme scheme = Scheme::strang;
  double dt = 1e-3;
  std::size_t snapshot_every = 100;
  std::size_t max_steps = 10'000'000;
  double norm_drift_abort = 1e-6;
  /// Per-axis spectral cutoff: modes with |k_d| above it are projected out
  /// after every step. 0 selects auto_cutoff(), a negative value disables
  /// the projection. Only applied when M > mu.
  double k_cutoff = 0.0;
  /// Average each step with its mirror image, (S(psi) + R S(R psi)) / 2 with
  /// R: x -> -x. The result is exactly parity-equivariant in floating point,
  /// so an even state stays even bit for bit. Costs two steps per step.
  bool mirror_average = false;
};

/// For M > mu the evolution amplifies a Fourier mode of wavenumber k at rate
/// (hbar |k|^2/2) sqrt((1/M)(1/mu - 1/M)), so roundoff in the top of the band
/// would swamp any run. The automatic per-axis cutoff caps the amplification
/// of the corner mode (|k|^2 = dims k_c^2) over max(t_final, 1) at 1e6. Returns -1
/// (no projection) when M <= mu.
double auto_cutoff(const PhysParams& params, double t_final, std::size_t dims = 1);

/// Growth rate of a mode of wavenumber k about a smooth background; zero for M <= mu.
double instability_rate(const PhysParams& params, double k);

struct Snapshot {
  double time = 0.0;
  WaveField state;
  Observables obs;
  double max_omega = 0.0;
};

struct Trajectory {
  std::vector<Snapshot> snapshots;
  PhysParams params;
  StepperConfig stepper;  // k_cutoff holds the resolved value
  double dt_effective = 0.0;
  GridPtr grid;
};

/// Local nonlinear rotation rate
///   omega = (hbar/2mu) Re(Psi* Lap Psi) / max(|Psi|^2, eps^2 max|Psi|^2).
/// Off nodes this equals (hbar/2mu)(Lap A/A - |grad phi|^2). The nonlinear
/// flow is dPsi/dt = -i omega Psi, a pure phase rotation at every point.
RealField omega_nl(const ComplexField& psi, const PhysParams& params);
inline RealField omega_nl(const WaveField& wf, const PhysParams& params) {
  return omega_nl(wf.psi, params);
}

/// Nonlinear part of dPsi/dt, -i omega Psi.
ComplexField rhs_nonlinear(const ComplexField& psi, const PhysParams& params);

/// dPsi/dt = -(i/hbar)(-(hbar^2/2M) Lap Psi + V Psi) - i omega Psi.
ComplexField rhs_full(const WaveField& wf, const PhysParams& params);

/// Upper bound on the phase rotation rate used by the step-size guard:
/// hbar k_max^2/2 |1/M - 1/mu| + max|omega_nl| + max|V|/hbar, where k_max^2
/// is the largest retained |k|^2.
double guard_rate(double k_max_squared, const PhysParams& params, double max_local_rate);
/// Largest |k|^2 kept on the grid under a per-axis cutoff (<= 0: none).
double retained_k_max_squared(const Grid& grid, double k_cutoff);
/// Throws StabilityGuardTripped when dt * rate >= 0.5.
void check_guard(double dt, double rate);

/// Per-step diagnostics reported by Propagator.
struct StepStats {
  double max_omega = 0.0;            // max |omega_nl| seen in the step
  double modulus_change = 0.0;       // max | |Psi|^2 after - before | in the nonlinear substep
  double guard_rate = 0.0;
};

/// Reusable stepper for one grid, parameter set and dt. Holds the sampled
/// potential and the kinetic multipliers so evolve() does no per-step setup.
class Propagator {
 public:
  Propagator(GridPtr grid, PhysParams params, double dt, Scheme scheme, double k_cutoff = -1.0,
             bool mirror_average = false);

  /// Advances psi by dt. Throws StabilityGuardTripped.
  void step(ComplexField& psi);
  const StepStats& last() const noexcept { return stats_; }
  double dt() const noexcept { return dt_; }
  const PhysParams& params() const noexcept { return params_; }
  const RealField& potential() const noexcept { return potential_; }
  double k_cutoff() const noexcept { return k_cutoff_; }

  /// Pointwise rotation by omega evaluated at the midpoint state
  /// exp(-i omega(psi) dt/2) psi. Only phases change.
  void nonlinear_substep(ComplexField& psi, double dt);

 private:
  void step_once(ComplexField& psi);
  void step_strang(ComplexField& psi);
  void step_rk4(ComplexField& psi);
  void step_madelung(ComplexField& psi);
  ComplexField rhs(const ComplexField& psi, double* max_local_rate);
  void project(ComplexField& psi) const;

  GridPtr grid_;
  PhysParams params_;
  double dt_;
  Scheme scheme_;
  RealField potential_;
  ComplexField kinetic_half_;  // exp(-i hbar k^2 dt / 4M)
  ComplexField potential_half_;  // exp(-i V dt / 2 hbar)
  double vmax_ = 0.0;
  double k_cutoff_ = -1.0;
  bool mirror_average_ = false;
  std::vector<std::size_t> mirror_;  // index of -x for every grid point
  double k2_retained_ = 0.0;
  std::vector<double> keep_;  // 1 for retained modes, 0 for projected ones
  StepStats stats_;
  ComplexField spec_, lap_, mid_;  // per-step scratch
  RealField w_;
};

WaveField step_strang(const WaveField& wf, double dt, const PhysParams& params);
/// Classical RK4 on rhs_full; no renormalization.
WaveField step_rk4(const WaveField& wf, double dt, const PhysParams& params);

struct MadelungRates {
  RealField density_rate;  // d(A^2)/dt
  RealField phase_rate;    // dphi/dt
};

/// Hydrodynamic form of the evolution:
///   d(A^2)/dt = -div(A^2 hbar grad phi / M)
///   dphi/dt   = (hbar/2)(1/mu - 1/M)(-Lap A/A + |grad phi|^2) - V/hbar
/// Throws TooManyNodes when 1% or more of the points are masked.
MadelungRates madelung_rhs(const MadelungField& mf, const PhysParams& params);

/// Called after every step with the step index (1-based) and the new state.
using StepObserver = std::function<void(std::size_t, const ComplexField&, const StepStats&)>;

/// Integrates to t_final. dt is shrunk to t_final / ceil(t_final / dt) so
/// the last step lands on t_final. Snapshots: the initial state, every
/// snapshot_every steps, and the final state. Throws StabilityGuardTripped,
/// NormDriftAbort, ValidationError (step budget).
Trajectory evolve(const WaveField& wf0, double t_final, const StepperConfig& stepper,
                  const PhysParams& params, const StepObserver& observer = {});

}  // namespace nsnl
