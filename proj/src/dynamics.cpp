#include "nsnl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "nsnl/errors.hpp"

namespace nsnl {

namespace {

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

constexpr cplx kI{0.0, 1.0};

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

// omega_nl given a precomputed Laplacian. The denominator is floored at
// eps^2 max|Psi|^2, which leaves every point above the floor untouched.
void omega_into(const ComplexField& psi, const ComplexField& lap, const PhysParams& params,
                RealField& w) {
  const double coef = params.hbar * 0.5 * params.inv_mu();
  double max_rho = 0.0;
  for (const auto& z : psi) max_rho = std::max(max_rho, std::norm(z));
  const double floor = params.eps_reg * params.eps_reg * max_rho;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double denom = std::max(std::norm(psi[i]), floor);
    w[i] = (coef != 0.0 && denom > 0.0) ? coef * std::real(std::conj(psi[i]) * lap[i]) / denom
                                        : 0.0;
  }
}

RealField omega_from_laplacian(const ComplexField& psi, const ComplexField& lap,
                               const PhysParams& params) {
  RealField w(psi.grid_ptr());
  omega_into(psi, lap, params, w);
  return w;
}

// Spectral Laplacian into `lap`, using `spec` as scratch.
void laplacian_into(const ComplexField& psi, ComplexField& spec, ComplexField& lap) {
  const Grid& g = psi.grid();
  g.plan().forward(psi.data(), spec.data());
  auto k2 = g.k_squared();
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= -k2[i];
  g.plan().inverse(spec.data(), lap.data());
}

}  // namespace

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::strang: return "strang";
    case Scheme::rk4: return "rk4";
    case Scheme::madelung: return "madelung";
  }
  return "strang";
}

Scheme scheme_from_string(const std::string& s) {
  if (s == "strang") return Scheme::strang;
  if (s == "rk4") return Scheme::rk4;
  if (s == "madelung") return Scheme::madelung;
  throw ValidationError("unknown scheme '" + s + "' (expected strang, rk4 or madelung)");
}

RealField omega_nl(const ComplexField& psi, const PhysParams& params) {
  if (params.inv_mu() == 0.0) return RealField(psi.grid_ptr());
  return omega_from_laplacian(psi, laplacian_spectral(psi), params);
}

ComplexField rhs_nonlinear(const ComplexField& psi, const PhysParams& params) {
  const RealField w = omega_nl(psi, params);
  ComplexField out(psi.grid_ptr());
  for (std::size_t i = 0; i < psi.size(); ++i) out[i] = -kI * w[i] * psi[i];
  return out;
}

ComplexField rhs_full(const WaveField& wf, const PhysParams& params) {
  ComplexField out(wf.grid_ptr());
  const ComplexField lap = laplacian_spectral(wf.psi);
  const RealField w = omega_from_laplacian(wf.psi, lap, params);
  const RealField v = sample_potential(params.potential, wf.grid_ptr());
  const cplx kin = kI * (params.hbar / (2.0 * params.mass));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = kin * lap[i] - kI * (v[i] / params.hbar + w[i]) * wf.psi[i];
  return out;
}

double guard_rate(double k_max_squared, const PhysParams& params, double max_local_rate) {
  return 0.5 * params.hbar * k_max_squared * std::abs(params.kinetic_balance()) + max_local_rate;
}

double retained_k_max_squared(const Grid& grid, double k_cutoff) {
  double s = 0.0;
  for (const auto& ax : grid.axes()) {
    double kn = std::numbers::pi / ax.dx;
    if (k_cutoff > 0.0) kn = std::min(kn, k_cutoff);
    s += kn * kn;
  }
  return s;
}

double instability_rate(const PhysParams& params, double k) {
  const double excess = params.inv_mu() - 1.0 / params.mass;
  if (!(excess > 0.0)) return 0.0;
  return 0.5 * params.hbar * k * k * std::sqrt(excess / params.mass);
}

double auto_cutoff(const PhysParams& params, double t_final, std::size_t dims) {
  const double g = instability_rate(params, 1.0);
  if (!(g > 0.0)) return -1.0;
  constexpr double kLogBudget = 13.815510557964274;  // ln(1e6)
  // Short runs are budgeted as unit-time runs: the floor edge feeds the band
  // well above roundoff, so a wider band contaminates omega within a few steps.
  const double t_eff = std::max(t_final, 1.0);
  return std::sqrt(kLogBudget / (g * t_eff * static_cast<double>(dims)));
}

void check_guard(double dt, double rate) {
  if (!(dt * rate < 0.5))
    throw StabilityGuardTripped("dt * max|omega| = " + short_num(dt * rate) +
                                " rad per step, bound is 0.5");
}

Propagator::Propagator(GridPtr grid, PhysParams params, double dt, Scheme scheme,
                       double k_cutoff, bool mirror_average)
    : grid_(std::move(grid)), params_(std::move(params)), dt_(dt), scheme_(scheme),
      mirror_average_(mirror_average) {
  params_.validate();
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ValidationError("dt must be positive");
  potential_ = sample_potential(params_.potential, grid_);
  vmax_ = max_abs(potential_) / params_.hbar;

  // A cutoff at or above every axis' Nyquist wavenumber changes nothing.
  bool active = false;
  if (k_cutoff > 0.0)
    for (const auto& ax : grid_->axes()) active |= k_cutoff < std::numbers::pi / ax.dx;
  k_cutoff_ = active ? k_cutoff : -1.0;
  k2_retained_ = retained_k_max_squared(*grid_, k_cutoff_);
  if (active) {
    keep_.assign(grid_->size(), 1.0);
    for (std::size_t i = 0; i < grid_->size(); ++i)
      for (std::size_t d = 0; d < grid_->dims(); ++d)
        if (std::abs(grid_->axis(d).k[grid_->index_along(i, d)]) > k_cutoff_) keep_[i] = 0.0;
  }

  if (mirror_average_) {
    // x_i = -L/2 + i dx, so -x_i sits at (n - i) mod n on every axis.
    mirror_.resize(grid_->size());
    for (std::size_t i = 0; i < grid_->size(); ++i) {
      std::size_t j = 0;
      for (std::size_t d = 0; d < grid_->dims(); ++d) {
        const std::size_t n = grid_->axis(d).n;
        j += ((n - grid_->index_along(i, d)) % n) * grid_->stride(d);
      }
      mirror_[i] = j;
    }
  }

  spec_ = ComplexField(grid_);
  lap_ = ComplexField(grid_);
  mid_ = ComplexField(grid_);
  w_ = RealField(grid_);
  if (scheme_ == Scheme::strang) {
    kinetic_half_ = ComplexField(grid_);
    potential_half_ = ComplexField(grid_);
    auto k2 = grid_->k_squared();
    const double c = params_.hbar * dt_ / (4.0 * params_.mass);
    for (std::size_t i = 0; i < grid_->size(); ++i) {
      kinetic_half_[i] = std::polar(1.0, -c * k2[i]);
      potential_half_[i] = std::polar(1.0, -potential_[i] * dt_ / (2.0 * params_.hbar));
      if (!keep_.empty()) kinetic_half_[i] *= keep_[i];
    }
  }
}

void Propagator::project(ComplexField& psi) const {
  if (keep_.empty()) return;
  ComplexField spec = to_spectrum(psi);
  for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= keep_[i];
  grid_->plan().inverse(spec.data(), psi.data());
}

void Propagator::step(ComplexField& psi) {
  if (!mirror_average_) {
    step_once(psi);
    return;
  }
  ComplexField flipped(grid_);
  for (std::size_t i = 0; i < psi.size(); ++i) flipped[mirror_[i]] = psi[i];
  step_once(psi);
  const StepStats first = stats_;
  step_once(flipped);
  for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = 0.5 * (psi[i] + flipped[mirror_[i]]);
  stats_.max_omega = std::max(stats_.max_omega, first.max_omega);
  stats_.modulus_change = std::max(stats_.modulus_change, first.modulus_change);
  stats_.guard_rate = std::max(stats_.guard_rate, first.guard_rate);
}

void Propagator::step_once(ComplexField& psi) {
  stats_ = {};
  switch (scheme_) {
    case Scheme::strang: step_strang(psi); break;
    case Scheme::rk4: step_rk4(psi); break;
    case Scheme::madelung: step_madelung(psi); break;
  }
}

void Propagator::nonlinear_substep(ComplexField& psi, double dt) {
  if (params_.inv_mu() == 0.0) {
    stats_.guard_rate = guard_rate(k2_retained_, params_, vmax_);
    check_guard(dt_, stats_.guard_rate);
    return;
  }
  RealField& w0 = w_;
  laplacian_into(psi, spec_, lap_);
  omega_into(psi, lap_, params_, w0);
  const double w0_max = max_abs(w0);
  stats_.guard_rate = guard_rate(k2_retained_, params_, w0_max + vmax_);
  check_guard(dt_, stats_.guard_rate);

  ComplexField& mid = mid_;
  for (std::size_t i = 0; i < psi.size(); ++i) mid[i] = psi[i] * std::polar(1.0, -0.5 * dt * w0[i]);
  RealField& w1 = w_;
  laplacian_into(mid, spec_, lap_);
  omega_into(mid, lap_, params_, w1);
  const double w1_max = max_abs(w1);
  stats_.max_omega = std::max(w0_max, w1_max);
  stats_.guard_rate = std::max(stats_.guard_rate, guard_rate(k2_retained_, params_, w1_max + vmax_));
  check_guard(dt_, stats_.guard_rate);

  double change = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double before = std::norm(psi[i]);
    psi[i] *= std::polar(1.0, -dt * w1[i]);
    change = std::max(change, std::abs(std::norm(psi[i]) - before));
  }
  stats_.modulus_change = change;
}

void Propagator::step_strang(ComplexField& psi) {
  const SpectralPlan& plan = grid_->plan();
  const bool has_potential = vmax_ != 0.0;
  ComplexField& spec = spec_;
  auto linear_half = [&](bool potential_first) {
    if (potential_first && has_potential)
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= potential_half_[i];
    plan.forward(psi.data(), spec.data());
    for (std::size_t i = 0; i < spec.size(); ++i) spec[i] *= kinetic_half_[i];
    plan.inverse(spec.data(), psi.data());
    if (!potential_first && has_potential)
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] *= potential_half_[i];
  };
  linear_half(false);
  nonlinear_substep(psi, dt_);
  linear_half(true);
}

ComplexField Propagator::rhs(const ComplexField& psi, double* max_local_rate) {
  const ComplexField lap = laplacian_spectral(psi);
  const RealField w = omega_from_laplacian(psi, lap, params_);
  ComplexField out(psi.grid_ptr());
  const cplx kin = kI * (params_.hbar / (2.0 * params_.mass));
  double rate = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double local = potential_[i] / params_.hbar + w[i];
    rate = std::max(rate, std::abs(w[i]));
    out[i] = kin * lap[i] - kI * local * psi[i];
  }
  if (max_local_rate) *max_local_rate = rate;
  return out;
}

void Propagator::step_rk4(ComplexField& psi) {
  const std::size_t n = psi.size();
  double w_max = 0.0;
  const ComplexField k1 = rhs(psi, &w_max);
  stats_.max_omega = w_max;
  stats_.guard_rate = guard_rate(k2_retained_, params_, w_max + vmax_);
  check_guard(dt_, stats_.guard_rate);

  ComplexField stage(psi.grid_ptr());
  for (std::size_t i = 0; i < n; ++i) stage[i] = psi[i] + 0.5 * dt_ * k1[i];
  const ComplexField k2 = rhs(stage, nullptr);
  for (std::size_t i = 0; i < n; ++i) stage[i] = psi[i] + 0.5 * dt_ * k2[i];
  const ComplexField k3 = rhs(stage, nullptr);
  for (std::size_t i = 0; i < n; ++i) stage[i] = psi[i] + dt_ * k3[i];
  const ComplexField k4 = rhs(stage, nullptr);
  const double s = dt_ / 6.0;
  for (std::size_t i = 0; i < n; ++i) psi[i] += s * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  project(psi);
}

MadelungRates madelung_rhs(const MadelungField& mf, const PhysParams& params) {
  const GridPtr& grid = mf.amplitude.grid_ptr();
  const std::size_t n = grid->size();
  if (100 * mf.node_count() >= n)
    throw TooManyNodes(std::to_string(mf.node_count()) + " of " + std::to_string(n) +
                       " points are masked; the hydrodynamic form needs < 1%");

  ComplexField psi(grid);
  for (std::size_t i = 0; i < n; ++i) psi[i] = std::polar(mf.amplitude[i], mf.phase[i]);
  // Phase gradients come from Im(Psi* grad Psi) / A^2 so that a phase that
  // winds across the periodic seam is still differentiated correctly.
  const auto grads = gradient_spectral(psi);
  const ComplexField lap_a = laplacian_spectral(to_complex(mf.amplitude));
  const RealField v = sample_potential(params.potential, grid);

  std::vector<RealField> flux;
  RealField grad_phi_sq(grid);
  for (const auto& gd : grads) {
    RealField jd(grid);
    for (std::size_t i = 0; i < n; ++i) {
      const double im = std::imag(std::conj(psi[i]) * gd[i]);
      jd[i] = params.hbar / params.mass * im;
      if (!mf.node_mask[i]) {
        const double gp = im / (mf.amplitude[i] * mf.amplitude[i]);
        grad_phi_sq[i] += gp * gp;
      }
    }
    flux.push_back(std::move(jd));
  }
  const RealField div = divergence_spectral(flux);

  MadelungRates out{RealField(grid), RealField(grid)};
  const double coef = 0.5 * params.hbar * (params.inv_mu() - 1.0 / params.mass);
  for (std::size_t i = 0; i < n; ++i) {
    out.density_rate[i] = -div[i];
    const double quantum =
        mf.node_mask[i] ? 0.0 : -lap_a[i].real() / mf.amplitude[i] + grad_phi_sq[i];
    out.phase_rate[i] = coef * quantum - v[i] / params.hbar;
  }
  return out;
}

void Propagator::step_madelung(ComplexField& psi) {
  const MadelungField start = madelung_decompose(WaveField{psi, 0.0, {}}, params_.eps_reg);
  const std::size_t n = psi.size();
  RealField rho(grid_);
  for (std::size_t i = 0; i < n; ++i) rho[i] = start.amplitude[i] * start.amplitude[i];

  auto stage_field = [&](const RealField& r, const RealField& phi) {
    MadelungField mf{RealField(grid_), phi, std::vector<bool>(n, false), 0.0};
    double rmax = 0.0;
    for (double x : r) rmax = std::max(rmax, x);
    const double floor = params_.eps_reg * params_.eps_reg * rmax;
    for (std::size_t i = 0; i < n; ++i) {
      mf.amplitude[i] = std::sqrt(std::max(r[i], 0.0));
      mf.node_mask[i] = r[i] < floor;
    }
    return mf;
  };

  const MadelungRates k1 = madelung_rhs(stage_field(rho, start.phase), params_);
  stats_.guard_rate = guard_rate(k2_retained_, params_, max_abs(k1.phase_rate));
  check_guard(dt_, stats_.guard_rate);

  auto advance = [&](const MadelungRates& k, double h) {
    RealField r(grid_), p(grid_);
    for (std::size_t i = 0; i < n; ++i) {
      r[i] = rho[i] + h * k.density_rate[i];
      p[i] = start.phase[i] + h * k.phase_rate[i];
    }
    return std::make_pair(std::move(r), std::move(p));
  };
  auto [r2, p2] = advance(k1, 0.5 * dt_);
  const MadelungRates k2 = madelung_rhs(stage_field(r2, p2), params_);
  auto [r3, p3] = advance(k2, 0.5 * dt_);
  const MadelungRates k3 = madelung_rhs(stage_field(r3, p3), params_);
  auto [r4, p4] = advance(k3, dt_);
  const MadelungRates k4 = madelung_rhs(stage_field(r4, p4), params_);

  const double s = dt_ / 6.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rho[i] + s * (k1.density_rate[i] + 2.0 * k2.density_rate[i] +
                                   2.0 * k3.density_rate[i] + k4.density_rate[i]);
    const double p = start.phase[i] + s * (k1.phase_rate[i] + 2.0 * k2.phase_rate[i] +
                                           2.0 * k3.phase_rate[i] + k4.phase_rate[i]);
    psi[i] = std::polar(std::sqrt(std::max(r, 0.0)), p);
  }
  project(psi);
}

WaveField step_strang(const WaveField& wf, double dt, const PhysParams& params) {
  Propagator prop(wf.grid_ptr(), params, dt, Scheme::strang);
  WaveField out = wf;
  prop.step(out.psi);
  out.time = wf.time + dt;
  out.params_tag = params.tag();
  return out;
}

WaveField step_rk4(const WaveField& wf, double dt, const PhysParams& params) {
  Propagator prop(wf.grid_ptr(), params, dt, Scheme::rk4);
  WaveField out = wf;
  prop.step(out.psi);
  out.time = wf.time + dt;
  out.params_tag = params.tag();
  return out;
}

Trajectory evolve(const WaveField& wf0, double t_final, const StepperConfig& stepper,
                  const PhysParams& params, const StepObserver& observer) {
  if (!(t_final > 0.0) || !std::isfinite(t_final)) throw ValidationError("t_final must be > 0");
  if (!(stepper.dt > 0.0)) throw ValidationError("stepper.dt must be > 0");
  const auto steps =
      static_cast<std::size_t>(std::ceil(t_final / stepper.dt * (1.0 - 1e-12)));
  if (steps > stepper.max_steps)
    throw ValidationError("run needs " + std::to_string(steps) + " steps, stepper.max_steps is " +
                          std::to_string(stepper.max_steps));
  const double dt = t_final / static_cast<double>(steps);

  Trajectory traj;
  traj.params = params;
  traj.stepper = stepper;
  traj.dt_effective = dt;
  traj.grid = wf0.grid_ptr();

  double cutoff = stepper.k_cutoff == 0.0 ? auto_cutoff(params, t_final, wf0.grid().dims())
                                          : stepper.k_cutoff;
  if (instability_rate(params, 1.0) == 0.0) cutoff = -1.0;
  Propagator prop(wf0.grid_ptr(), params, dt, stepper.scheme, cutoff, stepper.mirror_average);
  traj.stepper.k_cutoff = prop.k_cutoff();
  const std::string tag = params.tag();
  auto record = [&](const ComplexField& psi, double t) {
    WaveField wf{psi, t, tag};
    Observables obs = observables(wf, params);
    const double wmax = max_abs(omega_nl(psi, params));
    traj.snapshots.push_back({t, std::move(wf), std::move(obs), wmax});
  };

  ComplexField psi = wf0.psi;
  const double norm0 = norm(psi);
  record(psi, wf0.time);
  for (std::size_t s = 1; s <= steps; ++s) {
    prop.step(psi);
    if (observer) observer(s, psi, prop.last());
    const double drift = std::abs(norm(psi) - norm0);
    if (!(drift <= stepper.norm_drift_abort))
      throw NormDriftAbort("norm drift " + short_num(drift) + " at step " +
                           std::to_string(s) + " exceeds " + short_num(stepper.norm_drift_abort));
    const bool snap = (stepper.snapshot_every != 0 && s % stepper.snapshot_every == 0) || s == steps;
    if (snap) record(psi, wf0.time + static_cast<double>(s) * dt);
  }
  return traj;
}

}  // namespace nsnl
