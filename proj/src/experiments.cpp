#include "nsnl/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "nsnl/errors.hpp"
#include "nsnl/oracle.hpp"

namespace nsnl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int sign_of(double slope, double zero) {
  if (std::abs(slope) <= zero) return 0;
  return slope > 0.0 ? 1 : -1;
}

std::size_t snapshot_stride(double t_final, double dt, std::size_t count) {
  const auto steps = static_cast<std::size_t>(std::ceil(t_final / dt * (1.0 - 1e-12)));
  return std::max<std::size_t>(1, steps / count);
}

// First time the oracle width reaches sigma0/2 or 2 sigma0, linearly
// interpolated between samples.
std::optional<double> width_event(const std::vector<oracle::GaussianMomentState>& series,
                                  double sigma0) {
  for (std::size_t i = 1; i < series.size(); ++i) {
    for (double target : {0.5 * sigma0, 2.0 * sigma0}) {
      const double a = series[i - 1].sigma - target, b = series[i].sigma - target;
      if (a == 0.0) return series[i - 1].time;
      if (a * b < 0.0 || b == 0.0)
        return series[i - 1].time + (series[i].time - series[i - 1].time) * a / (a - b);
    }
  }
  return std::nullopt;
}

SweepRow sweep_row(const SweepSpec& spec, double ratio) {
  SweepRow row;
  row.ratio = ratio;
  PhysParams p;
  p.mass = ratio;
  p.mu = 1.0;
  p.hbar = spec.hbar;
  p.eps_reg = spec.eps_reg;
  const oracle::GaussianMomentState s0{spec.sigma0, 0.0, 0.0};

  try {
    // Chunked so that the search stops at the event instead of running into
    // the collapse singularity further on.
    std::vector<oracle::GaussianMomentState> coarse{s0};
    while (!row.t_event && coarse.back().time < spec.t_max - 1e-12) {
      const double span = std::min(0.25, spec.t_max - coarse.back().time);
      auto chunk = oracle::integrate_moments(coarse.back(), span, p, 1e-3);
      coarse.insert(coarse.end(), chunk.begin() + 1, chunk.end());
      row.t_event = width_event(coarse, spec.sigma0);
    }
    row.t_end = row.t_event.value_or(spec.t_max);

    auto grid = make_grid({{spec.n, spec.length}});
    const WaveField wf0 = gaussian_packet(grid, {0.0}, spec.sigma0, {0.0});
    row.trajectory = evolve(wf0, row.t_end, spec.stepper, p);
    const double dt = row.trajectory.dt_effective;
    const auto ode = oracle::integrate_moments(s0, row.t_end, p, dt);

    std::vector<double> t, w, w_ode;
    for (const auto& snap : row.trajectory.snapshots) {
      const auto k = static_cast<std::size_t>(std::llround(snap.time / dt));
      const double ref = ode.at(std::min(k, ode.size() - 1)).sigma;
      t.push_back(snap.time);
      w.push_back(snap.obs.width[0]);
      w_ode.push_back(ref);
      row.max_rel_error = std::max(row.max_rel_error, std::abs(snap.obs.width[0] - ref) / ref);
    }
    row.slope = width_slope(t, w, spec.slope_begin, spec.slope_end);
    row.oracle_slope = width_slope(t, w_ode, spec.slope_begin, spec.slope_end);
    row.sign = sign_of(row.slope, spec.zero_slope);
    row.oracle_sign = sign_of(row.oracle_slope, spec.zero_slope);
    row.checks = verify_trajectory(row.trajectory, spec.stepper.norm_drift_abort);
  } catch (const Error& e) {
    row.error = e.what();
  }
  return row;
}

}  // namespace

void SweepSpec::validate() const {
  if (ratios.empty()) throw ValidationError("sweep.ratios is empty");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (!(ratios[i] > 0.0) || !std::isfinite(ratios[i]))
      throw ValidationError("sweep ratios must be positive and finite");
    if (i > 0 && !(ratios[i] > ratios[i - 1]))
      throw ValidationError("sweep ratios must be sorted and unique");
  }
  if (!(slope_end > slope_begin) || slope_begin < 0.0)
    throw ValidationError("slope window must satisfy 0 <= begin < end");
  if (!(t_max >= slope_end)) throw ValidationError("t_max must cover the slope window");
  PhysParams p;
  p.hbar = hbar;
  p.eps_reg = eps_reg;
  p.validate();
  if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw ValidationError("sweep.sigma0 must be > 0");
}

double width_slope(const std::vector<double>& t, const std::vector<double>& width, double t0,
                   double t1) {
  double n = 0.0, st = 0.0, sw = 0.0, stt = 0.0, stw = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < t0 - 1e-12 || t[i] > t1 + 1e-12) continue;
    n += 1.0;
    st += t[i];
    sw += width[i];
    stt += t[i] * t[i];
    stw += t[i] * width[i];
  }
  const double den = n * stt - st * st;
  if (n < 2.0 || den == 0.0) throw ValidationError("fewer than two samples in the slope window");
  return (n * stw - st * sw) / den;
}

std::vector<SweepRow> run_mass_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepRow> rows;
  if (spec.parallel) {
    std::vector<std::future<SweepRow>> jobs;
    for (double r : spec.ratios)
      jobs.push_back(std::async(std::launch::async, [&spec, r] { return sweep_row(spec, r); }));
    for (auto& j : jobs) rows.push_back(j.get());
  } else {
    for (double r : spec.ratios) rows.push_back(sweep_row(spec, r));
  }
  return rows;
}

void SlitConfig::validate() const {
  if (slit_count < 2 || slit_count > 4) throw ValidationError("slit count must be 2 to 4");
  if (!(slit_width > 0.0) || !(slit_separation > slit_width))
    throw ValidationError("slits must be narrower than their separation");
  const double dx = length / static_cast<double>(n);
  if (slit_width < 8.0 * dx) throw UnresolvedWidth("each slit needs at least 4 dx of width sigma");
  const double extent = static_cast<double>(slit_count - 1) * slit_separation + 2.0 * slit_width;
  if (!(extent < 0.5 * length)) throw ValidationError("slits do not fit in the central half");
  if (!(t_screen > 0.0) || !(dt > 0.0)) throw ValidationError("t_screen and dt must be positive");
}

WaveField slit_state(const SlitConfig& cfg) {
  cfg.validate();
  auto grid = make_grid({{cfg.n, cfg.length}});
  WaveField out{ComplexField(grid), 0.0, "slits"};
  const double first = -0.5 * static_cast<double>(cfg.slit_count - 1) * cfg.slit_separation;
  for (std::size_t s = 0; s < cfg.slit_count; ++s) {
    const double centre = first + static_cast<double>(s) * cfg.slit_separation;
    const WaveField g = gaussian_packet(grid, {centre}, 0.5 * cfg.slit_width, {cfg.k0});
    for (std::size_t i = 0; i < grid->size(); ++i) out.psi[i] += g.psi[i];
  }
  normalize(out.psi);
  return out;
}

FringeMeasure central_fringe(const RealField& intensity) {
  const Grid& g = intensity.grid();
  if (g.dims() != 1) throw ValidationError("fringe analysis is one-dimensional");
  const auto& x = g.axis(0).x;
  const std::size_t n = intensity.size();
  double total = 0.0, first = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += intensity[i];
    first += intensity[i] * x[i];
  }
  FringeMeasure out;
  if (!(total > 0.0)) return out;
  const double centroid = first / total;
  const double half = 0.25 * g.axis(0).length;
  auto inside = [&](std::size_t i) { return i > 0 && i + 1 < n && std::abs(x[i]) < half; };

  std::size_t best = n;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!inside(i)) continue;
    if (intensity[i] > intensity[i - 1] && intensity[i] >= intensity[i + 1] &&
        (best == n || std::abs(x[i] - centroid) < std::abs(x[best] - centroid)))
      best = i;
  }
  if (best == n) return out;
  std::size_t lo = best, hi = best;
  while (lo > 0 && intensity[lo - 1] < intensity[lo]) --lo;
  while (hi + 1 < n && intensity[hi + 1] < intensity[hi]) ++hi;
  if (!inside(lo) || !inside(hi)) return out;

  out.x_max = x[best];
  out.i_max = intensity[best];
  out.i_min = 0.5 * (intensity[lo] + intensity[hi]);
  out.visibility = (out.i_max - out.i_min) / (out.i_max + out.i_min);
  return out;
}

namespace {

RealField density_of(const ComplexField& psi) {
  RealField r(psi.grid_ptr());
  for (std::size_t i = 0; i < psi.size(); ++i) r[i] = std::norm(psi[i]);
  return r;
}

}  // namespace

InterferenceResult run_interference(const SlitConfig& cfg, double ratio) {
  if (!(ratio >= 0.0)) throw ValidationError("mass ratio must be >= 0");
  const WaveField wf0 = slit_state(cfg);
  PhysParams p;
  p.mass = 1.0;
  p.mu = ratio > 0.0 ? 1.0 / ratio : kInf;
  p.hbar = cfg.hbar;
  p.eps_reg = cfg.eps_reg;

  StepperConfig st;
  st.dt = cfg.dt;
  st.k_cutoff = cfg.k_cutoff;
  st.snapshot_every = snapshot_stride(cfg.t_screen, cfg.dt, 40);
  st.norm_drift_abort = 1e-2;

  // The closed-form linear pattern doubles as the edge test: nonlinear runs
  // with M > mu only narrow, and their band-edge ripple says nothing about
  // where the envelope is.
  const GridPtr& grid = wf0.grid_ptr();
  ComplexField linear_screen(grid);
  const double first = -0.5 * static_cast<double>(cfg.slit_count - 1) * cfg.slit_separation;
  for (std::size_t s = 0; s < cfg.slit_count; ++s) {
    const double centre = first + static_cast<double>(s) * cfg.slit_separation;
    const WaveField g = oracle::linear_free_gaussian(grid, cfg.t_screen, 0.5 * cfg.slit_width,
                                                     {cfg.k0}, p.mass, p.hbar, {centre});
    for (std::size_t i = 0; i < grid->size(); ++i) linear_screen[i] += g.psi[i];
  }
  normalize(linear_screen);

  InterferenceResult res;
  res.ratio = ratio;
  res.trajectory = evolve(wf0, cfg.t_screen, st, p);
  const auto& last = res.trajectory.snapshots.back();
  res.screen = density_of(last.state.psi);
  res.fringe = central_fringe(res.screen);
  res.envelope_width = last.obs.width[0];
  res.checks = verify_trajectory(res.trajectory, st.norm_drift_abort);

  if (ratio == 0.0) res.analytic = central_fringe(density_of(linear_screen));
  return res;
}

std::pair<double, double> well_partition(const ComplexField& psi) {
  const Grid& g = psi.grid();
  if (g.dims() != 1) throw ValidationError("well partition is one-dimensional");
  const std::size_t n = g.axis(0).n;
  double left = 0.0, right = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double rho = std::norm(psi[i]);
    if (i == 0 || i == n / 2) {
      left += 0.5 * rho;
      right += 0.5 * rho;
    } else if (i < n / 2) {
      left += rho;
    } else {
      right += rho;
    }
  }
  return {left * g.cell_volume(), right * g.cell_volume()};
}

PointerResult run_pointer_collapse(const PointerSpec& spec) {
  auto grid = make_grid({{spec.n, spec.length}});
  PhysParams p;
  p.mass = spec.mass;
  p.mu = spec.mu;
  p.eps_reg = spec.eps_reg;
  p.potential = DoubleWellPotential{spec.a, spec.b};
  const WaveField wf0 = gaussian_packet(grid, {spec.x0}, spec.sigma0, {0.0});

  PointerResult res;
  res.trajectory = evolve(wf0, spec.t_final, spec.stepper, p);
  for (const auto& s : res.trajectory.snapshots) {
    const auto [l, r] = well_partition(s.state.psi);
    res.time.push_back(s.time);
    res.left.push_back(l);
    res.right.push_back(r);
  }
  res.checks = verify_trajectory(res.trajectory, spec.stepper.norm_drift_abort);
  return res;
}

namespace {

WaveField branch_state(const GridPtr& grid, const BranchSpec& spec, double w1, double w2) {
  const WaveField u1 = gaussian_packet(grid, {-spec.offset, -spec.offset}, spec.sigma0, {0.0, 0.0});
  const WaveField u2 = gaussian_packet(grid, {spec.offset, spec.offset}, spec.sigma1, {0.0, 0.0});
  WaveField out{ComplexField(grid), 0.0, "branches"};
  const cplx phase = std::polar(1.0, spec.delta);
  for (std::size_t i = 0; i < grid->size(); ++i) out.psi[i] = w1 * u1.psi[i] + w2 * phase * u2.psi[i];
  normalize(out.psi);
  return out;
}

}  // namespace

BranchResult run_branch_correlation(const BranchSpec& spec) {
  auto grid = make_grid({{spec.n, spec.length}, {spec.n, spec.length}});
  PhysParams p;
  p.mass = spec.mass;
  p.mu = spec.mu;
  p.eps_reg = spec.eps_reg;
  PhysParams control = p;
  control.mu = kInf;

  const WaveField both = branch_state(grid, spec, 1.0, 1.0);
  BranchSpec single = spec;
  single.delta = 0.0;
  const WaveField only_1 = branch_state(grid, single, 1.0, 0.0);
  const WaveField only_2 = branch_state(grid, single, 0.0, 1.0);

  // One cutoff for the run and both references, resolved on the 2D grid.
  // The linear controls are well posed and run unprojected.
  StepperConfig st = spec.stepper;
  if (st.k_cutoff == 0.0) st.k_cutoff = auto_cutoff(p, spec.t_final, 2);
  const Trajectory run = evolve(both, spec.t_final, st, p);
  const Trajectory ref_1 = evolve(only_1, spec.t_final, st, p);
  const Trajectory ref_2 = evolve(only_2, spec.t_final, st, p);
  const Trajectory ctl = evolve(both, spec.t_final, st, control);
  const Trajectory ctl_1 = evolve(only_1, spec.t_final, st, control);
  const Trajectory ctl_2 = evolve(only_2, spec.t_final, st, control);

  std::vector<bool> mask_1(grid->size()), mask_2(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double s = grid->coord(i, 0) + grid->coord(i, 1);
    mask_1[i] = s < 0.0;
    mask_2[i] = s > 0.0;
  }

  BranchResult res;
  res.phases = branch_phase_drift({&run, &ref_1, &ref_2, &ctl, &ctl_1, &ctl_2}, mask_1, mask_2,
                                  spec.delta);
  const auto& s = res.phases.series;
  for (std::size_t k = 0; k < s.time.size(); ++k)
    res.max_branch_mass_drift =
        std::max({res.max_branch_mass_drift, std::abs(s.mass_1[k] - s.mass_1[0]),
                  std::abs(s.mass_2[k] - s.mass_2[0])});
  res.checks = verify_trajectory(run, spec.stepper.norm_drift_abort);
  res.checks.push_back(res.phases.report);
  res.trajectory = run;
  return res;
}

}  // namespace nsnl
