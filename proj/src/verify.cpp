#include "nsnl/verify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nsnl/errors.hpp"

namespace nsnl {

namespace {

std::string describe(const Grid& g, const PhysParams& p) {
  std::ostringstream os;
  os << "grid=";
  for (std::size_t d = 0; d < g.dims(); ++d)
    os << (d ? "x" : "") << g.axis(d).n << "@" << g.axis(d).length;
  os << " " << p.tag();
  return os.str();
}

double max_density(const ComplexField& psi) {
  double m = 0.0;
  for (const auto& z : psi) m = std::max(m, std::norm(z));
  return m;
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

}  // namespace

std::string to_string(CheckClass c) {
  return c == CheckClass::machine ? "machine" : "discretization";
}

CheckReport make_report(std::string name, double residual, double threshold,
                        std::string context, CheckClass cls) {
  return {std::move(name), residual, threshold, residual <= threshold, std::move(context), cls};
}

double l2_distance(const ComplexField& a, const ComplexField& b) {
  if (!a.grid().same_shape(b.grid())) throw ValidationError("fields live on different grids");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::norm(a[i] - b[i]);
  return std::sqrt(s * a.grid().cell_volume());
}

double max_abs_distance(const ComplexField& a, const ComplexField& b) {
  if (!a.grid().same_shape(b.grid())) throw ValidationError("fields live on different grids");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double nonsignaling_residual(const ComplexField& psi, const std::vector<cplx>& omega) {
  if (omega.size() != psi.size()) throw ValidationError("rate field size mismatch");
  double wmax = 0.0;
  for (const auto& w : omega) wmax = std::max(wmax, std::abs(w));
  const double scale = max_density(psi) * wmax;
  if (scale == 0.0) return 0.0;
  const cplx minus_i(0.0, -1.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const cplx rate = minus_i * omega[i] * psi[i];
    worst = std::max(worst, std::abs(2.0 * std::real(std::conj(psi[i]) * rate)));
  }
  return worst / scale;
}

CheckReport check_nonsignaling(const WaveField& wf, const PhysParams& params) {
  const RealField w = omega_nl(wf.psi, params);
  std::vector<cplx> omega(w.begin(), w.end());
  return make_report("nonsignaling", nonsignaling_residual(wf.psi, omega), 1e-12,
                     describe(wf.grid(), params) + " t=" + std::to_string(wf.time),
                     CheckClass::machine);
}

std::pair<WaveField, WaveField> factorize_product(const WaveField& psi2d) {
  const Grid& g = psi2d.grid();
  if (g.dims() != 2) throw NotProductState("separability needs a 2D state");
  std::size_t peak = 0;
  for (std::size_t i = 0; i < g.size(); ++i)
    if (std::norm(psi2d.psi[i]) > std::norm(psi2d.psi[peak])) peak = i;
  const std::size_t i0 = g.index_along(peak, 0), j0 = g.index_along(peak, 1);
  const std::size_t nx = g.axis(0).n, ny = g.axis(1).n;
  auto ga = make_grid({{nx, g.axis(0).length}});
  auto gb = make_grid({{ny, g.axis(1).length}});
  WaveField a{ComplexField(ga), psi2d.time, psi2d.params_tag};
  WaveField b{ComplexField(gb), psi2d.time, psi2d.params_tag};
  const cplx pivot = psi2d.psi[peak];
  if (pivot == cplx{}) throw AllNodes("zero state");
  for (std::size_t i = 0; i < nx; ++i) a.psi[i] = psi2d.psi[i * ny + j0];
  for (std::size_t j = 0; j < ny; ++j) b.psi[j] = psi2d.psi[i0 * ny + j] / pivot;

  cplx overlap{};
  double pp = 0.0, ss = 0.0;
  for (std::size_t i = 0; i < nx; ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const cplx p = a.psi[i] * b.psi[j];
      const cplx s = psi2d.psi[i * ny + j];
      overlap += std::conj(p) * s;
      pp += std::norm(p);
      ss += std::norm(s);
    }
  const double fidelity = std::norm(overlap) / (pp * ss);
  if (!(fidelity >= 1.0 - 1e-10))
    throw NotProductState("overlap with the best product is " + std::to_string(fidelity));
  normalize(a.psi);
  normalize(b.psi);
  return {std::move(a), std::move(b)};
}

CheckReport check_separability(const WaveField& psi_a, const WaveField& psi_b,
                               const PhysParams& params, double t_final,
                               const StepperConfig& stepper) {
  if (psi_a.grid().dims() != 1 || psi_b.grid().dims() != 1)
    throw ValidationError("separability takes two 1D factors");
  const Axis& ax = psi_a.grid().axis(0);
  const Axis& bx = psi_b.grid().axis(0);
  auto g2 = make_grid({{ax.n, ax.length}, {bx.n, bx.length}});
  WaveField joint{ComplexField(g2), psi_a.time, params.tag()};
  for (std::size_t i = 0; i < ax.n; ++i)
    for (std::size_t j = 0; j < bx.n; ++j) joint.psi[i * bx.n + j] = psi_a.psi[i] * psi_b.psi[j];

  StepperConfig quiet = stepper;
  quiet.snapshot_every = 0;
  // One per-axis cutoff for all three runs; the mask then factorizes.
  if (quiet.k_cutoff == 0.0) quiet.k_cutoff = auto_cutoff(params, t_final, 2);
  const auto ta = evolve(psi_a, t_final, quiet, params);
  const auto tb = evolve(psi_b, t_final, quiet, params);
  const auto tj = evolve(joint, t_final, quiet, params);
  const ComplexField& fa = ta.snapshots.back().state.psi;
  const ComplexField& fb = tb.snapshots.back().state.psi;
  ComplexField product(g2);
  for (std::size_t i = 0; i < ax.n; ++i)
    for (std::size_t j = 0; j < bx.n; ++j) product[i * bx.n + j] = fa[i] * fb[j];
  return make_report("separability", l2_distance(tj.snapshots.back().state.psi, product), 1e-8,
                     describe(*g2, params) + " t=" + std::to_string(t_final) +
                         " scheme=" + to_string(stepper.scheme),
                     CheckClass::discretization);
}

CheckReport check_current_linearity(const WaveField& wf, const PhysParams& params) {
  const ComplexField rate = rhs_full(wf, params);
  const auto j = current(wf, params);
  const RealField div = divergence_spectral(j);
  double worst = 0.0, div_max = 0.0;
  for (std::size_t i = 0; i < wf.psi.size(); ++i) {
    const double drho = 2.0 * std::real(std::conj(wf.psi[i]) * rate[i]);
    worst = std::max(worst, std::abs(drho + div[i]));
    div_max = std::max(div_max, std::abs(div[i]));
  }
  const double scale = std::max(div_max, params.hbar * max_density(wf.psi) / params.mass);
  return make_report("current_linearity", scale > 0.0 ? worst / scale : 0.0, 1e-8,
                     describe(wf.grid(), params) + " t=" + std::to_string(wf.time),
                     CheckClass::discretization);
}

CheckReport eps_insensitivity(const WaveField& wf, const PhysParams& params, double t_final,
                              const StepperConfig& stepper, const std::vector<double>& eps_list) {
  if (eps_list.empty()) throw ValidationError("eps list is empty");
  const double eps_max = *std::max_element(eps_list.begin(), eps_list.end());
  double rho_min = std::norm(wf.psi[0]);
  for (const auto& z : wf.psi) rho_min = std::min(rho_min, std::norm(z));
  if (!(rho_min > 100.0 * eps_max * eps_max * max_density(wf.psi)))
    throw ValidationError("state is not node-free for eps_reg = " + std::to_string(eps_max));

  StepperConfig quiet = stepper;
  quiet.snapshot_every = 0;
  std::vector<ComplexField> finals;
  for (double eps : eps_list) {
    PhysParams p = params;
    p.eps_reg = eps;
    finals.push_back(evolve(wf, t_final, quiet, p).snapshots.back().state.psi);
  }
  double worst = 0.0;
  for (std::size_t k = 1; k < finals.size(); ++k)
    worst = std::max(worst, l2_distance(finals[0], finals[k]));
  std::ostringstream ctx;
  ctx << describe(wf.grid(), params) << " eps=";
  for (std::size_t k = 0; k < eps_list.size(); ++k) ctx << (k ? "," : "") << eps_list[k];
  return make_report("eps_insensitivity", worst, 1e-9, ctx.str(), CheckClass::discretization);
}

namespace {

double masked_mass(const ComplexField& psi, const std::vector<bool>& mask) {
  double s = 0.0;
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (mask[i]) s += std::norm(psi[i]);
  return s * psi.grid().cell_volume();
}

double branch_phase(const ComplexField& psi, const ComplexField& ref, const std::vector<bool>& mask) {
  cplx acc{};
  for (std::size_t i = 0; i < psi.size(); ++i)
    if (mask[i]) acc += psi[i] * std::conj(ref[i]);
  return std::arg(acc);
}

void require_contained(const ComplexField& ref, const std::vector<bool>& mask, double t,
                       const char* which) {
  const double inside = masked_mass(ref, mask);
  const double total = norm(ref);
  if (!(inside >= 0.999 * total))
    throw BranchOverlap(std::string(which) + " keeps " + std::to_string(inside / total) +
                        " of its mass inside its mask at t=" + std::to_string(t));
}

std::vector<double> phase_differences(const Trajectory& run, const Trajectory& r1,
                                      const Trajectory& r2, const std::vector<bool>& m1,
                                      const std::vector<bool>& m2) {
  std::vector<double> out;
  double previous = 0.0;
  for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
    const auto& psi = run.snapshots[s].state.psi;
    const auto& a = r1.snapshots[s].state.psi;
    const auto& b = r2.snapshots[s].state.psi;
    require_contained(a, m1, run.snapshots[s].time, "branch 1");
    require_contained(b, m2, run.snapshots[s].time, "branch 2");
    const double raw = branch_phase(psi, b, m2) - branch_phase(psi, a, m1);
    const double value = s == 0 ? wrap_angle(raw) : previous + wrap_angle(raw - previous);
    out.push_back(value);
    previous = value;
  }
  return out;
}

}  // namespace

BranchPhaseResult branch_phase_drift(const BranchRuns& runs, const std::vector<bool>& mask_1,
                                     const std::vector<bool>& mask_2, double delta) {
  const Trajectory* all[] = {runs.run, runs.ref_1, runs.ref_2,
                             runs.control, runs.control_ref_1, runs.control_ref_2};
  for (const auto* t : all)
    if (!t || t->snapshots.size() != runs.run->snapshots.size())
      throw ValidationError("branch runs need matching snapshot schedules");
  const std::size_t n = runs.run->grid->size();
  if (mask_1.size() != n || mask_2.size() != n) throw ValidationError("mask size mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (mask_1[i] && mask_2[i]) throw BranchOverlap("masks intersect");

  BranchPhaseResult res;
  auto& s = res.series;
  s.phase_difference = phase_differences(*runs.run, *runs.ref_1, *runs.ref_2, mask_1, mask_2);
  s.control_difference =
      phase_differences(*runs.control, *runs.control_ref_1, *runs.control_ref_2, mask_1, mask_2);
  double drift = 0.0;
  for (std::size_t k = 0; k < s.phase_difference.size(); ++k) {
    const auto& snap = runs.run->snapshots[k];
    s.time.push_back(snap.time);
    s.mass_1.push_back(masked_mass(snap.state.psi, mask_1));
    s.mass_2.push_back(masked_mass(snap.state.psi, mask_2));
    const double own = s.phase_difference[k] - s.phase_difference[0];
    const double ctl = s.control_difference[k] - s.control_difference[0];
    drift = std::max(drift, std::abs(own - ctl));
    res.max_offset_error =
        std::max(res.max_offset_error, std::abs(wrap_angle(s.phase_difference[k] - delta)));
  }
  res.report = make_report("branch_phase_drift", drift, 1e-3,
                           describe(*runs.run->grid, runs.run->params) +
                               " delta=" + std::to_string(delta),
                           CheckClass::discretization);
  return res;
}

std::vector<SnapshotResiduals> snapshot_residuals(const Trajectory& traj) {
  std::vector<SnapshotResiduals> out;
  if (traj.snapshots.empty()) return out;
  const double n0 = traj.snapshots.front().obs.norm;
  for (const auto& s : traj.snapshots) {
    out.push_back({check_nonsignaling(s.state, traj.params).max_residual,
                   check_current_linearity(s.state, traj.params).max_residual,
                   std::abs(s.obs.norm - n0)});
  }
  return out;
}

std::vector<CheckReport> verify_trajectory(const Trajectory& traj, double norm_drift_threshold) {
  const auto rows = snapshot_residuals(traj);
  double ns = 0.0, cl = 0.0, nd = 0.0;
  for (const auto& r : rows) {
    ns = std::max(ns, r.nonsignaling);
    cl = std::max(cl, r.current_linearity);
    nd = std::max(nd, r.norm_drift);
  }
  const std::string ctx = traj.grid ? describe(*traj.grid, traj.params) +
                                          " snapshots=" + std::to_string(rows.size())
                                    : std::string("empty trajectory");
  return {make_report("nonsignaling", ns, 1e-12, ctx, CheckClass::machine),
          make_report("current_linearity", cl, 1e-8, ctx, CheckClass::discretization),
          make_report("norm_drift", nd, norm_drift_threshold, ctx, CheckClass::discretization)};
}

bool all_pass(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.pass; });
}

}  // namespace nsnl
