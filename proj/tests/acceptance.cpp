// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cstring>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "nsnl/config.hpp"
#include "nsnl/errors.hpp"
#include "nsnl/experiments.hpp"
#include "nsnl/io.hpp"
#include "nsnl/oracle.hpp"
#include "nsnl/runner.hpp"
#include "nsnl/verify.hpp"

using namespace nsnl;
namespace fs = std::filesystem;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

// Every trajectory produced below; the non-signaling criterion re-checks their snapshots.
std::vector<Trajectory> g_corpus;

void keep(const Trajectory& t) { g_corpus.push_back(t); }

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

PhysParams params(double mass, double mu, double eps = 1e-6) {
  PhysParams p;
  p.mass = mass;
  p.mu = mu;
  p.eps_reg = eps;
  return p;
}

StepperConfig stepper(double dt, Scheme scheme = Scheme::strang, double k_cutoff = 0.0) {
  StepperConfig s;
  s.dt = dt;
  s.scheme = scheme;
  s.k_cutoff = k_cutoff;
  s.snapshot_every = 0;
  return s;
}

WaveField packet(std::size_t n = 256, double length = 32.0, double x0 = 0.0, double k0 = 0.0) {
  return gaussian_packet(make_grid({{n, length}}), {x0}, 1.0, {k0});
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

WaveField random_smooth(std::mt19937_64& rng, const GridPtr& g) {
  std::normal_distribution<double> nd;
  const double L = g->axis(0).length;
  double a[4], b[4], c[4];
  for (int m = 0; m < 4; ++m) {
    a[m] = 0.4 * nd(rng);
    b[m] = nd(rng);
    c[m] = nd(rng);
  }
  WaveField wf{ComplexField(g), 0.0, {}};
  for (std::size_t i = 0; i < g->size(); ++i) {
    const double s = 2.0 * pi * g->coord(i, 0) / L;
    double amp = 0.0, ph = 0.0;
    for (int m = 0; m < 4; ++m) {
      amp += a[m] * std::sin((m + 1) * s + b[m]);
      ph += c[m] * std::cos((m + 1) * s);
    }
    wf.psi[i] = std::polar(std::exp(amp), ph);
  }
  normalize(wf.psi);
  return wf;
}

Outcome nonsignaling() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20261018);
  std::uniform_real_distribution<double> ratio(0.1, 10.0);
  auto g = make_grid({{256, 16.0}});
  double worst = 0.0;
  for (int i = 0; i < 100; ++i)
    worst = std::max(worst, check_nonsignaling(random_smooth(rng, g), params(ratio(rng), 1.0)).max_residual);
  std::size_t snaps = 0;
  for (const auto& traj : g_corpus)
    for (const auto& s : traj.snapshots) {
      worst = std::max(worst, check_nonsignaling(s.state, traj.params).max_residual);
      ++snaps;
    }
  const double secs = seconds_since(t0);
  return {worst <= 1e-12 && secs < 10.0,
          "100 random states + " + std::to_string(snaps) + " snapshots, max residual " + num(worst) +
              ", " + num(secs) + " s"};
}

Outcome modulus() {
  const auto t0 = std::chrono::steady_clock::now();
  StepperConfig st = stepper(1e-4);
  st.snapshot_every = 1000;
  double worst = 0.0;
  std::size_t steps = 0;
  const Trajectory traj = evolve(packet(), 1.0, st, params(2.0, 1.0),
                                 [&](std::size_t, const ComplexField&, const StepStats& s) {
                                   worst = std::max(worst, s.modulus_change);
                                   ++steps;
                                 });
  keep(traj);
  const double drift = std::abs(traj.snapshots.back().obs.norm - traj.snapshots.front().obs.norm);
  const double secs = seconds_since(t0);
  return {steps == 10000 && worst <= 1e-13 && drift <= 1e-9 && secs < 60.0,
          std::to_string(steps) + " steps, max modulus change " + num(worst) + ", norm drift " +
              num(drift) + ", " + num(secs) + " s"};
}

Outcome fixed_point() {
  StepperConfig st = stepper(1e-4);
  st.snapshot_every = 5000;
  const WaveField wf = packet();
  const Trajectory traj = evolve(wf, 5.0, st, params(1.0, 1.0, 1e-10));
  keep(traj);
  const double d = max_abs_distance(traj.snapshots.back().state.psi, wf.psi);
  return {d <= 1e-8, "M = mu, t = 5: max |Psi(t) - Psi(0)| = " + num(d)};
}

Outcome linear_limit() {
  StepperConfig st = stepper(1e-3);
  st.snapshot_every = 500;
  const Trajectory traj = evolve(packet(), 2.0, st, PhysParams::linear(1.0));
  keep(traj);
  const double w = traj.snapshots.back().obs.width[0];
  const double rel = std::abs(w / std::sqrt(2.0) - 1.0);
  return {rel <= 2e-3, "width(2) = " + num(w) + ", relative error " + num(rel)};
}

std::vector<SweepRow> g_sweep;

Outcome collapse_transition() {
  const auto t0 = std::chrono::steady_clock::now();
  SweepSpec spec;
  spec.parallel = true;
  g_sweep = run_mass_sweep(spec);
  const int expected[] = {1, 1, 0, -1, -1};
  bool ok = g_sweep.size() == 5;
  std::string signs;
  for (std::size_t i = 0; i < g_sweep.size(); ++i) {
    const auto& r = g_sweep[i];
    ok = ok && r.error.empty() && r.sign == expected[i] && r.oracle_sign == r.sign;
    signs += (i ? "," : "") + std::string(r.sign > 0 ? "+" : r.sign < 0 ? "-" : "0");
    if (!r.error.empty()) signs += "(" + r.error + ")";
    keep(r.trajectory);
  }
  const double secs = seconds_since(t0);
  return {ok && secs < 300.0, "signs {" + signs + "} for ratios 0.25..4, " + num(secs) + " s"};
}

Outcome oracle_equivalence() {
  double worst = 0.0;
  bool ok = g_sweep.size() == 5;
  for (const auto& r : g_sweep) {
    ok = ok && r.error.empty();
    worst = std::max(worst, r.max_rel_error);
  }
  return {ok && worst <= 5e-3, "max relative width error " + num(worst)};
}

Outcome separability() {
  auto g = make_grid({{128, 32.0}});
  const WaveField a = gaussian_packet(g, {-2.0}, 1.0, {0.5});
  const WaveField b = gaussian_packet(g, {1.5}, 1.2, {-0.3});
  // The amplitude floor does not factorize over a product; keep it below the tails that matter.
  const CheckReport r = check_separability(a, b, params(2.0, 1.0, 1e-10), 0.5, stepper(1e-3));
  return {r.pass && r.max_residual <= 1e-8, "128^2, M = 2 mu, t = 0.5: L2 residual " + num(r.max_residual)};
}

Outcome phase_preservation() {
  const BranchResult r = run_branch_correlation(BranchSpec{});
  keep(r.trajectory);
  const double e = r.phases.max_offset_error;
  return {e <= 1e-3, "max |dphi - pi/2| = " + num(e) + " rad over " +
                         std::to_string(r.phases.series.time.size()) + " snapshots"};
}

Outcome convergence() {
  const PhysParams p = params(2.0, 1.0);
  const WaveField wf = packet();
  const double T = 0.5, dt0 = 0.01, kc = 5.0;
  auto final_state = [&](double dt, Scheme s) {
    return evolve(wf, T, stepper(dt, s, kc), p).snapshots.back().state.psi;
  };
  const ComplexField ref = final_state(dt0 / 64.0, Scheme::strang);
  std::vector<double> err;
  for (double dt : {dt0, dt0 / 2, dt0 / 4}) err.push_back(l2_distance(final_state(dt, Scheme::strang), ref));
  const double o1 = std::log2(err[0] / err[1]), o2 = std::log2(err[1] / err[2]);

  // Norm drift needs a regime without spectral projection, which removes mass
  // independently of dt: M < mu, smooth periodic packet on a coarse grid.
  const WaveField wide = periodic_packet(make_grid({{64, 64.0}}), {0.0}, 4.0, {0.3});
  auto drift = [&](double dt) {
    const Trajectory t = evolve(wide, 4.0, stepper(dt, Scheme::rk4), params(0.5, 1.0));
    return std::abs(t.snapshots.back().obs.norm - t.snapshots.front().obs.norm);
  };
  const double d1 = drift(0.08), d2 = drift(0.04), d3 = drift(0.02);
  const double r1 = std::log2(d1 / d2), r2 = std::log2(d2 / d3);
  const bool ok = std::abs(o1 - 2.0) <= 0.2 && std::abs(o2 - 2.0) <= 0.2 && r1 >= 4.5 && r2 >= 4.5;
  return {ok, "strang orders " + num(o1) + ", " + num(o2) + "; rk4 norm-drift orders " + num(r1) +
                  ", " + num(r2)};
}

Outcome cross_integrator() {
  const PhysParams p = params(2.0, 1.0);
  const WaveField wf = packet(256, 32.0, 0.0, 0.5);
  const auto a = evolve(wf, 1.0, stepper(2e-4, Scheme::strang, 5.0), p);
  const auto b = evolve(wf, 1.0, stepper(2e-4, Scheme::rk4, 5.0), p);
  keep(a);
  keep(b);
  const double d = l2_distance(a.snapshots.back().state.psi, b.snapshots.back().state.psi);
  return {d <= 1e-6, "t = 1, dt = 2e-4: L2 difference " + num(d)};
}

Outcome parity() {
  const PointerResult r = run_pointer_collapse(PointerSpec{});
  keep(r.trajectory);
  double worst = 0.0;
  // The split is taken relative to the current norm; the cutoff sheds a little mass from both wells.
  for (std::size_t i = 0; i < r.time.size(); ++i)
    worst = std::max(worst, std::abs(r.left[i] / (r.left[i] + r.right[i]) - 0.5));
  return {worst <= 1e-8 && !r.time.empty(),
          "max |split - 0.5| = " + num(worst) + " over " + std::to_string(r.time.size()) + " snapshots"};
}

Outcome interference() {
  const SlitConfig cfg;
  const InterferenceResult control = run_interference(cfg, 0.0);
  const InterferenceResult heavy = run_interference(cfg, 2.0);
  const InterferenceResult molecule = run_interference(cfg, 0.005);
  for (const auto* r : {&control, &heavy, &molecule}) keep(r->trajectory);
  const double vc = control.fringe.visibility, wc = control.envelope_width;
  const double vm = molecule.fringe.visibility, wm = molecule.envelope_width;
  const bool ok = heavy.fringe.visibility < vc && heavy.envelope_width < wc &&
                  std::abs(vm / vc - 1.0) <= 0.01 && std::abs(wm / wc - 1.0) <= 0.01;
  return {ok, "V/width control " + num(vc) + "/" + num(wc) + ", M/mu=2 " + num(heavy.fringe.visibility) +
                  "/" + num(heavy.envelope_width) + ", M/mu=0.005 " + num(vm) + "/" + num(wm)};
}

std::vector<std::pair<std::string, std::string>> tree(const fs::path& d) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& e : fs::recursive_directory_iterator(d))
    if (e.is_regular_file()) out.emplace_back(fs::relative(e.path(), d).string(), read_text(e.path()));
  std::sort(out.begin(), out.end());
  return out;
}

Outcome format_and_manifest() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  const fs::path dir = fs::temp_directory_path() / ("nsnl_accept_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);

  bool ok = true;
  for (const auto& axes : {std::vector<AxisSpec>{{512, 40.0}}, std::vector<AxisSpec>{{32, 8.0}, {64, 9.5}}}) {
    WaveField wf{ComplexField(make_grid(axes)), 1.25, {}};
    for (auto& v : wf.psi) v = cplx{nd(rng), nd(rng)};
    write_snapshot(dir / "s.nsnl", wf, 2.0);
    const DecodedSnapshot d = read_snapshot(dir / "s.nsnl");
    ok = ok && d.state.time == wf.time && d.mass_ratio == 2.0 && d.state.psi.size() == wf.psi.size() &&
         std::memcmp(d.state.psi.data(), wf.psi.data(), wf.psi.size() * sizeof(cplx)) == 0 &&
         encode_snapshot(d.state, d.mass_ratio) == read_text(dir / "s.nsnl");
  }

  const RunSpec spec = load_config(
      "scenario = mass_point\ngrid.n = 256\ngrid.length = 32\nparams.mass_ratio = 2\n"
      "state.k0 = 0.4\nstepper.t_final = 0.5\nstepper.snapshot_every = 50\n");
  run_scenario(spec, {dir / "a", std::nullopt});
  run_scenario(load_run_input(dir / "a" / "manifest.json"), {dir / "b", std::nullopt});
  const auto ta = tree(dir / "a"), tb = tree(dir / "b");
  const bool same = !ta.empty() && ta == tb;
  fs::remove_all(dir);
  return {ok && same, std::string("snapshot round trip ") + (ok ? "bitwise" : "differs") + ", replay of " +
                          std::to_string(ta.size()) + " files " + (same ? "identical" : "differs")};
}

}  // namespace

int main() {
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
    Outcome result;
  };
  // The first criterion also checks snapshots from every other run, so it goes last.
  std::vector<Criterion> cs = {
      {"nonsignaling_identity", nonsignaling, {}},
      {"modulus_preservation", modulus, {}},
      {"fixed_point", fixed_point, {}},
      {"linear_limit", linear_limit, {}},
      {"collapse_transition", collapse_transition, {}},
      {"oracle_equivalence", oracle_equivalence, {}},
      {"separability", separability, {}},
      {"phase_preservation", phase_preservation, {}},
      {"convergence", convergence, {}},
      {"cross_integrator", cross_integrator, {}},
      {"parity_symmetry", parity, {}},
      {"interference_direction", interference, {}},
      {"format_and_manifest", format_and_manifest, {}},
  };
  auto run_one = [](Criterion& c) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.result = c.run();
    } catch (const std::exception& e) {
      c.result = {false, std::string("exception: ") + e.what()};
    }
    std::fprintf(stderr, "  [%s done in %.1f s]\n", c.name.c_str(), seconds_since(t0));
  };
  for (std::size_t i = 1; i < cs.size(); ++i) run_one(cs[i]);
  run_one(cs[0]);

  int failed = 0;
  for (const auto& c : cs) {
    std::printf("%s %s: %s\n", c.result.pass ? "PASS" : "FAIL", c.name.c_str(), c.result.detail.c_str());
    failed += !c.result.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(cs.size()) - failed, cs.size());
  return failed ? 1 : 0;
}
