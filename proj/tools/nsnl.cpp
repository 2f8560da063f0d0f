// Command-line front end: run, sweep, verify, oracle-compare, bench.
#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "nsnl/config.hpp"
#include "nsnl/errors.hpp"
#include "nsnl/io.hpp"
#include "nsnl/oracle.hpp"
#include "nsnl/runner.hpp"

namespace {

using namespace nsnl;

constexpr int kOk = 0;
constexpr int kOther = 1;
constexpr int kConfig = 2;
constexpr int kGuard = 3;
constexpr int kCheckFailed = 4;

struct Common {
  std::string input;
  std::string out;
  std::optional<std::size_t> snapshots;
  bool quiet = false;
};

void add_common(CLI::App* cmd, Common& c, const char* what) {
  cmd->add_option("input", c.input, what)->required();
  cmd->add_option("--out", c.out, "output directory (overrides output.dir)");
  cmd->add_option("--snapshots", c.snapshots, "number of snapshot files to keep, spread evenly");
  cmd->add_flag("--quiet", c.quiet, "only report errors");
}

void print_checks(const std::vector<CheckReport>& checks) {
  for (const auto& r : checks)
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " residual=" << format_double(r.max_residual)
              << " threshold=" << format_double(r.threshold) << " [" << r.context << "]\n";
}

RunOptions options_for(const Common& c, const RunSpec& spec, bool write_by_default) {
  RunOptions opt;
  if (!c.out.empty()) {
    opt.out_dir = c.out;
  } else if (write_by_default) {
    opt.out_dir = spec.output_dir;
  }
  opt.snapshot_files = c.snapshots;
  return opt;
}

int cmd_run(const Common& c) {
  const RunSpec spec = load_run_input(c.input);
  const RunOutcome out = run_scenario(spec, options_for(c, spec, true));
  if (!c.quiet) {
    print_checks(out.checks);
    std::cout << out.manifest["results"].dump(2) << "\n";
  }
  return kOk;
}

int cmd_sweep(const Common& c) {
  auto echo = load_run_input(c.input).echo;
  echo["scenario"] = to_string(Scenario::mass_sweep);
  const RunSpec spec = load_config(render_config(echo));  // re-validated for the sweep
  const RunOutcome out = run_scenario(spec, options_for(c, spec, true));
  if (!c.quiet) {
    std::cout << "ratio\tsign\toracle_sign\tslope\toracle_slope\tmax_rel_error\n";
    for (const auto& row : out.manifest["results"]["rows"])
      std::cout << row["ratio"] << "\t" << row["sign"] << "\t" << row["oracle_sign"] << "\t"
                << row["slope"] << "\t" << row["oracle_slope"] << "\t" << row["max_rel_error"]
                << "\n";
  }
  return kOk;
}

bool is_snapshot(const std::string& path) {
  const std::string head = read_text(path).substr(0, 4);
  return head == "NSNL";
}

int cmd_verify(const Common& c, double eps_reg) {
  std::vector<CheckReport> checks;
  if (is_snapshot(c.input)) {
    const DecodedSnapshot snap = read_snapshot(c.input);
    PhysParams p;
    p.eps_reg = eps_reg;
    if (snap.mass_ratio > 0.0) {
      p.mass = snap.mass_ratio;
    } else {
      p.mu = std::numeric_limits<double>::infinity();
    }
    checks.push_back(check_nonsignaling(snap.state, p));
    checks.push_back(check_current_linearity(snap.state, p));
  } else {
    const RunSpec spec = load_run_input(c.input);
    checks = run_scenario(spec, options_for(c, spec, false)).checks;
  }
  if (!c.quiet) print_checks(checks);
  return all_pass(checks) ? kOk : kCheckFailed;
}

int cmd_oracle_compare(const Common& c) {
  const RunSpec spec = load_run_input(c.input);
  if (spec.state.kind != "gaussian" ||
      !std::holds_alternative<NoPotential>(spec.params.potential))
    throw ValidationError("oracle-compare needs a free Gaussian state (state.kind = gaussian, "
                          "potential.kind = none)");
  const WaveField wf = make_initial_state(spec);
  const Trajectory traj = evolve(wf, spec.t_final, spec.stepper, spec.params);
  const double dt = traj.dt_effective;
  const auto ode = oracle::integrate_moments({spec.state.sigma0, 0.0, 0.0}, spec.t_final,
                                             spec.params, dt);
  std::string table = "time\tsigma_pde\tsigma_ode\trel_error\n";
  double worst = 0.0;
  for (const auto& s : traj.snapshots) {
    const auto k = static_cast<std::size_t>(std::llround(s.time / dt));
    const double ref = ode.at(std::min(k, ode.size() - 1)).sigma;
    for (double w : s.obs.width) {
      const double rel = std::abs(w - ref) / ref;
      worst = std::max(worst, rel);
      table += format_double(s.time) + "\t" + format_double(w) + "\t" + format_double(ref) +
               "\t" + format_double(rel) + "\n";
    }
  }
  if (!c.out.empty()) {
    OutputLock lock(c.out);
    write_text(std::filesystem::path(c.out) / "oracle_compare.tsv", table);
  }
  if (!c.quiet) std::cout << table << "max_rel_error\t" << format_double(worst) << "\n";
  return kOk;
}

template <class F>
double seconds_per_call(std::size_t reps, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < reps; ++i) f();
  const std::chrono::duration<double> d = std::chrono::steady_clock::now() - t0;
  return d.count() / static_cast<double>(reps);
}

int cmd_bench(const Common& c, std::size_t steps) {
  const RunSpec spec = load_run_input(c.input);
  const WaveField wf = make_initial_state(spec);
  double cutoff = spec.stepper.k_cutoff == 0.0
                      ? auto_cutoff(spec.params, spec.t_final, wf.grid().dims())
                      : spec.stepper.k_cutoff;
  if (instability_rate(spec.params, 1.0) == 0.0) cutoff = -1.0;
  Propagator prop(wf.grid_ptr(), spec.params, spec.stepper.dt, spec.stepper.scheme, cutoff);

  ComplexField psi = wf.psi;
  const double step = seconds_per_call(steps, [&] { prop.step(psi); });
  ComplexField scratch = wf.psi;
  const double fft = seconds_per_call(steps, [&] { scratch = from_spectrum(to_spectrum(wf.psi)); });
  const double omega = seconds_per_call(steps, [&] { (void)omega_nl(wf.psi, spec.params); });
  const double nl = seconds_per_call(steps, [&] {
    scratch = wf.psi;
    prop.nonlinear_substep(scratch, spec.stepper.dt);
  });

  const nlohmann::json j = {{"code_version", code_version()},
                            {"grid_points", wf.grid().size()},
                            {"scheme", to_string(spec.stepper.scheme)},
                            {"kernel_threads", kernel_threads()},
                            {"steps", steps},
                            {"steps_per_second", 1.0 / step},
                            {"seconds_per_kernel",
                             {{"step", step},
                              {"fft_roundtrip", fft},
                              {"omega_nl", omega},
                              {"nonlinear_substep", nl}}}};
  if (!c.quiet) std::cout << j.dump(2) << "\n";
  if (!c.out.empty()) {
    OutputLock lock(c.out);
    write_text(std::filesystem::path(c.out) / "bench.json", j.dump(2) + "\n");
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlinear Schroedinger mass-scale experiments"};
  app.require_subcommand(1);

  Common run_c, sweep_c, verify_c, oracle_c, bench_c;
  double verify_eps = 1e-6;
  std::size_t bench_steps = 200;
  add_common(app.add_subcommand("run", "execute one scenario"), run_c, "config or manifest");
  add_common(app.add_subcommand("sweep", "mass sweep table"), sweep_c, "config or manifest");
  auto* verify = app.add_subcommand("verify", "check bundle; exit 4 on failure");
  add_common(verify, verify_c, "config, manifest or snapshot");
  verify->add_option("--eps", verify_eps, "amplitude floor for snapshot checks");
  add_common(app.add_subcommand("oracle-compare", "PDE against moment-ODE widths"), oracle_c,
             "config or manifest");
  auto* bench = app.add_subcommand("bench", "throughput and kernel timings");
  add_common(bench, bench_c, "config or manifest");
  bench->add_option("--steps", bench_steps, "repetitions per kernel")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (app.got_subcommand("run")) return cmd_run(run_c);
    if (app.got_subcommand("sweep")) return cmd_sweep(sweep_c);
    if (app.got_subcommand("verify")) return cmd_verify(verify_c, verify_eps);
    if (app.got_subcommand("oracle-compare")) return cmd_oracle_compare(oracle_c);
    if (app.got_subcommand("bench")) return cmd_bench(bench_c, bench_steps);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kConfig;
  } catch (const GuardError& e) {
    std::cerr << "guard tripped: " << e.what() << "\n";
    return kGuard;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kOther;
  }
  return kOther;
}
