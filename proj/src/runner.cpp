#include "nsnl/runner.hpp"

#include <cmath>
#include <cstdio>

#include "nsnl/errors.hpp"
#include "nsnl/io.hpp"
#include "nsnl/oracle.hpp"

#ifndef NSNL_CODE_VERSION
#define NSNL_CODE_VERSION "unknown"
#endif

namespace nsnl {

using nlohmann::json;

std::string code_version() { return NSNL_CODE_VERSION; }

namespace {

// Non-finite doubles are not representable in JSON; keep them as text.
json num(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

std::string padded(std::size_t i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%05zu", i);
  return buf;
}

class Sink {
 public:
  Sink(const RunOptions& opt, RunOutcome& out) : opt_(opt), out_(out) {}

  bool active() const { return !opt_.out_dir.empty(); }

  void text(const std::string& rel, const std::string& body) {
    if (!active()) return;
    std::filesystem::create_directories((opt_.out_dir / rel).parent_path());
    write_text(opt_.out_dir / rel, body);
    out_.files.push_back(rel);
  }

  void trajectory(const std::string& prefix, const Trajectory& traj) {
    if (!active()) return;
    text(prefix + "timeseries.tsv", format_timeseries(traj));
    const std::size_t n = traj.snapshots.size();
    const double ratio = snapshot_mass_ratio(traj.params);
    for (std::size_t i : pick_evenly(n, opt_.snapshot_files.value_or(n))) {
      const std::string rel = prefix + "snap_" + padded(i) + ".nsnl";
      text(rel, encode_snapshot(traj.snapshots[i].state, ratio));
    }
  }

 private:
  const RunOptions& opt_;
  RunOutcome& out_;
};

json reports_json(const std::vector<CheckReport>& rs) {
  json a = json::array();
  for (const auto& r : rs) a.push_back(to_json(r));
  return a;
}

void append(std::vector<CheckReport>& to, const std::vector<CheckReport>& from,
            const std::string& context) {
  for (CheckReport r : from) {
    r.context = context + (r.context.empty() ? "" : "; " + r.context);
    to.push_back(std::move(r));
  }
}

json run_mass_point(const RunSpec& spec, Sink& sink, std::vector<CheckReport>& checks) {
  const WaveField wf = make_initial_state(spec);
  const Trajectory traj = evolve(wf, spec.t_final, spec.stepper, spec.params);
  append(checks, verify_trajectory(traj, spec.stepper.norm_drift_abort), "mass_point");
  sink.trajectory("", traj);
  const Snapshot& last = traj.snapshots.back();
  json widths = json::array();
  for (double w : last.obs.width) widths.push_back(num(w));
  return {{"snapshots", traj.snapshots.size()},
          {"dt_effective", num(traj.dt_effective)},
          {"k_cutoff_resolved", num(traj.stepper.k_cutoff)},
          {"final_width", widths},
          {"final_norm", num(last.obs.norm)}};
}

json run_sweep(const RunSpec& spec, Sink& sink, std::vector<CheckReport>& checks,
               const json& base_manifest) {
  const auto rows = run_mass_sweep(spec.sweep);
  std::string table =
      "ratio\tsign\tslope\toracle_sign\toracle_slope\tt_event\tt_end\tmax_rel_error\terror\n";
  json out = json::array();
  double mismatches = 0.0, worst = 0.0;
  std::size_t ok_rows = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    const std::string t_event = r.t_event ? format_double(*r.t_event) : "none";
    table += format_double(r.ratio) + "\t" + std::to_string(r.sign) + "\t" +
             format_double(r.slope) + "\t" + std::to_string(r.oracle_sign) + "\t" +
             format_double(r.oracle_slope) + "\t" + t_event + "\t" + format_double(r.t_end) +
             "\t" + format_double(r.max_rel_error) + "\t" + (r.error.empty() ? "-" : r.error) +
             "\n";
    json row = {{"ratio", num(r.ratio)},
                {"sign", r.sign},
                {"slope", num(r.slope)},
                {"oracle_sign", r.oracle_sign},
                {"oracle_slope", num(r.oracle_slope)},
                {"t_event", r.t_event ? json(num(*r.t_event)) : json(nullptr)},
                {"t_end", num(r.t_end)},
                {"max_rel_error", num(r.max_rel_error)},
                {"error", r.error},
                {"checks", reports_json(r.checks)}};
    out.push_back(row);
    const std::string ctx = "ratio " + format_double(r.ratio);
    if (!r.error.empty()) {
      checks.push_back(make_report("sweep_row", 1.0, 0.0, ctx + ": " + r.error,
                                   CheckClass::discretization));
      continue;
    }
    append(checks, r.checks, ctx);
    ++ok_rows;
    if (r.sign != r.oracle_sign) mismatches += 1.0;
    worst = std::max(worst, r.max_rel_error);

    json row_manifest = base_manifest;
    row_manifest["row"] = row;
    const std::string dir = "row_" + padded(i) + "/";
    sink.trajectory(dir, r.trajectory);
    sink.text(dir + "manifest.json", row_manifest.dump(2) + "\n");
  }
  checks.push_back(make_report("sweep_sign_agreement", mismatches, 0.0,
                               "rows whose width trend differs from the moment oracle",
                               CheckClass::discretization));
  if (ok_rows == 0) worst = std::nan("");  // nothing was compared
  checks.push_back(make_report("sweep_oracle_width", worst, 5e-3,
                               "max relative width error against the moment oracle",
                               CheckClass::discretization));
  sink.text("sweep.tsv", table);
  return {{"rows", out}};
}

json fringe_json(const FringeMeasure& f) {
  return {{"visibility", num(f.visibility)},
          {"x_max", num(f.x_max)},
          {"i_max", num(f.i_max)},
          {"i_min", num(f.i_min)}};
}

json run_slits(const RunSpec& spec, Sink& sink, std::vector<CheckReport>& checks) {
  json out = json::array();
  std::vector<InterferenceResult> results;
  for (std::size_t i = 0; i < spec.slit_ratios.size(); ++i) {
    InterferenceResult r = run_interference(spec.slits, spec.slit_ratios[i]);
    append(checks, r.checks, "ratio " + format_double(r.ratio));
    json j = {{"ratio", num(r.ratio)},
              {"fringe", fringe_json(r.fringe)},
              {"envelope_width", num(r.envelope_width)}};
    if (r.analytic) j["analytic"] = fringe_json(*r.analytic);
    out.push_back(j);
    sink.trajectory("ratio_" + padded(i) + "/", r.trajectory);
    results.push_back(std::move(r));
  }
  if (sink.active() && !results.empty()) {
    std::string screen = "x";
    for (const auto& r : results) screen += "\tintensity_" + format_double(r.ratio);
    screen += "\n";
    const auto& x = results.front().screen.grid().axis(0).x;
    for (std::size_t k = 0; k < x.size(); ++k) {
      screen += format_double(x[k]);
      for (const auto& r : results) screen += "\t" + format_double(r.screen[k]);
      screen += "\n";
    }
    sink.text("screen.tsv", screen);
  }
  return {{"ratios", out}};
}

json run_pointer(const RunSpec& spec, Sink& sink, std::vector<CheckReport>& checks) {
  const PointerResult r = run_pointer_collapse(spec.pointer);
  append(checks, r.checks, "pointer_collapse");
  std::string table = "time\tleft\tright\n";
  for (std::size_t i = 0; i < r.time.size(); ++i)
    table += format_double(r.time[i]) + "\t" + format_double(r.left[i]) + "\t" +
             format_double(r.right[i]) + "\n";
  sink.text("partition.tsv", table);
  sink.trajectory("", r.trajectory);
  return {{"final_left", num(r.left.back())}, {"final_right", num(r.right.back())}};
}

json run_branch(const RunSpec& spec, Sink& sink, std::vector<CheckReport>& checks) {
  const BranchResult r = run_branch_correlation(spec.branch);
  append(checks, r.checks, "branch_correlation");
  const auto& s = r.phases.series;
  std::string table = "time\tphase_difference\tcontrol_difference\tmass_1\tmass_2\n";
  for (std::size_t i = 0; i < s.time.size(); ++i)
    table += format_double(s.time[i]) + "\t" + format_double(s.phase_difference[i]) + "\t" +
             format_double(s.control_difference[i]) + "\t" + format_double(s.mass_1[i]) + "\t" +
             format_double(s.mass_2[i]) + "\n";
  sink.text("phases.tsv", table);
  sink.trajectory("", r.trajectory);
  return {{"max_offset_error", num(r.phases.max_offset_error)},
          {"max_branch_mass_drift", num(r.max_branch_mass_drift)}};
}

}  // namespace

json to_json(const CheckReport& r) {
  return {{"name", r.name},
          {"max_residual", num(r.max_residual)},
          {"threshold", num(r.threshold)},
          {"pass", r.pass},
          {"context", r.context},
          {"class", to_string(r.check_class)}};
}

json to_json(const PhysParams& p) {
  return {{"mass", num(p.mass)}, {"mu", num(p.mu)}, {"hbar", num(p.hbar)},
          {"eps_reg", num(p.eps_reg)}};
}

json to_json(const StepperConfig& s) {
  return {{"scheme", to_string(s.scheme)},
          {"dt", num(s.dt)},
          {"snapshot_every", s.snapshot_every},
          {"max_steps", s.max_steps},
          {"norm_drift_abort", num(s.norm_drift_abort)},
          {"k_cutoff", num(s.k_cutoff)},
          {"mirror_average", s.mirror_average}};
}

std::vector<std::size_t> pick_evenly(std::size_t total, std::size_t count) {
  std::vector<std::size_t> out;
  if (total == 0 || count == 0) return out;
  if (count >= total) {
    for (std::size_t i = 0; i < total; ++i) out.push_back(i);
    return out;
  }
  if (count == 1) return {total - 1};
  for (std::size_t j = 0; j < count; ++j) {
    const std::size_t i = (j * (total - 1) + (count - 1) / 2) / (count - 1);
    if (out.empty() || out.back() != i) out.push_back(i);
  }
  return out;
}

RunOutcome run_scenario(const RunSpec& spec, const RunOptions& opt) {
  RunOutcome out;
  std::optional<OutputLock> lock;
  if (!opt.out_dir.empty()) lock.emplace(opt.out_dir);
  Sink sink(opt, out);

  json manifest = {{"code_version", code_version()},
                   {"snapshot_format_version", kSnapshotVersion},
                   {"kernel_threads", kernel_threads()},
                   {"scenario", to_string(spec.scenario)},
                   {"config", spec.echo},
                   {"config_text", render_config(spec.echo)}};

  json results;
  switch (spec.scenario) {
    case Scenario::mass_point: results = run_mass_point(spec, sink, out.checks); break;
    case Scenario::mass_sweep: results = run_sweep(spec, sink, out.checks, manifest); break;
    case Scenario::interference: results = run_slits(spec, sink, out.checks); break;
    case Scenario::pointer_collapse: results = run_pointer(spec, sink, out.checks); break;
    case Scenario::branch_correlation: results = run_branch(spec, sink, out.checks); break;
  }
  manifest["results"] = results;
  manifest["checks"] = reports_json(out.checks);
  manifest["all_pass"] = all_pass(out.checks);
  manifest["files"] = out.files;
  sink.text("manifest.json", manifest.dump(2) + "\n");
  out.manifest = std::move(manifest);
  return out;
}

RunSpec load_run_input(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json m;
    try {
      m = json::parse(text);
    } catch (const json::exception& e) {
      throw ValidationError("manifest is not valid JSON: " + std::string(e.what()));
    }
    if (!m.contains("config_text") || !m["config_text"].is_string())
      throw ValidationError("manifest has no config_text");
    return load_config(m["config_text"].get<std::string>());
  }
  return load_config(text);
}

}  // namespace nsnl
