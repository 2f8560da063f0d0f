#include "nsnl/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "nsnl/errors.hpp"

namespace nsnl {

std::string to_string(Scenario s) {
  switch (s) {
    case Scenario::mass_point: return "mass_point";
    case Scenario::mass_sweep: return "mass_sweep";
    case Scenario::interference: return "interference";
    case Scenario::pointer_collapse: return "pointer_collapse";
    case Scenario::branch_correlation: return "branch_correlation";
  }
  return "mass_point";
}

Scenario scenario_from_string(const std::string& s) {
  for (Scenario c : {Scenario::mass_point, Scenario::mass_sweep, Scenario::interference,
                     Scenario::pointer_collapse, Scenario::branch_correlation})
    if (to_string(c) == s) return c;
  throw ValidationError("unknown scenario '" + s + "'");
}

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct RawValue {
  std::string text;
  int line = 0;
};

double parse_double(const RawValue& v, const std::string& key) {
  std::string t = v.text;
  if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  double out = 0.0;
  const char* end = t.data() + t.size();
  auto [p, ec] = std::from_chars(t.data(), end, out);
  if (ec != std::errc{} || p != end) throw ParseError(v.line, key + ": '" + t + "' is not a number");
  return out;
}

std::size_t parse_size(const RawValue& v, const std::string& key) {
  std::size_t out = 0;
  const std::string& t = v.text;
  const char* end = t.data() + t.size();
  auto [p, ec] = std::from_chars(t.data(), end, out);
  if (ec == std::errc{} && p == end) return out;
  // Accept integral values written in floating notation, e.g. 1e7.
  const double d = parse_double(v, key);
  if (!(d >= 0.0) || d != std::floor(d) || d > 1e18)
    throw ParseError(v.line, key + ": '" + t + "' is not a non-negative integer");
  return static_cast<std::size_t>(d);
}

bool parse_bool(const RawValue& v, const std::string& key) {
  if (v.text == "true" || v.text == "1" || v.text == "yes") return true;
  if (v.text == "false" || v.text == "0" || v.text == "no") return false;
  throw ParseError(v.line, key + ": '" + v.text + "' is not a boolean");
}

std::vector<double> parse_list(const RawValue& v, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(v.text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double({trim(item), v.line}, key));
  if (out.empty()) throw ParseError(v.line, key + ": empty list");
  return out;
}

std::string render_list(const std::vector<double>& xs) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) s += (i ? "," : "") + format_double(xs[i]);
  return s;
}

// One recognised key: how to read it into the spec and how to echo it back.
struct Entry {
  std::function<void(const RawValue&)> set;
  std::function<std::string()> get;  // empty: never echoed
};

class Registry {
 public:
  void add(const std::string& key, Entry e) { entries_[key] = std::move(e); }

  void real(const std::string& key, double& ref) {
    add(key, {[&ref, key](const RawValue& v) { ref = parse_double(v, key); },
              [&ref] { return format_double(ref); }});
  }
  void size(const std::string& key, std::size_t& ref) {
    add(key, {[&ref, key](const RawValue& v) { ref = parse_size(v, key); },
              [&ref] { return std::to_string(ref); }});
  }
  void flag(const std::string& key, bool& ref) {
    add(key, {[&ref, key](const RawValue& v) { ref = parse_bool(v, key); },
              [&ref] { return std::string(ref ? "true" : "false"); }});
  }
  void list(const std::string& key, std::vector<double>& ref) {
    add(key, {[&ref, key](const RawValue& v) { ref = parse_list(v, key); },
              [&ref] { return render_list(ref); }});
  }
  void scheme(const std::string& key, Scheme& ref) {
    add(key, {[&ref](const RawValue& v) { ref = scheme_from_string(v.text); },
              [&ref] { return to_string(ref); }});
  }
  void stepper(const std::string& prefix, StepperConfig& st) {
    real(prefix + ".dt", st.dt);
    real(prefix + ".k_cutoff", st.k_cutoff);
    size(prefix + ".snapshot_every", st.snapshot_every);
    size(prefix + ".max_steps", st.max_steps);
    real(prefix + ".norm_drift_abort", st.norm_drift_abort);
    scheme(prefix + ".scheme", st.scheme);
    flag(prefix + ".mirror_average", st.mirror_average);
  }

  const Entry* find(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::map<std::string, std::string> echo() const {
    std::map<std::string, std::string> out;
    for (const auto& [k, e] : entries_)
      if (e.get) out[k] = e.get();
    return out;
  }

 private:
  std::map<std::string, Entry> entries_;
};

double guard_product(const Grid& g, const PhysParams& p, const StepperConfig& st, double t_final) {
  double cutoff = st.k_cutoff == 0.0 ? auto_cutoff(p, t_final, g.dims()) : st.k_cutoff;
  if (instability_rate(p, 1.0) == 0.0) cutoff = -1.0;
  return 0.5 * p.hbar * retained_k_max_squared(g, cutoff) * std::abs(p.kinetic_balance()) * st.dt;
}

void require_guard(const Grid& g, const PhysParams& p, const StepperConfig& st, double t_final,
                   const std::string& where) {
  const double v = guard_product(g, p, st, t_final);
  if (!(v < 0.5))
    throw ValidationError(where + ".dt = " + format_double(st.dt) +
                          " breaks the guard hbar k_max^2 |1/M - 1/mu| dt / 2 < 0.5 (value " +
                          format_double(v) + ")");
}

}  // namespace

std::string render_config(const std::map<std::string, std::string>& echo) {
  std::string out;
  for (const auto& [k, v] : echo) out += k + " = " + v + "\n";
  return out;
}

RunSpec load_config(const std::string& text) {
  // Pass 1: syntax.
  std::map<std::string, RawValue> raw;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) throw ParseError(lineno, "empty key or value");
    if (raw.count(key)) throw ParseError(lineno, "duplicate key '" + key + "'");
    raw[key] = {value, lineno};
  }

  // Pass 2: bind keys to the spec.
  RunSpec spec;
  std::size_t dims = 1, n = 256, n2 = 0;
  double length = 32.0, length2 = 0.0;
  std::string potential_kind = "none";
  double stiffness = 1.0, well_a = 0.0, well_b = 0.0;
  std::string scenario = "mass_point";
  std::vector<double> x0{0.0}, k0{0.0};
  std::optional<double> ratio, mass_kg;
  bool mass_given = false;

  Registry r;
  r.add("scenario", {[&](const RawValue& v) { scenario = v.text; }, [&] { return scenario; }});
  r.add("seed", {[&](const RawValue& v) { spec.seed = parse_size(v, "seed"); },
                 [&] { return std::to_string(spec.seed); }});
  r.add("output.dir",
        {[&](const RawValue& v) { spec.output_dir = v.text; }, [&] { return spec.output_dir; }});
  r.size("grid.dims", dims);
  r.size("grid.n", n);
  r.real("grid.length", length);
  r.size("grid.n2", n2);
  r.real("grid.length2", length2);

  r.add("params.mass", {[&](const RawValue& v) {
                          spec.params.mass = parse_double(v, "params.mass");
                          mass_given = true;
                        },
                        [&] { return format_double(spec.params.mass); }});
  r.real("params.mu", spec.params.mu);
  r.real("params.hbar", spec.params.hbar);
  r.real("params.eps_reg", spec.params.eps_reg);
  r.add("params.mass_ratio", {[&](const RawValue& v) { ratio = parse_double(v, "params.mass_ratio"); }, {}});
  r.add("params.mass_kg", {[&](const RawValue& v) { mass_kg = parse_double(v, "params.mass_kg"); }, {}});

  r.add("potential.kind",
        {[&](const RawValue& v) { potential_kind = v.text; }, [&] { return potential_kind; }});
  r.real("potential.stiffness", stiffness);
  r.real("potential.a", well_a);
  r.real("potential.b", well_b);

  r.add("state.kind", {[&](const RawValue& v) { spec.state.kind = v.text; },
                       [&] { return spec.state.kind; }});
  r.real("state.sigma0", spec.state.sigma0);
  r.list("state.x0", x0);
  r.list("state.k0", k0);

  r.stepper("stepper", spec.stepper);
  r.real("stepper.t_final", spec.t_final);

  SweepSpec& sw = spec.sweep;
  r.list("sweep.ratios", sw.ratios);
  r.size("sweep.n", sw.n);
  r.real("sweep.length", sw.length);
  r.real("sweep.sigma0", sw.sigma0);
  r.real("sweep.hbar", sw.hbar);
  r.real("sweep.eps_reg", sw.eps_reg);
  r.stepper("sweep", sw.stepper);
  r.real("sweep.t_max", sw.t_max);
  r.real("sweep.slope_begin", sw.slope_begin);
  r.real("sweep.slope_end", sw.slope_end);
  r.real("sweep.zero_slope", sw.zero_slope);
  r.flag("sweep.parallel", sw.parallel);

  SlitConfig& sl = spec.slits;
  r.size("slits.count", sl.slit_count);
  r.real("slits.width", sl.slit_width);
  r.real("slits.separation", sl.slit_separation);
  r.real("slits.t_screen", sl.t_screen);
  r.real("slits.k0", sl.k0);
  r.size("slits.n", sl.n);
  r.real("slits.length", sl.length);
  r.real("slits.hbar", sl.hbar);
  r.real("slits.eps_reg", sl.eps_reg);
  r.real("slits.dt", sl.dt);
  r.real("slits.k_cutoff", sl.k_cutoff);
  r.list("slits.ratios", spec.slit_ratios);

  PointerSpec& pt = spec.pointer;
  r.size("pointer.n", pt.n);
  r.real("pointer.length", pt.length);
  r.real("pointer.a", pt.a);
  r.real("pointer.b", pt.b);
  r.real("pointer.x0", pt.x0);
  r.real("pointer.sigma0", pt.sigma0);
  r.real("pointer.mass", pt.mass);
  r.real("pointer.mu", pt.mu);
  r.real("pointer.t_final", pt.t_final);
  r.real("pointer.eps_reg", pt.eps_reg);
  r.stepper("pointer", pt.stepper);

  BranchSpec& br = spec.branch;
  r.size("branch.n", br.n);
  r.real("branch.length", br.length);
  r.real("branch.offset", br.offset);
  r.real("branch.sigma0", br.sigma0);
  r.real("branch.sigma1", br.sigma1);
  r.real("branch.delta", br.delta);
  r.real("branch.mass", br.mass);
  r.real("branch.mu", br.mu);
  r.real("branch.t_final", br.t_final);
  r.real("branch.eps_reg", br.eps_reg);
  r.stepper("branch", br.stepper);

  for (const auto& [key, value] : raw) {
    const Entry* e = r.find(key);
    if (!e) throw UnknownKey("'" + key + "' (line " + std::to_string(value.line) + ")");
    e->set(value);
  }

  // Pass 3: cross-field resolution and validation.
  spec.scenario = scenario_from_string(scenario);
  if (dims != 1 && dims != 2) throw UnsupportedDimension("grid.dims must be 1 or 2");
  if (n2 == 0) n2 = n;
  if (length2 == 0.0) length2 = length;
  spec.grid = {{n, length}};
  if (dims == 2) spec.grid.push_back({n2, length2});

  if (ratio && mass_kg) throw ValidationError("give params.mass_ratio or params.mass_kg, not both");
  if ((ratio || mass_kg) && mass_given)
    throw ValidationError("params.mass conflicts with params.mass_ratio / params.mass_kg");
  if (mass_kg) ratio = mass_ratio(*mass_kg);
  if (ratio) {
    if (!(*ratio > 0.0) || !std::isfinite(*ratio))
      throw ValidationError("params.mass_ratio must be positive and finite");
    if (!std::isfinite(spec.params.mu))
      throw ValidationError("params.mass_ratio needs a finite params.mu");
    spec.params.mass = *ratio * spec.params.mu;
  }

  if (potential_kind == "none") {
    spec.params.potential = NoPotential{};
  } else if (potential_kind == "harmonic") {
    spec.params.potential = HarmonicPotential{stiffness};
  } else if (potential_kind == "double_well") {
    spec.params.potential = DoubleWellPotential{well_a, well_b};
  } else {
    throw ValidationError("potential.kind must be none, harmonic or double_well");
  }
  spec.params.validate();

  if (spec.state.kind != "gaussian" && spec.state.kind != "periodic")
    throw ValidationError("state.kind must be gaussian or periodic");
  auto per_axis = [&](std::vector<double>& v, const char* key) {
    if (v.size() == 1 && dims == 2) v.push_back(v[0]);
    if (v.size() != dims) throw ValidationError(std::string(key) + " needs one value per axis");
  };
  per_axis(x0, "state.x0");
  per_axis(k0, "state.k0");
  spec.state.x0 = x0;
  spec.state.k0 = k0;
  if (!(spec.t_final > 0.0)) throw ValidationError("stepper.t_final must be > 0");
  if (!(spec.stepper.dt > 0.0)) throw ValidationError("stepper.dt must be > 0");

  sw.validate();
  sl.validate();
  for (double rt : spec.slit_ratios)
    if (!(rt >= 0.0) || !std::isfinite(rt)) throw ValidationError("slits.ratios must be >= 0");

  const GridPtr grid = make_run_grid(spec);
  switch (spec.scenario) {
    case Scenario::mass_point:
      require_guard(*grid, spec.params, spec.stepper, spec.t_final, "stepper");
      make_initial_state(spec);
      break;
    case Scenario::mass_sweep: {
      auto g = make_grid({{sw.n, sw.length}});
      for (double rt : sw.ratios) {
        PhysParams p;
        p.mass = rt;
        p.hbar = sw.hbar;
        require_guard(*g, p, sw.stepper, sw.t_max, "sweep");
      }
      break;
    }
    case Scenario::interference: {
      auto g = make_grid({{sl.n, sl.length}});
      for (double rt : spec.slit_ratios) {
        PhysParams p;
        p.mu = rt > 0.0 ? 1.0 / rt : std::numeric_limits<double>::infinity();
        p.hbar = sl.hbar;
        StepperConfig st;
        st.dt = sl.dt;
        st.k_cutoff = sl.k_cutoff;
        require_guard(*g, p, st, sl.t_screen, "slits");
      }
      break;
    }
    case Scenario::pointer_collapse: {
      PhysParams p;
      p.mass = pt.mass;
      p.mu = pt.mu;
      p.validate();
      require_guard(*make_grid({{pt.n, pt.length}}), p, pt.stepper, pt.t_final, "pointer");
      break;
    }
    case Scenario::branch_correlation: {
      PhysParams p;
      p.mass = br.mass;
      p.mu = br.mu;
      p.validate();
      require_guard(*make_grid({{br.n, br.length}, {br.n, br.length}}), p, br.stepper,
                    br.t_final, "branch");
      break;
    }
  }

  spec.echo = r.echo();
  return spec;
}

RunSpec load_config_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ValidationError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return load_config(ss.str());
}

GridPtr make_run_grid(const RunSpec& spec) { return make_grid(spec.grid); }

WaveField make_initial_state(const RunSpec& spec) {
  const GridPtr grid = make_run_grid(spec);
  WaveField wf = spec.state.kind == "periodic"
                     ? periodic_packet(grid, spec.state.x0, spec.state.sigma0, spec.state.k0)
                     : gaussian_packet(grid, spec.state.x0, spec.state.sigma0, spec.state.k0);
  wf.params_tag = spec.params.tag();
  return wf;
}

}  // namespace nsnl
