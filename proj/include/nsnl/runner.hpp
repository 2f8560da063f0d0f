#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nsnl/config.hpp"
#include "nsnl/verify.hpp"

namespace nsnl {

/// Version string recorded in every manifest.
std::string code_version();

nlohmann::json to_json(const CheckReport& r);
nlohmann::json to_json(const PhysParams& p);
nlohmann::json to_json(const StepperConfig& s);

struct RunOptions {
  std::filesystem::path out_dir;               // empty: nothing is written
  std::optional<std::size_t> snapshot_files;   // cap, spread evenly; default all
};

struct RunOutcome {
  nlohmann::json manifest;
  std::vector<CheckReport> checks;
  std::vector<std::string> files;  // relative to out_dir
};

/// Executes the scenario selected by spec. With an output directory it
/// writes manifest.json plus scenario-specific tables, timeseries and
/// snapshots under an OutputLock.
RunOutcome run_scenario(const RunSpec& spec, const RunOptions& opt = {});

/// Accepts either config text or a manifest written by run_scenario.
RunSpec load_run_input(const std::filesystem::path& path);

/// Indices of `count` items picked evenly out of `total`, first and last included.
std::vector<std::size_t> pick_evenly(std::size_t total, std::size_t count);

}  // namespace nsnl
