#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modloc/types.hpp"

namespace modloc {

// Version stamped into every run manifest; replay compares it before
// insisting on bit-identical deviations.
inline constexpr const char* artifact_version = "0.1.0";

// ---------------------------------------------------------------------------
// Batch experiment driver.  A run is: named experiment + flat knob set in,
// manifest of named pass/fail checks out, plus CSV tables for plotting.
// Every knob lives in the config so a run is reproducible from its manifest.
// ---------------------------------------------------------------------------
struct experiment_config_t {
  std::string experiment;        // one of experiment_names()
  std::uint64_t seed = 7;
  index_t grid = 0;              // base resolution; 0 = per-experiment default
  index_t dim = 0;               // ambient-dimension cap; 0 = default
  index_t families = 0;          // seeded repetitions; 0 = default
  index_t wedges = 0;            // wedge count; 0 = default
  std::vector<scalar_t> kappas;  // little-group radius list; empty = default,
                                 // except localize which requires one
  scalar_t tol = 0;              // > 0 overrides the bound of absolute checks
  std::string out_dir;           // empty = write no files

  std::string to_json() const;
  // Whitelist-validated: unknown keys or wrong types throw config_invalid.
  static experiment_config_t from_json(const std::string& text);
};

// Fills per-experiment defaults and validates semantics (throws
// config_invalid on bad knob combinations, e.g. an empty radius list for
// localize or an odd wedge division of the grid).
experiment_config_t resolve_config(const experiment_config_t& config);

// FNV-1a hash (16 hex digits) of the resolved config's canonical JSON with
// out_dir excluded, so moving the output directory does not change identity.
std::string config_hash(const experiment_config_t& resolved);

struct check_result_t {
  std::string name;
  bool pass = false;
  scalar_t deviation = 0;  // smaller is better; trend checks store a ratio or
                           // a shortfall so "deviation < bound" covers them too
  scalar_t bound = 0;
  scalar_t runtime_s = 0;  // wall time since the previous check finished, so
                           // shared preparation accrues to its first consumer
};

struct run_manifest_t {
  std::string version;  // artifact_version at run time
  std::string experiment;
  std::string config_hash;
  experiment_config_t config;  // resolved
  std::vector<check_result_t> checks;
  scalar_t total_runtime_s = 0;

  bool all_pass() const;
  std::string to_json() const;
  static run_manifest_t from_json(const std::string& text);
  // Hash of the reproducible content: version, experiment, config hash, and
  // per-check (name, pass, deviation, bound).  Runtimes are excluded.
  std::string hash() const;
};

std::vector<std::string> experiment_names();

// (check name, one-line description) in execution order.  Checks that only
// run under certain configs (e.g. trend checks need >= 2 radii) are listed
// with the condition in the description.
std::vector<std::pair<std::string, std::string>> list_checks(const std::string& experiment);

// Runs the named experiment.  Check failures are recorded in the manifest,
// not thrown; configuration problems throw config_invalid.  When out_dir is
// set, writes manifest.json, checks.csv, and per-experiment plot CSVs there.
run_manifest_t run_experiment(const experiment_config_t& config);

struct replay_report_t {
  run_manifest_t fresh;
  bool version_match = true;
  bool identical = true;
  std::string comparison;  // stored-vs-fresh table when something moved
};

// Re-runs the stored config (output directory cleared).  Same artifact
// version: any difference in the reproducible hash throws replay_mismatch.
// Version bump: returns the comparison report instead of throwing.
replay_report_t replay_manifest(const std::string& manifest_json);

// min(MODLOC_THREADS or hardware threads, n_jobs), at least 1.
index_t worker_count(index_t n_jobs);

}  // namespace modloc
