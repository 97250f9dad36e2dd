#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pec/arrival.hpp"
#include "pec/simulator.hpp"
#include "pec/synthetic.hpp"
#include "pec/tsas.hpp"

namespace pec {

/// Resolved configuration of a CLI run.
struct RunConfig {
  /// Trace CSV; when empty the synthetic generator is used.
  std::string trace;
  SyntheticConfig synthetic;
  /// Length of the test period at the end of the trace.
  Seconds test_span_s = 2.0 * 86400.0;
  int min_active_count = 3;
  int ngram_n = 3;
  int topn = 10;
  TsasConfig tsas;
  WatchCaps watch_caps;
  Seconds default_sigma_s = 600.0;

  std::string policy = "pec";
  std::size_t capacity = 100;
  double alpha = 0.5;
  double beta = 0.9;
  double gamma = 1.2;
  int K = 1;
  Seconds update_period_s = 300.0;
  Seconds transmission_time_s = 0.5;
  Seconds periodic_period_s = 10800.0;
  Seconds snapshot_period_s = 1800.0;
  std::size_t snapshot_list_size = 2000;
  std::uint64_t seed = 1;

  std::string checkpoint_dir = "checkpoints";
  std::string output_dir = "results";

  void validate() const;
  SimConfig sim_config() const;
};

nlohmann::json config_to_json(const RunConfig& cfg);

/// Fills defaults for missing keys; unknown keys raise a ConfigError listing
/// every offending path.
RunConfig config_from_json(const nlohmann::json& doc);

/// Applies "a.b=value" to `doc`; the value is read as JSON when it parses,
/// otherwise as a string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Reads the file (or starts from an empty document when `path` is empty),
/// applies the overrides and resolves the result.
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

}  // namespace pec
