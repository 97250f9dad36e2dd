#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "pec/trace.hpp"

namespace pec {

struct WatchTimeParams {
  Seconds mean = 2400.0;
  Seconds std = 400.0;
};

/// Parameters of the synthetic on-off workload.
///
/// Users alternate sessions (geometric request count) and exponential off
/// gaps. TV watchers continue to the next episode with `p_follow`; all other
/// draws pick TV with `tv_fraction`, else a movie following a planted Markov
/// chain whose rows are Zipf-weighted successor lists.
struct SyntheticConfig {
  std::uint64_t seed = 1;
  int n_users = 500;
  int n_series = 50;
  int episodes_per_series = 20;
  int n_movies = 500;
  double tv_fraction = 0.6;
  double p_follow = 0.9;
  double zipf_s = 1.0;
  int markov_order = 1;
  int markov_successors = 5;
  double session_length_mean = 5.0;
  Seconds off_mean = 4.0 * 3600.0;
  WatchTimeParams tv_watch{2400.0, 400.0};
  WatchTimeParams movie_watch{5400.0, 1200.0};
  /// Per-view deviation from the content's length.
  Seconds watch_jitter_s = 30.0;
  Seconds duration = 7.0 * 86400.0;

  void validate() const;
};

void to_json(nlohmann::json& j, const SyntheticConfig& cfg);
void from_json(const nlohmann::json& j, SyntheticConfig& cfg);

enum class DrawSource : std::uint8_t { Follow, FreshTv, Markov, Popularity };

/// One generated request as the generator saw it.
struct SessionLogEntry {
  std::uint32_t user = 0;
  std::uint32_t session = 0;
  std::string content;
  Seconds timestamp = 0.0;
  DrawSource source = DrawSource::Popularity;
};

struct SyntheticTrace {
  Trace trace;
  /// Per-user generation order.
  std::vector<SessionLogEntry> log;
  /// Length of each generated content; per-view watch times are centred on it.
  std::unordered_map<std::string, Seconds> content_length;
};

SyntheticTrace generate_synthetic(const SyntheticConfig& cfg);

/// Convenience wrapper returning only the trace.
Trace generate_synthetic_trace(const SyntheticConfig& cfg);

/// Planted successor distribution for a movie context (oldest first, length
/// markov_order). Entries are (movie index, probability), highest first.
std::vector<std::pair<int, double>> planted_row(const SyntheticConfig& cfg, const std::vector<int>& context);

std::string movie_name(int index);
std::string episode_name(int series, int episode);
std::string series_name(int series);

/// Parses "m<idx>" into a movie index, or -1.
int movie_index(const std::string& content);

}  // namespace pec
