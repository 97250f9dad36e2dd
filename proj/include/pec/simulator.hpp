#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pec/arrival.hpp"
#include "pec/cache.hpp"
#include "pec/fusion.hpp"
#include "pec/scoring.hpp"

namespace pec {

enum class Policy { Pec, NaivePec, Lru, Lru2, Lfu, Periodic, ModifiedPeriodic };

std::string to_string(Policy p);
Policy parse_policy(const std::string& text);
/// True for policies that maintain the predictive score board.
bool uses_predictions(Policy p);

struct SimConfig {
  Policy policy = Policy::Pec;
  std::size_t capacity = 0;
  double alpha = 0.5;
  double beta = 0.9;
  double gamma = 1.2;
  /// Minimum number of request arrivals between prefetch starts.
  int K = 1;
  Seconds update_period = 300.0;
  Seconds transmission_time = 0.5;
  Seconds periodic_period = 10800.0;
  std::size_t hit_window = 5000;
  /// Start of the simulated period; defaults to the first test request.
  std::optional<Seconds> start;
  /// Captures ranking snapshots every this many seconds when positive.
  Seconds snapshot_period = 0.0;
  std::size_t snapshot_list_size = 2000;
  bool record_cache_log = false;

  void validate() const;
  CacheConfig cache_config() const;
};

enum class JobKind { Demand, Prefetch, Bulk };
std::string to_string(JobKind k);

struct DownloadRecord {
  ContentId content;
  JobKind kind = JobKind::Demand;
  Seconds enqueued_at = 0.0;
  Seconds start = 0.0;
  /// Equal to `start` for a batch load abandoned before service.
  Seconds end = 0.0;
};

struct RequestRecord {
  Seconds t = 0.0;
  UserId user;
  ContentId content;
  bool hit = false;
  Portion portion = Portion::None;
  Seconds latency = 0.0;
  /// Download that served a miss, or -1.
  long download = -1;
};

struct Snapshot {
  Seconds t = 0.0;
  /// Top contents by predictive rank key, best first.
  std::vector<ContentId> predictive;
  /// Top contents by LRU-2 score, best first.
  std::vector<ContentId> lru2;
};

struct SimReport {
  Policy policy = Policy::Pec;
  std::size_t requests = 0;
  std::size_t hits = 0;
  std::size_t misses = 0;
  double hit_ratio = 0.0;
  /// Hit ratio of each full window of `hit_window` requests.
  std::vector<double> hit_ratio_series;
  std::size_t hit_window = 5000;
  std::size_t partial_window_requests = 0;
  double partial_window_hit_ratio = 0.0;
  Seconds total_latency = 0.0;
  Seconds cacheless_latency = 0.0;
  double latency_reduction = 0.0;
  std::size_t demand_count = 0;
  std::size_t prefetch_count = 0;
  std::size_t bulk_count = 0;
  Seconds link_busy_demand = 0.0;
  Seconds link_busy_prefetch = 0.0;
  Seconds link_busy_bulk = 0.0;
  Seconds span = 0.0;
  double utilization_demand = 0.0;
  double utilization_prefetch = 0.0;

  std::vector<RequestRecord> request_log;
  std::vector<DownloadRecord> downloads;
  /// Request index at each prefetch start.
  std::vector<std::size_t> prefetch_request_index;
  std::vector<CacheLogEntry> cache_log;
  std::vector<Snapshot> snapshots;
};

/// Derives every summary field of `report` from its request and download logs.
void metrics_report(SimReport& report, std::size_t hit_window, Seconds start);

/// Every request is a demand download over the same FIFO link; requests for
/// a content still in flight share its download.
Seconds cacheless_latency(const Trace& test, Seconds transmission_time);

struct SimModels {
  const Predictor* predictor = nullptr;
  const WatchTimeStats* stats = nullptr;
  const ActiveSets* active = nullptr;
};

enum class EventKind { Request, Completion, Refresh, PeriodicBoundary, Snapshot };

using SimObserver = std::function<void(EventKind, Seconds, const ScoreBoard&, const HybridCache&)>;

/// Replays `test` after seeding user histories and popularity windows from
/// `train`. Both traces must share the same identifier tables.
SimReport run_simulation(const Trace& train, const Trace& test, const SimModels& models, const SimConfig& cfg,
                         const SimObserver& observer = {});

nlohmann::json report_to_json(const SimReport& report);

void write_hit_ratio_csv(const SimReport& report, std::ostream& out);
/// Columns: t, event_type, content, user, portion, latency.
void write_event_log_csv(const SimReport& report, const Trace& names, std::ostream& out);

}  // namespace pec
