#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "pec/scoring.hpp"
#include "pec/trace.hpp"

namespace pec {

enum class ReactivePolicy { Lru, Lru2, Lfu };

std::string to_string(ReactivePolicy p);
ReactivePolicy parse_reactive_policy(const std::string& text);

/// Global access history of one content.
struct AccessStats {
  Seconds last = 0.0;
  /// Trace origin until the content has been requested twice.
  Seconds second_last = 0.0;
  std::uint64_t frequency = 0;
};

/// Larger is better. LRU: -(t - last); LFU: frequency; LRU-2: 1/(t - second_last).
double reactive_score(ReactivePolicy policy, const AccessStats& stats, Seconds t);

struct InsertResult {
  bool inserted = false;
  std::optional<ContentId> evicted;
};

/// Reactive cache ordered by (score, last access, content id). Access
/// statistics are kept for every content, cached or not.
class ReactiveCache {
 public:
  ReactiveCache() = default;
  ReactiveCache(ReactivePolicy policy, std::size_t capacity, std::size_t n_contents);

  void record_access(ContentId c, Seconds t);
  bool contains(ContentId c) const { return cached_.at(c.value) != 0; }
  /// Evicts the lowest-scored content when full. Does nothing at capacity 0.
  InsertResult insert(ContentId c);
  void erase(ContentId c);
  std::optional<ContentId> lowest() const;
  /// Shrinks or grows the portion; returns the contents evicted to fit.
  std::vector<ContentId> set_capacity(std::size_t capacity);

  /// Standalone policy step: records the access, returns whether it hit and
  /// inserts on a miss.
  bool access(ContentId c, Seconds t);

  std::size_t size() const { return order_.size(); }
  std::size_t capacity() const { return capacity_; }
  ReactivePolicy policy() const { return policy_; }
  const AccessStats& stats(ContentId c) const { return stats_.at(c.value); }

 private:
  using Key = std::tuple<double, double, std::uint32_t>;
  Key key_of(ContentId c) const;

  ReactivePolicy policy_ = ReactivePolicy::Lru2;
  std::size_t capacity_ = 0;
  std::vector<AccessStats> stats_;
  std::vector<char> cached_;
  std::set<Key> order_;
};

enum class PartitionMode {
  /// Whole cache is reactive.
  Reactive,
  /// Proactive portion sized dynamically within [ceil(alpha C), floor(beta C)].
  Hybrid,
  /// Whole cache is proactive.
  Proactive,
};

struct CacheConfig {
  std::size_t capacity = 0;
  ReactivePolicy policy = ReactivePolicy::Lru2;
  PartitionMode mode = PartitionMode::Hybrid;
  double alpha = 0.5;
  double beta = 0.9;
  double gamma = 1.2;

  void validate() const;
};

enum class Portion { None, Proactive, Reactive };
std::string to_string(Portion p);

struct CacheLogEntry {
  Seconds t = 0.0;
  Portion portion = Portion::None;
  std::string action;
  ContentId content;
  double key1 = 0.0;
  double key2 = 0.0;
};

/// Ranks proactive contents; the lowest key is evicted first.
using ProactiveRank = std::function<RankKey(ContentId)>;

struct PrefetchDecision {
  ContentId content;
  RankKey key;
  std::optional<ContentId> victim;
};

/// Disjoint proactive and reactive portions sharing one capacity. The
/// reactive portion holds at most capacity - proactive_cap contents.
class HybridCache {
 public:
  HybridCache() = default;
  HybridCache(const CacheConfig& cfg, std::size_t n_contents);

  const CacheConfig& config() const { return cfg_; }
  Portion where(ContentId c) const;
  bool contains(ContentId c) const { return where(c) != Portion::None; }

  /// Updates global access history; a reactive hit re-ranks the content.
  void record_access(ContentId c, Seconds t);

  /// Inserts a completed demand download into the reactive portion.
  InsertResult insert_reactive(ContentId c, Seconds t);

  /// One step of the proactive capacity toward gamma * n_live. A shrink
  /// evicts the lowest-ranked proactive contents at once.
  void adjust_partition(std::size_t n_live, const ProactiveRank& rank, Seconds t);

  /// Best positive-key content that is neither cached nor excluded. When the
  /// proactive portion is full it must strictly beat the lowest cached key.
  std::optional<PrefetchDecision> select_prefetch(const ScoreBoard& board,
                                                  const std::function<bool(ContentId)>& excluded) const;

  /// Evicts the victim and reserves a proactive slot for the download.
  void begin_proactive_load(const std::optional<ContentId>& victim, Seconds t, const ProactiveRank& rank);
  /// Inserts a finished proactive download, trimming to capacity.
  void complete_proactive_load(ContentId c, Seconds t, const ProactiveRank& rank);
  /// Releases a reserved slot whose download was abandoned.
  void cancel_proactive_load();
  void evict_proactive(ContentId c, Seconds t, const ProactiveRank& rank);

  std::size_t capacity() const { return cfg_.capacity; }
  std::size_t proactive_cap() const { return cap_; }
  std::size_t proactive_lo() const { return lo_; }
  std::size_t proactive_hi() const { return hi_; }
  std::size_t proactive_size() const { return proactive_.size(); }
  std::size_t pending_proactive() const { return pending_; }
  std::size_t reactive_size() const { return reactive_.size(); }
  const std::set<ContentId>& proactive_contents() const { return proactive_; }
  const ReactiveCache& reactive() const { return reactive_; }
  std::optional<ContentId> lowest_proactive(const ProactiveRank& rank) const;

  std::vector<CacheLogEntry>& log() { return log_; }
  const std::vector<CacheLogEntry>& log() const { return log_; }
  void set_logging(bool on) { logging_ = on; }

  /// Throws ContractViolation when occupancy or partition bounds are broken.
  void check_invariants() const;

 private:
  void trim_proactive(Seconds t, const ProactiveRank& rank);
  void log_reactive(Seconds t, const char* action, ContentId c);
  void log_proactive(Seconds t, const char* action, ContentId c, const RankKey& key);

  CacheConfig cfg_;
  std::size_t lo_ = 0;
  std::size_t hi_ = 0;
  std::size_t cap_ = 0;
  std::size_t pending_ = 0;
  std::set<ContentId> proactive_;
  ReactiveCache reactive_;
  std::vector<CacheLogEntry> log_;
  bool logging_ = false;
};

/// The `k` contents with the highest counts, ties by content id; zero
/// counts are never selected.
std::vector<ContentId> most_frequent(const std::vector<std::uint64_t>& counts, std::size_t k);

void write_cache_log_csv(const std::vector<CacheLogEntry>& log, const Trace& names, std::ostream& out);

}  // namespace pec
