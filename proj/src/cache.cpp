#include "pec/cache.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace pec {

std::string to_string(ReactivePolicy p) {
  switch (p) {
    case ReactivePolicy::Lru:
      return "lru";
    case ReactivePolicy::Lru2:
      return "lru2";
    case ReactivePolicy::Lfu:
      return "lfu";
  }
  return "lru2";
}

ReactivePolicy parse_reactive_policy(const std::string& text) {
  if (text == "lru") return ReactivePolicy::Lru;
  if (text == "lru2") return ReactivePolicy::Lru2;
  if (text == "lfu") return ReactivePolicy::Lfu;
  throw ConfigError("unknown reactive policy '" + text + "'");
}

std::string to_string(Portion p) {
  switch (p) {
    case Portion::Proactive:
      return "proactive";
    case Portion::Reactive:
      return "reactive";
    case Portion::None:
      break;
  }
  return "none";
}

double reactive_score(ReactivePolicy policy, const AccessStats& stats, Seconds t) {
  switch (policy) {
    case ReactivePolicy::Lru:
      return -(t - stats.last);
    case ReactivePolicy::Lfu:
      return static_cast<double>(stats.frequency);
    case ReactivePolicy::Lru2:
      break;
  }
  const Seconds age = t - stats.second_last;
  return age > 0.0 ? 1.0 / age : std::numeric_limits<double>::infinity();
}

ReactiveCache::ReactiveCache(ReactivePolicy policy, std::size_t capacity, std::size_t n_contents)
    : policy_(policy), capacity_(capacity), stats_(n_contents), cached_(n_contents, 0) {}

ReactiveCache::Key ReactiveCache::key_of(ContentId c) const {
  const auto& s = stats_[c.value];
  switch (policy_) {
    case ReactivePolicy::Lru:
      return {s.last, s.last, c.value};
    case ReactivePolicy::Lfu:
      return {static_cast<double>(s.frequency), s.last, c.value};
    case ReactivePolicy::Lru2:
      break;
  }
  return {s.second_last, s.last, c.value};
}

void ReactiveCache::record_access(ContentId c, Seconds t) {
  const bool cached = contains(c);
  if (cached) order_.erase(key_of(c));
  auto& s = stats_[c.value];
  if (s.frequency > 0) s.second_last = s.last;
  s.last = t;
  ++s.frequency;
  if (cached) order_.insert(key_of(c));
}

InsertResult ReactiveCache::insert(ContentId c) {
  InsertResult r;
  if (capacity_ == 0 || contains(c)) return r;
  if (order_.size() >= capacity_) {
    r.evicted = ContentId{std::get<2>(*order_.begin())};
    erase(*r.evicted);
  }
  cached_[c.value] = 1;
  order_.insert(key_of(c));
  r.inserted = true;
  return r;
}

void ReactiveCache::erase(ContentId c) {
  if (!contains(c)) return;
  order_.erase(key_of(c));
  cached_[c.value] = 0;
}

std::optional<ContentId> ReactiveCache::lowest() const {
  if (order_.empty()) return std::nullopt;
  return ContentId{std::get<2>(*order_.begin())};
}

std::vector<ContentId> ReactiveCache::set_capacity(std::size_t capacity) {
  capacity_ = capacity;
  std::vector<ContentId> evicted;
  while (order_.size() > capacity_) {
    evicted.push_back(*lowest());
    erase(evicted.back());
  }
  return evicted;
}

bool ReactiveCache::access(ContentId c, Seconds t) {
  record_access(c, t);
  if (contains(c)) return true;
  insert(c);
  return false;
}

void CacheConfig::validate() const {
  if (mode != PartitionMode::Hybrid) return;
  if (!(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta < 1.0))
    throw ConfigError("alpha and beta must lie in (0,1)");
  if (alpha >= beta) throw ConfigError("alpha must be smaller than beta");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
}

HybridCache::HybridCache(const CacheConfig& cfg, std::size_t n_contents) : cfg_(cfg) {
  cfg_.validate();
  const auto c = static_cast<double>(cfg.capacity);
  switch (cfg.mode) {
    case PartitionMode::Reactive:
      lo_ = hi_ = 0;
      break;
    case PartitionMode::Proactive:
      lo_ = hi_ = cfg.capacity;
      break;
    case PartitionMode::Hybrid:
      hi_ = static_cast<std::size_t>(std::floor(cfg.beta * c + 1e-9));
      lo_ = std::min(hi_, static_cast<std::size_t>(std::ceil(cfg.alpha * c - 1e-9)));
      break;
  }
  cap_ = lo_;
  reactive_ = ReactiveCache(cfg.policy, cfg.capacity - cap_, n_contents);
}

Portion HybridCache::where(ContentId c) const {
  if (proactive_.count(c)) return Portion::Proactive;
  if (reactive_.contains(c)) return Portion::Reactive;
  return Portion::None;
}

void HybridCache::record_access(ContentId c, Seconds t) { reactive_.record_access(c, t); }

InsertResult HybridCache::insert_reactive(ContentId c, Seconds t) {
  if (contains(c)) return {};
  auto r = reactive_.insert(c);
  if (r.evicted) log_reactive(t, "evict", *r.evicted);
  if (r.inserted) log_reactive(t, "insert", c);
  return r;
}

void HybridCache::adjust_partition(std::size_t n_live, const ProactiveRank& rank, Seconds t) {
  if (cfg_.mode != PartitionMode::Hybrid) return;
  const double target = cfg_.gamma * static_cast<double>(n_live);
  const auto cap = static_cast<double>(cap_);
  if (cap < target && cap_ < hi_)
    ++cap_;
  else if (cap > target && cap_ > lo_)
    --cap_;
  else
    return;
  for (ContentId c : reactive_.set_capacity(cfg_.capacity - cap_)) log_reactive(t, "evict", c);
  trim_proactive(t, rank);
}

std::optional<ContentId> HybridCache::lowest_proactive(const ProactiveRank& rank) const {
  std::optional<ContentId> best;
  RankKey best_key;
  for (ContentId c : proactive_) {
    const RankKey k = rank(c);
    if (!best || k < best_key) {
      best = c;
      best_key = k;
    }
  }
  return best;
}

std::optional<PrefetchDecision> HybridCache::select_prefetch(const ScoreBoard& board,
                                                             const std::function<bool(ContentId)>& excluded) const {
  const auto& ranking = board.ranking();
  for (auto it = ranking.rbegin(); it != ranking.rend(); ++it) {
    if (contains(it->content) || (excluded && excluded(it->content))) continue;
    PrefetchDecision d{it->content, *it, std::nullopt};
    if (proactive_.size() + pending_ < cap_) return d;
    if (proactive_.empty()) return std::nullopt;
    auto rank = [&](ContentId c) { return board.rank_key(c); };
    d.victim = lowest_proactive(rank);
    if (!board.rank_key(*d.victim).scores_less(d.key)) return std::nullopt;
    return d;
  }
  return std::nullopt;
}

void HybridCache::begin_proactive_load(const std::optional<ContentId>& victim, Seconds t, const ProactiveRank& rank) {
  if (victim) evict_proactive(*victim, t, rank);
  ++pending_;
}

void HybridCache::complete_proactive_load(ContentId c, Seconds t, const ProactiveRank& rank) {
  if (pending_ > 0) --pending_;
  if (contains(c)) return;
  proactive_.insert(c);
  log_proactive(t, "insert", c, rank(c));
  trim_proactive(t, rank);
}

void HybridCache::cancel_proactive_load() {
  if (pending_ > 0) --pending_;
}

void HybridCache::evict_proactive(ContentId c, Seconds t, const ProactiveRank& rank) {
  if (proactive_.erase(c)) log_proactive(t, "evict", c, rank(c));
}

void HybridCache::trim_proactive(Seconds t, const ProactiveRank& rank) {
  while (!proactive_.empty() && proactive_.size() + pending_ > cap_) evict_proactive(*lowest_proactive(rank), t, rank);
}

void HybridCache::log_reactive(Seconds t, const char* action, ContentId c) {
  if (!logging_) return;
  const auto& s = reactive_.stats(c);
  log_.push_back({t, Portion::Reactive, action, c, reactive_score(reactive_.policy(), s, t), s.last});
}

void HybridCache::log_proactive(Seconds t, const char* action, ContentId c, const RankKey& key) {
  if (!logging_) return;
  log_.push_back({t, Portion::Proactive, action, c, key.p1, key.p2});
}

void HybridCache::check_invariants() const {
  for (ContentId c : proactive_)
    if (reactive_.contains(c)) throw ContractViolation("content held by both portions");
  if (proactive_.size() + reactive_.size() > cfg_.capacity) throw ContractViolation("cache occupancy exceeds capacity");
  if (cap_ < lo_ || cap_ > hi_) throw ContractViolation("proactive capacity outside its bounds");
  if (proactive_.size() > cap_) throw ContractViolation("proactive portion exceeds its capacity");
  if (reactive_.size() > cfg_.capacity - cap_) throw ContractViolation("reactive portion exceeds its capacity");
}

std::vector<ContentId> most_frequent(const std::vector<std::uint64_t>& counts, std::size_t k) {
  std::vector<std::uint32_t> idx;
  for (std::uint32_t c = 0; c < counts.size(); ++c)
    if (counts[c] > 0) idx.push_back(c);
  const std::size_t take = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(),
                    [&](std::uint32_t a, std::uint32_t b) { return counts[a] != counts[b] ? counts[a] > counts[b] : a < b; });
  std::vector<ContentId> out;
  for (std::size_t i = 0; i < take; ++i) out.push_back(ContentId{idx[i]});
  return out;
}

void write_cache_log_csv(const std::vector<CacheLogEntry>& log, const Trace& names, std::ostream& out) {
  out << "t,portion,action,content,key1,key2\n";
  out.precision(17);
  for (const auto& e : log)
    out << e.t << ',' << to_string(e.portion) << ',' << e.action << ',' << names.name(e.content) << ',' << e.key1
        << ',' << e.key2 << '\n';
}

}  // namespace pec
