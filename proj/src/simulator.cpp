#include "pec/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <unordered_map>

namespace pec {

namespace {

constexpr Seconds kNever = std::numeric_limits<Seconds>::infinity();

}  // namespace

std::string to_string(Policy p) {
  switch (p) {
    case Policy::Pec:
      return "pec";
    case Policy::NaivePec:
      return "naive-pec";
    case Policy::Lru:
      return "lru";
    case Policy::Lru2:
      return "lru2";
    case Policy::Lfu:
      return "lfu";
    case Policy::Periodic:
      return "periodic";
    case Policy::ModifiedPeriodic:
      return "modified-periodic";
  }
  return "pec";
}

Policy parse_policy(const std::string& text) {
  for (Policy p : {Policy::Pec, Policy::NaivePec, Policy::Lru, Policy::Lru2, Policy::Lfu, Policy::Periodic,
                   Policy::ModifiedPeriodic})
    if (to_string(p) == text) return p;
  throw ConfigError("unknown policy '" + text + "'");
}

bool uses_predictions(Policy p) {
  return p == Policy::Pec || p == Policy::NaivePec || p == Policy::ModifiedPeriodic;
}

std::string to_string(JobKind k) {
  switch (k) {
    case JobKind::Demand:
      return "demand";
    case JobKind::Prefetch:
      return "prefetch";
    case JobKind::Bulk:
      return "bulk";
  }
  return "demand";
}

void SimConfig::validate() const {
  if (K < 1) throw ConfigError("prefetch gap K must be >= 1");
  if (!(update_period > 0.0)) throw ConfigError("update period must be positive");
  if (!(transmission_time > 0.0)) throw ConfigError("transmission time must be positive");
  if (!(periodic_period > 0.0)) throw ConfigError("periodic period must be positive");
  if (hit_window < 1) throw ConfigError("hit-ratio window must be >= 1");
  if (snapshot_period < 0.0) throw ConfigError("snapshot period must be non-negative");
  cache_config().validate();
}

CacheConfig SimConfig::cache_config() const {
  CacheConfig c;
  c.capacity = capacity;
  c.alpha = alpha;
  c.beta = beta;
  c.gamma = gamma;
  c.policy = ReactivePolicy::Lru2;
  switch (policy) {
    case Policy::Pec:
    case Policy::NaivePec:
    case Policy::ModifiedPeriodic:
      c.mode = PartitionMode::Hybrid;
      break;
    case Policy::Periodic:
      c.mode = PartitionMode::Proactive;
      break;
    case Policy::Lru:
      c.mode = PartitionMode::Reactive;
      c.policy = ReactivePolicy::Lru;
      break;
    case Policy::Lru2:
      c.mode = PartitionMode::Reactive;
      break;
    case Policy::Lfu:
      c.mode = PartitionMode::Reactive;
      c.policy = ReactivePolicy::Lfu;
      break;
  }
  return c;
}

void metrics_report(SimReport& r, std::size_t hit_window, Seconds start) {
  r.hit_window = hit_window;
  r.requests = r.request_log.size();
  r.hits = 0;
  r.total_latency = 0.0;
  r.hit_ratio_series.clear();
  std::size_t window_hits = 0;
  for (std::size_t i = 0; i < r.request_log.size(); ++i) {
    const auto& q = r.request_log[i];
    r.hits += q.hit ? 1 : 0;
    window_hits += q.hit ? 1 : 0;
    r.total_latency += q.latency;
    if ((i + 1) % hit_window == 0) {
      r.hit_ratio_series.push_back(static_cast<double>(window_hits) / static_cast<double>(hit_window));
      window_hits = 0;
    }
  }
  r.misses = r.requests - r.hits;
  r.hit_ratio = r.requests ? static_cast<double>(r.hits) / static_cast<double>(r.requests) : 0.0;
  r.partial_window_requests = r.requests % hit_window;
  r.partial_window_hit_ratio =
      r.partial_window_requests ? static_cast<double>(window_hits) / static_cast<double>(r.partial_window_requests) : 0.0;
  r.latency_reduction = r.cacheless_latency > 0.0 ? 1.0 - r.total_latency / r.cacheless_latency : 0.0;

  r.demand_count = r.prefetch_count = r.bulk_count = 0;
  r.link_busy_demand = r.link_busy_prefetch = r.link_busy_bulk = 0.0;
  Seconds end = r.request_log.empty() ? start : r.request_log.back().t;
  for (const auto& d : r.downloads) {
    if (d.end <= d.start) continue;
    const Seconds busy = d.end - d.start;
    end = std::max(end, d.end);
    switch (d.kind) {
      case JobKind::Demand:
        ++r.demand_count;
        r.link_busy_demand += busy;
        break;
      case JobKind::Prefetch:
        ++r.prefetch_count;
        r.link_busy_prefetch += busy;
        break;
      case JobKind::Bulk:
        ++r.bulk_count;
        r.link_busy_bulk += busy;
        break;
    }
  }
  r.span = end - start;
  r.utilization_demand = r.span > 0.0 ? r.link_busy_demand / r.span : 0.0;
  r.utilization_prefetch = r.span > 0.0 ? (r.link_busy_prefetch + r.link_busy_bulk) / r.span : 0.0;
}

Seconds cacheless_latency(const Trace& test, Seconds transmission_time) {
  std::unordered_map<std::uint32_t, Seconds> completes_at;
  Seconds link_free = -kNever;
  Seconds total = 0.0;
  for (const auto& r : test.requests) {
    auto it = completes_at.find(r.content.value);
    if (it != completes_at.end() && it->second > r.timestamp) {
      total += it->second - r.timestamp;
      continue;
    }
    const Seconds end = std::max(r.timestamp, link_free) + transmission_time;
    link_free = end;
    completes_at[r.content.value] = end;
    total += end - r.timestamp;
  }
  return total;
}

namespace {

class Simulation {
 public:
  Simulation(const Trace& train, const Trace& test, const SimModels& models, const SimConfig& cfg,
             const SimObserver& observer)
      : train_(train),
        test_(test),
        models_(models),
        cfg_(cfg),
        observer_(observer),
        board_(test.user_count(), test.content_count()),
        cache_(cfg.cache_config(), test.content_count()),
        inflight_(test.content_count(), -1),
        target_(test.content_count(), 0),
        window_counts_(test.content_count(), 0) {
    cache_.set_logging(cfg.record_cache_log);
    report_.policy = cfg.policy;
    start_ = cfg.start ? *cfg.start : (test.requests.empty() ? 0.0 : test.requests.front().timestamp);
    if (uses_predictions(cfg.policy) && (!models.predictor || !models.stats))
      throw ContractViolation("predictive policy needs a predictor and watch-time statistics");
    if (uses_predictions(cfg.policy)) {
      histories_.resize(test.user_count());
      for (const auto& r : train.requests) histories_[r.user.value].append(r, is_active(r.content));
    }
    if (cfg.policy == Policy::Periodic || cfg.policy == Policy::ModifiedPeriodic)
      for (const auto& r : train.requests)
        if (r.timestamp >= start_ - cfg.periodic_period) recent_.push_back(r);
  }

  SimReport run() {
    const bool predictive = uses_predictions(cfg_.policy);
    const bool periodic = cfg_.policy == Policy::Periodic || cfg_.policy == Policy::ModifiedPeriodic;
    Seconds next_refresh = predictive ? start_ + cfg_.update_period : kNever;
    Seconds next_boundary = periodic ? start_ : kNever;
    Seconds next_snapshot = predictive && cfg_.snapshot_period > 0.0 ? start_ : kNever;
    const auto& reqs = test_.requests;

    while (true) {
      const bool more = next_ < reqs.size();
      const Seconds t_req = more ? reqs[next_].timestamp : kNever;
      const Seconds t_done = in_service_ >= 0 ? report_.downloads[static_cast<std::size_t>(in_service_)].end : kNever;
      const Seconds t_timer = more ? std::min({next_refresh, next_boundary, next_snapshot}) : kNever;
      if (t_req == kNever && t_done == kNever) break;

      if (t_done <= t_req && t_done <= t_timer) {
        complete(t_done);
        notify(EventKind::Completion, t_done);
      } else if (t_req <= t_timer) {
        on_request(reqs[next_]);
        ++next_;
        notify(EventKind::Request, t_req);
      } else if (next_refresh == t_timer) {
        board_.refresh(t_timer);
        next_refresh += cfg_.update_period;
        notify(EventKind::Refresh, t_timer);
      } else if (next_boundary == t_timer) {
        periodic_fill(t_timer);
        next_boundary += cfg_.periodic_period;
        notify(EventKind::PeriodicBoundary, t_timer);
      } else {
        take_snapshot(t_timer);
        next_snapshot += cfg_.snapshot_period;
        notify(EventKind::Snapshot, t_timer);
      }
    }

    report_.cacheless_latency = cacheless_latency(test_, cfg_.transmission_time);
    report_.cache_log = std::move(cache_.log());
    metrics_report(report_, cfg_.hit_window, start_);
    return std::move(report_);
  }

 private:
  bool is_active(ContentId c) const { return !models_.active || models_.active->has(c); }

  void notify(EventKind kind, Seconds t) {
    if (observer_) observer_(kind, t, board_, cache_);
  }

  RankKey frequency_rank(ContentId c) const { return {static_cast<double>(window_counts_[c.value]), 0.0, c}; }

  ProactiveRank proactive_rank() const {
    if (cfg_.policy == Policy::Pec || cfg_.policy == Policy::NaivePec)
      return [this](ContentId c) { return board_.rank_key(c); };
    return [this](ContentId c) { return frequency_rank(c); };
  }

  long enqueue(ContentId c, JobKind kind, Seconds t) {
    const long id = static_cast<long>(report_.downloads.size());
    report_.downloads.push_back({c, kind, t, 0.0, 0.0});
    waiters_.emplace_back();
    inflight_[c.value] = id;
    return id;
  }

  void start(long id, Seconds t) {
    auto& d = report_.downloads[static_cast<std::size_t>(id)];
    d.start = t;
    d.end = t + cfg_.transmission_time;
    in_service_ = id;
  }

  void start_next(Seconds t) {
    if (in_service_ >= 0) return;
    if (!demand_q_.empty()) {
      const long id = demand_q_.front();
      demand_q_.pop_front();
      start(id, t);
      return;
    }
    if (next_ >= test_.requests.size()) {
      // Nothing left to serve; abandon batch loads that never started.
      for (long id : bulk_q_) abandon(id);
      bulk_q_.clear();
      return;
    }
    if (!bulk_q_.empty()) {
      const long id = bulk_q_.front();
      bulk_q_.pop_front();
      start(id, t);
    }
  }

  void abandon(long id) {
    auto& d = report_.downloads[static_cast<std::size_t>(id)];
    inflight_[d.content.value] = -1;
    cache_.cancel_proactive_load();
  }

  void complete(Seconds t) {
    const long id = in_service_;
    in_service_ = -1;
    const auto& d = report_.downloads[static_cast<std::size_t>(id)];
    inflight_[d.content.value] = -1;
    for (std::size_t q : waiters_[static_cast<std::size_t>(id)]) report_.request_log[q].latency = t - report_.request_log[q].t;
    switch (d.kind) {
      case JobKind::Demand:
        cache_.insert_reactive(d.content, t);
        break;
      case JobKind::Prefetch:
        cache_.complete_proactive_load(d.content, t, proactive_rank());
        break;
      case JobKind::Bulk:
        if (target_[d.content.value])
          cache_.complete_proactive_load(d.content, t, proactive_rank());
        else
          cache_.cancel_proactive_load();
        break;
    }
    start_next(t);
  }

  void on_request(const Request& r) {
    const Seconds t = r.timestamp;
    const std::size_t index = report_.request_log.size();
    cache_.record_access(r.content, t);
    if (cfg_.policy == Policy::Periodic || cfg_.policy == Policy::ModifiedPeriodic) recent_.push_back(r);

    RequestRecord rec{t, r.user, r.content, false, cache_.where(r.content), 0.0, -1};
    rec.hit = rec.portion != Portion::None;
    report_.request_log.push_back(rec);
    if (!rec.hit) {
      long id = inflight_[r.content.value];
      if (id >= 0) {
        auto it = std::find(bulk_q_.begin(), bulk_q_.end(), id);
        if (it != bulk_q_.end()) {
          bulk_q_.erase(it);
          demand_q_.push_back(id);
        }
      } else {
        id = enqueue(r.content, JobKind::Demand, t);
        demand_q_.push_back(id);
      }
      report_.request_log[index].download = id;
      waiters_[static_cast<std::size_t>(id)].push_back(index);
      start_next(t);
    }

    if (!uses_predictions(cfg_.policy)) return;
    auto& h = histories_[r.user.value];
    h.append(r, is_active(r.content));
    auto items = models_.predictor->predict(h);
    if (items.empty())
      board_.reset_user(r.user);
    else
      board_.insert(r.user, std::move(items), predict_arrival_window(*models_.stats, r.content, t), t);
    cache_.adjust_partition(board_.n_live(), proactive_rank(), t);

    if (cfg_.policy == Policy::ModifiedPeriodic) return;
    const bool gap_ok = !last_prefetch_ || index - *last_prefetch_ >= static_cast<std::size_t>(cfg_.K);
    if (in_service_ >= 0 || !demand_q_.empty() || !gap_ok) return;
    auto decision =
        cache_.select_prefetch(board_, [this](ContentId c) { return inflight_[c.value] >= 0; });
    if (!decision) return;
    cache_.begin_proactive_load(decision->victim, t, proactive_rank());
    const long id = enqueue(decision->content, JobKind::Prefetch, t);
    start(id, t);
    last_prefetch_ = index;
    report_.prefetch_request_index.push_back(index);
  }

  void periodic_fill(Seconds t) {
    const Seconds from = t - cfg_.periodic_period;
    while (!recent_.empty() && recent_.front().timestamp <= from) recent_.pop_front();
    std::fill(window_counts_.begin(), window_counts_.end(), 0);
    for (const auto& r : recent_) ++window_counts_[r.content.value];

    const std::size_t k = cfg_.policy == Policy::Periodic ? cache_.capacity() : cache_.proactive_cap();
    std::fill(target_.begin(), target_.end(), 0);
    const auto targets = most_frequent(window_counts_, k);
    for (ContentId c : targets) target_[c.value] = 1;

    const auto rank = proactive_rank();
    const std::vector<ContentId> held(cache_.proactive_contents().begin(), cache_.proactive_contents().end());
    for (ContentId c : held)
      if (!target_[c.value]) cache_.evict_proactive(c, t, rank);
    for (ContentId c : targets) {
      if (cache_.contains(c) || inflight_[c.value] >= 0) continue;
      if (cache_.proactive_size() + cache_.pending_proactive() >= cache_.proactive_cap()) break;
      cache_.begin_proactive_load(std::nullopt, t, rank);
      bulk_q_.push_back(enqueue(c, JobKind::Bulk, t));
    }
    start_next(t);
  }

  void take_snapshot(Seconds t) {
    Snapshot s;
    s.t = t;
    const auto& ranking = board_.ranking();
    for (auto it = ranking.rbegin(); it != ranking.rend() && s.predictive.size() < cfg_.snapshot_list_size; ++it)
      s.predictive.push_back(it->content);
    std::vector<std::uint32_t> seen;
    for (std::uint32_t c = 0; c < test_.content_count(); ++c)
      if (cache_.reactive().stats(ContentId{c}).frequency > 0) seen.push_back(c);
    auto score = [&](std::uint32_t c) { return reactive_score(ReactivePolicy::Lru2, cache_.reactive().stats(ContentId{c}), t); };
    const std::size_t take = std::min(cfg_.snapshot_list_size, seen.size());
    std::partial_sort(seen.begin(), seen.begin() + static_cast<std::ptrdiff_t>(take), seen.end(),
                      [&](std::uint32_t a, std::uint32_t b) {
                        const double sa = score(a), sb = score(b);
                        if (sa != sb) return sa > sb;
                        const auto& la = cache_.reactive().stats(ContentId{a}).last;
                        const auto& lb = cache_.reactive().stats(ContentId{b}).last;
                        return la != lb ? la > lb : a < b;
                      });
    for (std::size_t i = 0; i < take; ++i) s.lru2.push_back(ContentId{seen[i]});
    report_.snapshots.push_back(std::move(s));
  }

  const Trace& train_;
  const Trace& test_;
  SimModels models_;
  SimConfig cfg_;
  const SimObserver& observer_;
  ScoreBoard board_;
  HybridCache cache_;
  SimReport report_;
  Seconds start_ = 0.0;
  std::size_t next_ = 0;
  std::vector<UserHistory> histories_;
  std::vector<long> inflight_;
  std::vector<std::vector<std::size_t>> waiters_;
  std::deque<long> demand_q_;
  std::deque<long> bulk_q_;
  long in_service_ = -1;
  std::optional<std::size_t> last_prefetch_;
  std::deque<Request> recent_;
  std::vector<char> target_;
  std::vector<std::uint64_t> window_counts_;
};

}  // namespace

SimReport run_simulation(const Trace& train, const Trace& test, const SimModels& models, const SimConfig& cfg,
                         const SimObserver& observer) {
  cfg.validate();
  if (train.content_count() != test.content_count() || train.user_count() != test.user_count())
    throw ContractViolation("train and test traces must share identifier tables");
  Simulation sim(train, test, models, cfg, observer);
  return sim.run();
}

nlohmann::json report_to_json(const SimReport& r) {
  nlohmann::json j;
  j["policy"] = to_string(r.policy);
  j["requests"] = r.requests;
  j["hits"] = r.hits;
  j["misses"] = r.misses;
  j["hit_ratio"] = r.hit_ratio;
  j["hit_ratio_series"] = r.hit_ratio_series;
  j["partial_window"] = {{"requests", r.partial_window_requests}, {"hit_ratio", r.partial_window_hit_ratio}};
  j["total_latency"] = r.total_latency;
  j["cacheless_latency"] = r.cacheless_latency;
  j["latency_reduction"] = r.latency_reduction;
  j["demand_count"] = r.demand_count;
  j["prefetch_count"] = r.prefetch_count;
  j["bulk_count"] = r.bulk_count;
  j["link_busy_demand"] = r.link_busy_demand;
  j["link_busy_prefetch"] = r.link_busy_prefetch;
  j["link_busy_bulk"] = r.link_busy_bulk;
  j["span"] = r.span;
  j["utilization_demand"] = r.utilization_demand;
  j["utilization_prefetch"] = r.utilization_prefetch;
  return j;
}

void write_hit_ratio_csv(const SimReport& r, std::ostream& out) {
  out << "window,requests,hit_ratio\n";
  out.precision(17);
  for (std::size_t i = 0; i < r.hit_ratio_series.size(); ++i)
    out << i << ',' << r.hit_window << ',' << r.hit_ratio_series[i] << '\n';
  if (r.partial_window_requests)
    out << r.hit_ratio_series.size() << ',' << r.partial_window_requests << ',' << r.partial_window_hit_ratio << '\n';
}

void write_event_log_csv(const SimReport& r, const Trace& names, std::ostream& out) {
  struct Row {
    Seconds t;
    int order;
    std::string type;
    ContentId content;
    std::string user;
    std::string portion;
    Seconds latency;
  };
  std::vector<Row> rows;
  for (const auto& d : r.downloads) {
    if (d.end <= d.start) continue;
    rows.push_back({d.start, 2, "start_" + to_string(d.kind), d.content, "", "", 0.0});
    rows.push_back({d.end, 0, "end_" + to_string(d.kind), d.content, "", "", 0.0});
  }
  for (const auto& q : r.request_log)
    rows.push_back({q.t, 1, q.hit ? "request_hit" : "request_miss", q.content, names.name(q.user), to_string(q.portion),
                    q.latency});
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.t != b.t ? a.t < b.t : a.order < b.order; });
  out << "t,event_type,content,user,portion,latency\n";
  out.precision(17);
  for (const auto& row : rows)
    out << row.t << ',' << row.type << ',' << names.name(row.content) << ',' << row.user << ',' << row.portion << ','
        << row.latency << '\n';
}

}  // namespace pec
