#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "pec/simulator.hpp"
#include "pec/synthetic.hpp"
#include "test_util.hpp"

using namespace pec;
using pec::testing::cid;
using pec::testing::trace_from_rows;

namespace {

SimConfig config(Policy p, std::size_t capacity) {
  SimConfig c;
  c.policy = p;
  c.capacity = capacity;
  return c;
}

// Small synthetic workload with an n-gram-only predictor.
struct World {
  Trace full;
  Trace train;
  Trace test;
  ActiveSets active;
  NGramModel ngram;
  WatchTimeStats stats;
  std::unique_ptr<Predictor> predictor;

  explicit World(int users = 300) {
    SyntheticConfig syn;
    syn.n_users = users;
    syn.n_series = 20;
    syn.n_movies = 150;
    syn.duration = 3 * 86400;
    syn.seed = 4;
    full = generate_synthetic_trace(syn);
    auto [a, b] = split_at(full, 2 * 86400);
    train = std::move(a);
    test = std::move(b);
    active = filter_active(train, 3);
    ngram = build_ngram(train, 3, &active);
    stats = fit_watch_stats(train);
    predictor = std::make_unique<Predictor>(full, ngram, nullptr, PredictorMode::NGramOnly);
  }

  SimModels models() const { return {predictor.get(), &stats, &active}; }
};

World& world() {
  static World w;
  return w;
}

}  // namespace

TEST(SimConfig, RejectsInvalidSettings) {
  auto c = config(Policy::Pec, 10);
  c.alpha = 0.9;
  c.beta = 0.5;
  EXPECT_THROW(c.validate(), ConfigError);
  c = config(Policy::Pec, 10);
  c.K = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_NO_THROW(config(Policy::Lru, 10).validate());
  EXPECT_EQ(parse_policy("modified-periodic"), Policy::ModifiedPeriodic);
  EXPECT_THROW(parse_policy("fifo"), ConfigError);
}

TEST(Simulation, SingleMissOnIdleLink) {
  const auto t = trace_from_rows("u1,a,10,movie,,\n");
  const Trace train = t.with_requests({});
  const auto r = run_simulation(train, t, {}, config(Policy::Lru2, 5));
  EXPECT_EQ(r.requests, 1u);
  EXPECT_EQ(r.misses, 1u);
  EXPECT_DOUBLE_EQ(r.total_latency, 0.5);
  EXPECT_EQ(r.demand_count, 1u);
}

TEST(Simulation, DemandWaitsBehindPrefetchInService) {
  const auto t = trace_from_rows(
      "u1,sAe1,0,tv,sA,1\n"
      "u2,sAe1,1.0,tv,sA,1\n"
      "u3,m1,1.3,movie,,\n"
      "u4,sAe2,5000,tv,sA,2\n");
  const Trace train = t.with_requests({});
  NGramModel ngram(3);
  WatchTimeStats stats;
  ActiveSets active = filter_active(t, 1);
  Predictor p(t, ngram, nullptr, PredictorMode::NGramOnly);
  const auto r = run_simulation(train, t, {&p, &stats, &active}, config(Policy::Pec, 4));
  ASSERT_EQ(r.request_log.size(), 4u);
  EXPECT_FALSE(r.request_log[0].hit);
  EXPECT_TRUE(r.request_log[1].hit);
  ASSERT_EQ(r.prefetch_request_index, (std::vector<std::size_t>{1}));
  EXPECT_EQ(r.downloads[1].content, cid(t, "sAe2"));
  EXPECT_FALSE(r.request_log[2].hit);
  EXPECT_NEAR(r.request_log[2].latency, 0.7, 1e-12);
  EXPECT_TRUE(r.request_log[3].hit);
  EXPECT_EQ(r.request_log[3].portion, Portion::Proactive);
}

TEST(Simulation, DuplicateRequestsShareDownload) {
  const auto t = trace_from_rows("u1,a,0,movie,,\nu2,a,0.2,movie,,\nu3,b,0.3,movie,,\n");
  const auto r = run_simulation(t.with_requests({}), t, {}, config(Policy::Lru2, 5));
  EXPECT_EQ(r.misses, 3u);
  EXPECT_EQ(r.demand_count, 2u);
  EXPECT_DOUBLE_EQ(r.request_log[1].latency, 0.3);
  EXPECT_DOUBLE_EQ(r.request_log[2].latency, 0.7);
  EXPECT_DOUBLE_EQ(r.total_latency, 0.5 + 0.3 + 0.7);
  EXPECT_DOUBLE_EQ(r.cacheless_latency, r.total_latency);
}

TEST(CachelessLatency, QueuesOnOneLink) {
  const auto t = trace_from_rows("u1,a,0,movie,,\nu2,b,0,movie,,\nu3,a,0.1,movie,,\nu1,a,5,movie,,\n");
  EXPECT_DOUBLE_EQ(cacheless_latency(t, 0.5), 0.5 + 1.0 + 0.4 + 0.5);
}

TEST(MetricsReport, WindowsAndAllHits) {
  SimReport r;
  for (int i = 0; i < 12000; ++i) r.request_log.push_back({static_cast<double>(i), {}, {}, i % 2 == 0, Portion::None, 0.0, -1});
  r.cacheless_latency = 10.0;
  metrics_report(r, 5000, 0.0);
  EXPECT_EQ(r.hit_ratio_series.size(), 2u);
  EXPECT_EQ(r.partial_window_requests, 2000u);
  EXPECT_DOUBLE_EQ(r.hit_ratio_series[0], 0.5);
  EXPECT_DOUBLE_EQ(r.latency_reduction, 1.0);
  EXPECT_EQ(r.hits + r.misses, r.requests);
  std::ostringstream csv;
  write_hit_ratio_csv(r, csv);
  EXPECT_NE(csv.str().find("2,2000,0.5"), std::string::npos);
}

TEST(Simulation, ZeroCapacityMatchesCacheless) {
  auto& w = world();
  for (Policy p : {Policy::Lru2, Policy::Pec}) {
    const auto r = run_simulation(w.train, w.test, w.models(), config(p, 0));
    EXPECT_EQ(r.hits, 0u);
    EXPECT_EQ(r.prefetch_count, 0u);
    EXPECT_NEAR(r.latency_reduction, 0.0, 1e-9);
  }
}

TEST(Simulation, DeterministicReports) {
  auto& w = world();
  const auto a = run_simulation(w.train, w.test, w.models(), config(Policy::Pec, 40));
  const auto b = run_simulation(w.train, w.test, w.models(), config(Policy::Pec, 40));
  EXPECT_EQ(report_to_json(a).dump(), report_to_json(b).dump());
  EXPECT_GT(a.prefetch_count, 0u);
}

TEST(Simulation, ConservationAndLinkSchedule) {
  auto& w = world();
  for (Policy p : {Policy::Pec, Policy::NaivePec, Policy::Lru, Policy::Lfu, Policy::Periodic, Policy::ModifiedPeriodic}) {
    const auto r = run_simulation(w.train, w.test, w.models(), config(p, 40));
    EXPECT_EQ(r.hits + r.misses, r.requests) << to_string(p);
    EXPECT_EQ(r.requests, w.test.requests.size());
    std::set<long> served;
    for (const auto& q : r.request_log)
      if (!q.hit) served.insert(q.download);
    std::size_t demand_served = 0;
    for (long id : served) demand_served += r.downloads[static_cast<std::size_t>(id)].kind == JobKind::Demand;
    EXPECT_EQ(r.demand_count, demand_served) << to_string(p);

    std::vector<DownloadRecord> live;
    for (const auto& d : r.downloads)
      if (d.end > d.start) live.push_back(d);
    std::sort(live.begin(), live.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < live.size(); ++i) EXPECT_GE(live[i].start, live[i - 1].end) << to_string(p);
    for (double h : r.hit_ratio_series) {
      EXPECT_GE(h, 0.0);
      EXPECT_LE(h, 1.0);
    }
  }
}

TEST(Simulation, PrefetchGapRespectsK) {
  auto& w = world();
  for (int K : {1, 3, 8}) {
    auto c = config(Policy::Pec, 40);
    c.K = K;
    const auto r = run_simulation(w.train, w.test, w.models(), c);
    for (std::size_t i = 1; i < r.prefetch_request_index.size(); ++i)
      EXPECT_GE(r.prefetch_request_index[i] - r.prefetch_request_index[i - 1], static_cast<std::size_t>(K));
    EXPECT_LE(r.prefetch_count, r.requests / static_cast<std::size_t>(K) + 1);
  }
}

TEST(Simulation, PartitionStaysInBounds) {
  auto& w = world();
  const auto c = config(Policy::Pec, 40);
  std::size_t events = 0;
  run_simulation(w.train, w.test, w.models(), c, [&](EventKind, Seconds, const ScoreBoard&, const HybridCache& cache) {
    cache.check_invariants();
    ASSERT_GE(cache.proactive_cap(), 20u);
    ASSERT_LE(cache.proactive_cap(), 36u);
    ++events;
  });
  EXPECT_GT(events, w.test.requests.size());
}

TEST(Simulation, WholeCachePeriodicLoadsTopContents) {
  const auto t = trace_from_rows(
      "u1,A,100,movie,,\nu2,A,200,movie,,\nu3,A,300,movie,,\n"
      "u1,B,400,movie,,\nu2,B,500,movie,,\nu3,C,600,movie,,\n"
      "u1,C,1000,movie,,\nu2,D,2000,movie,,\nu3,A,3000,movie,,\n");
  auto [train, test] = split_at(t, 1000);
  std::set<ContentId> loaded;
  std::size_t reactive_max = 0;
  auto c = config(Policy::Periodic, 2);
  const auto r = run_simulation(train, test, {}, c, [&](EventKind, Seconds, const ScoreBoard&, const HybridCache& cache) {
    loaded.insert(cache.proactive_contents().begin(), cache.proactive_contents().end());
    reactive_max = std::max(reactive_max, cache.reactive_size());
  });
  EXPECT_EQ(loaded, (std::set<ContentId>{cid(t, "A"), cid(t, "B")}));
  EXPECT_EQ(reactive_max, 0u);
  EXPECT_FALSE(r.request_log[0].hit);  // C was not in the top two
  EXPECT_TRUE(r.request_log[2].hit);   // A was loaded at the boundary
  EXPECT_EQ(r.bulk_count, 2u);
}

TEST(Simulation, ModifiedPeriodicKeepsReactiveLru2) {
  auto& w = world();
  const auto r = run_simulation(w.train, w.test, w.models(), config(Policy::ModifiedPeriodic, 40));
  std::size_t reactive_hits = 0, proactive_hits = 0;
  for (const auto& q : r.request_log) {
    reactive_hits += q.portion == Portion::Reactive;
    proactive_hits += q.portion == Portion::Proactive;
  }
  EXPECT_GT(reactive_hits, 0u);
  EXPECT_GT(proactive_hits, 0u);
  EXPECT_EQ(r.prefetch_count, 0u);
}

TEST(Simulation, PredictivePolicyNeedsModels) {
  auto& w = world();
  EXPECT_THROW(run_simulation(w.train, w.test, {}, config(Policy::Pec, 10)), ContractViolation);
}

TEST(EventLog, ListsRequestsAndDownloads) {
  const auto t = trace_from_rows("u1,a,0,movie,,\nu1,a,1,movie,,\n");
  const auto r = run_simulation(t.with_requests({}), t, {}, config(Policy::Lru2, 5));
  std::ostringstream out;
  write_event_log_csv(r, t, out);
  const std::string s = out.str();
  EXPECT_NE(s.find("0,start_demand,a"), std::string::npos);
  EXPECT_NE(s.find("0,request_miss,a,u1,none,0.5"), std::string::npos);
  EXPECT_NE(s.find("1,request_hit,a,u1,reactive,0"), std::string::npos);
}
