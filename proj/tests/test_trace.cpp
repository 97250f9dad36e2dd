#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "pec/synthetic.hpp"
#include "test_util.hpp"

using namespace pec;
using pec::testing::cid;
using pec::testing::trace_from_rows;

TEST(ParseTrace, MapsFieldsDirectly) {
  auto t = trace_from_rows("u1,c42,100.0,movie,,\n");
  ASSERT_EQ(t.requests.size(), 1u);
  const auto& r = t.requests[0];
  EXPECT_EQ(t.name(r.user), "u1");
  EXPECT_EQ(t.name(r.content), "c42");
  EXPECT_DOUBLE_EQ(r.timestamp, 100.0);
  EXPECT_EQ(r.kind, ContentKind::Movie);
  EXPECT_FALSE(r.series.has_value());
  EXPECT_FALSE(r.episode.has_value());
}

TEST(ParseTrace, SortsByTimestamp) {
  auto t = trace_from_rows("u1,c42,100.0,movie,,\nu1,s7e3,50.0,tv,s7,3\n");
  ASSERT_EQ(t.requests.size(), 2u);
  EXPECT_EQ(t.name(t.requests[0].content), "s7e3");
  EXPECT_EQ(t.name(t.requests[1].content), "c42");
  EXPECT_EQ(*t.requests[0].episode, 3);
}

TEST(ParseTrace, EqualTimestampsKeepInputOrder) {
  auto t = trace_from_rows("u1,b,5,movie,,\nu2,a,5,movie,,\nu3,c,5,movie,,\n");
  EXPECT_EQ(t.name(t.requests[0].content), "b");
  EXPECT_EQ(t.name(t.requests[1].content), "a");
  EXPECT_EQ(t.name(t.requests[2].content), "c");
}

TEST(ParseTrace, MalformedTimestampNamesLine) {
  try {
    trace_from_rows("u1,c42,abc,movie,,\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(ParseTrace, RejectsInconsistentRows) {
  EXPECT_THROW(trace_from_rows("u1,c1,1,movie,s1,\n"), ParseError);
  EXPECT_THROW(trace_from_rows("u1,c1,1,tv,s1,\n"), ParseError);
  EXPECT_THROW(trace_from_rows("u1,c1,1,movie,,2\n"), ParseError);
  EXPECT_THROW(trace_from_rows("u1,c1,-1,movie,,\n"), ParseError);
  EXPECT_THROW(trace_from_rows("u1,c1,1,movie\n"), ParseError);
  EXPECT_THROW(trace_from_rows("u1,c1,1,film,,\n"), ParseError);
  EXPECT_THROW(trace_from_rows("u1,c1,1,movie,,\nu2,c1,2,show,,\n"), ParseError);
}

TEST(ParseTrace, InfersFinalEpisode) {
  auto t = trace_from_rows("u1,s1e1,1,tv,s1,1\nu1,s1e4,2,tv,s1,4\nu2,s1e2,3,tv,s1,2\n");
  EXPECT_EQ(*t.entry(cid(t, "s1e1")).final_episode, 4);
  auto next = t.episode_of(*t.requests[0].series, 4);
  ASSERT_TRUE(next);
  EXPECT_EQ(t.name(*next), "s1e4");
}

TEST(ParseTrace, ContentIdsFollowNameOrder) {
  auto t = trace_from_rows("u1,zeta,1,movie,,\nu1,alpha,2,movie,,\nu1,mid,3,movie,,\n");
  EXPECT_LT(cid(t, "alpha"), cid(t, "mid"));
  EXPECT_LT(cid(t, "mid"), cid(t, "zeta"));
}

TEST(ParseTrace, RoundTripsThroughWriter) {
  SyntheticConfig cfg;
  cfg.n_users = 20;
  cfg.duration = 86400;
  const Trace t = generate_synthetic_trace(cfg);
  std::stringstream buf;
  write_trace(t, buf);
  const Trace back = parse_trace(buf);
  ASSERT_EQ(back.requests.size(), t.requests.size());
  for (std::size_t i = 0; i < t.requests.size(); ++i) {
    const auto& a = t.requests[i];
    const auto& b = back.requests[i];
    EXPECT_EQ(t.name(a.user), back.name(b.user));
    EXPECT_EQ(t.name(a.content), back.name(b.content));
    EXPECT_NEAR(a.timestamp, b.timestamp, 1e-6);
    EXPECT_EQ(a.kind, b.kind);
    EXPECT_EQ(a.episode, b.episode);
  }
}

TEST(SplitAt, PreservesRequestCount) {
  auto t = trace_from_rows("u1,a,1,movie,,\nu1,b,2,movie,,\nu2,a,3,movie,,\nu2,c,4,movie,,\n");
  auto [train, test] = split_at(t, 3.0);
  EXPECT_EQ(train.requests.size(), 2u);
  EXPECT_EQ(test.requests.size(), 2u);
  EXPECT_EQ(train.content_count(), t.content_count());
}

TEST(FilterActive, KeepsUsersWithThreeRequests) {
  auto t = trace_from_rows("u1,a,1,movie,,\nu1,b,2,movie,,\nu1,a,3,movie,,\nu2,a,4,movie,,\n");
  auto active = filter_active(t, 3);
  EXPECT_TRUE(active.has(*t.find_user("u1")));
  EXPECT_FALSE(active.has(*t.find_user("u2")));
  EXPECT_EQ(active.user_count(), 1u);
  EXPECT_TRUE(active.has(cid(t, "a")));
  EXPECT_FALSE(active.has(cid(t, "b")));
}

TEST(FilterActive, ThresholdOneKeepsEverything) {
  auto t = trace_from_rows("u1,a,1,movie,,\nu2,b,2,movie,,\n");
  auto active = filter_active(t, 1);
  EXPECT_EQ(active.user_count(), 2u);
  EXPECT_EQ(active.content_count(), 2u);
}

TEST(FilterActive, EmptyTraceAndBadThreshold) {
  Trace empty;
  auto active = filter_active(empty, 3);
  EXPECT_EQ(active.user_count(), 0u);
  EXPECT_EQ(active.content_count(), 0u);
  EXPECT_THROW(filter_active(empty, 0), ContractViolation);
}

TEST(Synthetic, NoUsersGivesEmptyTrace) {
  SyntheticConfig cfg;
  cfg.n_users = 0;
  EXPECT_TRUE(generate_synthetic_trace(cfg).requests.empty());
}

TEST(Synthetic, DeterministicForSeed) {
  SyntheticConfig cfg;
  cfg.n_users = 30;
  cfg.duration = 2 * 86400;
  std::stringstream a, b;
  write_trace(generate_synthetic_trace(cfg), a);
  write_trace(generate_synthetic_trace(cfg), b);
  EXPECT_EQ(a.str(), b.str());
  cfg.seed = 2;
  std::stringstream c;
  write_trace(generate_synthetic_trace(cfg), c);
  EXPECT_NE(a.str(), c.str());
}

TEST(Synthetic, RejectsInvalidConfig) {
  SyntheticConfig cfg;
  cfg.p_follow = 1.5;
  EXPECT_THROW(generate_synthetic_trace(cfg), ConfigError);
  cfg = {};
  cfg.markov_order = 3;
  EXPECT_THROW(generate_synthetic_trace(cfg), ConfigError);
}

namespace {

// Parses "s<S>e<E>" into (S, E).
std::pair<int, int> series_episode(const std::string& name) {
  const auto e = name.find('e');
  return {std::stoi(name.substr(1, e - 1)), std::stoi(name.substr(e + 1))};
}

}  // namespace

TEST(Synthetic, AlwaysFollowsWithinSessionsWhenForced) {
  SyntheticConfig cfg;
  cfg.n_users = 50;
  cfg.tv_fraction = 1.0;
  cfg.p_follow = 1.0;
  cfg.duration = 3 * 86400;
  const auto syn = generate_synthetic(cfg);
  std::size_t pairs = 0;
  for (std::size_t i = 0; i + 1 < syn.log.size(); ++i) {
    const auto& a = syn.log[i];
    const auto& b = syn.log[i + 1];
    if (a.user != b.user || a.session != b.session) continue;
    auto [sa, ea] = series_episode(a.content);
    if (ea == cfg.episodes_per_series) continue;
    auto [sb, eb] = series_episode(b.content);
    ++pairs;
    EXPECT_EQ(sb, sa);
    EXPECT_EQ(eb, ea + 1);
  }
  EXPECT_GT(pairs, 1000u);
}

TEST(Synthetic, ContinuationRateMatchesPFollow) {
  SyntheticConfig cfg;
  cfg.n_users = 1500;
  cfg.tv_fraction = 0.6;
  cfg.p_follow = 0.7;
  cfg.duration = 7 * 86400;
  const auto syn = generate_synthetic(cfg);
  std::size_t pairs = 0, followed = 0;
  for (std::size_t i = 0; i + 1 < syn.log.size(); ++i) {
    const auto& a = syn.log[i];
    const auto& b = syn.log[i + 1];
    if (a.user != b.user || a.session != b.session || a.content[0] != 's') continue;
    if (series_episode(a.content).second == cfg.episodes_per_series) continue;
    ++pairs;
    followed += b.source == DrawSource::Follow;
  }
  ASSERT_GE(pairs, 50000u);
  EXPECT_NEAR(static_cast<double>(followed) / static_cast<double>(pairs), cfg.p_follow, 0.02);
}

TEST(Synthetic, PlantedRowIsZipfOverDistinctMovies) {
  SyntheticConfig cfg;
  const auto row = planted_row(cfg, {3});
  ASSERT_EQ(row.size(), 5u);
  double sum = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) {
    sum += row[i].second;
    EXPECT_NE(row[i].first, 3);
    if (i > 0) {
      EXPECT_GT(row[i - 1].second, row[i].second);
    }
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
  EXPECT_NEAR(row[0].second, 1.0 / (1.0 + 1.0 / 2 + 1.0 / 3 + 1.0 / 4 + 1.0 / 5), 1e-12);
  EXPECT_EQ(planted_row(cfg, {3}), row);
}

TEST(Synthetic, ConfigJsonRoundTripAndUnknownKeys) {
  SyntheticConfig cfg;
  cfg.n_users = 7;
  cfg.movie_watch.mean = 4000;
  nlohmann::json j;
  to_json(j, cfg);
  SyntheticConfig back;
  from_json(j, back);
  EXPECT_EQ(back.n_users, 7);
  EXPECT_DOUBLE_EQ(back.movie_watch.mean, 4000);
  j["bogus"] = 1;
  EXPECT_THROW(from_json(j, back), ConfigError);
}
