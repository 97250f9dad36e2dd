#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "pec/fusion.hpp"
#include "test_util.hpp"

using namespace pec;
using pec::testing::cid;
using pec::testing::trace_from_rows;

namespace {

const ContentId A{0}, B{1}, C{2}, D{3};

}  // namespace

TEST(MinMaxNormalize, Examples) {
  std::vector<ScoredContent> in{{B, 0.6}, {C, 0.4}};
  EXPECT_EQ(minmax_normalize(in), (std::vector<ScoredContent>{{B, 1.0}, {C, 0.0}}));
  std::vector<ScoredContent> single{{C, 5.0}};
  EXPECT_EQ(minmax_normalize(single), (std::vector<ScoredContent>{{C, 1.0}}));
  std::vector<ScoredContent> three{{A, 1}, {B, 2}, {C, 3}};
  EXPECT_EQ(minmax_normalize(three), (std::vector<ScoredContent>{{A, 0.0}, {B, 0.5}, {C, 1.0}}));
  EXPECT_TRUE(minmax_normalize(std::vector<ScoredContent>{}).empty());
}

TEST(FuseTopN, HandEvaluatedExample) {
  std::vector<ScoredContent> ngram{{B, 0.6}, {C, 0.4}};
  std::vector<ScoredContent> tsas{{C, 2.0}, {D, 1.0}};
  EXPECT_EQ(fuse_topn(ngram, tsas, 10), (std::vector<ScoredContent>{{B, 0.5}, {C, 0.5}, {D, 0.0}}));
  EXPECT_EQ(fuse_topn(ngram, tsas, 2), (std::vector<ScoredContent>{{B, 0.5}, {C, 0.5}}));
}

TEST(FuseTopN, DegenerateAndOneSidedInputs) {
  std::vector<ScoredContent> x{{A, 0.3}}, y{{A, 7.0}};
  EXPECT_EQ(fuse_topn(x, y, 10), (std::vector<ScoredContent>{{A, 1.0}}));
  std::vector<ScoredContent> ngram{{B, 0.6}, {C, 0.4}};
  EXPECT_EQ(fuse_topn(ngram, {}, 10), (std::vector<ScoredContent>{{B, 0.5}, {C, 0.0}}));
  EXPECT_TRUE(fuse_topn({}, {}, 10).empty());
}

TEST(FuseTopN, RandomListsStayInUnionAndUnitRange) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint32_t> id(0, 30);
  std::uniform_real_distribution<double> score(-5.0, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<ScoredContent> a, b;
    std::set<std::uint32_t> used_a, used_b;
    for (int i = 0; i < 10; ++i) {
      if (auto c = id(rng); used_a.insert(c).second) a.push_back({ContentId{c}, score(rng)});
      if (auto c = id(rng); used_b.insert(c).second) b.push_back({ContentId{c}, score(rng)});
    }
    const auto fused = fuse_topn(a, b, 10);
    ASSERT_LE(fused.size(), 10u);
    for (std::size_t i = 0; i < fused.size(); ++i) {
      EXPECT_TRUE(used_a.count(fused[i].content.value) || used_b.count(fused[i].content.value));
      EXPECT_GE(fused[i].score, 0.0);
      EXPECT_LE(fused[i].score, 1.0);
      if (i > 0) {
        const auto& p = fused[i - 1];
        EXPECT_TRUE(p.score > fused[i].score || (p.score == fused[i].score && p.content < fused[i].content));
      }
    }
  }
}

namespace {

Trace tv_catalog() {
  return trace_from_rows(
      "u1,sAe3,1,tv,sA,3\n"
      "u1,sAe4,2,tv,sA,4\n"
      "u2,sAe5,3,tv,sA,5\n"
      "u2,m1,4,movie,,\n");
}

}  // namespace

TEST(TvNextEpisode, MovesToFollowingEpisode) {
  const Trace t = tv_catalog();
  const auto next = tv_next_episode(t.requests[0], t);
  ASSERT_EQ(next.size(), 1u);
  EXPECT_EQ(next[0].content, cid(t, "sAe4"));
  EXPECT_EQ(next[0].score, 1.0);
}

TEST(TvNextEpisode, FinalEpisodeAndMovie) {
  const Trace t = tv_catalog();
  EXPECT_TRUE(tv_next_episode(t.requests[2], t).empty());
  EXPECT_THROW(tv_next_episode(t.requests[3], t), ContractViolation);
}

TEST(TvNextEpisode, MissingNextEpisodeGivesNothing) {
  const Trace t = trace_from_rows("u1,sAe1,1,tv,sA,1\nu1,sAe3,2,tv,sA,3\n");
  EXPECT_TRUE(tv_next_episode(t.requests[0], t).empty());
}

namespace {

struct Fixture {
  Trace trace = trace_from_rows(
      "u1,m1,1,movie,,\nu1,m2,2,movie,,\nu1,m3,3,movie,,\n"
      "u2,m1,4,movie,,\nu2,m2,5,movie,,\nu2,m4,6,movie,,\n"
      "u3,sAe1,7,tv,sA,1\nu3,sAe2,8,tv,sA,2\n");
  ActiveSets active = filter_active(trace, 1);
  NGramModel ngram = build_ngram(trace, 3, &active);
  TsasModel tsas{[] {
                   TsasConfig c;
                   c.d = 4;
                   c.seq_len = 4;
                   return c;
                 }(),
                 active_vocabulary(active)};
};

}  // namespace

TEST(Predictor, TvLatestUsesEpisodeHeuristic) {
  Fixture f;
  Predictor p(f.trace, f.ngram, &f.tsas, PredictorMode::Fused);
  UserHistory h;
  h.append(f.trace.requests[0], true);
  h.append(f.trace.requests[6], true);
  const auto out = p.predict(h);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (ScoredContent{cid(f.trace, "sAe2"), 1.0}));
}

TEST(Predictor, MovieLatestCapsListSize) {
  Fixture f;
  Predictor p(f.trace, f.ngram, &f.tsas, PredictorMode::Fused, 3);
  UserHistory h;
  h.append(f.trace.requests[0], true);
  h.append(f.trace.requests[1], true);
  const auto out = p.predict(h);
  EXPECT_LE(out.size(), 3u);
  EXPECT_FALSE(out.empty());
  for (const auto& s : out) EXPECT_TRUE(f.active.has(s.content));
  const auto ng = p.ngram_list(h, 3);
  ASSERT_FALSE(ng.empty());
  // After m1 m2 the trigram table has m3 and m4 tied.
  EXPECT_EQ(ng[0].content, cid(f.trace, "m3"));
}

TEST(Predictor, NoHistoryGivesEmptyPrediction) {
  Fixture f;
  Predictor p(f.trace, f.ngram, &f.tsas, PredictorMode::Fused);
  EXPECT_TRUE(p.predict(UserHistory{}).empty());
  UserHistory inactive_only;
  inactive_only.append(f.trace.requests[0], false);
  EXPECT_TRUE(p.predict(inactive_only).empty());
}

TEST(Predictor, NGramOnlyModeNormalisesNGramList) {
  Fixture f;
  Predictor p(f.trace, f.ngram, nullptr, PredictorMode::NGramOnly);
  UserHistory h;
  h.append(f.trace.requests[0], true);
  const auto out = p.predict(h);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0], (ScoredContent{cid(f.trace, "m2"), 1.0}));
  EXPECT_THROW(Predictor(f.trace, f.ngram, nullptr, PredictorMode::Fused), ContractViolation);
}
