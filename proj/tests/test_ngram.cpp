#include <gtest/gtest.h>

#include <algorithm>
#include <map>
#include <random>
#include <sstream>

#include "pec/ngram.hpp"
#include "test_util.hpp"

using namespace pec;
using pec::testing::cid;
using pec::testing::trace_from_rows;

namespace {

std::string rows_for(const std::string& user, const std::vector<std::string>& items, double t0 = 0.0) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i)
    out += user + "," + items[i] + "," + std::to_string(t0 + static_cast<double>(i)) + ",movie,,\n";
  return out;
}

}  // namespace

TEST(BuildNGram, CountsAlternatingSequence) {
  auto t = trace_from_rows(rows_for("u1", {"A", "B", "A", "B", "A"}));
  auto m = build_ngram(t, 2);
  const ContentId a = cid(t, "A"), b = cid(t, "B");
  const auto* after_a = m.find(2, std::vector<ContentId>{a});
  ASSERT_NE(after_a, nullptr);
  ASSERT_EQ(after_a->counts.size(), 1u);
  EXPECT_EQ(after_a->counts[0].first, b);
  EXPECT_EQ(after_a->counts[0].second, 2u);
  const auto* after_b = m.find(2, std::vector<ContentId>{b});
  ASSERT_NE(after_b, nullptr);
  EXPECT_EQ(after_b->counts[0].first, a);
  EXPECT_EQ(after_b->counts[0].second, 2u);
  EXPECT_EQ(m.table(2).size(), 2u);
}

TEST(BuildNGram, WindowsNeverSpanUsers) {
  auto t = trace_from_rows(rows_for("u1", {"A", "B"}) + rows_for("u2", {"A", "B"}, 10.0));
  auto m = build_ngram(t, 2);
  const ContentId a = cid(t, "A"), b = cid(t, "B");
  const auto* after_a = m.find(2, std::vector<ContentId>{a});
  ASSERT_NE(after_a, nullptr);
  EXPECT_EQ(after_a->counts[0].second, 2u);
  EXPECT_EQ(m.find(2, std::vector<ContentId>{b}), nullptr);
}

TEST(BuildNGram, EmptyTraceAndBadOrder) {
  Trace empty;
  auto m = build_ngram(empty, 3);
  EXPECT_TRUE(m.empty());
  EXPECT_TRUE(ngram_topn(m, {}, 5).empty());
  EXPECT_THROW(NGramModel(1), ContractViolation);
}

TEST(NGramTopN, LongestContextWins) {
  auto t = trace_from_rows(rows_for("u1", {"A", "B", "A", "B", "A"}));
  auto m = build_ngram(t, 2);
  std::vector<ContentId> hist{cid(t, "B"), cid(t, "A")};
  auto out = ngram_topn(m, hist, 3);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].content, cid(t, "B"));
  EXPECT_DOUBLE_EQ(out[0].score, 1.0);
}

TEST(NGramTopN, BacksOffToUnigram) {
  auto t = trace_from_rows(rows_for("u1", {"A", "B", "A"}) + rows_for("u2", {"B", "A"}, 10.0) + "u3,X,20,movie,,\n");
  ActiveSets active = filter_active(t, 1);
  active.contents[cid(t, "X").value] = 0;
  auto m = build_ngram(t, 2, &active);
  std::vector<ContentId> hist{cid(t, "X")};
  auto out = ngram_topn(m, hist, 5);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].content, cid(t, "A"));
  EXPECT_DOUBLE_EQ(out[0].score, 0.6);
  EXPECT_EQ(out[1].content, cid(t, "B"));
  EXPECT_DOUBLE_EQ(out[1].score, 0.4);
  EXPECT_THROW(ngram_topn(m, hist, 0), ContractViolation);
}

TEST(NGramTopN, TiesBrokenByContentId) {
  auto t = trace_from_rows(rows_for("u1", {"A", "C"}) + rows_for("u2", {"A", "B"}, 10.0));
  auto m = build_ngram(t, 2);
  auto out = ngram_topn(m, std::vector<ContentId>{cid(t, "A")}, 5);
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].content, cid(t, "B"));
  EXPECT_EQ(out[1].content, cid(t, "C"));
}

namespace {

// Recounts every window of the given order from scratch and ranks the
// successors of `ctx`.
std::vector<ScoredContent> naive_topn(const Trace& t, int n, const std::vector<ContentId>& history, int n_out) {
  std::vector<std::vector<ContentId>> seqs(t.user_count());
  for (const auto& r : t.requests) seqs[r.user.value].push_back(r.content);
  const int longest = std::min<int>(n, static_cast<int>(history.size()) + 1);
  for (int m = longest; m >= 1; --m) {
    std::vector<ContentId> ctx(history.end() - (m - 1), history.end());
    std::map<ContentId, int> counts;
    int total = 0;
    for (const auto& s : seqs)
      for (std::size_t p = static_cast<std::size_t>(m - 1); p < s.size(); ++p)
        if (std::equal(ctx.begin(), ctx.end(), s.begin() + static_cast<std::ptrdiff_t>(p - (m - 1)))) {
          ++counts[s[p]];
          ++total;
        }
    if (total == 0) continue;
    std::vector<std::pair<ContentId, int>> v(counts.begin(), counts.end());
    std::sort(v.begin(), v.end(), [](auto& a, auto& b) { return a.second != b.second ? a.second > b.second : a.first < b.first; });
    std::vector<ScoredContent> out;
    for (const auto& [c, k] : v) {
      if (static_cast<int>(out.size()) == n_out) break;
      out.push_back({c, static_cast<double>(k) / total});
    }
    return out;
  }
  return {};
}

}  // namespace

TEST(NGramTopN, MatchesNaiveRecountOnRandomTraces) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    std::string rows;
    std::uniform_int_distribution<int> item(0, 7), user(0, 9);
    for (int i = 0; i < 500; ++i)
      rows += "u" + std::to_string(user(rng)) + ",c" + std::to_string(item(rng)) + "," + std::to_string(i) + ",movie,,\n";
    auto t = trace_from_rows(rows);
    auto m = build_ngram(t, 3);
    for (std::uint32_t a = 0; a < t.content_count(); ++a) {
      for (std::uint32_t b = 0; b < t.content_count(); ++b) {
        std::vector<ContentId> hist{ContentId{a}, ContentId{b}};
        EXPECT_EQ(ngram_topn(m, hist, 4), naive_topn(t, 3, hist, 4));
        auto full = ngram_topn(m, hist, 100);
        double sum = 0.0;
        for (const auto& s : full) {
          EXPECT_GT(s.score, 0.0);
          EXPECT_LE(s.score, 1.0);
          sum += s.score;
        }
        EXPECT_NEAR(sum, 1.0, 1e-9);
      }
      std::vector<ContentId> single{ContentId{a}};
      EXPECT_EQ(ngram_topn(m, single, 4), naive_topn(t, 3, single, 4));
    }
  }
}

TEST(NGramCsv, RoundTrips) {
  auto t = trace_from_rows(rows_for("u1", {"A", "B", "C", "A", "B"}) + rows_for("u2", {"B", "C"}, 10.0));
  auto m = build_ngram(t, 3);
  std::stringstream buf;
  write_ngram_csv(m, t, buf);
  auto back = read_ngram_csv(buf, t);
  for (int order = 1; order <= 3; ++order) {
    ASSERT_EQ(back.table(order).size(), m.table(order).size());
    for (const auto& [ctx, succ] : m.table(order)) {
      const auto* other = back.find(order, ctx);
      ASSERT_NE(other, nullptr);
      EXPECT_EQ(other->counts, succ.counts);
      EXPECT_EQ(other->total, succ.total);
    }
  }
}
