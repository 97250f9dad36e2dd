#include "pec/analysis.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <set>

namespace pec {

std::vector<PopularityBand> default_popularity_bands() {
  return {{0, 10, "top 10"}, {10, 50, "top 10-50"}, {50, 100, "top 50-100"}, {100, 200, "top 100-200"},
          {200, 500, "top 200-500"}};
}

std::vector<std::size_t> popularity_ranks(const Trace& trace) {
  std::vector<std::uint64_t> counts(trace.content_count(), 0);
  for (const auto& r : trace.requests) ++counts[r.content.value];
  std::vector<std::uint32_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return counts[a] > counts[b]; });
  std::vector<std::size_t> ranks(counts.size(), 0);
  for (std::size_t i = 0; i < order.size(); ++i)
    if (counts[order[i]] > 0) ranks[order[i]] = i + 1;
  return ranks;
}

std::vector<BandRecall> recall_by_popularity(const Trace& test, std::span<const Snapshot> snapshots,
                                             std::span<const std::size_t> ranks,
                                             std::span<const PopularityBand> bands, Seconds window) {
  std::vector<BandRecall> out;
  for (const auto& b : bands) out.push_back({b.label});
  auto band_of = [&](ContentId c) -> int {
    const std::size_t rank = c.value < ranks.size() ? ranks[c.value] : 0;
    for (std::size_t i = 0; i < bands.size(); ++i)
      if (rank > bands[i].lo && rank <= bands[i].hi) return static_cast<int>(i);
    return -1;
  };

  const auto& reqs = test.requests;
  for (const auto& snap : snapshots) {
    auto lo = std::lower_bound(reqs.begin(), reqs.end(), snap.t,
                               [](const Request& r, Seconds t) { return r.timestamp < t; });
    std::set<ContentId> requested;
    for (auto it = lo; it != reqs.end() && it->timestamp < snap.t + window; ++it) requested.insert(it->content);
    const std::set<ContentId> predictive(snap.predictive.begin(), snap.predictive.end());
    const std::set<ContentId> lru2(snap.lru2.begin(), snap.lru2.end());
    for (ContentId c : requested) {
      const int b = band_of(c);
      if (b < 0) continue;
      auto& row = out[static_cast<std::size_t>(b)];
      ++row.requested;
      row.predictive_found += predictive.count(c);
      row.lru2_found += lru2.count(c);
    }
  }
  for (auto& row : out) {
    if (row.requested == 0) continue;
    row.predictive_recall = static_cast<double>(row.predictive_found) / static_cast<double>(row.requested);
    row.lru2_recall = static_cast<double>(row.lru2_found) / static_cast<double>(row.requested);
  }
  return out;
}

bool hit_at(std::span<const ScoredContent> list, ContentId truth, int n) {
  const auto k = std::min<std::size_t>(list.size(), static_cast<std::size_t>(std::max(n, 0)));
  return std::any_of(list.begin(), list.begin() + static_cast<std::ptrdiff_t>(k),
                     [&](const ScoredContent& s) { return s.content == truth; });
}

bool union_hit(std::span<const ScoredContent> a, std::span<const ScoredContent> b, ContentId truth) {
  auto has = [&](std::span<const ScoredContent> l) {
    return std::any_of(l.begin(), l.end(), [&](const ScoredContent& s) { return s.content == truth; });
  };
  return has(a) || has(b);
}

FusionEvaluation evaluate_fusion(const Predictor& predictor, const Trace& train, const Trace& test,
                                 const ActiveSets& active, std::vector<int> ns, std::size_t max_samples) {
  if (ns.empty() || *std::min_element(ns.begin(), ns.end()) < 1) throw ContractViolation("list sizes must be >= 1");
  FusionEvaluation ev;
  ev.ns = std::move(ns);
  ev.ngram_hits.assign(ev.ns.size(), 0);
  ev.tsas_hits.assign(ev.ns.size(), 0);
  ev.fused_hits.assign(ev.ns.size(), 0);
  ev.union_hits.assign(ev.ns.size(), 0);

  std::vector<UserHistory> histories(test.user_count());
  for (const auto& r : train.requests) histories[r.user.value].append(r, active.has(r.content));

  for (const auto& r : test.requests) {
    auto& h = histories[r.user.value];
    const bool eligible = h.latest && h.latest->kind != ContentKind::TvSeries && active.has(r.content) &&
                          !h.contents.empty() && (max_samples == 0 || ev.samples < max_samples);
    if (eligible) {
      ++ev.samples;
      // Both models rank deterministically, so shorter lists are prefixes.
      const int n_max = *std::max_element(ev.ns.begin(), ev.ns.end());
      const auto ng_all = predictor.ngram_list(h, n_max);
      const auto ts_all = predictor.tsas_list(h, n_max);
      for (std::size_t i = 0; i < ev.ns.size(); ++i) {
        const int n = ev.ns[i];
        const auto ng = std::span(ng_all).first(std::min<std::size_t>(ng_all.size(), static_cast<std::size_t>(n)));
        const auto ts = std::span(ts_all).first(std::min<std::size_t>(ts_all.size(), static_cast<std::size_t>(n)));
        const auto fused = fuse_topn(ng, ts, n);
        ev.ngram_hits[i] += hit_at(ng, r.content, n);
        ev.tsas_hits[i] += hit_at(ts, r.content, n);
        ev.fused_hits[i] += hit_at(fused, r.content, n);
        ev.union_hits[i] += union_hit(ng, ts, r.content);
        for (const auto& f : fused)
          if (!union_hit(ng, ts, f.content)) {
            ++ev.containment_failures;
            break;
          }
      }
    }
    h.append(r, active.has(r.content));
  }
  return ev;
}

void write_recall_csv(std::span<const BandRecall> rows, std::ostream& out) {
  out << "band,requested,predictive_recall,lru2_recall\n";
  for (const auto& r : rows) out << r.label << ',' << r.requested << ',' << r.predictive_recall << ',' << r.lru2_recall << '\n';
}

void write_fusion_csv(const FusionEvaluation& ev, std::ostream& out) {
  out << "n,samples,ngram,tsas,fused,upper_bound\n";
  for (std::size_t i = 0; i < ev.ns.size(); ++i)
    out << ev.ns[i] << ',' << ev.samples << ',' << ev.rate(ev.ngram_hits, i) << ',' << ev.rate(ev.tsas_hits, i) << ','
        << ev.rate(ev.fused_hits, i) << ',' << ev.rate(ev.union_hits, i) << '\n';
}

}  // namespace pec
