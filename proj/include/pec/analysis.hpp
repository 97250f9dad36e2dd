#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pec/fusion.hpp"
#include "pec/simulator.hpp"

namespace pec {

/// Popularity ranks (lo, hi], 1-based.
struct PopularityBand {
  std::size_t lo = 0;
  std::size_t hi = 0;
  std::string label;
};

std::vector<PopularityBand> default_popularity_bands();

/// 1-based popularity rank of every content by request count (ties by id);
/// 0 for contents never requested.
std::vector<std::size_t> popularity_ranks(const Trace& trace);

struct BandRecall {
  std::string label;
  std::size_t requested = 0;
  std::size_t predictive_found = 0;
  std::size_t lru2_found = 0;
  double predictive_recall = 0.0;
  double lru2_recall = 0.0;
};

/// For each snapshot, the distinct contents requested in [t, t + window)
/// are checked against the snapshot's two lists; counts are pooled over
/// snapshots and split by popularity band.
std::vector<BandRecall> recall_by_popularity(const Trace& test, std::span<const Snapshot> snapshots,
                                             std::span<const std::size_t> ranks,
                                             std::span<const PopularityBand> bands, Seconds window = 1800.0);

/// Whether `truth` is among the first `n` entries.
bool hit_at(std::span<const ScoredContent> list, ContentId truth, int n);

/// Whether `truth` is in either list.
bool union_hit(std::span<const ScoredContent> a, std::span<const ScoredContent> b, ContentId truth);

struct FusionEvaluation {
  std::vector<int> ns;
  std::size_t samples = 0;
  std::vector<std::size_t> ngram_hits;
  std::vector<std::size_t> tsas_hits;
  std::vector<std::size_t> fused_hits;
  std::vector<std::size_t> union_hits;
  /// Samples whose fused list holds a content absent from both inputs.
  std::size_t containment_failures = 0;

  double rate(const std::vector<std::size_t>& hits, std::size_t i) const {
    return samples ? static_cast<double>(hits[i]) / static_cast<double>(samples) : 0.0;
  }
};

/// hit@n of each model, of the fused list and of the union of both inputs,
/// over test requests that follow a non-TV request of the same user and
/// target an active content. Histories are seeded from `train`.
FusionEvaluation evaluate_fusion(const Predictor& predictor, const Trace& train, const Trace& test,
                                 const ActiveSets& active, std::vector<int> ns = {1, 3, 10},
                                 std::size_t max_samples = 0);

void write_recall_csv(std::span<const BandRecall> rows, std::ostream& out);
void write_fusion_csv(const FusionEvaluation& eval, std::ostream& out);

}  // namespace pec
