#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pec/ngram.hpp"
#include "pec/trace.hpp"
#include "pec/tsas.hpp"

namespace pec {

/// A user's predicted next contents, highest weight first.
struct TopNPrediction {
  UserId user;
  std::vector<ScoredContent> items;
  Seconds created_at = 0.0;
  std::optional<ArrivalWindow> window;
};

/// (s - min) / (max - min) over the list, 1.0 everywhere when max == min.
/// Order is preserved.
std::vector<ScoredContent> minmax_normalize(std::span<const ScoredContent> scores);

/// CombSum of the two normalised lists; a content missing from one list
/// scores 0 there. Returns the top `n_out` by fused weight, ties by content id.
std::vector<ScoredContent> fuse_topn(std::span<const ScoredContent> ngram, std::span<const ScoredContent> tsas,
                                     int n_out);

/// The next episode of the series with weight 1, or nothing after the final
/// episode or for a series missing from the catalog.
std::vector<ScoredContent> tv_next_episode(const Request& request, const Trace& catalog);

/// Chronological per-user history used at prediction time.
struct UserHistory {
  std::optional<Request> latest;
  /// Active contents only, with their timestamps.
  std::vector<ContentId> contents;
  std::vector<Seconds> times;

  void append(const Request& r, bool active_content);
};

enum class PredictorMode { Fused, NGramOnly };

/// Dispatches TV requests to the episode heuristic and everything else to
/// the sequential models.
class Predictor {
 public:
  Predictor(const Trace& catalog, const NGramModel& ngram, const TsasModel* tsas, PredictorMode mode, int n_out = 10);

  std::vector<ScoredContent> predict(const UserHistory& history) const;

  std::vector<ScoredContent> ngram_list(const UserHistory& history, int n_out) const;
  std::vector<ScoredContent> tsas_list(const UserHistory& history, int n_out) const;

  int n_out() const { return n_out_; }
  PredictorMode mode() const { return mode_; }

 private:
  const Trace* catalog_;
  const NGramModel* ngram_;
  const TsasModel* tsas_;
  PredictorMode mode_;
  int n_out_;
};

}  // namespace pec
