#include "pec/fusion.hpp"

#include <algorithm>
#include <map>

namespace pec {

std::vector<ScoredContent> minmax_normalize(std::span<const ScoredContent> scores) {
  std::vector<ScoredContent> out(scores.begin(), scores.end());
  if (out.empty()) return out;
  auto [lo, hi] = std::minmax_element(out.begin(), out.end(),
                                      [](const auto& a, const auto& b) { return a.score < b.score; });
  const double min = lo->score;
  const double max = hi->score;
  for (auto& s : out) s.score = max == min ? 1.0 : (s.score - min) / (max - min);
  return out;
}

std::vector<ScoredContent> fuse_topn(std::span<const ScoredContent> ngram, std::span<const ScoredContent> tsas,
                                     int n_out) {
  std::map<ContentId, double> sum;
  for (const auto& s : minmax_normalize(ngram)) sum[s.content] += s.score;
  for (const auto& s : minmax_normalize(tsas)) sum[s.content] += s.score;

  std::vector<ScoredContent> out;
  out.reserve(sum.size());
  for (const auto& [c, total] : sum) out.push_back({c, total / 2.0});
  std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
  if (n_out >= 0 && out.size() > static_cast<std::size_t>(n_out)) out.resize(static_cast<std::size_t>(n_out));
  return out;
}

std::vector<ScoredContent> tv_next_episode(const Request& request, const Trace& catalog) {
  if (request.kind != ContentKind::TvSeries || !request.series || !request.episode)
    throw ContractViolation("episode heuristic called for a non-TV request");
  if (request.content.value >= catalog.content_count()) return {};
  const auto& entry = catalog.entry(request.content);
  if (entry.final_episode && *request.episode >= *entry.final_episode) return {};
  auto next = catalog.episode_of(*request.series, *request.episode + 1);
  if (!next) return {};
  return {{*next, 1.0}};
}

void UserHistory::append(const Request& r, bool active_content) {
  latest = r;
  if (active_content) {
    contents.push_back(r.content);
    times.push_back(r.timestamp);
  }
}

Predictor::Predictor(const Trace& catalog, const NGramModel& ngram, const TsasModel* tsas, PredictorMode mode,
                     int n_out)
    : catalog_(&catalog), ngram_(&ngram), tsas_(tsas), mode_(mode), n_out_(n_out) {
  if (n_out < 1) throw ContractViolation("top-n size must be >= 1");
  if (mode == PredictorMode::Fused && !tsas) throw ContractViolation("fused prediction needs a TSAS model");
}

std::vector<ScoredContent> Predictor::ngram_list(const UserHistory& history, int n_out) const {
  if (history.contents.empty()) return {};
  const std::size_t ctx = static_cast<std::size_t>(ngram_->order() - 1);
  const std::size_t take = std::min(ctx, history.contents.size());
  return ngram_topn(*ngram_, std::span(history.contents).last(take), n_out);
}

std::vector<ScoredContent> Predictor::tsas_list(const UserHistory& history, int n_out) const {
  if (!tsas_ || history.contents.empty()) return {};
  const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(tsas_->config().seq_len) * 4,
                                                 history.contents.size());
  auto seq = tsas_->window_from_history(std::span(history.contents).last(take), std::span(history.times).last(take),
                                        0.0);
  return tsas_->topn(seq, n_out);
}

std::vector<ScoredContent> Predictor::predict(const UserHistory& history) const {
  if (!history.latest) return {};
  if (history.latest->kind == ContentKind::TvSeries) return tv_next_episode(*history.latest, *catalog_);
  auto ngram = ngram_list(history, n_out_);
  if (mode_ == PredictorMode::NGramOnly) return minmax_normalize(ngram);
  return fuse_topn(ngram, tsas_list(history, n_out_), n_out_);
}

}  // namespace pec
