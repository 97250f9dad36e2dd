#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "pec/trace.hpp"

namespace pec {

/// Count-based n-gram next-content model with longest-match backoff.
class NGramModel {
 public:
  /// Successor counts observed after one context, sorted by count
  /// descending then content id ascending.
  struct Successors {
    std::vector<std::pair<ContentId, std::uint64_t>> counts;
    std::uint64_t total = 0;
  };
  using Table = std::map<std::vector<ContentId>, Successors>;

  NGramModel() = default;
  explicit NGramModel(int n);

  int order() const { return n_; }
  bool empty() const;

  /// Table for windows of length `m` (context length m-1), 1 <= m <= order().
  const Table& table(int m) const { return tables_.at(m - 1); }

  const Successors* find(int m, std::span<const ContentId> context) const;

  void add_count(std::span<const ContentId> context, ContentId next, std::uint64_t count = 1);
  /// Sorts every successor list; call once after the last add_count.
  void freeze();

 private:
  int n_ = 3;
  std::vector<Table> tables_;
  std::vector<std::map<std::vector<ContentId>, std::map<ContentId, std::uint64_t>>> pending_;
};

/// Counts windows of every order 1..n over each user's own sequence,
/// restricted to `active` users and contents when given.
NGramModel build_ngram(const Trace& trace, int n, const ActiveSets* active = nullptr);

/// Top `n_out` successors of the longest context matching the end of `history`.
std::vector<ScoredContent> ngram_topn(const NGramModel& model, std::span<const ContentId> history, int n_out);

/// Rows of (order, context, content, count); context ids are space-separated.
void write_ngram_csv(const NGramModel& model, const Trace& names, std::ostream& out);
NGramModel read_ngram_csv(std::istream& in, const Trace& names);

}  // namespace pec
