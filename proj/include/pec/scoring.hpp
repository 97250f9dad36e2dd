#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <vector>

#include "pec/trace.hpp"

namespace pec {

/// Score of one predicted request at time t: 0 before a, rising as
/// (b-a)/(b-t) up to mid, 2 on [mid, b], 0 after b.
double user_score(const ArrivalWindow& w, Seconds t);

/// Priority of a content for proactive caching. Compares P1, then P2, then
/// prefers the smaller content id; `a < b` means a ranks below b.
struct RankKey {
  double p1 = 0.0;
  double p2 = 0.0;
  ContentId content;

  bool positive() const { return p1 > 0.0 || p2 > 0.0; }
  /// Compares (p1, p2) only.
  bool scores_less(const RankKey& o) const { return p1 != o.p1 ? p1 < o.p1 : p2 < o.p2; }
  bool operator<(const RankKey& o) const {
    if (p1 != o.p1) return p1 < o.p1;
    if (p2 != o.p2) return p2 < o.p2;
    return o.content < content;
  }
  bool operator==(const RankKey&) const = default;
};

/// Live per-content predictive scores built from each user's latest top-n
/// prediction. Scores are evaluated when a prediction is inserted and again
/// at every refresh; between those instants they hold their last value.
class ScoreBoard {
 public:
  struct UserState {
    std::vector<ScoredContent> items;
    ArrivalWindow window;
    Seconds issued_at = 0.0;
    /// Time the score below was evaluated.
    Seconds evaluated_at = 0.0;
    double score = 0.0;
    bool live = false;
    /// Window closed at a refresh; kept until the user's next request.
    bool expired = false;
  };

  static constexpr double kP2Cap = 1e9;

  ScoreBoard() = default;
  ScoreBoard(std::size_t n_users, std::size_t n_contents);

  /// Replaces the user's prediction and evaluates it at t.
  void insert(UserId user, std::vector<ScoredContent> items, const ArrivalWindow& window, Seconds t);
  void reset_user(UserId user);
  /// Re-evaluates every live prediction at t; windows with t > b expire.
  void refresh(Seconds t);

  double p1(ContentId c) const { return p1_.at(c.value); }
  double p2(ContentId c) const { return p2_.at(c.value); }
  RankKey rank_key(ContentId c) const { return {p1(c), p2(c), c}; }

  /// Contents with a positive key, lowest first.
  const std::set<RankKey>& ranking() const { return ranked_; }
  std::size_t n_live() const { return ranked_.size(); }

  const std::vector<UserState>& users() const { return users_; }
  std::size_t content_count() const { return p1_.size(); }
  Seconds last_refresh() const { return last_refresh_; }

  /// Columns: content, P1, P2, contributing_users.
  void write_csv(const Trace& names, std::ostream& out) const;

 private:
  void add_contributions(UserId user);
  void remove_contributions(UserId user);
  void recompute(ContentId c);

  std::vector<UserState> users_;
  /// Per content, contributing (user, weight) pairs sorted by user.
  std::vector<std::vector<std::pair<std::uint32_t, double>>> contributors_;
  std::vector<double> p1_;
  std::vector<double> p2_;
  std::set<RankKey> ranked_;
  Seconds last_refresh_ = 0.0;
};

}  // namespace pec
