#include "pec/scoring.hpp"

#include <algorithm>
#include <ostream>

namespace pec {

double user_score(const ArrivalWindow& w, Seconds t) {
  if (w.a == w.b) return t == w.a ? 2.0 : 0.0;
  if (t < w.a || t > w.b) return 0.0;
  if (t < w.mid) return (w.b - w.a) / (w.b - t);
  return 2.0;
}

ScoreBoard::ScoreBoard(std::size_t n_users, std::size_t n_contents)
    : users_(n_users), contributors_(n_contents), p1_(n_contents, 0.0), p2_(n_contents, 0.0) {}

void ScoreBoard::insert(UserId user, std::vector<ScoredContent> items, const ArrivalWindow& window, Seconds t) {
  reset_user(user);
  auto& st = users_.at(user.value);
  st.items = std::move(items);
  st.window = window;
  st.issued_at = t;
  st.evaluated_at = t;
  st.score = user_score(window, t);
  st.live = true;
  st.expired = false;
  add_contributions(user);
}

void ScoreBoard::reset_user(UserId user) {
  auto& st = users_.at(user.value);
  if (st.live && !st.expired) remove_contributions(user);
  st = UserState{};
}

void ScoreBoard::refresh(Seconds t) {
  std::vector<char> touched(p1_.size(), 0);
  for (std::uint32_t u = 0; u < users_.size(); ++u) {
    auto& st = users_[u];
    if (!st.live || st.expired) continue;
    st.evaluated_at = t;
    st.score = user_score(st.window, t);
    if (t > st.window.b) {
      remove_contributions(UserId{u});
      st.expired = true;
    }
    for (const auto& item : st.items) touched[item.content.value] = 1;
  }
  for (std::uint32_t c = 0; c < touched.size(); ++c)
    if (touched[c]) recompute(ContentId{c});
  last_refresh_ = t;
}

void ScoreBoard::add_contributions(UserId user) {
  for (const auto& item : users_[user.value].items) {
    auto& list = contributors_.at(item.content.value);
    auto it = std::lower_bound(list.begin(), list.end(), user.value,
                               [](const auto& p, std::uint32_t u) { return p.first < u; });
    if (it != list.end() && it->first == user.value)
      throw ContractViolation("duplicate content in a user's prediction");
    list.insert(it, {user.value, item.score});
    recompute(item.content);
  }
}

void ScoreBoard::remove_contributions(UserId user) {
  for (const auto& item : users_[user.value].items) {
    auto& list = contributors_.at(item.content.value);
    auto it = std::lower_bound(list.begin(), list.end(), user.value,
                               [](const auto& p, std::uint32_t u) { return p.first < u; });
    if (it != list.end() && it->first == user.value) list.erase(it);
    recompute(item.content);
  }
}

void ScoreBoard::recompute(ContentId c) {
  const RankKey old = rank_key(c);
  double p1 = 0.0;
  for (const auto& [u, w] : contributors_[c.value]) p1 += w * users_[u].score;
  double p2 = 0.0;
  if (p1 == 0.0) {
    for (const auto& [u, w] : contributors_[c.value]) {
      const auto& st = users_[u];
      if (st.window.a > st.evaluated_at) p2 = std::max(p2, std::min(kP2Cap, 1.0 / (st.window.a - st.evaluated_at)));
    }
  }
  p1_[c.value] = p1;
  p2_[c.value] = p2;
  if (old.positive()) ranked_.erase(old);
  const RankKey now = rank_key(c);
  if (now.positive()) ranked_.insert(now);
}

void ScoreBoard::write_csv(const Trace& names, std::ostream& out) const {
  out << "content,P1,P2,contributing_users\n";
  out.precision(17);
  for (std::uint32_t c = 0; c < p1_.size(); ++c) {
    if (contributors_[c].empty() && p1_[c] == 0.0 && p2_[c] == 0.0) continue;
    out << names.name(ContentId{c}) << ',' << p1_[c] << ',' << p2_[c] << ',';
    for (std::size_t i = 0; i < contributors_[c].size(); ++i)
      out << (i ? " " : "") << names.name(UserId{contributors_[c][i].first});
    out << '\n';
  }
}

}  // namespace pec
