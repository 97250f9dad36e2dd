#include "pec/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <random>

namespace pec {

namespace {

class ZipfSampler {
 public:
  ZipfSampler(int n, double s) : cdf_(static_cast<std::size_t>(std::max(n, 0))) {
    double acc = 0.0;
    for (int r = 1; r <= n; ++r) {
      acc += 1.0 / std::pow(static_cast<double>(r), s);
      cdf_[r - 1] = acc;
    }
    for (auto& v : cdf_) v /= acc;
  }

  template <class Rng>
  int operator()(Rng& rng) const {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<int>(it - cdf_.begin());
  }

 private:
  std::vector<double> cdf_;
};

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag, const std::vector<int>& extra = {}) {
  std::vector<std::uint32_t> words{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                                   static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32)};
  for (int v : extra) words.push_back(static_cast<std::uint32_t>(v));
  std::seed_seq seq(words.begin(), words.end());
  return std::mt19937_64(seq);
}

constexpr std::uint64_t kUserTag = 0x75736572ULL;
constexpr std::uint64_t kRowTag = 0x726f77ULL;
constexpr std::uint64_t kLengthTag = 0x6c656eULL;

Seconds draw_length(std::uint64_t seed, const WatchTimeParams& p, int a, int b) {
  auto rng = stream(seed, kLengthTag, {a, b});
  double v = std::normal_distribution<double>(p.mean, p.std)(rng);
  return std::clamp(v, 60.0, p.mean + 2.0 * p.std);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("synthetic config: " + what);
}

}  // namespace

void SyntheticConfig::validate() const {
  require(n_users >= 0, "n_users must be >= 0");
  require(n_series > 0 && episodes_per_series > 0 && n_movies > 0, "catalog counts must be positive");
  require(tv_fraction >= 0.0 && tv_fraction <= 1.0, "tv_fraction must be in [0,1]");
  require(p_follow >= 0.0 && p_follow <= 1.0, "p_follow must be in [0,1]");
  require(zipf_s >= 0.0, "zipf_s must be >= 0");
  require(markov_order == 1 || markov_order == 2, "markov_order must be 1 or 2");
  require(markov_successors > 0 && markov_successors < n_movies, "markov_successors must be in [1, n_movies)");
  require(session_length_mean >= 1.0, "session_length_mean must be >= 1");
  require(off_mean > 0.0 && duration > 0.0, "off_mean and duration must be positive");
  require(tv_watch.mean > 0.0 && movie_watch.mean > 0.0, "watch time means must be positive");
  require(tv_watch.std >= 0.0 && movie_watch.std >= 0.0 && watch_jitter_s >= 0.0, "watch time spreads must be >= 0");
}

void to_json(nlohmann::json& j, const SyntheticConfig& c) {
  j = nlohmann::json{{"seed", c.seed},
                     {"n_users", c.n_users},
                     {"n_series", c.n_series},
                     {"episodes_per_series", c.episodes_per_series},
                     {"n_movies", c.n_movies},
                     {"tv_fraction", c.tv_fraction},
                     {"p_follow", c.p_follow},
                     {"zipf_s", c.zipf_s},
                     {"markov_order", c.markov_order},
                     {"markov_successors", c.markov_successors},
                     {"session_length_mean", c.session_length_mean},
                     {"off_mean", c.off_mean},
                     {"watch_time_mean", {{"tv", c.tv_watch.mean}, {"movie", c.movie_watch.mean}}},
                     {"watch_time_std", {{"tv", c.tv_watch.std}, {"movie", c.movie_watch.std}}},
                     {"watch_jitter_s", c.watch_jitter_s},
                     {"duration", c.duration}};
}

void from_json(const nlohmann::json& j, SyntheticConfig& c) {
  static const std::vector<std::string> known{"seed",           "n_users",
                                              "n_series",       "episodes_per_series",
                                              "n_movies",       "tv_fraction",
                                              "p_follow",       "zipf_s",
                                              "markov_order",   "markov_successors",
                                              "session_length_mean", "off_mean",
                                              "watch_time_mean", "watch_time_std",
                                              "watch_jitter_s", "duration"};
  std::string unknown;
  for (const auto& [key, value] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end()) unknown += (unknown.empty() ? "" : ", ") + key;
  if (!unknown.empty()) throw ConfigError("unknown synthetic config keys: " + unknown);

  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("seed", c.seed);
  get("n_users", c.n_users);
  get("n_series", c.n_series);
  get("episodes_per_series", c.episodes_per_series);
  get("n_movies", c.n_movies);
  get("tv_fraction", c.tv_fraction);
  get("p_follow", c.p_follow);
  get("zipf_s", c.zipf_s);
  get("markov_order", c.markov_order);
  get("markov_successors", c.markov_successors);
  get("session_length_mean", c.session_length_mean);
  get("off_mean", c.off_mean);
  get("watch_jitter_s", c.watch_jitter_s);
  get("duration", c.duration);
  if (j.contains("watch_time_mean")) {
    const auto& m = j.at("watch_time_mean");
    if (m.contains("tv")) m.at("tv").get_to(c.tv_watch.mean);
    if (m.contains("movie")) m.at("movie").get_to(c.movie_watch.mean);
  }
  if (j.contains("watch_time_std")) {
    const auto& m = j.at("watch_time_std");
    if (m.contains("tv")) m.at("tv").get_to(c.tv_watch.std);
    if (m.contains("movie")) m.at("movie").get_to(c.movie_watch.std);
  }
}

std::string movie_name(int index) { return "m" + std::to_string(index); }
std::string series_name(int series) { return "s" + std::to_string(series); }
std::string episode_name(int series, int episode) {
  return "s" + std::to_string(series) + "e" + std::to_string(episode);
}

int movie_index(const std::string& content) {
  if (content.size() < 2 || content[0] != 'm') return -1;
  int v = 0;
  for (std::size_t i = 1; i < content.size(); ++i) {
    if (content[i] < '0' || content[i] > '9') return -1;
    v = v * 10 + (content[i] - '0');
  }
  return v;
}

std::vector<std::pair<int, double>> planted_row(const SyntheticConfig& cfg, const std::vector<int>& context) {
  ZipfSampler popularity(cfg.n_movies, cfg.zipf_s);
  auto rng = stream(cfg.seed, kRowTag, context);
  const int last = context.empty() ? -1 : context.back();

  std::vector<int> successors;
  while (static_cast<int>(successors.size()) < cfg.markov_successors) {
    int m = popularity(rng);
    if (m == last || std::find(successors.begin(), successors.end(), m) != successors.end()) continue;
    successors.push_back(m);
  }
  double norm = 0.0;
  for (int r = 1; r <= cfg.markov_successors; ++r) norm += 1.0 / std::pow(static_cast<double>(r), cfg.zipf_s);
  std::vector<std::pair<int, double>> row;
  for (int r = 1; r <= cfg.markov_successors; ++r)
    row.emplace_back(successors[r - 1], (1.0 / std::pow(static_cast<double>(r), cfg.zipf_s)) / norm);
  return row;
}

SyntheticTrace generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  SyntheticTrace out;

  const ZipfSampler series_pop(cfg.n_series, cfg.zipf_s);
  const ZipfSampler movie_pop(cfg.n_movies, cfg.zipf_s);
  const double p_end_session = 1.0 / cfg.session_length_mean;

  std::vector<Seconds> tv_length(static_cast<std::size_t>(cfg.n_series) * cfg.episodes_per_series);
  for (int s = 0; s < cfg.n_series; ++s)
    for (int e = 1; e <= cfg.episodes_per_series; ++e)
      tv_length[static_cast<std::size_t>(s) * cfg.episodes_per_series + (e - 1)] =
          draw_length(cfg.seed, cfg.tv_watch, s, e);
  std::vector<Seconds> movie_length(cfg.n_movies);
  for (int m = 0; m < cfg.n_movies; ++m) movie_length[m] = draw_length(cfg.seed, cfg.movie_watch, -1, m);

  std::map<std::vector<int>, std::vector<std::pair<int, double>>> rows;
  auto row_for = [&](const std::vector<int>& ctx) -> const std::vector<std::pair<int, double>>& {
    auto it = rows.find(ctx);
    if (it == rows.end()) it = rows.emplace(ctx, planted_row(cfg, ctx)).first;
    return it->second;
  };

  TraceBuilder builder;
  for (int u = 0; u < cfg.n_users; ++u) {
    auto rng = stream(cfg.seed, kUserTag, {u});
    std::exponential_distribution<double> off_gap(1.0 / cfg.off_mean);
    std::normal_distribution<double> jitter(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<int> episode_pick(1, cfg.episodes_per_series);

    const std::string user = "u" + std::to_string(u);
    Seconds t = off_gap(rng);
    std::uint32_t session = 0;
    std::optional<std::pair<int, int>> last_tv;  // (series, episode)
    std::deque<int> movie_ctx;

    while (t < cfg.duration) {
      std::string content;
      Seconds length = 0.0;
      DrawSource source;
      bool is_tv = false;
      int series = 0;
      int episode = 0;

      if (last_tv && last_tv->second < cfg.episodes_per_series && unit(rng) < cfg.p_follow) {
        is_tv = true;
        series = last_tv->first;
        episode = last_tv->second + 1;
        source = DrawSource::Follow;
      } else if (unit(rng) < cfg.tv_fraction) {
        is_tv = true;
        series = series_pop(rng);
        episode = episode_pick(rng);
        source = DrawSource::FreshTv;
      } else {
        int movie = 0;
        if (static_cast<int>(movie_ctx.size()) == cfg.markov_order) {
          const auto& row = row_for(std::vector<int>(movie_ctx.begin(), movie_ctx.end()));
          double u01 = unit(rng);
          double acc = 0.0;
          movie = row.back().first;
          for (const auto& [m, p] : row) {
            acc += p;
            if (u01 < acc) {
              movie = m;
              break;
            }
          }
          source = DrawSource::Markov;
        } else {
          movie = movie_pop(rng);
          source = DrawSource::Popularity;
        }
        content = movie_name(movie);
        length = movie_length[movie];
        movie_ctx.push_back(movie);
        if (static_cast<int>(movie_ctx.size()) > cfg.markov_order) movie_ctx.pop_front();
        last_tv.reset();
        builder.add(user, content, t, ContentKind::Movie, std::nullopt, std::nullopt);
      }

      if (is_tv) {
        content = episode_name(series, episode);
        length = tv_length[static_cast<std::size_t>(series) * cfg.episodes_per_series + (episode - 1)];
        last_tv = std::make_pair(series, episode);
        movie_ctx.clear();
        builder.add(user, content, t, ContentKind::TvSeries, series_name(series), episode);
      }

      out.content_length.emplace(content, length);
      out.log.push_back({static_cast<std::uint32_t>(u), session, content, t, source});

      Seconds watch = std::max(1.0, length + cfg.watch_jitter_s * jitter(rng));
      t += watch;
      if (unit(rng) < p_end_session) {
        t += off_gap(rng);
        ++session;
      }
    }
  }
  out.trace = std::move(builder).build();
  return out;
}

Trace generate_synthetic_trace(const SyntheticConfig& cfg) { return generate_synthetic(cfg).trace; }

}  // namespace pec
