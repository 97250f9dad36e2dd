#include "pec/trace.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace pec {

namespace {

std::uint64_t episode_key(SeriesId s, int episode) {
  return (static_cast<std::uint64_t>(s.value) << 32) | static_cast<std::uint32_t>(episode);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string current;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (ch != '\r') {
      current.push_back(ch);
    }
  }
  fields.push_back(std::move(current));
  return fields;
}

std::string line_error(std::size_t line_no, const std::string& what) {
  return "trace line " + std::to_string(line_no) + ": " + what;
}

}  // namespace

std::string to_string(ContentKind kind) {
  switch (kind) {
    case ContentKind::TvSeries:
      return "tv";
    case ContentKind::Movie:
      return "movie";
    case ContentKind::Show:
      return "show";
    case ContentKind::Other:
      return "other";
  }
  return "other";
}

ContentKind parse_content_kind(const std::string& text) {
  if (text == "tv") return ContentKind::TvSeries;
  if (text == "movie") return ContentKind::Movie;
  if (text == "show") return ContentKind::Show;
  if (text == "other") return ContentKind::Other;
  throw ParseError("unknown content kind '" + text + "'");
}

std::optional<ContentId> Trace::find_content(const std::string& name) const {
  auto it = content_index_.find(name);
  if (it == content_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<UserId> Trace::find_user(const std::string& name) const {
  auto it = user_index_.find(name);
  if (it == user_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<ContentId> Trace::episode_of(SeriesId series, int episode) const {
  auto it = episode_index_.find(episode_key(series, episode));
  if (it == episode_index_.end()) return std::nullopt;
  return it->second;
}

Trace Trace::with_requests(std::vector<Request> selected) const {
  Trace out;
  out.requests = std::move(selected);
  out.catalog = catalog;
  out.content_names = content_names;
  out.user_names = user_names;
  out.series_names = series_names;
  out.content_index_ = content_index_;
  out.user_index_ = user_index_;
  out.episode_index_ = episode_index_;
  return out;
}

void Trace::rebuild_indexes() {
  content_index_.clear();
  user_index_.clear();
  episode_index_.clear();
  for (std::uint32_t i = 0; i < content_names.size(); ++i) content_index_.emplace(content_names[i], ContentId{i});
  for (std::uint32_t i = 0; i < user_names.size(); ++i) user_index_.emplace(user_names[i], UserId{i});
  for (std::uint32_t i = 0; i < catalog.size(); ++i) {
    const auto& e = catalog[i];
    if (e.series && e.episode) episode_index_.emplace(episode_key(*e.series, *e.episode), ContentId{i});
  }
}

void TraceBuilder::add(const std::string& user, const std::string& content, Seconds timestamp, ContentKind kind,
                       const std::optional<std::string>& series, std::optional<int> episode) {
  if (!std::isfinite(timestamp) || timestamp < 0.0) throw ParseError("timestamp must be finite and >= 0");
  if (series.has_value() != episode.has_value()) throw ParseError("series_id and episode must both be present or absent");
  if ((kind == ContentKind::TvSeries) != episode.has_value())
    throw ParseError("episode information is required for tv contents and only for them");
  if (episode && *episode < 1) throw ParseError("episode must be a positive integer");

  RawContent meta{kind, series, episode};
  auto [it, inserted] = contents_.emplace(content, meta);
  if (!inserted) {
    const auto& prev = it->second;
    if (prev.kind != kind || prev.series != series || prev.episode != episode)
      throw ParseError("content '" + content + "' appears with conflicting metadata");
  }
  raw_.push_back({user, content, timestamp});
}

Trace TraceBuilder::build() && {
  Trace trace;

  std::set<std::string> users;
  std::set<std::string> series;
  for (const auto& r : raw_) users.insert(r.user);
  for (const auto& [name, meta] : contents_)
    if (meta.series) series.insert(*meta.series);

  std::vector<std::string> content_names;
  content_names.reserve(contents_.size());
  for (const auto& [name, meta] : contents_) content_names.push_back(name);
  std::sort(content_names.begin(), content_names.end());

  trace.content_names = std::move(content_names);
  trace.user_names.assign(users.begin(), users.end());
  trace.series_names.assign(series.begin(), series.end());

  std::unordered_map<std::string, SeriesId> series_index;
  for (std::uint32_t i = 0; i < trace.series_names.size(); ++i) series_index.emplace(trace.series_names[i], SeriesId{i});

  std::vector<int> final_episode(trace.series_names.size(), 0);
  trace.catalog.resize(trace.content_names.size());
  for (std::uint32_t i = 0; i < trace.content_names.size(); ++i) {
    const auto& meta = contents_.at(trace.content_names[i]);
    auto& e = trace.catalog[i];
    e.kind = meta.kind;
    e.episode = meta.episode;
    if (meta.series) {
      e.series = series_index.at(*meta.series);
      final_episode[e.series->value] = std::max(final_episode[e.series->value], *meta.episode);
    }
  }
  for (auto& e : trace.catalog)
    if (e.series) e.final_episode = final_episode[e.series->value];

  trace.rebuild_indexes();

  std::vector<std::size_t> order(raw_.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw_[a].timestamp < raw_[b].timestamp; });

  trace.requests.reserve(raw_.size());
  for (std::size_t idx : order) {
    const auto& r = raw_[idx];
    Request req;
    req.user = *trace.find_user(r.user);
    req.content = *trace.find_content(r.content);
    req.timestamp = r.timestamp;
    const auto& e = trace.catalog[req.content.value];
    req.kind = e.kind;
    req.series = e.series;
    req.episode = e.episode;
    trace.requests.push_back(req);
  }
  raw_.clear();
  contents_.clear();
  return trace;
}

Trace parse_trace(std::istream& in) {
  TraceBuilder builder;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) continue;  // header
    if (line.empty() || line == "\r") continue;
    auto f = split_csv_line(line);
    if (f.size() != 6) throw ParseError(line_error(line_no, "expected 6 fields, got " + std::to_string(f.size())));
    if (f[0].empty() || f[1].empty()) throw ParseError(line_error(line_no, "empty user or content id"));

    double ts = 0.0;
    auto [ptr, ec] = std::from_chars(f[2].data(), f[2].data() + f[2].size(), ts);
    if (ec != std::errc{} || ptr != f[2].data() + f[2].size())
      throw ParseError(line_error(line_no, "malformed timestamp '" + f[2] + "'"));

    std::optional<std::string> series;
    std::optional<int> episode;
    if (!f[4].empty()) series = f[4];
    if (!f[5].empty()) {
      int ep = 0;
      auto [p2, ec2] = std::from_chars(f[5].data(), f[5].data() + f[5].size(), ep);
      if (ec2 != std::errc{} || p2 != f[5].data() + f[5].size())
        throw ParseError(line_error(line_no, "malformed episode '" + f[5] + "'"));
      episode = ep;
    }
    try {
      builder.add(f[0], f[1], ts, parse_content_kind(f[3]), series, episode);
    } catch (const ParseError& e) {
      throw ParseError(line_error(line_no, e.what()));
    }
  }
  return std::move(builder).build();
}

Trace parse_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open trace file " + path.string());
  return parse_trace(in);
}

void write_trace(const Trace& trace, std::ostream& out) {
  out << "user_id,content_id,timestamp,kind,series_id,episode\n";
  out << std::setprecision(17);
  for (const auto& r : trace.requests) {
    out << trace.name(r.user) << ',' << trace.name(r.content) << ',' << r.timestamp << ',' << to_string(r.kind) << ',';
    if (r.series) out << trace.series_names.at(r.series->value);
    out << ',';
    if (r.episode) out << *r.episode;
    out << '\n';
  }
}

void write_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file " + path.string());
  write_trace(trace, out);
}

std::pair<Trace, Trace> split_at(const Trace& trace, Seconds boundary) {
  std::vector<Request> before;
  std::vector<Request> after;
  for (const auto& r : trace.requests) (r.timestamp < boundary ? before : after).push_back(r);
  return {trace.with_requests(std::move(before)), trace.with_requests(std::move(after))};
}

std::size_t ActiveSets::user_count() const {
  return static_cast<std::size_t>(std::count(users.begin(), users.end(), 1));
}

std::size_t ActiveSets::content_count() const {
  return static_cast<std::size_t>(std::count(contents.begin(), contents.end(), 1));
}

ActiveSets filter_active(const Trace& trace, int min_count) {
  if (min_count < 1) throw ContractViolation("min_count must be >= 1");
  std::vector<int> user_counts(trace.user_count(), 0);
  std::vector<int> content_counts(trace.content_count(), 0);
  for (const auto& r : trace.requests) {
    ++user_counts[r.user.value];
    ++content_counts[r.content.value];
  }
  ActiveSets out;
  out.users.resize(user_counts.size());
  out.contents.resize(content_counts.size());
  for (std::size_t i = 0; i < user_counts.size(); ++i) out.users[i] = user_counts[i] >= min_count ? 1 : 0;
  for (std::size_t i = 0; i < content_counts.size(); ++i) out.contents[i] = content_counts[i] >= min_count ? 1 : 0;
  return out;
}

std::vector<std::vector<Request>> user_sequences(const Trace& trace, const ActiveSets* active) {
  std::vector<std::vector<Request>> seqs(trace.user_count());
  for (const auto& r : trace.requests) {
    if (active && (!active->has(r.user) || !active->has(r.content))) continue;
    seqs[r.user.value].push_back(r);
  }
  return seqs;
}

}  // namespace pec
