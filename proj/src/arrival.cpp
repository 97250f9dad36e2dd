#include "pec/arrival.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>

namespace pec {

namespace {

constexpr Seconds kMinMu = 1.0;

Seconds median_of_sorted(const std::vector<Seconds>& v) {
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

Seconds WatchCaps::of(ContentKind kind) const {
  switch (kind) {
    case ContentKind::TvSeries:
      return tv;
    case ContentKind::Movie:
      return movie;
    case ContentKind::Show:
      return show;
    case ContentKind::Other:
      break;
  }
  return other;
}

ContentWatchStats summarize_watch_samples(std::vector<Seconds> samples, Seconds bin_width) {
  ContentWatchStats out;
  if (samples.empty()) return out;
  if (!(bin_width > 0.0)) throw ContractViolation("bin width must be positive");

  // Bin k covers (k*w, (k+1)*w]; a zero sample falls in bin 0.
  std::map<long, std::size_t> bins;
  for (Seconds x : samples) {
    const long k = x <= 0.0 ? 0 : static_cast<long>(std::ceil(x / bin_width)) - 1;
    ++bins[k];
  }
  long mode = 0;
  std::size_t best = 0;
  for (const auto& [k, count] : bins)
    if (count >= best) {
      best = count;
      mode = k;
    }
  out.length = static_cast<Seconds>(mode + 1) * bin_width;

  std::vector<Seconds> kept;
  for (Seconds x : samples)
    if (x <= out.length) kept.push_back(x);
  std::sort(kept.begin(), kept.end());
  out.n_samples = kept.size();
  out.mu = std::max(kMinMu, median_of_sorted(kept));

  if (kept.size() > 1) {
    double mean = 0.0;
    for (Seconds x : kept) mean += x;
    mean /= static_cast<double>(kept.size());
    double ss = 0.0;
    for (Seconds x : kept) ss += (x - mean) * (x - mean);
    out.sigma = std::sqrt(ss / static_cast<double>(kept.size() - 1));
  }
  return out;
}

const ContentWatchStats* WatchTimeStats::find(ContentId c) const {
  if (c.value >= per_content.size() || !per_content[c.value]) return nullptr;
  return &*per_content[c.value];
}

WatchTimeStats fit_watch_stats(const Trace& trace, const WatchCaps& caps, Seconds bin_width, Seconds default_sigma) {
  WatchTimeStats stats;
  stats.caps = caps;
  stats.bin_width = bin_width;
  stats.default_sigma = default_sigma;
  stats.per_content.resize(trace.content_count());

  std::vector<std::vector<Seconds>> samples(trace.content_count());
  for (const auto& seq : user_sequences(trace)) {
    for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
      const Seconds gap = seq[i + 1].timestamp - seq[i].timestamp;
      samples[seq[i].content.value].push_back(std::min(gap, caps.of(seq[i].kind)));
    }
  }
  for (std::size_t c = 0; c < samples.size(); ++c)
    if (!samples[c].empty()) stats.per_content[c] = summarize_watch_samples(std::move(samples[c]), bin_width);
  return stats;
}

ArrivalWindow predict_arrival_window(const WatchTimeStats& stats, ContentId content, Seconds tau) {
  Seconds mu = stats.default_mu;
  Seconds sigma = stats.default_sigma;
  if (const auto* s = stats.find(content)) {
    mu = s->mu;
    sigma = s->sigma;
  }
  ArrivalWindow w;
  w.a = std::max(tau, tau + mu - sigma / 2.0);
  w.b = std::max(w.a, tau + mu + sigma / 2.0);
  w.mid = (w.a + w.b) / 2.0;
  return w;
}

void write_watch_stats_csv(const WatchTimeStats& stats, const Trace& names, std::ostream& out) {
  out << "content,mu,sigma,n_samples,length\n";
  out.precision(17);
  for (std::uint32_t c = 0; c < stats.per_content.size(); ++c) {
    const auto& s = stats.per_content[c];
    if (!s) continue;
    out << names.name(ContentId{c}) << ',' << s->mu << ',' << s->sigma << ',' << s->n_samples << ',' << s->length
        << '\n';
  }
}

WatchTimeStats read_watch_stats_csv(std::istream& in, const Trace& names, const WatchCaps& caps,
                                    Seconds default_sigma) {
  WatchTimeStats stats;
  stats.caps = caps;
  stats.default_sigma = default_sigma;
  stats.per_content.resize(names.content_count());
  std::string line;
  std::getline(in, line);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string name, mu, sigma, n, length;
    if (!std::getline(ss, name, ',') || !std::getline(ss, mu, ',') || !std::getline(ss, sigma, ',') ||
        !std::getline(ss, n, ',') || !std::getline(ss, length))
      throw ParseError("watch stats line " + std::to_string(line_no) + ": expected 5 fields");
    auto id = names.find_content(name);
    if (!id) throw ParseError("watch stats line " + std::to_string(line_no) + ": unknown content '" + name + "'");
    try {
      stats.per_content[id->value] = ContentWatchStats{std::stod(mu), std::stod(sigma), std::stoul(n), std::stod(length)};
    } catch (const std::logic_error&) {
      throw ParseError("watch stats line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return stats;
}

}  // namespace pec
