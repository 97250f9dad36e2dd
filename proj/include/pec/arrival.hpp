#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pec/trace.hpp"

namespace pec {

/// Upper bound applied to raw watch-time samples, per content kind.
struct WatchCaps {
  Seconds tv = 3600.0;
  Seconds movie = 10800.0;
  Seconds show = 3600.0;
  Seconds other = 1800.0;

  Seconds of(ContentKind kind) const;
};

struct ContentWatchStats {
  Seconds mu = 0.0;
  Seconds sigma = 0.0;
  std::size_t n_samples = 0;
  /// Upper edge of the most populated histogram bin.
  Seconds length = 0.0;
};

/// Reduces capped samples to (mu, sigma): histogram in `bin_width` bins
/// closed on the right, keep samples up to the upper edge of the fullest bin
/// (larger bin on ties), then median and sample standard deviation.
ContentWatchStats summarize_watch_samples(std::vector<Seconds> samples, Seconds bin_width = 60.0);

struct WatchTimeStats {
  std::vector<std::optional<ContentWatchStats>> per_content;
  WatchCaps caps;
  Seconds bin_width = 60.0;
  Seconds default_mu = 1200.0;
  Seconds default_sigma = 600.0;

  const ContentWatchStats* find(ContentId c) const;
};

/// Samples are the gaps between a request and the same user's next request.
WatchTimeStats fit_watch_stats(const Trace& trace, const WatchCaps& caps = {}, Seconds bin_width = 60.0,
                               Seconds default_sigma = 600.0);

/// Window [tau + mu - sigma/2, tau + mu + sigma/2], clamped to start no
/// earlier than tau.
ArrivalWindow predict_arrival_window(const WatchTimeStats& stats, ContentId content, Seconds tau);

/// Columns: content, mu, sigma, n_samples, length.
void write_watch_stats_csv(const WatchTimeStats& stats, const Trace& names, std::ostream& out);
WatchTimeStats read_watch_stats_csv(std::istream& in, const Trace& names, const WatchCaps& caps = {},
                                    Seconds default_sigma = 600.0);

}  // namespace pec
