#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pec/types.hpp"

namespace pec {

/// One user content retrieval event.
struct Request {
  UserId user;
  ContentId content;
  Seconds timestamp = 0.0;
  ContentKind kind = ContentKind::Other;
  std::optional<SeriesId> series;
  std::optional<int> episode;
};

struct CatalogEntry {
  ContentKind kind = ContentKind::Other;
  std::optional<SeriesId> series;
  std::optional<int> episode;
  std::optional<int> final_episode;
};

/// A request log plus the interned identifier tables it refers to.
///
/// Requests are sorted by timestamp; ties keep input order. Content ids are
/// interned in lexicographic order of their names, so comparing ContentId
/// values compares the original identifiers.
struct Trace {
  std::vector<Request> requests;
  std::vector<CatalogEntry> catalog;
  std::vector<std::string> content_names;
  std::vector<std::string> user_names;
  std::vector<std::string> series_names;

  std::size_t content_count() const { return content_names.size(); }
  std::size_t user_count() const { return user_names.size(); }

  const CatalogEntry& entry(ContentId c) const { return catalog.at(c.value); }
  const std::string& name(ContentId c) const { return content_names.at(c.value); }
  const std::string& name(UserId u) const { return user_names.at(u.value); }

  std::optional<ContentId> find_content(const std::string& name) const;
  std::optional<UserId> find_user(const std::string& name) const;
  /// Content holding episode `episode` of `series`, if it is in the catalog.
  std::optional<ContentId> episode_of(SeriesId series, int episode) const;

  /// Returns a trace with the same tables and only the requests selected.
  Trace with_requests(std::vector<Request> selected) const;

  void rebuild_indexes();

 private:
  std::unordered_map<std::string, ContentId> content_index_;
  std::unordered_map<std::string, UserId> user_index_;
  std::unordered_map<std::uint64_t, ContentId> episode_index_;
};

/// Accumulates raw string-keyed requests and interns them into a Trace.
class TraceBuilder {
 public:
  /// Throws ParseError if the content was seen earlier with different metadata.
  void add(const std::string& user, const std::string& content, Seconds timestamp, ContentKind kind,
           const std::optional<std::string>& series, std::optional<int> episode);

  Trace build() &&;

 private:
  struct RawRequest {
    std::string user;
    std::string content;
    Seconds timestamp;
  };
  struct RawContent {
    ContentKind kind;
    std::optional<std::string> series;
    std::optional<int> episode;
  };
  std::vector<RawRequest> raw_;
  std::unordered_map<std::string, RawContent> contents_;
};

Trace parse_trace(const std::filesystem::path& path);
Trace parse_trace(std::istream& in);

void write_trace(const Trace& trace, const std::filesystem::path& path);
void write_trace(const Trace& trace, std::ostream& out);

/// Requests with timestamp < boundary go to the first trace, the rest to the second.
std::pair<Trace, Trace> split_at(const Trace& trace, Seconds boundary);

struct ActiveSets {
  std::vector<char> users;
  std::vector<char> contents;

  bool has(UserId u) const { return u.value < users.size() && users[u.value] != 0; }
  bool has(ContentId c) const { return c.value < contents.size() && contents[c.value] != 0; }
  std::size_t user_count() const;
  std::size_t content_count() const;
};

/// Users and contents with at least `min_count` requests in `trace`.
ActiveSets filter_active(const Trace& trace, int min_count);

/// Per-user request sequences in timestamp order, optionally restricted to
/// active users and contents.
std::vector<std::vector<Request>> user_sequences(const Trace& trace, const ActiveSets* active = nullptr);

}  // namespace pec
