#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace pec {

/// Dense index into a trace's content table. Index order equals the
/// lexicographic order of the original content identifiers.
struct ContentId {
  std::uint32_t value = 0;
  auto operator<=>(const ContentId&) const = default;
};

/// Dense index into a trace's user table.
struct UserId {
  std::uint32_t value = 0;
  auto operator<=>(const UserId&) const = default;
};

/// Dense index into a trace's series table.
struct SeriesId {
  std::uint32_t value = 0;
  auto operator<=>(const SeriesId&) const = default;
};

/// Seconds since trace origin.
using Seconds = double;

enum class ContentKind : std::uint8_t { TvSeries, Movie, Show, Other };

inline constexpr std::size_t kContentKindCount = 4;

std::string to_string(ContentKind kind);
ContentKind parse_content_kind(const std::string& text);

/// A content paired with a model score or fused weight.
struct ScoredContent {
  ContentId content;
  double score = 0.0;
  bool operator==(const ScoredContent&) const = default;
};

/// Predicted arrival window of a user's next request.
struct ArrivalWindow {
  Seconds a = 0.0;
  Seconds b = 0.0;
  Seconds mid = 0.0;
  bool operator==(const ArrivalWindow&) const = default;
};

/// Raised when an input file or document cannot be parsed.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a caller violates an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Raised for invalid configuration values.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace pec

template <>
struct std::hash<pec::ContentId> {
  std::size_t operator()(pec::ContentId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};

template <>
struct std::hash<pec::UserId> {
  std::size_t operator()(pec::UserId id) const noexcept { return std::hash<std::uint32_t>{}(id.value); }
};
