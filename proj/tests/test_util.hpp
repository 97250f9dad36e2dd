#pragma once

#include <sstream>
#include <string>

#include "pec/trace.hpp"

namespace pec::testing {

/// Parses trace rows given without the header line.
inline Trace trace_from_rows(const std::string& rows) {
  std::istringstream in("user_id,content_id,timestamp,kind,series_id,episode\n" + rows);
  return parse_trace(in);
}

inline ContentId cid(const Trace& t, const std::string& name) { return *t.find_content(name); }
inline UserId uid(const Trace& t, const std::string& name) { return *t.find_user(name); }

}  // namespace pec::testing
