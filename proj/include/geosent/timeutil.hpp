#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace geosent {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

// RFC 3339 date-time ("2019-10-13T18:04:05Z", "...+02:00", fractional
// seconds allowed and truncated). Returns nullopt on any syntax error.
std::optional<Timestamp> parse_rfc3339(std::string_view text);
std::string format_rfc3339(Timestamp ts);

// Calendar date "YYYY-MM-DD".
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

}  // namespace geosent
