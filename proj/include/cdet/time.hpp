#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace cdet {

using Timestamp = std::chrono::sys_seconds;
using Date = std::chrono::sys_days;

/// Parses an ISO-8601 timestamp: `YYYY-MM-DD[T| ]hh:mm:ss[.fff][Z|+hh:mm|-hh:mm]`.
/// A missing zone designator is read as UTC; fractional seconds are truncated.
/// Throws Error{BadTimestamp}.
Timestamp parse_timestamp(std::string_view text);

/// Parses `YYYY-MM-DD`. Throws Error{BadTimestamp}.
Date parse_date(std::string_view text);

std::string format_timestamp(Timestamp t);  // YYYY-MM-DDThh:mm:ssZ
std::string format_date(Date d);            // YYYY-MM-DD

inline Date day_of(Timestamp t) { return std::chrono::floor<std::chrono::days>(t); }

} // namespace cdet
