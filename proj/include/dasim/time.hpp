#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>

namespace dasim {

using Millis = std::chrono::milliseconds;
/// UTC instant at millisecond precision.
using TimePoint = std::chrono::sys_time<Millis>;

/// Parses ISO-8601 `YYYY-MM-DD[T| ]HH:MM:SS[.fff][Z|±HH:MM|±HHMM]`.
/// A timestamp without a zone designator is rejected unless `default_offset`
/// (minutes east of UTC) is supplied. Returns nullopt on malformed input.
std::optional<TimePoint> parse_timestamp(std::string_view text,
                                         std::optional<int> default_offset = std::nullopt);

/// Canonical UTC rendering, always with milliseconds: `2024-01-01T08:30:00.000Z`.
std::string format_timestamp(TimePoint t);

/// Converts fractional seconds to whole milliseconds (rounded, negative clamped to 0).
Millis seconds_to_millis(double seconds);

}  // namespace dasim
