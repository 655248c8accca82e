#pragma once

#include <vector>

#include "dasim/time.hpp"

namespace dasim {

inline constexpr Millis kWeek{7LL * 24 * 3600 * 1000};
inline constexpr Millis kDay{24LL * 3600 * 1000};

/// Weekly availability as half-open intervals of the week, Monday 00:00 UTC = 0.
/// Intervals are normalized on construction (sorted, merged); at least one must remain.
class WeeklyCalendar {
 public:
  struct Interval {
    Millis begin;
    Millis end;
    friend bool operator==(const Interval&, const Interval&) = default;
  };

  WeeklyCalendar();  // always open
  explicit WeeklyCalendar(std::vector<Interval> intervals);

  static WeeklyCalendar always_open() { return WeeklyCalendar(); }

  bool is_open(TimePoint t) const;
  bool is_always_open() const;

  /// Earliest open instant at or after t.
  TimePoint next_open(TimePoint t) const;

  /// Completion instant of `work` processing started at `start`, pausing across closed
  /// intervals. `work == 0` returns `start` unchanged.
  TimePoint advance(TimePoint start, Millis work) const;

  /// Open time contained in [a, b).
  Millis open_time_between(TimePoint a, TimePoint b) const;

  const std::vector<Interval>& intervals() const { return intervals_; }

  friend bool operator==(const WeeklyCalendar&, const WeeklyCalendar&) = default;

 private:
  std::vector<Interval> intervals_;
};

/// Offset of t within its week and the absolute start of that week.
struct WeekPosition {
  TimePoint week_start;
  Millis offset;
};
WeekPosition week_position(TimePoint t);

}  // namespace dasim
