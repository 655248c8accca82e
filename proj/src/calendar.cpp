#include "dasim/calendar.hpp"

#include <algorithm>

#include "dasim/errors.hpp"

namespace dasim {
namespace {
// 1970-01-01 was a Thursday; shifting by three days puts Monday at offset zero.
constexpr Millis kEpochShift{3LL * 24 * 3600 * 1000};
}  // namespace

WeekPosition week_position(TimePoint t) {
  auto shifted = t.time_since_epoch() + kEpochShift;
  auto week_index = shifted.count() / kWeek.count();
  if (shifted.count() < 0 && shifted.count() % kWeek.count() != 0) --week_index;
  Millis week_begin{week_index * kWeek.count()};
  return {TimePoint{week_begin - kEpochShift}, shifted - week_begin};
}

WeeklyCalendar::WeeklyCalendar() : intervals_{{Millis{0}, kWeek}} {}

WeeklyCalendar::WeeklyCalendar(std::vector<Interval> intervals) {
  std::vector<Interval> clean;
  for (auto iv : intervals) {
    iv.begin = std::clamp(iv.begin, Millis{0}, kWeek);
    iv.end = std::clamp(iv.end, Millis{0}, kWeek);
    if (iv.end > iv.begin) clean.push_back(iv);
  }
  if (clean.empty()) throw ValidationError({"calendar has no open interval"});
  std::sort(clean.begin(), clean.end(),
            [](const Interval& a, const Interval& b) { return a.begin < b.begin; });
  for (const auto& iv : clean) {
    if (!intervals_.empty() && iv.begin <= intervals_.back().end) {
      intervals_.back().end = std::max(intervals_.back().end, iv.end);
    } else {
      intervals_.push_back(iv);
    }
  }
}

bool WeeklyCalendar::is_always_open() const {
  return intervals_.size() == 1 && intervals_[0].begin == Millis{0} && intervals_[0].end == kWeek;
}

bool WeeklyCalendar::is_open(TimePoint t) const {
  auto off = week_position(t).offset;
  return std::any_of(intervals_.begin(), intervals_.end(),
                     [&](const Interval& iv) { return iv.begin <= off && off < iv.end; });
}

TimePoint WeeklyCalendar::next_open(TimePoint t) const {
  auto [week_start, off] = week_position(t);
  for (const auto& iv : intervals_) {
    if (off < iv.end) return off >= iv.begin ? t : week_start + iv.begin;
  }
  return week_start + kWeek + intervals_.front().begin;
}

TimePoint WeeklyCalendar::advance(TimePoint start, Millis work) const {
  if (work <= Millis{0}) return start;
  if (is_always_open()) return start + work;
  TimePoint t = start;
  Millis remaining = work;
  while (true) {
    t = next_open(t);
    auto [week_start, off] = week_position(t);
    auto it = std::find_if(intervals_.begin(), intervals_.end(),
                           [&](const Interval& iv) { return iv.begin <= off && off < iv.end; });
    Millis available = it->end - off;
    if (available >= remaining) return t + remaining;
    remaining -= available;
    t = week_start + it->end;
  }
}

Millis WeeklyCalendar::open_time_between(TimePoint a, TimePoint b) const {
  Millis total{0};
  TimePoint t = a;
  while (t < b) {
    t = next_open(t);
    if (t >= b) break;
    auto [week_start, off] = week_position(t);
    auto it = std::find_if(intervals_.begin(), intervals_.end(),
                           [&](const Interval& iv) { return iv.begin <= off && off < iv.end; });
    TimePoint stop = std::min(b, week_start + it->end);
    total += stop - t;
    t = stop;
  }
  return total;
}

}  // namespace dasim
