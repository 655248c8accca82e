#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dasim/time.hpp"
#include "dasim/value.hpp"

namespace dasim {

/// One activity instance.
struct Event {
  std::string case_id;
  std::string activity;
  std::optional<std::string> resource;
  TimePoint start_time;
  TimePoint end_time;
  AttributeMap attributes;  // only attributes observed on this event

  friend bool operator==(const Event&, const Event&) = default;
};

using Schema = std::map<std::string, AttrKind>;

/// Immutable collection of events plus the kind of every attribute they carry.
class EventLog {
 public:
  EventLog() = default;
  /// Validates: non-empty activities, start <= end, every attribute declared in
  /// `schema` with a matching value kind. Throws ValidationError.
  EventLog(std::vector<Event> events, Schema schema);

  const std::vector<Event>& events() const noexcept { return events_; }
  const Schema& schema() const noexcept { return schema_; }
  std::size_t size() const noexcept { return events_.size(); }
  bool empty() const noexcept { return events_.empty(); }

  friend bool operator==(const EventLog&, const EventLog&) = default;

 private:
  std::vector<Event> events_;
  Schema schema_;
};

/// Events of one case, sorted by start, then end, then activity name.
struct Trace {
  std::string case_id;
  std::vector<const Event*> events;  // points into the owning EventLog
};

enum class Phase { Start, End };

/// Half of an event; START halves carry no attributes.
struct HalfEvent {
  std::string_view case_id;
  std::string_view activity;
  TimePoint timestamp;
  Phase phase;
  std::size_t event_index;             // index into EventLog::events()
  const AttributeMap* attributes;      // null for Phase::Start
  bool instantaneous = false;          // source event has start == end
};

struct CsvOptions {
  char delimiter = ',';
  std::string case_column = "case_id";
  std::string activity_column = "activity";
  std::string resource_column = "resource";
  std::string start_column = "start_time";
  std::string end_column = "end_time";
  /// Offset (minutes east of UTC) applied to timestamps without a zone designator.
  /// When unset such timestamps are rejected.
  std::optional<int> default_utc_offset_minutes;
};

/// Reads an activity-instance CSV log. Missing mandatory column -> SchemaError;
/// bad timestamp or start > end -> RowError carrying the physical line number.
EventLog parse_log(std::istream& in, const CsvOptions& options = {});
EventLog parse_log_file(const std::string& path, const CsvOptions& options = {});

void write_log(std::ostream& out, const EventLog& log, const CsvOptions& options = {});
void write_log_file(const std::string& path, const EventLog& log, const CsvOptions& options = {});

/// Strict ordering used inside a trace.
bool trace_order(const Event& a, const Event& b);

/// One trace per case id, in ascending case id order.
std::vector<Trace> traces(const EventLog& log);

/// Whole traces ordered by first start time; the first ceil(ratio * N) go to train.
std::pair<EventLog, EventLog> split_temporal(const EventLog& log, double ratio);

}  // namespace dasim
