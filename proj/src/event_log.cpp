#include "dasim/event_log.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>

#include "dasim/errors.hpp"

namespace dasim {

EventLog::EventLog(std::vector<Event> events, Schema schema)
    : events_(std::move(events)), schema_(std::move(schema)) {
  std::vector<std::string> issues;
  for (std::size_t i = 0; i < events_.size() && issues.size() < 20; ++i) {
    const auto& e = events_[i];
    if (e.activity.empty()) issues.push_back("event " + std::to_string(i) + ": empty activity");
    if (e.start_time > e.end_time)
      issues.push_back("event " + std::to_string(i) + ": start after end");
    for (const auto& [name, value] : e.attributes) {
      auto it = schema_.find(name);
      if (it == schema_.end()) {
        issues.push_back("event " + std::to_string(i) + ": attribute '" + name + "' not in schema");
      } else if (it->second != kind_of(value)) {
        issues.push_back("event " + std::to_string(i) + ": attribute '" + name +
                         "' has wrong kind");
      }
    }
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

namespace {

class CsvReader {
 public:
  CsvReader(std::istream& in, char delim) : in_(in), delim_(delim) {}

  /// Reads one record; returns false at end of input. `line` receives the
  /// physical line on which the record starts.
  bool next(std::vector<std::string>& fields, std::size_t& line) {
    fields.clear();
    int c = in_.get();
    if (c == EOF) return false;
    line = line_;
    std::string field;
    bool quoted = false;
    bool field_started = false;
    while (true) {
      if (c == EOF) {
        if (quoted) throw RowError(line, "unterminated quoted field");
        fields.push_back(std::move(field));
        return true;
      }
      char ch = static_cast<char>(c);
      if (quoted) {
        if (ch == '"') {
          if (in_.peek() == '"') {
            field.push_back('"');
            in_.get();
          } else {
            quoted = false;
          }
        } else {
          if (ch == '\n') ++line_;
          field.push_back(ch);
        }
      } else if (ch == '"' && !field_started) {
        quoted = true;
        field_started = true;
      } else if (ch == delim_) {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
      } else if (ch == '\r' && in_.peek() == '\n') {
        // swallowed; newline handled next
      } else if (ch == '\n') {
        ++line_;
        fields.push_back(std::move(field));
        return true;
      } else {
        field.push_back(ch);
        field_started = true;
      }
      c = in_.get();
    }
  }

 private:
  std::istream& in_;
  char delim_;
  std::size_t line_ = 1;
};

std::string quote_if_needed(const std::string& s, char delim) {
  bool needs = s.find_first_of(std::string{delim, '"', '\n', '\r'}) != std::string::npos ||
               (!s.empty() && (s.front() == ' ' || s.back() == ' '));
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace

EventLog parse_log(std::istream& in, const CsvOptions& options) {
  CsvReader reader(in, options.delimiter);
  std::vector<std::string> header;
  std::size_t line = 0;
  if (!reader.next(header, line)) throw SchemaError("empty input: no header row");
  if (!header.empty() && header[0].rfind("\xEF\xBB\xBF", 0) == 0) header[0].erase(0, 3);

  auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  std::vector<std::string> missing;
  auto case_col = find_col(options.case_column);
  auto act_col = find_col(options.activity_column);
  auto start_col = find_col(options.start_column);
  auto end_col = find_col(options.end_column);
  auto res_col = find_col(options.resource_column);
  if (!case_col) missing.push_back(options.case_column);
  if (!act_col) missing.push_back(options.activity_column);
  if (!start_col) missing.push_back(options.start_column);
  if (!end_col) missing.push_back(options.end_column);
  if (!missing.empty()) {
    std::string msg = "missing mandatory column(s):";
    for (const auto& m : missing) msg += " " + m;
    throw SchemaError(msg);
  }

  std::vector<std::size_t> attr_cols;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i == *case_col || i == *act_col || i == *start_col || i == *end_col ||
        (res_col && i == *res_col))
      continue;
    attr_cols.push_back(i);
  }

  struct RawRow {
    std::size_t line;
    std::vector<std::string> cells;
  };
  std::vector<RawRow> rows;
  std::vector<bool> numeric(attr_cols.size(), true);
  std::vector<std::string> fields;
  while (reader.next(fields, line)) {
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != header.size())
      throw RowError(line, "expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    for (std::size_t k = 0; k < attr_cols.size(); ++k) {
      const auto& cell = fields[attr_cols[k]];
      if (numeric[k] && !cell.empty() && !parse_number(cell)) numeric[k] = false;
    }
    rows.push_back({line, fields});
  }

  Schema schema;
  for (std::size_t k = 0; k < attr_cols.size(); ++k)
    schema[header[attr_cols[k]]] = numeric[k] ? AttrKind::Numeric : AttrKind::Categorical;

  std::vector<Event> events;
  events.reserve(rows.size());
  for (auto& row : rows) {
    Event e;
    e.case_id = row.cells[*case_col];
    e.activity = row.cells[*act_col];
    if (e.activity.empty()) throw RowError(row.line, "empty activity");
    if (res_col && !row.cells[*res_col].empty()) e.resource = row.cells[*res_col];
    auto start = parse_timestamp(row.cells[*start_col], options.default_utc_offset_minutes);
    if (!start) throw RowError(row.line, "unparsable start timestamp '" + row.cells[*start_col] + "'");
    auto end = parse_timestamp(row.cells[*end_col], options.default_utc_offset_minutes);
    if (!end) throw RowError(row.line, "unparsable end timestamp '" + row.cells[*end_col] + "'");
    if (*start > *end) throw RowError(row.line, "start time after end time");
    e.start_time = *start;
    e.end_time = *end;
    for (std::size_t k = 0; k < attr_cols.size(); ++k) {
      auto& cell = row.cells[attr_cols[k]];
      if (cell.empty()) continue;
      if (numeric[k]) e.attributes.emplace(header[attr_cols[k]], *parse_number(cell));
      else e.attributes.emplace(header[attr_cols[k]], std::move(cell));
    }
    events.push_back(std::move(e));
  }
  return EventLog(std::move(events), std::move(schema));
}

EventLog parse_log_file(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open log file '" + path + "'");
  return parse_log(in, options);
}

void write_log(std::ostream& out, const EventLog& log, const CsvOptions& options) {
  const char d = options.delimiter;
  out << quote_if_needed(options.case_column, d) << d << quote_if_needed(options.activity_column, d)
      << d << quote_if_needed(options.resource_column, d) << d
      << quote_if_needed(options.start_column, d) << d << quote_if_needed(options.end_column, d);
  for (const auto& [name, kind] : log.schema()) out << d << quote_if_needed(name, d);
  out << '\n';
  for (const auto& e : log.events()) {
    out << quote_if_needed(e.case_id, d) << d << quote_if_needed(e.activity, d) << d
        << quote_if_needed(e.resource.value_or(""), d) << d << format_timestamp(e.start_time) << d
        << format_timestamp(e.end_time);
    for (const auto& [name, kind] : log.schema()) {
      out << d;
      auto it = e.attributes.find(name);
      if (it != e.attributes.end()) out << quote_if_needed(format_value(it->second), d);
    }
    out << '\n';
  }
}

void write_log_file(const std::string& path, const EventLog& log, const CsvOptions& options) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw SchemaError("cannot open '" + path + "' for writing");
  write_log(out, log, options);
}

bool trace_order(const Event& a, const Event& b) {
  if (a.start_time != b.start_time) return a.start_time < b.start_time;
  if (a.end_time != b.end_time) return a.end_time < b.end_time;
  return a.activity < b.activity;
}

std::vector<Trace> traces(const EventLog& log) {
  std::map<std::string_view, std::vector<const Event*>> by_case;
  for (const auto& e : log.events()) by_case[e.case_id].push_back(&e);
  std::vector<Trace> out;
  out.reserve(by_case.size());
  for (auto& [id, evs] : by_case) {
    // stable: exact duplicates keep log order
    std::stable_sort(evs.begin(), evs.end(),
                     [](const Event* a, const Event* b) { return trace_order(*a, *b); });
    out.push_back(Trace{std::string(id), std::move(evs)});
  }
  return out;
}

std::pair<EventLog, EventLog> split_temporal(const EventLog& log, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0))
    throw ArgumentError("split ratio must lie in (0,1), got " + format_number(ratio));
  auto ts = traces(log);
  std::stable_sort(ts.begin(), ts.end(), [](const Trace& a, const Trace& b) {
    return a.events.front()->start_time < b.events.front()->start_time;
  });
  auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(ts.size()) - 1e-9));
  std::set<std::string_view> train_cases;
  for (std::size_t i = 0; i < n_train && i < ts.size(); ++i) train_cases.insert(ts[i].case_id);

  std::vector<Event> train, test;
  for (const auto& e : log.events()) {
    (train_cases.count(e.case_id) ? train : test).push_back(e);
  }
  return {EventLog(std::move(train), log.schema()), EventLog(std::move(test), log.schema())};
}

}  // namespace dasim
