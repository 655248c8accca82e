#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dasim/das_model.hpp"
#include "dasim/event_log.hpp"
#include "dasim/sim_engine.hpp"

namespace dasim::testing {

inline TimePoint at(double seconds) {
  return TimePoint{} + Millis(static_cast<long long>(seconds * 1000.0 + 0.5));
}

inline Event ev(std::string case_id, std::string activity, double start, double end,
                AttributeMap attrs = {}) {
  return Event{std::move(case_id), std::move(activity), std::nullopt, at(start), at(end),
               std::move(attrs)};
}

inline EventLog make_log(std::vector<Event> events) {
  Schema schema;
  for (const auto& e : events)
    for (const auto& [k, v] : e.attributes) schema[k] = kind_of(v);
  return EventLog(std::move(events), std::move(schema));
}

inline Node task(std::string id, std::string label) {
  return {std::move(id), NodeKind::Task, std::move(label), {}, {}};
}
inline Node gateway(std::string id, GateType g, Direction d) {
  return {std::move(id), NodeKind::Gateway, "", g, d};
}
inline Node start_event() { return {"start", NodeKind::StartEvent, "", {}, {}}; }
inline Node end_event() { return {"end", NodeKind::EndEvent, "", {}, {}}; }

/// start -> labels... -> end
inline ProcessModel chain(const std::vector<std::string>& labels) {
  std::vector<Node> nodes{start_event()};
  std::vector<Flow> flows;
  std::string prev = "start";
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::string id = "t" + std::to_string(i);
    nodes.push_back(task(id, labels[i]));
    flows.push_back({"f" + std::to_string(i), prev, id});
    prev = id;
  }
  nodes.push_back(end_event());
  flows.push_back({"f" + std::to_string(labels.size()), prev, "end"});
  return ProcessModel(std::move(nodes), std::move(flows), {});
}

/// start -> A -> split(g) -> {B via fB, C via fC} -> join -> end. Default flow fC.
inline ProcessModel branching(GateType type) {
  std::vector<Node> nodes{start_event(),
                          task("a", "A"),
                          gateway("g", type, Direction::Split),
                          task("b", "B"),
                          task("c", "C"),
                          gateway("j", type, Direction::Join),
                          end_event()};
  std::vector<Flow> flows{{"f0", "start", "a"}, {"f1", "a", "g"},  {"fB", "g", "b"},
                          {"fC", "g", "c"},     {"fb", "b", "j"},  {"fc", "c", "j"},
                          {"f9", "j", "end"}};
  std::map<std::string, std::string> defaults;
  if (type != GateType::And) defaults["g"] = "fC";
  return ProcessModel(std::move(nodes), std::move(flows), std::move(defaults));
}

/// Every task on one always-open pool of `size` units with a fixed duration.
inline DASModel with_resources(ProcessModel pm, int size = 1000, double seconds = 60.0) {
  DASModel m;
  m.resources.pools.push_back({"pool", size, WeeklyCalendar::always_open()});
  for (const auto& l : pm.task_labels()) {
    m.resources.task_pool[l] = "pool";
    m.resources.proc_time[l] = Distribution::fixed(seconds);
  }
  m.process = std::move(pm);
  m.arrivals.inter_arrival = Distribution::fixed(600.0);
  return m;
}

inline SimConfig sim_config(std::size_t n, std::uint64_t seed) {
  SimConfig c;
  c.n_cases = n;
  c.seed = seed;
  return c;
}

/// An XOR split closed by an AND join: every case waits forever at the join.
inline DASModel deadlock_model() {
  std::vector<Node> nodes{start_event(), task("a", "A"), gateway("g", GateType::Xor, Direction::Split),
                          task("b", "B"), task("c", "C"), gateway("j", GateType::And, Direction::Join),
                          end_event()};
  std::vector<Flow> flows{{"f0", "start", "a"}, {"f1", "a", "g"}, {"fB", "g", "b"}, {"fC", "g", "c"},
                          {"fb", "b", "j"},     {"fc", "c", "j"}, {"f9", "j", "end"}};
  auto m = with_resources(ProcessModel(std::move(nodes), std::move(flows), {{"g", "fC"}}));
  m.policies["g"] = GatewayPolicy{{{"fB", Condition::always(), 0.5}, {"fC", Condition::always(), 0.5}}};
  return m;
}

}  // namespace dasim::testing
