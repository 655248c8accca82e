#include "dasim/discovery.hpp"

#include <algorithm>
#include <chrono>

#include "dasim/errors.hpp"

namespace dasim {
namespace {

double seconds_between(TimePoint a, TimePoint b) {
  return std::chrono::duration<double>(b - a).count();
}

}  // namespace

ResourceSchema fallback_resources(const EventLog& log, const ProcessModel& process) {
  ResourceSchema rs;
  rs.pools.push_back({"pool", 1000, WeeklyCalendar::always_open()});
  std::map<std::string, std::vector<double>> durations;
  for (const auto& e : log.events())
    durations[e.activity].push_back(seconds_between(e.start_time, e.end_time));
  for (const auto& label : process.task_labels()) {
    rs.task_pool[label] = "pool";
    auto it = durations.find(label);
    rs.proc_time[label] = it == durations.end() ? Distribution::fixed(0.0)
                                                : fit_distribution(it->second).dist;
  }
  return rs;
}

ArrivalModel fitted_arrivals(const EventLog& log) {
  ArrivalModel am;
  std::map<std::string, TimePoint> first;
  for (const auto& e : log.events()) {
    auto [it, fresh] = first.emplace(e.case_id, e.start_time);
    if (!fresh && e.start_time < it->second) it->second = e.start_time;
  }
  std::vector<TimePoint> starts;
  for (const auto& [c, t] : first) starts.push_back(t);
  std::sort(starts.begin(), starts.end());
  std::vector<double> gaps;
  for (std::size_t i = 1; i < starts.size(); ++i) gaps.push_back(seconds_between(starts[i - 1], starts[i]));
  if (!gaps.empty()) am.inter_arrival = fit_distribution(gaps).dist;
  return am;
}

DiscoveryResult discover(const EventLog& log, const ProcessModel& process,
                         const std::optional<DASModel>& resource_template,
                         const DiscoveryOptions& opts) {
  DiscoveryResult res;
  DASModel& m = res.model;
  DiscoveryReport& rep = res.report;
  m.process = process;

  auto case_attrs = classify_case_attributes(log, opts.case_threshold);
  std::set<std::string> dynamic;
  for (const auto& [name, kind] : log.schema())
    if (!case_attrs.attributes.count(name)) dynamic.insert(name);

  res.classification =
      classify_dynamic(log, dynamic, default_init(log.schema(), dynamic), opts.classification);
  rep.unmatched_ends = res.classification.unmatched_ends;
  if (rep.unmatched_ends > 0)
    rep.warnings.push_back(std::to_string(rep.unmatched_ends) + " completions without a start");

  for (const auto& [name, kind] : log.schema()) {
    if (case_attrs.attributes.count(name)) {
      m.attributes.push_back({name, Scope::Case, kind, case_attrs.initializers.at(name), false});
      rep.scopes[name] = Scope::Case;
      continue;
    }
    const auto& c = res.classification.attributes.at(name);
    m.attributes.push_back({name, c.scope, c.kind, c.initializer, c.low_confidence});
    rep.scopes[name] = c.scope;
    if (c.low_confidence) {
      rep.low_confidence.push_back(name);
      rep.warnings.push_back("attribute '" + name + "' has too few samples; scope defaults to event");
    }
    for (const auto& [activity, rule] : c.kept_rules) {
      if (!process.task_by_label(activity)) {
        rep.warnings.push_back("rule for '" + name + "' at unknown activity '" + activity +
                               "' dropped");
        continue;
      }
      m.rules.push_back({name, Anchor::task_completion(activity), rule});
    }
  }

  auto rp = replay(log, process, m.attributes, opts.max_skipped_share);
  rep.replay = rp.stats;
  if (rp.stats.skipped > 0)
    rep.warnings.push_back(std::to_string(rp.stats.skipped) + " of " +
                           std::to_string(rp.stats.traces) + " traces could not be replayed");
  auto pd = discover_policies(rp.observations, process, m.attributes, opts.policy);
  m.policies = std::move(pd.policies);
  rep.warnings.insert(rep.warnings.end(), pd.warnings.begin(), pd.warnings.end());

  if (resource_template) {
    m.resources = resource_template->resources;
    m.arrivals = resource_template->arrivals;
  } else {
    m.resources = fallback_resources(log, process);
    m.arrivals = fitted_arrivals(log);
    rep.warnings.push_back("no resource model given; using a 1000-unit always-open pool");
  }
  m.validate();
  return res;
}

nlohmann::json to_json(const DiscoveryReport& r) {
  nlohmann::json scopes = nlohmann::json::object();
  for (const auto& [n, s] : r.scopes) scopes[n] = to_string(s);
  return {{"warnings", r.warnings},
          {"low_confidence", r.low_confidence},
          {"scopes", scopes},
          {"unmatched_ends", r.unmatched_ends},
          {"replay",
           {{"traces", r.replay.traces},
            {"replayed", r.replay.replayed},
            {"skipped", r.replay.skipped},
            {"skipped_cases", r.replay.skipped_cases}}}};
}

}  // namespace dasim
