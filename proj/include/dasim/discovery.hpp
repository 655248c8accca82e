#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dasim/attribute_discovery.hpp"
#include "dasim/branching_discovery.hpp"
#include "dasim/das_model.hpp"
#include "dasim/event_log.hpp"

namespace dasim {

struct DiscoveryOptions {
  double case_threshold = 0.9;
  ClassificationOptions classification;
  PolicyOptions policy;
  double max_skipped_share = 0.5;
};

struct DiscoveryReport {
  std::vector<std::string> warnings;
  std::vector<std::string> low_confidence;
  std::map<std::string, Scope> scopes;
  ReplayStats replay;
  std::size_t unmatched_ends = 0;
};

struct DiscoveryResult {
  DASModel model;
  DiscoveryReport report;
  ClassificationResult classification;
};

/// Resources when none are supplied: one 1000-unit always-open pool and processing
/// times fitted per activity from the log.
ResourceSchema fallback_resources(const EventLog& log, const ProcessModel& process);
/// Inter-arrival distribution fitted to the gaps between consecutive case starts.
ArrivalModel fitted_arrivals(const EventLog& log);

/// Full pipeline: case attributes, global/event classification with update rules, and
/// branching policies. Resources and arrivals come from `resource_template` when given,
/// otherwise from `fallback_resources` and `fitted_arrivals`.
DiscoveryResult discover(const EventLog& log, const ProcessModel& process,
                         const std::optional<DASModel>& resource_template,
                         const DiscoveryOptions& opts = {});

nlohmann::json to_json(const DiscoveryReport& r);

}  // namespace dasim
