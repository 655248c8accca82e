#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dasim/das_model.hpp"
#include "dasim/decision_tree.hpp"
#include "dasim/event_log.hpp"

namespace dasim {

/// One decision taken at a split gateway during replay.
struct GatewayObservation {
  std::string gateway;
  std::string case_id;
  TimePoint time;             // completion of the task that fed the gateway
  AttributeMap features;      // every declared attribute
  std::set<std::string> taken;
};

struct ReplayStats {
  std::size_t traces = 0;
  std::size_t replayed = 0;
  std::size_t skipped = 0;
  std::vector<std::string> skipped_cases;
};

struct ReplayResult {
  std::vector<GatewayObservation> observations;
  ReplayStats stats;
};

/// Token replay of every trace. Attribute values are read at the completion time of the
/// task that produced the deciding token. Throws ReplayError when more than
/// `max_skipped_share` of the traces cannot be replayed.
ReplayResult replay(const EventLog& log, const ProcessModel& model,
                    const std::vector<AttributeDecl>& attributes,
                    double max_skipped_share = 0.5);

/// Feature table over `attributes` (declaration order) for the given observations.
FeatureTable feature_table(const std::vector<const GatewayObservation*>& obs,
                           const std::vector<AttributeDecl>& attributes);

ClassificationTree fit_flow_tree(const std::vector<const GatewayObservation*>& obs,
                                 const std::string& flow,
                                 const std::vector<AttributeDecl>& attributes,
                                 const TreeParams& params = {});

struct PolicyOptions {
  std::size_t min_samples = 50;
  TreeParams tree;
  double purity_min = 0.7;
  double accuracy_margin = 0.05;
  int folds = 5;
  /// Forces every condition to TRUE (data-unaware baseline).
  bool no_data = false;
};

struct PolicyDiscovery {
  std::map<std::string, GatewayPolicy> policies;
  std::vector<std::string> warnings;
};

PolicyDiscovery discover_policies(const std::vector<GatewayObservation>& observations,
                                  const ProcessModel& model,
                                  const std::vector<AttributeDecl>& attributes,
                                  const PolicyOptions& opts = {});

}  // namespace dasim
