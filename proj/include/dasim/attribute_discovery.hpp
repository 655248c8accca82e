#pragma once

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dasim/das_model.hpp"
#include "dasim/event_log.hpp"
#include "dasim/update_rules.hpp"

namespace dasim {

/// Starting value of every tracked attribute before anything is observed.
using InitGenerator = std::map<std::string, Value>;

/// 0 for numeric attributes and the unset category for categorical ones.
InitGenerator default_init(const Schema& schema, const std::set<std::string>& attributes);

struct CaseAttributeResult {
  std::set<std::string> attributes;
  std::map<std::string, UpdateRule> initializers;
  /// Share of observing cases in which the attribute is constant.
  std::map<std::string, double> constant_share;
};

CaseAttributeResult classify_case_attributes(const EventLog& log, double threshold = 0.9);

/// Two half-events per event, START then END, in log order.
std::vector<HalfEvent> split_event_log(const EventLog& log);

/// Timeline order: timestamp, then END of a positive-duration event before any START,
/// then END of a zero-duration event, then log position.
bool half_event_before(const HalfEvent& a, const HalfEvent& b);

enum class Hypothesis { Event, Global };

/// Half-events ordered for a hypothesis: grouped by case (cases by first start) for
/// the event hypothesis, one log-wide timeline for the global one.
std::vector<HalfEvent> order_half_events(const EventLog& log, Hypothesis h);

struct TransitionStore {
  std::map<std::pair<std::string, std::string>, std::vector<TransitionPair>> pairs;  // (activity, attribute)
  std::size_t unmatched_ends = 0;

  const std::vector<TransitionPair>* find(const std::string& activity,
                                          const std::string& attribute) const;
};

/// Walks the timeline with one running value per attribute. `reset_each_case` restores
/// `init` whenever the case changes (the timeline must then be grouped by case).
TransitionStore find_data_values(const std::vector<HalfEvent>& halves, const InitGenerator& init,
                                 bool reset_each_case);

struct HypothesisScore {
  double error = 0.0;
  std::size_t samples = 0;
  std::map<std::string, FitReport> rules;  // activity -> best rule
};

struct AttributeClassification {
  std::string name;
  AttrKind kind = AttrKind::Numeric;
  Scope scope = Scope::Event;
  HypothesisScore event;
  HypothesisScore global;
  bool low_confidence = false;
  /// Rules of the winning hypothesis that pass the change filter.
  std::map<std::string, UpdateRule> kept_rules;
  UpdateRule initializer = GeneratorRule{Distribution::fixed(0.0)};
};

struct ClassificationOptions {
  std::size_t min_samples = 30;
  FitOptions fit;
};

struct ClassificationResult {
  std::map<std::string, AttributeClassification> attributes;
  std::size_t unmatched_ends = 0;
};

/// Classifies each attribute in `dynamic` as global or event scope and fits its rules.
ClassificationResult classify_dynamic(const EventLog& log, const std::set<std::string>& dynamic,
                                      const InitGenerator& init,
                                      const ClassificationOptions& opts = {});

}  // namespace dasim
