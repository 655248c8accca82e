#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dasim/das_model.hpp"
#include "dasim/event_log.hpp"
#include "json.hpp"

namespace dasim {

enum class Placement { SE, ME, SG, MG };

std::string_view to_string(Placement p);
Placement parse_placement(std::string_view text);

/// Numeric: LT EG LN AR1 CE SS SR PL UD ND.
/// Categorical: HST UET UIT RST SDT CT E2P N2P E5P N5P.
/// Case attributes: CFX CEX CND CUD C2E C2N C5E C5N C10E C10N (placement ignored).
struct PatternSpec {
  std::string pattern;
  Placement placement = Placement::SE;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string attribute = "attr";
  /// Overrides of the pattern defaults, e.g. {"slope": 2, "intercept": 5} for LT.
  nlohmann::json params = nlohmann::json::object();
};

bool is_numeric_pattern(std::string_view pattern);
bool is_case_pattern(std::string_view pattern);
bool is_scripted_pattern(std::string_view pattern);
std::vector<std::string> numeric_patterns();
std::vector<std::string> categorical_patterns();
std::vector<std::string> case_patterns();

/// Ground truth of one injected attribute.
struct AttributeTruth {
  std::string attribute;
  std::string pattern;
  Placement placement = Placement::SE;
  Scope scope = Scope::Event;
  AttrKind kind = AttrKind::Numeric;
  std::vector<std::string> modifiers;
  /// Rule driving the pattern, absent for scripted patterns.
  std::optional<UpdateRule> rule;
  UpdateRule initializer = GeneratorRule{Distribution::fixed(0.0)};
  nlohmann::json params;
};

/// Value update of a scripted pattern: (previous value, step index, rng) -> next value.
using ScriptStep = std::function<double(double, std::size_t, std::mt19937_64&)>;

struct AttributeScenario {
  PatternSpec spec;
  DASModel model;        // base model plus the attribute and its rules when expressible
  DASModel base;         // base model without the attribute
  AttributeTruth truth;
  ScriptStep script;     // set for scripted patterns
  std::vector<std::string> states;  // categorical patterns: label-noise alphabet
};

/// Linear chain of six tasks, one single-unit 24/7 pool per task, exponential arrivals
/// (mean 600 s) and processing times (mean 300 s).
DASModel base_attribute_model();

AttributeScenario build_attribute_scenario(const PatternSpec& spec, const DASModel& base);

/// Simulates the base model and injects the attribute along the completion timeline,
/// per case for event scope and log-wide for global scope. Numeric noise is additive
/// Gaussian with sd = noise * (sd of the noise-free values); categorical noise replaces
/// the value by a uniformly drawn state with probability `noise`.
EventLog generate_attribute_log(const AttributeScenario& scenario, std::size_t n_cases,
                                std::uint64_t seed);

enum class ConditionPattern { EQ, UB, RD, ND, ED, CC1, CC2, CC3, CC4, CC5 };
std::string_view to_string(ConditionPattern p);
ConditionPattern parse_condition_pattern(std::string_view text);

enum class AttributeBasis { Event, Case };

struct ConditionScenario {
  GateType gateway = GateType::Xor;
  ConditionPattern pattern = ConditionPattern::EQ;
  AttributeBasis basis = AttributeBasis::Case;
  /// OR only: flow i holds when the pattern's region index lies in [i, i + k).
  int flows_activated = 1;
  double noise = 0.0;
  std::uint64_t seed = 0;
};

struct ConditionTruth {
  std::map<std::string, GatewayPolicy> policies;
  nlohmann::json params;
};

/// Three blocks of task -> split -> five tasks -> join, a 100-unit 24/7 pool and
/// randomly drawn processing-time distributions.
std::pair<DASModel, ConditionTruth> build_condition_scenario(const ConditionScenario& s);

nlohmann::json to_json(const PatternSpec& s);
PatternSpec pattern_spec_from_json(const nlohmann::json& j);
nlohmann::json to_json(const AttributeTruth& t);
nlohmann::json to_json(const ConditionScenario& s);
ConditionScenario condition_scenario_from_json(const nlohmann::json& j);

}  // namespace dasim
