#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dasim/calendar.hpp"
#include "dasim/condition.hpp"
#include "dasim/distribution.hpp"
#include "dasim/process_model.hpp"
#include "dasim/update_rule.hpp"
#include "dasim/value.hpp"
#include "json.hpp"

namespace dasim {

enum class Scope { Global, Case, Event };

std::string_view to_string(Scope s);
Scope parse_scope(std::string_view text);

struct AttributeDecl {
  std::string name;
  Scope scope = Scope::Event;
  AttrKind kind = AttrKind::Numeric;
  /// Produces the starting value; applied to the kind's default value.
  UpdateRule initializer = GeneratorRule{Distribution::fixed(0.0)};
  bool low_confidence = false;
  friend bool operator==(const AttributeDecl&, const AttributeDecl&) = default;
};

struct Anchor {
  enum class Kind { CaseCreation, TaskCompletion };
  Kind kind = Kind::CaseCreation;
  std::string activity;  // task label for TaskCompletion

  static Anchor case_creation() { return {}; }
  static Anchor task_completion(std::string label) {
    return {Kind::TaskCompletion, std::move(label)};
  }
  friend bool operator==(const Anchor&, const Anchor&) = default;
  friend auto operator<=>(const Anchor&, const Anchor&) = default;
};

std::string to_string(const Anchor& a);

struct RuleAnchor {
  std::string attribute;
  Anchor anchor;
  UpdateRule rule;
  friend bool operator==(const RuleAnchor&, const RuleAnchor&) = default;
};

struct FlowPolicy {
  std::string flow;
  Condition condition;
  double probability = 1.0;
  friend bool operator==(const FlowPolicy&, const FlowPolicy&) = default;
};

struct GatewayPolicy {
  std::vector<FlowPolicy> flows;
  const FlowPolicy* find(std::string_view flow_id) const;
  friend bool operator==(const GatewayPolicy&, const GatewayPolicy&) = default;
};

struct ResourcePool {
  std::string name;
  int size = 1;
  WeeklyCalendar calendar;
  friend bool operator==(const ResourcePool&, const ResourcePool&) = default;
};

struct ResourceSchema {
  std::vector<ResourcePool> pools;
  std::map<std::string, std::string> task_pool;     // activity -> pool name
  std::map<std::string, Distribution> proc_time;    // activity -> seconds
  friend bool operator==(const ResourceSchema&, const ResourceSchema&) = default;
};

struct ArrivalModel {
  Distribution inter_arrival = Distribution::exponential(1.0 / 600.0);  // seconds
  WeeklyCalendar calendar;
  friend bool operator==(const ArrivalModel&, const ArrivalModel&) = default;
};

struct DASModel {
  ProcessModel process;
  std::vector<AttributeDecl> attributes;
  std::vector<RuleAnchor> rules;
  std::map<std::string, GatewayPolicy> policies;  // split gateway id -> policy
  ResourceSchema resources;
  ArrivalModel arrivals;

  const AttributeDecl* attribute(std::string_view name) const;
  /// Every broken invariant, empty when the model is valid.
  std::vector<std::string> check(int max_condition_depth = kDefaultConditionDepth) const;
  void validate() const;  // throws ValidationError

  friend bool operator==(const DASModel&, const DASModel&) = default;
};

inline constexpr int kDasVersion = 1;

nlohmann::json to_json(const WeeklyCalendar& c);
WeeklyCalendar calendar_from_json(const nlohmann::json& j);

nlohmann::json das_to_json(const DASModel& m);
/// Errors name the offending JSON path, e.g. `$.rules[2].rule`.
DASModel das_from_json(const nlohmann::json& j);

DASModel load_das(std::istream& in);
DASModel load_das_file(const std::string& path);
void save_das(std::ostream& out, const DASModel& m);
void save_das_file(const std::string& path, const DASModel& m);

/// Thrown when a frozen case attribute is written.
class ImmutableAttributeError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Layered attribute store for one run: globals shared by every case, case and
/// event attributes per case. Case attributes are frozen once creation finishes.
class DataState {
 public:
  DataState() = default;
  explicit DataState(const std::vector<AttributeDecl>& decls);

  /// Registers the case with every case/event attribute at its kind default.
  void create_case(const std::string& case_id);
  void freeze_case(const std::string& case_id);
  void remove_case(const std::string& case_id);
  bool has_case(const std::string& case_id) const;

  const Value* get(const std::string& case_id, const std::string& name) const;
  /// Writes honouring scope. Throws ImmutableAttributeError on a frozen case attribute
  /// and ArgumentError on an undeclared attribute or unknown case.
  void set(const std::string& case_id, const std::string& name, Value v);

  const AttributeMap& globals() const { return globals_; }
  /// Every declared attribute visible to the case.
  AttributeMap snapshot(const std::string& case_id) const;

 private:
  struct CaseData {
    AttributeMap values;
    bool frozen = false;
  };
  struct Slot {
    Scope scope;
    AttrKind kind;
  };
  std::map<std::string, Slot, std::less<>> decls_;
  AttributeMap globals_;
  std::unordered_map<std::string, CaseData> cases_;
};

}  // namespace dasim
