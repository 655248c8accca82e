#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "dasim/value.hpp"
#include "json.hpp"

namespace dasim {

/// Boolean expression over attribute predicates.
struct Condition {
  enum class Op { True, Le, Gt, InRange, Eq, Ne, And, Or };

  Op op = Op::True;
  std::string attribute;
  double threshold = 0.0;  // Le / Gt
  double lo = 0.0;         // InRange: lo <= x < hi
  double hi = 0.0;
  std::string category;    // Eq / Ne
  std::vector<Condition> children;

  static Condition always() { return {}; }
  static Condition le(std::string attr, double c);
  static Condition gt(std::string attr, double c);
  static Condition in_range(std::string attr, double lo, double hi);
  static Condition eq(std::string attr, std::string v);
  static Condition ne(std::string attr, std::string v);
  static Condition all_of(std::vector<Condition> cs);
  static Condition any_of(std::vector<Condition> cs);

  bool is_true() const { return op == Op::True; }
  bool is_leaf() const { return op != Op::And && op != Op::Or; }
  /// A leaf has depth 1.
  int depth() const;
  void collect_attributes(std::set<std::string>& out) const;

  friend bool operator==(const Condition&, const Condition&) = default;
};

inline constexpr int kDefaultConditionDepth = 8;

/// Returns the current value of an attribute or null when it has none.
using AttributeLookup = std::function<const Value*(const std::string&)>;

/// Predicates over an unset attribute (missing, or the unset category) are false,
/// as are predicates whose kind does not match the value.
bool evaluate(const Condition& c, const AttributeLookup& lookup);
bool evaluate(const Condition& c, const AttributeMap& values);

std::string to_string(const Condition& c);

nlohmann::json to_json(const Condition& c);
Condition condition_from_json(const nlohmann::json& j);

}  // namespace dasim
