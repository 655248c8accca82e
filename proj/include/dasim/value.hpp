#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

namespace dasim {

enum class AttrKind { Numeric, Categorical };

/// Attribute values are two-kinded. Booleans travel as the categories "true"/"false".
using Value = std::variant<double, std::string>;

using AttributeMap = std::map<std::string, Value>;

/// Placeholder category for a categorical attribute that has no value yet.
inline constexpr std::string_view kUnsetCategory = "\xE2\x8A\xA5";  // "⊥"

inline bool is_numeric(const Value& v) { return std::holds_alternative<double>(v); }
inline AttrKind kind_of(const Value& v) {
  return is_numeric(v) ? AttrKind::Numeric : AttrKind::Categorical;
}
inline double as_number(const Value& v) { return std::get<double>(v); }
inline const std::string& as_category(const Value& v) { return std::get<std::string>(v); }

/// Default starting value for an attribute of the given kind: 0 or the unset category.
Value default_value(AttrKind kind);

std::string_view to_string(AttrKind kind);
AttrKind parse_attr_kind(std::string_view text);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);
/// Strict decimal parse (whole string must be consumed, finite result).
std::optional<double> parse_number(std::string_view text);

std::string format_value(const Value& v);

}  // namespace dasim
