#include "dasim/value.hpp"

#include <charconv>
#include <cmath>

#include "dasim/errors.hpp"

namespace dasim {

Value default_value(AttrKind kind) {
  if (kind == AttrKind::Numeric) return 0.0;
  return std::string(kUnsetCategory);
}

std::string_view to_string(AttrKind kind) {
  return kind == AttrKind::Numeric ? "numeric" : "categorical";
}

AttrKind parse_attr_kind(std::string_view text) {
  if (text == "numeric") return AttrKind::Numeric;
  if (text == "categorical") return AttrKind::Categorical;
  throw SchemaError("unknown attribute kind '" + std::string(text) + "'");
}

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) {
  if (text.empty()) return std::nullopt;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (*first == '+') ++first;
  double v = 0.0;
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string format_value(const Value& v) {
  if (is_numeric(v)) return format_number(as_number(v));
  return as_category(v);
}

}  // namespace dasim
