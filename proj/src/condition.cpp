#include "dasim/condition.hpp"

#include <algorithm>

#include "dasim/errors.hpp"

namespace dasim {

Condition Condition::le(std::string attr, double c) {
  Condition r;
  r.op = Op::Le;
  r.attribute = std::move(attr);
  r.threshold = c;
  return r;
}

Condition Condition::gt(std::string attr, double c) {
  Condition r = le(std::move(attr), c);
  r.op = Op::Gt;
  return r;
}

Condition Condition::in_range(std::string attr, double lo, double hi) {
  Condition r;
  r.op = Op::InRange;
  r.attribute = std::move(attr);
  r.lo = lo;
  r.hi = hi;
  return r;
}

Condition Condition::eq(std::string attr, std::string v) {
  Condition r;
  r.op = Op::Eq;
  r.attribute = std::move(attr);
  r.category = std::move(v);
  return r;
}

Condition Condition::ne(std::string attr, std::string v) {
  Condition r = eq(std::move(attr), std::move(v));
  r.op = Op::Ne;
  return r;
}

Condition Condition::all_of(std::vector<Condition> cs) {
  if (cs.size() == 1) return std::move(cs.front());
  Condition r;
  r.op = Op::And;
  r.children = std::move(cs);
  return r;
}

Condition Condition::any_of(std::vector<Condition> cs) {
  if (cs.size() == 1) return std::move(cs.front());
  Condition r;
  r.op = Op::Or;
  r.children = std::move(cs);
  return r;
}

int Condition::depth() const {
  int d = 0;
  for (const auto& c : children) d = std::max(d, c.depth());
  return d + 1;
}

void Condition::collect_attributes(std::set<std::string>& out) const {
  if (!attribute.empty()) out.insert(attribute);
  for (const auto& c : children) c.collect_attributes(out);
}

bool evaluate(const Condition& c, const AttributeLookup& lookup) {
  using Op = Condition::Op;
  switch (c.op) {
    case Op::True: return true;
    case Op::And:
      return std::all_of(c.children.begin(), c.children.end(),
                         [&](const Condition& k) { return evaluate(k, lookup); });
    case Op::Or:
      return std::any_of(c.children.begin(), c.children.end(),
                         [&](const Condition& k) { return evaluate(k, lookup); });
    default: break;
  }
  const Value* v = lookup(c.attribute);
  if (!v) return false;
  switch (c.op) {
    case Op::Le:
    case Op::Gt:
    case Op::InRange: {
      if (!is_numeric(*v)) return false;
      double x = as_number(*v);
      if (c.op == Op::Le) return x <= c.threshold;
      if (c.op == Op::Gt) return x > c.threshold;
      return c.lo <= x && x < c.hi;
    }
    case Op::Eq:
    case Op::Ne: {
      if (is_numeric(*v)) return false;
      const auto& s = as_category(*v);
      if (s == kUnsetCategory) return false;
      return (s == c.category) == (c.op == Op::Eq);
    }
    default: return false;
  }
}

bool evaluate(const Condition& c, const AttributeMap& values) {
  return evaluate(c, [&](const std::string& name) -> const Value* {
    auto it = values.find(name);
    return it == values.end() ? nullptr : &it->second;
  });
}

std::string to_string(const Condition& c) {
  using Op = Condition::Op;
  switch (c.op) {
    case Op::True: return "TRUE";
    case Op::Le: return c.attribute + " <= " + format_number(c.threshold);
    case Op::Gt: return c.attribute + " > " + format_number(c.threshold);
    case Op::InRange:
      return c.attribute + " in [" + format_number(c.lo) + ", " + format_number(c.hi) + ")";
    case Op::Eq: return c.attribute + " = " + c.category;
    case Op::Ne: return c.attribute + " != " + c.category;
    case Op::And:
    case Op::Or: {
      std::string out = "(";
      for (std::size_t i = 0; i < c.children.size(); ++i) {
        if (i) out += c.op == Op::And ? " AND " : " OR ";
        out += to_string(c.children[i]);
      }
      return out + ")";
    }
  }
  return "?";
}

nlohmann::json to_json(const Condition& c) {
  using Op = Condition::Op;
  switch (c.op) {
    case Op::True: return {{"op", "true"}};
    case Op::Le: return {{"op", "le"}, {"attribute", c.attribute}, {"value", c.threshold}};
    case Op::Gt: return {{"op", "gt"}, {"attribute", c.attribute}, {"value", c.threshold}};
    case Op::InRange:
      return {{"op", "in"}, {"attribute", c.attribute}, {"lo", c.lo}, {"hi", c.hi}};
    case Op::Eq: return {{"op", "eq"}, {"attribute", c.attribute}, {"value", c.category}};
    case Op::Ne: return {{"op", "ne"}, {"attribute", c.attribute}, {"value", c.category}};
    case Op::And:
    case Op::Or: {
      nlohmann::json args = nlohmann::json::array();
      for (const auto& k : c.children) args.push_back(to_json(k));
      return {{"op", c.op == Op::And ? "and" : "or"}, {"args", args}};
    }
  }
  return {};
}

Condition condition_from_json(const nlohmann::json& j) {
  try {
    auto op = j.at("op").get<std::string>();
    if (op == "true") return Condition::always();
    if (op == "le") return Condition::le(j.at("attribute"), j.at("value").get<double>());
    if (op == "gt") return Condition::gt(j.at("attribute"), j.at("value").get<double>());
    if (op == "in")
      return Condition::in_range(j.at("attribute"), j.at("lo").get<double>(),
                                 j.at("hi").get<double>());
    if (op == "eq") return Condition::eq(j.at("attribute"), j.at("value").get<std::string>());
    if (op == "ne") return Condition::ne(j.at("attribute"), j.at("value").get<std::string>());
    if (op == "and" || op == "or") {
      Condition r;
      r.op = op == "and" ? Condition::Op::And : Condition::Op::Or;
      for (const auto& k : j.at("args")) r.children.push_back(condition_from_json(k));
      if (r.children.empty()) throw SchemaError("condition '" + op + "' needs arguments");
      return r;
    }
    throw SchemaError("unknown condition op '" + op + "'");
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("condition: ") + e.what());
  }
}

}  // namespace dasim
