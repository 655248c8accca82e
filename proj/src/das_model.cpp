#include "dasim/das_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "dasim/errors.hpp"

namespace dasim {

std::string_view to_string(Scope s) {
  switch (s) {
    case Scope::Global: return "global";
    case Scope::Case: return "case";
    case Scope::Event: return "event";
  }
  return "?";
}

Scope parse_scope(std::string_view text) {
  if (text == "global") return Scope::Global;
  if (text == "case") return Scope::Case;
  if (text == "event") return Scope::Event;
  throw SchemaError("unknown scope '" + std::string(text) + "'");
}

std::string to_string(const Anchor& a) {
  return a.kind == Anchor::Kind::CaseCreation ? "CaseCreation"
                                              : "TaskCompletion(" + a.activity + ")";
}

const FlowPolicy* GatewayPolicy::find(std::string_view flow_id) const {
  for (const auto& f : flows)
    if (f.flow == flow_id) return &f;
  return nullptr;
}

const AttributeDecl* DASModel::attribute(std::string_view name) const {
  for (const auto& a : attributes)
    if (a.name == name) return &a;
  return nullptr;
}

std::vector<std::string> DASModel::check(int max_condition_depth) const {
  std::vector<std::string> issues;
  std::set<std::string> names;
  for (const auto& a : attributes) {
    if (a.name.empty()) issues.push_back("attribute with empty name");
    if (!names.insert(a.name).second) issues.push_back("duplicate attribute '" + a.name + "'");
    if (rule_kind(a.initializer) != a.kind)
      issues.push_back("attribute '" + a.name + "': initializer kind does not match");
    for (auto& m : check_rule(a.initializer))
      issues.push_back("attribute '" + a.name + "' initializer: " + m);
  }

  std::set<std::pair<std::string, Anchor>> anchored;
  for (const auto& r : rules) {
    const std::string where = "rule " + r.attribute + "@" + to_string(r.anchor);
    const AttributeDecl* decl = attribute(r.attribute);
    if (!decl) {
      issues.push_back(where + ": undeclared attribute '" + r.attribute + "'");
      continue;
    }
    if (rule_kind(r.rule) != decl->kind) issues.push_back(where + ": rule kind does not match");
    if (!anchored.emplace(r.attribute, r.anchor).second)
      issues.push_back(where + ": more than one rule for this attribute and anchor");
    if (r.anchor.kind == Anchor::Kind::TaskCompletion) {
      if (!process.task_by_label(r.anchor.activity))
        issues.push_back(where + ": unknown activity '" + r.anchor.activity + "'");
      if (decl->scope == Scope::Case)
        issues.push_back(where + ": case attributes may only be updated at case creation");
    }
    for (auto& m : check_rule(r.rule)) issues.push_back(where + ": " + m);
  }

  for (const auto& [gw, pol] : policies) {
    if (!process.has_node(gw)) {
      issues.push_back("policy for unknown gateway '" + gw + "'");
      continue;
    }
    const auto& node = process.node(gw);
    if (!node.is_split() || node.gate_type == GateType::And) {
      issues.push_back("policy on '" + gw + "', which is not an XOR/OR split");
      continue;
    }
    std::set<std::string> outs;
    for (auto* f : process.outgoing(gw)) outs.insert(f->id);
    std::set<std::string> seen;
    double total = 0;
    for (const auto& fp : pol.flows) {
      if (!outs.count(fp.flow))
        issues.push_back("policy '" + gw + "': flow '" + fp.flow + "' is not outgoing");
      if (!seen.insert(fp.flow).second)
        issues.push_back("policy '" + gw + "': flow '" + fp.flow + "' listed twice");
      if (!(fp.probability >= 0 && fp.probability <= 1))
        issues.push_back("policy '" + gw + "': probability of '" + fp.flow + "' outside [0,1]");
      total += fp.probability;
      if (fp.condition.depth() > max_condition_depth)
        issues.push_back("policy '" + gw + "': condition of '" + fp.flow + "' is too deep");
      std::set<std::string> used;
      fp.condition.collect_attributes(used);
      for (const auto& u : used)
        if (!attribute(u))
          issues.push_back("policy '" + gw + "': condition references undeclared attribute '" +
                           u + "'");
    }
    for (const auto& o : outs)
      if (!seen.count(o)) issues.push_back("policy '" + gw + "' does not cover flow '" + o + "'");
    if (node.gate_type == GateType::Xor && std::abs(total - 1.0) > 1e-9)
      issues.push_back("policy '" + gw + "': XOR probabilities sum to " + format_number(total));
  }
  for (const auto* g : process.split_gateways())
    if (g->gate_type != GateType::And && !policies.count(g->id))
      issues.push_back("split gateway '" + g->id + "' has no policy");

  std::set<std::string> pools;
  for (const auto& p : resources.pools) {
    if (!pools.insert(p.name).second) issues.push_back("duplicate pool '" + p.name + "'");
    if (p.size < 1) issues.push_back("pool '" + p.name + "' must have a positive size");
  }
  for (const auto& label : process.task_labels()) {
    auto it = resources.task_pool.find(label);
    if (it == resources.task_pool.end())
      issues.push_back("activity '" + label + "' is not mapped to a pool");
    else if (!pools.count(it->second))
      issues.push_back("activity '" + label + "' mapped to unknown pool '" + it->second + "'");
    auto pt = resources.proc_time.find(label);
    if (pt == resources.proc_time.end())
      issues.push_back("activity '" + label + "' has no processing time");
    else if (auto m = pt->second.check(); !m.empty())
      issues.push_back("processing time of '" + label + "': " + m);
  }
  for (const auto& [label, pool] : resources.task_pool)
    if (!process.task_by_label(label))
      issues.push_back("pool mapping for unknown activity '" + label + "'");
  if (auto m = arrivals.inter_arrival.check(); !m.empty())
    issues.push_back("inter-arrival distribution: " + m);
  return issues;
}

void DASModel::validate() const {
  auto issues = check();
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

// ---------------------------------------------------------------------------
// Calendar JSON. Intervals are written as "Mon 08:00" style week positions.

namespace {

constexpr const char* kDays[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

std::string format_week_pos(Millis t) {
  auto ms = t.count();
  auto day = ms / kDay.count();
  auto rem = ms % kDay.count();
  if (day == 7) day = 6, rem = kDay.count();
  std::ostringstream os;
  os << kDays[day] << ' ' << std::setfill('0') << std::setw(2) << rem / 3'600'000 << ':'
     << std::setw(2) << (rem / 60'000) % 60;
  auto sec = (rem / 1000) % 60, milli = rem % 1000;
  if (sec || milli) os << ':' << std::setw(2) << sec;
  if (milli) os << '.' << std::setw(3) << milli;
  return os.str();
}

int parse_day(std::string d) {
  if (d.size() < 3) throw SchemaError("bad weekday '" + d + "'");
  d = d.substr(0, 3);
  d[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(d[0])));
  for (std::size_t i = 1; i < 3; ++i)
    d[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(d[i])));
  for (int i = 0; i < 7; ++i)
    if (d == kDays[i]) return i;
  throw SchemaError("bad weekday '" + d + "'");
}

Millis parse_clock(const std::string& s) {
  int h = 0, m = 0;
  double sec = 0;
  char c1 = 0, c2 = 0;
  std::istringstream is(s);
  is >> h >> c1 >> m;
  if (!is || c1 != ':') throw SchemaError("bad time of day '" + s + "'");
  if (is >> c2) {
    if (c2 != ':' || !(is >> sec)) throw SchemaError("bad time of day '" + s + "'");
  }
  long long ms = (h * 3600LL + m * 60LL) * 1000 + std::llround(sec * 1000);
  if (h < 0 || m < 0 || m > 59 || ms > kDay.count()) throw SchemaError("bad time of day '" + s + "'");
  return Millis{ms};
}

Millis parse_week_pos(const std::string& s) {
  auto sp = s.find(' ');
  if (sp == std::string::npos) throw SchemaError("bad week position '" + s + "'");
  return kDay * parse_day(s.substr(0, sp)) + parse_clock(s.substr(sp + 1));
}

}  // namespace

nlohmann::json to_json(const WeeklyCalendar& c) {
  if (c.is_always_open()) return "24/7";
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& iv : c.intervals())
    arr.push_back({{"begin", format_week_pos(iv.begin)}, {"end", format_week_pos(iv.end)}});
  return {{"intervals", arr}};
}

WeeklyCalendar calendar_from_json(const nlohmann::json& j) {
  if (j.is_null()) return WeeklyCalendar::always_open();
  if (j.is_string()) {
    if (j.get<std::string>() == "24/7") return WeeklyCalendar::always_open();
    throw SchemaError("unknown calendar '" + j.get<std::string>() + "'");
  }
  std::vector<WeeklyCalendar::Interval> ivs;
  if (j.contains("intervals"))
    for (const auto& iv : j["intervals"])
      ivs.push_back({parse_week_pos(iv.at("begin").get<std::string>()),
                     parse_week_pos(iv.at("end").get<std::string>())});
  if (j.contains("slots")) {
    for (const auto& slot : j["slots"]) {
      Millis b = parse_clock(slot.at("begin").get<std::string>());
      Millis e = parse_clock(slot.at("end").get<std::string>());
      for (const auto& d : slot.at("days")) {
        Millis base = kDay * parse_day(d.get<std::string>());
        if (e > b) {
          ivs.push_back({base + b, base + e});
        } else {
          ivs.push_back({base + b, base + kDay});
          ivs.push_back({(base + kDay) % kWeek, (base + kDay) % kWeek + e});
        }
      }
    }
  }
  return WeeklyCalendar(std::move(ivs));
}

// ---------------------------------------------------------------------------
// DAS JSON

namespace {

template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    std::vector<std::string> issues;
    for (const auto& i : e.issues()) issues.push_back(path + ": " + i);
    throw ValidationError(std::move(issues));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  } catch (const Error& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

nlohmann::json anchor_json(const RuleAnchor& r) {
  nlohmann::json j{{"attribute", r.attribute}};
  if (r.anchor.kind == Anchor::Kind::CaseCreation) {
    j["anchor"] = "case_creation";
  } else {
    j["anchor"] = "task_completion";
    j["activity"] = r.anchor.activity;
  }
  j["rule"] = to_json(r.rule);
  return j;
}

}  // namespace

nlohmann::json das_to_json(const DASModel& m) {
  nlohmann::json j;
  j["das_version"] = kDasVersion;
  j["process"] = process_to_json(m.process);
  j["attributes"] = nlohmann::json::array();
  for (const auto& a : m.attributes) {
    nlohmann::json ja{{"name", a.name},
                      {"scope", to_string(a.scope)},
                      {"kind", to_string(a.kind)},
                      {"initializer", to_json(a.initializer)}};
    if (a.low_confidence) ja["low_confidence"] = true;
    j["attributes"].push_back(std::move(ja));
  }
  j["rules"] = nlohmann::json::array();
  for (const auto& r : m.rules) j["rules"].push_back(anchor_json(r));
  j["policies"] = nlohmann::json::object();
  for (const auto& [gw, pol] : m.policies) {
    nlohmann::json flows = nlohmann::json::array();
    for (const auto& fp : pol.flows)
      flows.push_back({{"flow", fp.flow},
                       {"condition", to_json(fp.condition)},
                       {"probability", fp.probability}});
    j["policies"][gw] = {{"flows", flows}};
  }
  nlohmann::json pools = nlohmann::json::array();
  for (const auto& p : m.resources.pools)
    pools.push_back({{"name", p.name}, {"size", p.size}, {"calendar", to_json(p.calendar)}});
  nlohmann::json proc = nlohmann::json::object();
  for (const auto& [a, d] : m.resources.proc_time) proc[a] = to_json(d);
  j["resources"] = {{"pools", pools}, {"task_pool", m.resources.task_pool}, {"proc_time", proc}};
  j["arrivals"] = {{"inter_arrival", to_json(m.arrivals.inter_arrival)},
                   {"calendar", to_json(m.arrivals.calendar)}};
  return j;
}

DASModel das_from_json(const nlohmann::json& j) {
  DASModel m;
  at_path("$.das_version", [&] {
    int v = j.at("das_version").get<int>();
    if (v != kDasVersion) throw SchemaError("unsupported version " + std::to_string(v));
  });
  m.process = at_path("$.process", [&] { return process_from_json(j.at("process")); });

  if (j.contains("attributes")) {
    const auto& arr = j["attributes"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = "$.attributes[" + std::to_string(i) + "]";
      m.attributes.push_back(at_path(p, [&] {
        AttributeDecl a;
        const auto& ja = arr[i];
        a.name = ja.at("name").get<std::string>();
        a.scope = parse_scope(ja.at("scope").get<std::string>());
        a.kind = parse_attr_kind(ja.at("kind").get<std::string>());
        if (ja.contains("initializer"))
          a.initializer = at_path(p + ".initializer", [&] { return rule_from_json(ja["initializer"]); });
        else if (a.kind == AttrKind::Categorical)
          a.initializer = CategoricalRule{{std::string(kUnsetCategory)}, {1.0}};
        a.low_confidence = ja.value("low_confidence", false);
        return a;
      }));
    }
  }
  if (j.contains("rules")) {
    const auto& arr = j["rules"];
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string p = "$.rules[" + std::to_string(i) + "]";
      m.rules.push_back(at_path(p, [&] {
        RuleAnchor r;
        const auto& jr = arr[i];
        r.attribute = jr.at("attribute").get<std::string>();
        auto anchor = jr.at("anchor").get<std::string>();
        if (anchor == "case_creation")
          r.anchor = Anchor::case_creation();
        else if (anchor == "task_completion")
          r.anchor = Anchor::task_completion(jr.at("activity").get<std::string>());
        else
          throw SchemaError("unknown anchor '" + anchor + "'");
        r.rule = at_path(p + ".rule", [&] { return rule_from_json(jr.at("rule")); });
        return r;
      }));
    }
  }
  if (j.contains("policies")) {
    for (const auto& [gw, jp] : j["policies"].items()) {
      const std::string p = "$.policies." + gw;
      GatewayPolicy pol;
      const auto& flows = at_path(p, [&]() -> const nlohmann::json& { return jp.at("flows"); });
      for (std::size_t i = 0; i < flows.size(); ++i) {
        pol.flows.push_back(at_path(p + ".flows[" + std::to_string(i) + "]", [&] {
          FlowPolicy fp;
          fp.flow = flows[i].at("flow").get<std::string>();
          if (flows[i].contains("condition"))
            fp.condition = condition_from_json(flows[i]["condition"]);
          fp.probability = flows[i].value("probability", 1.0);
          return fp;
        }));
      }
      m.policies.emplace(gw, std::move(pol));
    }
  }
  at_path("$.resources", [&] {
    const auto& jr = j.at("resources");
    const auto& pools = jr.at("pools");
    for (std::size_t i = 0; i < pools.size(); ++i) {
      m.resources.pools.push_back(at_path("$.resources.pools[" + std::to_string(i) + "]", [&] {
        ResourcePool pool;
        pool.name = pools[i].at("name").get<std::string>();
        pool.size = pools[i].at("size").get<int>();
        pool.calendar = calendar_from_json(pools[i].value("calendar", nlohmann::json()));
        return pool;
      }));
    }
    m.resources.task_pool = jr.at("task_pool").get<std::map<std::string, std::string>>();
    for (const auto& [a, d] : jr.at("proc_time").items())
      m.resources.proc_time.emplace(
          a, at_path("$.resources.proc_time." + a, [&] { return distribution_from_json(d); }));
  });
  at_path("$.arrivals", [&] {
    const auto& ja = j.at("arrivals");
    m.arrivals.inter_arrival =
        at_path("$.arrivals.inter_arrival", [&] { return distribution_from_json(ja.at("inter_arrival")); });
    m.arrivals.calendar = calendar_from_json(ja.value("calendar", nlohmann::json()));
  });
  m.validate();
  return m;
}

DASModel load_das(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("$: ") + e.what());
  }
  return das_from_json(j);
}

DASModel load_das_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open DAS file '" + path + "'");
  return load_das(in);
}

void save_das(std::ostream& out, const DASModel& m) { out << das_to_json(m).dump(2) << '\n'; }

void save_das_file(const std::string& path, const DASModel& m) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write '" + path + "'");
  save_das(out, m);
}

// ---------------------------------------------------------------------------
// DataState

DataState::DataState(const std::vector<AttributeDecl>& decls) {
  for (const auto& d : decls) {
    decls_.emplace(d.name, Slot{d.scope, d.kind});
    if (d.scope == Scope::Global) globals_.emplace(d.name, default_value(d.kind));
  }
}

void DataState::create_case(const std::string& case_id) {
  CaseData cd;
  for (const auto& [name, slot] : decls_)
    if (slot.scope != Scope::Global) cd.values.emplace(name, default_value(slot.kind));
  cases_[case_id] = std::move(cd);
}

void DataState::freeze_case(const std::string& case_id) {
  auto it = cases_.find(case_id);
  if (it == cases_.end()) throw ArgumentError("unknown case '" + case_id + "'");
  it->second.frozen = true;
}

void DataState::remove_case(const std::string& case_id) { cases_.erase(case_id); }

bool DataState::has_case(const std::string& case_id) const { return cases_.count(case_id) > 0; }

const Value* DataState::get(const std::string& case_id, const std::string& name) const {
  auto d = decls_.find(name);
  if (d == decls_.end()) return nullptr;
  if (d->second.scope == Scope::Global) {
    auto it = globals_.find(name);
    return it == globals_.end() ? nullptr : &it->second;
  }
  auto c = cases_.find(case_id);
  if (c == cases_.end()) return nullptr;
  auto it = c->second.values.find(name);
  return it == c->second.values.end() ? nullptr : &it->second;
}

void DataState::set(const std::string& case_id, const std::string& name, Value v) {
  auto d = decls_.find(name);
  if (d == decls_.end()) throw ArgumentError("undeclared attribute '" + name + "'");
  if (kind_of(v) != d->second.kind)
    throw ArgumentError("attribute '" + name + "' written with the wrong kind");
  if (d->second.scope == Scope::Global) {
    globals_[name] = std::move(v);
    return;
  }
  auto c = cases_.find(case_id);
  if (c == cases_.end()) throw ArgumentError("unknown case '" + case_id + "'");
  if (d->second.scope == Scope::Case && c->second.frozen)
    throw ImmutableAttributeError("case attribute '" + name + "' of case '" + case_id +
                                  "' written after creation");
  c->second.values[name] = std::move(v);
}

AttributeMap DataState::snapshot(const std::string& case_id) const {
  AttributeMap out = globals_;
  auto c = cases_.find(case_id);
  if (c != cases_.end())
    for (const auto& [k, v] : c->second.values) out[k] = v;
  return out;
}

}  // namespace dasim
