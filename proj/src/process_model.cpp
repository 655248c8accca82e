#include "dasim/process_model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "dasim/errors.hpp"

namespace dasim {

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::StartEvent: return "start-event";
    case NodeKind::EndEvent: return "end-event";
    case NodeKind::Task: return "task";
    case NodeKind::Gateway: return "gateway";
  }
  return "?";
}
std::string_view to_string(GateType g) {
  switch (g) {
    case GateType::Xor: return "XOR";
    case GateType::Or: return "OR";
    case GateType::And: return "AND";
  }
  return "?";
}
std::string_view to_string(Direction d) { return d == Direction::Split ? "split" : "join"; }

ProcessModel::ProcessModel(std::vector<Node> nodes, std::vector<Flow> flows,
                           std::map<std::string, std::string> default_flows)
    : nodes_(std::move(nodes)), flows_(std::move(flows)), defaults_(std::move(default_flows)) {
  auto issues = validate();
  if (!issues.empty()) throw ValidationError(std::move(issues));
}

void ProcessModel::build_indexes() {
  node_idx_.clear();
  flow_idx_.clear();
  for (std::size_t i = 0; i < nodes_.size(); ++i) node_idx_.emplace(nodes_[i].id, i);
  for (std::size_t i = 0; i < flows_.size(); ++i) flow_idx_.emplace(flows_[i].id, i);
  out_.assign(nodes_.size(), {});
  in_.assign(nodes_.size(), {});
  for (std::size_t f = 0; f < flows_.size(); ++f) {
    auto s = node_idx_.find(flows_[f].source);
    auto t = node_idx_.find(flows_[f].target);
    if (s != node_idx_.end()) out_[s->second].push_back(f);
    if (t != node_idx_.end()) in_[t->second].push_back(f);
  }
  auto by_id = [&](std::size_t a, std::size_t b) { return flows_[a].id < flows_[b].id; };
  for (auto& v : out_) std::sort(v.begin(), v.end(), by_id);
  for (auto& v : in_) std::sort(v.begin(), v.end(), by_id);
}

std::vector<std::string> ProcessModel::validate() {
  std::vector<std::string> issues;
  {
    std::set<std::string> seen;
    for (const auto& n : nodes_) {
      if (n.id.empty()) issues.push_back("node with empty id");
      if (!seen.insert(n.id).second) issues.push_back("duplicate node id '" + n.id + "'");
    }
    std::set<std::string> fseen;
    for (const auto& f : flows_) {
      if (!fseen.insert(f.id).second) issues.push_back("duplicate flow id '" + f.id + "'");
      if (!seen.count(f.source))
        issues.push_back("flow '" + f.id + "' has unknown source '" + f.source + "'");
      if (!seen.count(f.target))
        issues.push_back("flow '" + f.id + "' has unknown target '" + f.target + "'");
    }
  }
  if (!issues.empty()) return issues;
  build_indexes();

  std::size_t starts = 0, ends = 0;
  std::set<std::string> labels;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    const auto nin = in_[i].size(), nout = out_[i].size();
    switch (n.kind) {
      case NodeKind::StartEvent:
        ++starts;
        if (nin != 0 || nout != 1)
          issues.push_back("start event '" + n.id + "' must have 0 incoming and 1 outgoing flow");
        break;
      case NodeKind::EndEvent:
        ++ends;
        if (nin < 1 || nout != 0)
          issues.push_back("end event '" + n.id + "' must have >=1 incoming and 0 outgoing flows");
        break;
      case NodeKind::Task:
        if (n.label.empty()) issues.push_back("task '" + n.id + "' has an empty label");
        else if (!labels.insert(n.label).second)
          issues.push_back("task label '" + n.label + "' is not unique (node '" + n.id + "')");
        if (nin != 1 || nout != 1)
          issues.push_back("task '" + n.id + "' must have exactly 1 incoming and 1 outgoing flow");
        break;
      case NodeKind::Gateway:
        if (!n.gate_type) issues.push_back("gateway '" + n.id + "' has no gate type");
        if (!n.direction) {
          if (nin == 1 && nout >= 2) n.direction = Direction::Split;
          else if (nin >= 2 && nout == 1) n.direction = Direction::Join;
        }
        if (n.direction == Direction::Split && !(nin == 1 && nout >= 2))
          issues.push_back("split gateway '" + n.id + "' must have 1 incoming and >=2 outgoing flows");
        else if (n.direction == Direction::Join && !(nin >= 2 && nout == 1))
          issues.push_back("join gateway '" + n.id + "' must have >=2 incoming and 1 outgoing flow");
        else if (!n.direction)
          issues.push_back("gateway '" + n.id + "' is neither a pure split nor a pure join");
        break;
    }
  }
  if (starts != 1) issues.push_back("model must have exactly one start event, found " + std::to_string(starts));
  if (ends < 1) issues.push_back("model must have at least one end event");

  for (const auto& [gw, fl] : defaults_) {
    auto it = node_idx_.find(gw);
    if (it == node_idx_.end()) {
      issues.push_back("default flow declared for unknown gateway '" + gw + "'");
      continue;
    }
    const auto& n = nodes_[it->second];
    if (!n.is_split() || n.gate_type == GateType::And) {
      issues.push_back("default flow declared on '" + gw + "', which is not an XOR/OR split");
      continue;
    }
    auto fit = flow_idx_.find(fl);
    if (fit == flow_idx_.end() || flows_[fit->second].source != gw)
      issues.push_back("default flow '" + fl + "' is not an outgoing flow of gateway '" + gw + "'");
  }
  for (const auto& n : nodes_) {
    if (n.is_split() && n.gate_type != GateType::And && !defaults_.count(n.id))
      issues.push_back("split gateway '" + n.id + "' has no default flow");
  }
  if (!issues.empty()) return issues;

  // Reachability from the start and co-reachability of an end.
  const std::size_t N = nodes_.size();
  std::size_t start = 0;
  for (std::size_t i = 0; i < N; ++i)
    if (nodes_[i].kind == NodeKind::StartEvent) start = i;
  std::vector<bool> fwd(N, false), bwd(N, false);
  std::deque<std::size_t> q{start};
  fwd[start] = true;
  while (!q.empty()) {
    auto u = q.front();
    q.pop_front();
    for (auto f : out_[u]) {
      auto v = node_idx_.at(flows_[f].target);
      if (!fwd[v]) fwd[v] = true, q.push_back(v);
    }
  }
  for (std::size_t i = 0; i < N; ++i)
    if (nodes_[i].kind == NodeKind::EndEvent) bwd[i] = true, q.push_back(i);
  while (!q.empty()) {
    auto u = q.front();
    q.pop_front();
    for (auto f : in_[u]) {
      auto v = node_idx_.at(flows_[f].source);
      if (!bwd[v]) bwd[v] = true, q.push_back(v);
    }
  }
  for (std::size_t i = 0; i < N; ++i) {
    if (!fwd[i]) issues.push_back("node '" + nodes_[i].id + "' is unreachable from the start event");
    if (!bwd[i]) issues.push_back("node '" + nodes_[i].id + "' cannot reach an end event");
  }
  if (!issues.empty()) return issues;

  // Post-dominators over the graph extended with a virtual exit after every end.
  const std::size_t X = N;
  std::vector<std::vector<bool>> pdom(N + 1, std::vector<bool>(N + 1, true));
  pdom[X].assign(N + 1, false);
  pdom[X][X] = true;
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < N; ++i) {
      std::vector<bool> meet(N + 1, true);
      if (nodes_[i].kind == NodeKind::EndEvent) {
        for (std::size_t k = 0; k <= N; ++k) meet[k] = meet[k] && pdom[X][k];
      }
      for (auto f : out_[i]) {
        auto s = node_idx_.at(flows_[f].target);
        for (std::size_t k = 0; k <= N; ++k) meet[k] = meet[k] && pdom[s][k];
      }
      meet[i] = true;
      if (meet != pdom[i]) pdom[i] = std::move(meet), changed = true;
    }
  }
  std::map<std::string, std::string> join_owner;
  for (std::size_t i = 0; i < N; ++i) {
    const auto& n = nodes_[i];
    if (!(n.is_split() && n.gate_type == GateType::Or)) continue;
    std::optional<std::size_t> ipdom;
    std::size_t best = 0;
    for (std::size_t d = 0; d < N; ++d) {
      if (d == i || !pdom[i][d]) continue;
      auto size = static_cast<std::size_t>(std::count(pdom[d].begin(), pdom[d].end(), true));
      if (!ipdom || size > best) ipdom = d, best = size;
    }
    if (!ipdom || !(nodes_[*ipdom].is_join() && nodes_[*ipdom].gate_type == GateType::Or)) {
      issues.push_back("OR split '" + n.id + "' is not closed by a matching OR join");
      continue;
    }
    const auto& join = nodes_[*ipdom].id;
    auto [it, fresh] = join_owner.emplace(join, n.id);
    if (!fresh) {
      issues.push_back("OR join '" + join + "' closes both '" + it->second + "' and '" + n.id + "'");
      continue;
    }
    or_pairs_[n.id] = join;
  }
  for (const auto& n : nodes_) {
    if (n.is_join() && n.gate_type == GateType::Or && !join_owner.count(n.id))
      issues.push_back("OR join '" + n.id + "' is not paired with an OR split");
  }
  return issues;
}

bool ProcessModel::has_node(std::string_view id) const { return node_idx_.count(id) > 0; }

std::size_t ProcessModel::node_index(std::string_view id) const {
  auto it = node_idx_.find(id);
  if (it == node_idx_.end()) throw ArgumentError("unknown node id '" + std::string(id) + "'");
  return it->second;
}

std::size_t ProcessModel::flow_index(std::string_view id) const {
  auto it = flow_idx_.find(id);
  if (it == flow_idx_.end()) throw ArgumentError("unknown flow id '" + std::string(id) + "'");
  return it->second;
}

const Node& ProcessModel::node(std::string_view id) const { return nodes_[node_index(id)]; }
const Flow& ProcessModel::flow(std::string_view id) const { return flows_[flow_index(id)]; }

std::vector<const Flow*> ProcessModel::outgoing(std::string_view node_id) const {
  std::vector<const Flow*> out;
  for (auto f : out_[node_index(node_id)]) out.push_back(&flows_[f]);
  return out;
}

std::vector<const Flow*> ProcessModel::incoming(std::string_view node_id) const {
  std::vector<const Flow*> out;
  for (auto f : in_[node_index(node_id)]) out.push_back(&flows_[f]);
  return out;
}

const Node& ProcessModel::start_node() const {
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::StartEvent) return n;
  throw ArgumentError("process model has no start event");
}

std::optional<std::string> ProcessModel::default_flow(std::string_view gateway_id) const {
  auto it = defaults_.find(std::string(gateway_id));
  if (it == defaults_.end()) return std::nullopt;
  return it->second;
}

const Node* ProcessModel::task_by_label(std::string_view label) const {
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::Task && n.label == label) return &n;
  return nullptr;
}

std::vector<std::string> ProcessModel::task_labels() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_)
    if (n.kind == NodeKind::Task) out.push_back(n.label);
  return out;
}

std::vector<const Node*> ProcessModel::split_gateways() const {
  std::vector<const Node*> out;
  for (const auto& n : nodes_)
    if (n.is_split()) out.push_back(&n);
  return out;
}

std::optional<std::string> ProcessModel::paired_join(std::string_view or_split_id) const {
  auto it = or_pairs_.find(or_split_id);
  if (it == or_pairs_.end()) return std::nullopt;
  return it->second;
}

// ---------------------------------------------------------------------------
// JSON

namespace {

NodeKind parse_node_kind(const std::string& s) {
  if (s == "start-event" || s == "start") return NodeKind::StartEvent;
  if (s == "end-event" || s == "end") return NodeKind::EndEvent;
  if (s == "task") return NodeKind::Task;
  if (s == "gateway") return NodeKind::Gateway;
  throw SchemaError("unknown node kind '" + s + "'");
}

GateType parse_gate_type(const std::string& s) {
  if (s == "XOR" || s == "xor") return GateType::Xor;
  if (s == "OR" || s == "or") return GateType::Or;
  if (s == "AND" || s == "and") return GateType::And;
  throw SchemaError("unknown gate type '" + s + "'");
}

Direction parse_direction(const std::string& s) {
  if (s == "split") return Direction::Split;
  if (s == "join") return Direction::Join;
  throw SchemaError("unknown gateway direction '" + s + "'");
}

}  // namespace

ProcessModel process_from_json(const nlohmann::json& j) {
  try {
    std::vector<Node> nodes;
    for (const auto& jn : j.at("nodes")) {
      Node n;
      n.id = jn.at("id").get<std::string>();
      n.kind = parse_node_kind(jn.at("kind").get<std::string>());
      n.label = jn.value("label", std::string{});
      if (jn.contains("gate_type")) n.gate_type = parse_gate_type(jn["gate_type"].get<std::string>());
      if (jn.contains("direction")) n.direction = parse_direction(jn["direction"].get<std::string>());
      nodes.push_back(std::move(n));
    }
    std::vector<Flow> flows;
    for (const auto& jf : j.at("flows"))
      flows.push_back({jf.at("id").get<std::string>(), jf.at("source").get<std::string>(),
                       jf.at("target").get<std::string>()});
    std::map<std::string, std::string> defaults;
    if (j.contains("default_flows"))
      defaults = j["default_flows"].get<std::map<std::string, std::string>>();
    return ProcessModel(std::move(nodes), std::move(flows), std::move(defaults));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("process JSON: ") + e.what());
  }
}

nlohmann::json process_to_json(const ProcessModel& model) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : model.nodes()) {
    nlohmann::json jn{{"id", n.id}, {"kind", to_string(n.kind)}, {"label", n.label}};
    if (n.gate_type) jn["gate_type"] = to_string(*n.gate_type);
    if (n.direction) jn["direction"] = to_string(*n.direction);
    j["nodes"].push_back(std::move(jn));
  }
  j["flows"] = nlohmann::json::array();
  for (const auto& f : model.flows())
    j["flows"].push_back({{"id", f.id}, {"source", f.source}, {"target", f.target}});
  j["default_flows"] = model.default_flows();
  return j;
}

// ---------------------------------------------------------------------------
// BPMN XML

namespace {

std::string local_name(const std::string& tag) {
  auto pos = tag.find(':');
  return pos == std::string::npos ? tag : tag.substr(pos + 1);
}

const boost::property_tree::ptree* find_child(const boost::property_tree::ptree& t,
                                              const std::string& local) {
  for (const auto& [k, v] : t)
    if (local_name(k) == local) return &v;
  return nullptr;
}

}  // namespace

ProcessModel parse_bpmn_xml(std::string_view xml) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(xml)};
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw SchemaError(std::string("BPMN XML: ") + e.what());
  }
  const pt::ptree* defs = find_child(tree, "definitions");
  if (!defs) throw SchemaError("BPMN XML: no <definitions> root");
  const pt::ptree* process = find_child(*defs, "process");
  if (!process) throw SchemaError("BPMN XML: no <process> element");

  static const std::set<std::string> kTaskTags{"task",       "userTask",    "serviceTask",
                                               "manualTask", "scriptTask",  "sendTask",
                                               "receiveTask", "businessRuleTask"};
  static const std::set<std::string> kIgnored{"<xmlattr>",  "<xmlcomment>", "documentation",
                                              "extensionElements", "laneSet"};
  std::vector<Node> nodes;
  std::vector<Flow> flows;
  std::map<std::string, std::string> defaults;
  std::vector<std::string> unsupported;
  for (const auto& [tag, child] : *process) {
    std::string name = local_name(tag);
    if (kIgnored.count(name)) continue;
    std::string id = child.get<std::string>("<xmlattr>.id", "");
    std::string label = child.get<std::string>("<xmlattr>.name", "");
    if (name == "sequenceFlow") {
      flows.push_back({id, child.get<std::string>("<xmlattr>.sourceRef", ""),
                       child.get<std::string>("<xmlattr>.targetRef", "")});
    } else if (name == "startEvent" || name == "endEvent") {
      if (find_child(child, "timerEventDefinition") || find_child(child, "messageEventDefinition") ||
          find_child(child, "signalEventDefinition")) {
        unsupported.push_back(name + " '" + id + "' with event definition");
        continue;
      }
      nodes.push_back({id, name == "startEvent" ? NodeKind::StartEvent : NodeKind::EndEvent,
                       label.empty() ? id : label, std::nullopt, std::nullopt});
    } else if (kTaskTags.count(name)) {
      nodes.push_back({id, NodeKind::Task, label, std::nullopt, std::nullopt});
    } else if (name == "exclusiveGateway" || name == "inclusiveGateway" ||
               name == "parallelGateway") {
      GateType g = name == "exclusiveGateway"   ? GateType::Xor
                   : name == "inclusiveGateway" ? GateType::Or
                                                : GateType::And;
      std::optional<Direction> dir;
      auto gd = child.get<std::string>("<xmlattr>.gatewayDirection", "");
      if (gd == "Diverging") dir = Direction::Split;
      else if (gd == "Converging") dir = Direction::Join;
      nodes.push_back({id, NodeKind::Gateway, label.empty() ? id : label, g, dir});
      auto def = child.get<std::string>("<xmlattr>.default", "");
      if (!def.empty()) defaults[id] = def;
    } else {
      unsupported.push_back(name + (id.empty() ? "" : " '" + id + "'"));
    }
  }
  if (!unsupported.empty()) {
    std::vector<std::string> issues;
    for (auto& u : unsupported) issues.push_back("unsupported BPMN element: " + u);
    throw ValidationError(std::move(issues));
  }
  return ProcessModel(std::move(nodes), std::move(flows), std::move(defaults));
}

ProcessModel parse_model(std::string_view text) {
  auto pos = text.find_first_not_of(" \t\r\n");
  if (pos == std::string_view::npos) throw SchemaError("empty process model");
  if (text[pos] == '<') return parse_bpmn_xml(text);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("process JSON: ") + e.what());
  }
  if (j.contains("das_version") && j.contains("process")) return process_from_json(j["process"]);
  return process_from_json(j);
}

ProcessModel load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open model file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_model(ss.str());
}

}  // namespace dasim
