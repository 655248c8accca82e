#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dasim {

enum class NodeKind { StartEvent, EndEvent, Task, Gateway };
enum class GateType { Xor, Or, And };
enum class Direction { Split, Join };

struct Node {
  std::string id;
  NodeKind kind = NodeKind::Task;
  std::string label;
  std::optional<GateType> gate_type;
  std::optional<Direction> direction;

  bool is_split() const { return kind == NodeKind::Gateway && direction == Direction::Split; }
  bool is_join() const { return kind == NodeKind::Gateway && direction == Direction::Join; }
  friend bool operator==(const Node&, const Node&) = default;
};

struct Flow {
  std::string id;
  std::string source;
  std::string target;
  friend bool operator==(const Flow&, const Flow&) = default;
};

/// Validated BPMN-subset control-flow graph. Immutable after construction.
///
/// Supported shapes: one start event, >= 1 end events, tasks with exactly one
/// incoming and one outgoing flow, gateways that are pure splits (1 in, >= 2 out)
/// or pure joins (>= 2 in, 1 out). XOR and OR splits carry one default flow.
/// OR splits must be block-structured: each pairs with exactly one OR join.
class ProcessModel {
 public:
  ProcessModel() = default;
  /// Throws ValidationError listing every violated invariant with node/flow ids.
  ProcessModel(std::vector<Node> nodes, std::vector<Flow> flows,
               std::map<std::string, std::string> default_flows);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  const std::vector<Flow>& flows() const noexcept { return flows_; }
  const std::map<std::string, std::string>& default_flows() const noexcept { return defaults_; }

  bool has_node(std::string_view id) const;
  const Node& node(std::string_view id) const;
  const Flow& flow(std::string_view id) const;
  std::size_t node_index(std::string_view id) const;
  std::size_t flow_index(std::string_view id) const;

  /// Flows leaving / entering `node_id`, ascending by flow id. Unknown id -> ArgumentError.
  std::vector<const Flow*> outgoing(std::string_view node_id) const;
  std::vector<const Flow*> incoming(std::string_view node_id) const;

  const Node& start_node() const;
  std::optional<std::string> default_flow(std::string_view gateway_id) const;
  /// Task node with the given label, or null.
  const Node* task_by_label(std::string_view label) const;
  std::vector<std::string> task_labels() const;
  /// Split gateways of any type, in node order.
  std::vector<const Node*> split_gateways() const;
  /// OR join paired with an OR split.
  std::optional<std::string> paired_join(std::string_view or_split_id) const;

  friend bool operator==(const ProcessModel& a, const ProcessModel& b) {
    return a.nodes_ == b.nodes_ && a.flows_ == b.flows_ && a.defaults_ == b.defaults_;
  }

 private:
  void build_indexes();
  std::vector<std::string> validate();

  std::vector<Node> nodes_;
  std::vector<Flow> flows_;
  std::map<std::string, std::string> defaults_;

  std::map<std::string, std::size_t, std::less<>> node_idx_;
  std::map<std::string, std::size_t, std::less<>> flow_idx_;
  std::vector<std::vector<std::size_t>> out_;  // flow indexes, sorted by id
  std::vector<std::vector<std::size_t>> in_;
  std::map<std::string, std::string, std::less<>> or_pairs_;
};

std::string_view to_string(NodeKind k);
std::string_view to_string(GateType g);
std::string_view to_string(Direction d);

/// Repo JSON process format.
ProcessModel process_from_json(const nlohmann::json& j);
nlohmann::json process_to_json(const ProcessModel& model);

/// Accepts either the JSON process format or BPMN 2.0 XML (detected by the first
/// non-blank character).
ProcessModel parse_model(std::string_view text);
ProcessModel parse_bpmn_xml(std::string_view xml);
ProcessModel load_model_file(const std::string& path);

}  // namespace dasim
