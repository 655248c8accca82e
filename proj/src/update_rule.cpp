#include "dasim/update_rule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dasim/errors.hpp"

namespace dasim {

double RegressionTree::predict(double x) const {
  if (nodes.empty()) return 0.0;
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) i = static_cast<std::size_t>(x <= nodes[i].threshold ? nodes[i].left : nodes[i].right);
  return nodes[i].value;
}

namespace {
int depth_from(const RegressionTree& t, int i) {
  const auto& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(depth_from(t, n.left), depth_from(t, n.right));
}
}  // namespace

int RegressionTree::depth() const { return nodes.empty() ? 0 : depth_from(*this, 0); }

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const Node& n) { return n.is_leaf(); }));
}

std::string_view to_string(RuleFamily f) {
  switch (f) {
    case RuleFamily::Linear: return "linear";
    case RuleFamily::Tree: return "regression_tree";
    case RuleFamily::Delta: return "delta_distribution";
    case RuleFamily::Generator: return "distribution_generator";
    case RuleFamily::Markov: return "markov";
    case RuleFamily::Categorical: return "probabilistic_generator";
  }
  return "?";
}

std::string_view family_code(RuleFamily f) {
  static constexpr std::string_view codes[] = {"UR1", "UR2", "UR3", "UR4", "UR5", "UR6"};
  return codes[static_cast<int>(f)];
}

AttrKind rule_kind(const UpdateRule& r) {
  return r.index() <= 3 ? AttrKind::Numeric : AttrKind::Categorical;
}

bool is_generator(const UpdateRule& r) {
  return std::holds_alternative<GeneratorRule>(r) || std::holds_alternative<CategoricalRule>(r);
}

namespace {

void check_probs(const std::vector<double>& p, std::size_t n, const std::string& what,
                 std::vector<std::string>& issues) {
  if (p.size() != n) {
    issues.push_back(what + " has " + std::to_string(p.size()) + " entries, expected " +
                     std::to_string(n));
    return;
  }
  double s = 0;
  for (double x : p) {
    if (!(x >= 0) || !std::isfinite(x)) {
      issues.push_back(what + " has a negative or non-finite entry");
      return;
    }
    s += x;
  }
  if (std::abs(s - 1.0) > 1e-9) issues.push_back(what + " sums to " + format_number(s));
}

}  // namespace

std::vector<std::string> check_rule(const UpdateRule& r) {
  std::vector<std::string> issues;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LinearRule>) {
          if (!std::isfinite(x.slope) || !std::isfinite(x.intercept))
            issues.push_back("linear rule has non-finite coefficients");
        } else if constexpr (std::is_same_v<T, TreeRule>) {
          if (x.tree.nodes.empty()) issues.push_back("regression tree is empty");
          for (const auto& n : x.tree.nodes) {
            auto sz = static_cast<int>(x.tree.nodes.size());
            if (!n.is_leaf() && (n.left <= 0 || n.right <= 0 || n.left >= sz || n.right >= sz)) {
              issues.push_back("regression tree has a dangling child index");
              break;
            }
          }
        } else if constexpr (std::is_same_v<T, DeltaRule>) {
          if (auto m = x.delta.check(); !m.empty()) issues.push_back(m);
        } else if constexpr (std::is_same_v<T, GeneratorRule>) {
          if (auto m = x.dist.check(); !m.empty()) issues.push_back(m);
        } else if constexpr (std::is_same_v<T, MarkovRule>) {
          if (x.states.empty()) issues.push_back("markov rule has no states");
          if (x.matrix.size() != x.states.size())
            issues.push_back("markov matrix must have one row per state");
          for (std::size_t i = 0; i < x.matrix.size(); ++i)
            check_probs(x.matrix[i], x.states.size(), "markov row " + std::to_string(i), issues);
          check_probs(x.fallback, x.states.size(), "markov fallback", issues);
        } else {
          if (x.states.empty()) issues.push_back("probabilistic generator has no states");
          check_probs(x.probs, x.states.size(), "probabilistic generator", issues);
        }
      },
      r);
  return issues;
}

std::size_t sample_index(const std::vector<double>& weights, std::mt19937_64& rng) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double u = std::uniform_real_distribution<double>(0.0, total)(rng);
  double acc = 0.0;
  std::size_t last = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0) continue;
    last = i;
    acc += weights[i];
    if (u < acc) return i;
  }
  return last;
}

Value apply_rule(const UpdateRule& rule, const Value& prev, std::mt19937_64& rng,
                 RuleCounters* counters) {
  return std::visit(
      [&](const auto& x) -> Value {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LinearRule>) {
          return x.slope * as_number(prev) + x.intercept;
        } else if constexpr (std::is_same_v<T, TreeRule>) {
          return x.tree.predict(as_number(prev));
        } else if constexpr (std::is_same_v<T, DeltaRule>) {
          return as_number(prev) + x.delta.sample(rng);
        } else if constexpr (std::is_same_v<T, GeneratorRule>) {
          return x.dist.sample(rng);
        } else if constexpr (std::is_same_v<T, MarkovRule>) {
          const std::vector<double>* row = nullptr;
          if (!is_numeric(prev)) {
            auto it = std::lower_bound(x.states.begin(), x.states.end(), as_category(prev));
            if (it != x.states.end() && *it == as_category(prev))
              row = &x.matrix[static_cast<std::size_t>(it - x.states.begin())];
          }
          if (!row) {
            if (counters) ++counters->unknown_markov_state;
            row = &x.fallback;
          }
          return x.states[sample_index(*row, rng)];
        } else {
          return x.states[sample_index(x.probs, rng)];
        }
      },
      rule);
}

namespace {

nlohmann::json tree_to_json(const RegressionTree& t) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& n : t.nodes) {
    nlohmann::json jn{{"value", n.value}, {"n", n.n}};
    if (!n.is_leaf()) {
      jn["threshold"] = n.threshold;
      jn["left"] = n.left;
      jn["right"] = n.right;
    }
    nodes.push_back(std::move(jn));
  }
  return nodes;
}

RegressionTree tree_from_json(const nlohmann::json& j) {
  RegressionTree t;
  for (const auto& jn : j) {
    RegressionTree::Node n;
    n.value = jn.at("value").get<double>();
    n.n = jn.value("n", std::size_t{0});
    if (jn.contains("left")) {
      n.threshold = jn.at("threshold").get<double>();
      n.left = jn.at("left").get<int>();
      n.right = jn.at("right").get<int>();
    }
    t.nodes.push_back(n);
  }
  return t;
}

}  // namespace

nlohmann::json to_json(const UpdateRule& r) {
  nlohmann::json j{{"type", to_string(family_of(r))}};
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LinearRule>) {
          j["slope"] = x.slope;
          j["intercept"] = x.intercept;
        } else if constexpr (std::is_same_v<T, TreeRule>) {
          j["nodes"] = tree_to_json(x.tree);
        } else if constexpr (std::is_same_v<T, DeltaRule>) {
          j["delta"] = to_json(x.delta);
        } else if constexpr (std::is_same_v<T, GeneratorRule>) {
          j["distribution"] = to_json(x.dist);
        } else if constexpr (std::is_same_v<T, MarkovRule>) {
          j["states"] = x.states;
          j["matrix"] = x.matrix;
          j["fallback"] = x.fallback;
          if (!x.counts.empty()) j["counts"] = x.counts;
        } else {
          j["states"] = x.states;
          j["probs"] = x.probs;
        }
      },
      r);
  return j;
}

UpdateRule rule_from_json(const nlohmann::json& j) {
  UpdateRule r;
  try {
    auto type = j.at("type").get<std::string>();
    if (type == "linear") {
      r = LinearRule{j.at("slope").get<double>(), j.at("intercept").get<double>()};
    } else if (type == "regression_tree") {
      r = TreeRule{tree_from_json(j.at("nodes"))};
    } else if (type == "delta_distribution") {
      r = DeltaRule{distribution_from_json(j.at("delta"))};
    } else if (type == "distribution_generator") {
      r = GeneratorRule{distribution_from_json(j.at("distribution"))};
    } else if (type == "markov") {
      MarkovRule m;
      m.states = j.at("states").get<std::vector<std::string>>();
      m.matrix = j.at("matrix").get<std::vector<std::vector<double>>>();
      m.fallback = j.at("fallback").get<std::vector<double>>();
      if (j.contains("counts")) m.counts = j["counts"].get<std::vector<std::vector<double>>>();
      if (!std::is_sorted(m.states.begin(), m.states.end()) ||
          std::adjacent_find(m.states.begin(), m.states.end()) != m.states.end())
        throw ValidationError({"markov states must be sorted and unique"});
      r = std::move(m);
    } else if (type == "probabilistic_generator") {
      r = CategoricalRule{j.at("states").get<std::vector<std::string>>(),
                          j.at("probs").get<std::vector<double>>()};
    } else {
      throw SchemaError("unknown rule type '" + type + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("rule: ") + e.what());
  }
  if (auto issues = check_rule(r); !issues.empty()) throw ValidationError(std::move(issues));
  return r;
}

std::string describe(const UpdateRule& r) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, LinearRule>) {
          return "linear(a=" + format_number(x.slope) + ", b=" + format_number(x.intercept) + ")";
        } else if constexpr (std::is_same_v<T, TreeRule>) {
          return "regression_tree(leaves=" + std::to_string(x.tree.leaf_count()) + ")";
        } else if constexpr (std::is_same_v<T, DeltaRule>) {
          return "prev + " + std::string(to_string(x.delta.family));
        } else if constexpr (std::is_same_v<T, GeneratorRule>) {
          return std::string(to_string(x.dist.family)) + " generator";
        } else if constexpr (std::is_same_v<T, MarkovRule>) {
          return "markov(" + std::to_string(x.states.size()) + " states)";
        } else {
          return "categorical(" + std::to_string(x.states.size()) + " states)";
        }
      },
      r);
}

}  // namespace dasim
