#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dasim/distribution.hpp"
#include "dasim/value.hpp"
#include "json.hpp"

namespace dasim {

/// Piecewise-constant regressor over a single input. Node 0 is the root.
struct RegressionTree {
  struct Node {
    double threshold = 0.0;  // x <= threshold goes left
    int left = -1;           // -1 on leaves
    int right = -1;
    double value = 0.0;      // mean target over the node's samples
    std::size_t n = 0;

    bool is_leaf() const { return left < 0; }
    friend bool operator==(const Node&, const Node&) = default;
  };
  std::vector<Node> nodes;

  double predict(double x) const;
  int depth() const;
  std::size_t leaf_count() const;
  friend bool operator==(const RegressionTree&, const RegressionTree&) = default;
};

/// next = slope * prev + intercept
struct LinearRule {
  double slope = 1.0;
  double intercept = 0.0;
  friend bool operator==(const LinearRule&, const LinearRule&) = default;
};

/// next = tree(prev)
struct TreeRule {
  RegressionTree tree;
  friend bool operator==(const TreeRule&, const TreeRule&) = default;
};

/// next = prev + sample(delta)
struct DeltaRule {
  Distribution delta;
  friend bool operator==(const DeltaRule&, const DeltaRule&) = default;
};

/// next = sample(dist)
struct GeneratorRule {
  Distribution dist;
  friend bool operator==(const GeneratorRule&, const GeneratorRule&) = default;
};

/// next ~ matrix[row(prev)]. An unknown prev samples from `fallback`.
struct MarkovRule {
  std::vector<std::string> states;
  std::vector<std::vector<double>> matrix;
  std::vector<double> fallback;             // marginal next-state frequencies
  std::vector<std::vector<double>> counts;  // raw transition counts, may be empty
  friend bool operator==(const MarkovRule&, const MarkovRule&) = default;
};

/// next ~ probs
struct CategoricalRule {
  std::vector<std::string> states;
  std::vector<double> probs;
  friend bool operator==(const CategoricalRule&, const CategoricalRule&) = default;
};

using UpdateRule =
    std::variant<LinearRule, TreeRule, DeltaRule, GeneratorRule, MarkovRule, CategoricalRule>;

enum class RuleFamily { Linear, Tree, Delta, Generator, Markov, Categorical };

inline RuleFamily family_of(const UpdateRule& r) { return static_cast<RuleFamily>(r.index()); }
std::string_view to_string(RuleFamily f);
/// Short family code: UR1 .. UR6.
std::string_view family_code(RuleFamily f);
AttrKind rule_kind(const UpdateRule& r);
/// Generators ignore the previous value.
bool is_generator(const UpdateRule& r);

/// Empty when structurally valid (row sums, probability sums, parameter domains).
std::vector<std::string> check_rule(const UpdateRule& r);

struct RuleCounters {
  std::size_t unknown_markov_state = 0;
};

/// Samples an index from non-negative weights summing to about 1.
std::size_t sample_index(const std::vector<double>& weights, std::mt19937_64& rng);

/// Next value of an attribute given its previous value. Randomised variants draw
/// from `rng`; deterministic ones do not touch it.
Value apply_rule(const UpdateRule& rule, const Value& prev, std::mt19937_64& rng,
                 RuleCounters* counters = nullptr);

nlohmann::json to_json(const UpdateRule& r);
UpdateRule rule_from_json(const nlohmann::json& j);

std::string describe(const UpdateRule& r);

}  // namespace dasim
