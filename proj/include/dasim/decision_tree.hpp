#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dasim/condition.hpp"
#include "dasim/value.hpp"

namespace dasim {

struct Feature {
  std::string name;
  AttrKind kind = AttrKind::Numeric;
};

/// Row-major feature matrix; rows[i][f] has the kind of features[f].
struct FeatureTable {
  std::vector<Feature> features;
  std::vector<std::vector<Value>> rows;
};

/// Binary classification tree. Numeric nodes send x <= threshold left, categorical
/// nodes send x == category left.
struct ClassificationTree {
  struct Node {
    int feature = -1;  // -1 on leaves
    double threshold = 0.0;
    std::string category;
    int left = -1;
    int right = -1;
    std::size_t positives = 0;
    std::size_t negatives = 0;

    bool is_leaf() const { return feature < 0; }
    double purity() const {
      auto n = positives + negatives;
      return n ? static_cast<double>(positives) / static_cast<double>(n) : 0.0;
    }
  };
  std::vector<Feature> features;
  std::vector<Node> nodes;

  /// Index of the leaf the row lands in.
  std::size_t leaf_of(const std::vector<Value>& row) const;
  /// Majority label of the row's leaf (ties predict false).
  bool predict(const std::vector<Value>& row) const;
  int depth() const;
};

struct TreeParams {
  int max_depth = 4;
  std::size_t min_leaf = 20;
};

/// Gini-impurity CART. `subset` restricts training to those row indexes.
ClassificationTree fit_classification_tree(const FeatureTable& table,
                                           const std::vector<bool>& labels,
                                           const TreeParams& params = {},
                                           const std::vector<std::size_t>* subset = nullptr);

/// Accuracy over k folds with row i held out in fold i mod k.
double cross_validated_accuracy(const FeatureTable& table, const std::vector<bool>& labels,
                                const TreeParams& params = {}, int folds = 5);

/// Disjunction over root-to-leaf paths ending in leaves with purity >= purity_min.
/// Bounds on one numeric attribute are merged into a single predicate. TRUE when no
/// leaf qualifies.
Condition extract_condition(const ClassificationTree& tree, double purity_min = 0.7);

/// Leaves that qualify for `extract_condition`.
std::vector<std::size_t> qualifying_leaves(const ClassificationTree& tree, double purity_min = 0.7);

}  // namespace dasim
