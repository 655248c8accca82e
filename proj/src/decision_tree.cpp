#include "dasim/decision_tree.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <set>

namespace dasim {

std::size_t ClassificationTree::leaf_of(const std::vector<Value>& row) const {
  std::size_t i = 0;
  while (!nodes[i].is_leaf()) {
    const auto& n = nodes[i];
    const Value& v = row[static_cast<std::size_t>(n.feature)];
    bool left = features[static_cast<std::size_t>(n.feature)].kind == AttrKind::Numeric
                    ? is_numeric(v) && as_number(v) <= n.threshold
                    : !is_numeric(v) && as_category(v) == n.category;
    i = static_cast<std::size_t>(left ? n.left : n.right);
  }
  return i;
}

bool ClassificationTree::predict(const std::vector<Value>& row) const {
  if (nodes.empty()) return false;
  const auto& leaf = nodes[leaf_of(row)];
  return leaf.positives > leaf.negatives;
}

namespace {

int depth_at(const ClassificationTree& t, int i) {
  const auto& n = t.nodes[static_cast<std::size_t>(i)];
  if (n.is_leaf()) return 0;
  return 1 + std::max(depth_at(t, n.left), depth_at(t, n.right));
}

double gini(double pos, double n) {
  if (n <= 0) return 0.0;
  double p = pos / n;
  return 2.0 * p * (1.0 - p);
}

struct Builder {
  const FeatureTable& table;
  const std::vector<bool>& labels;
  TreeParams params;
  ClassificationTree tree;

  struct Split {
    int feature = -1;
    double threshold = 0.0;
    std::string category;
    double score = 0.0;  // weighted child impurity
  };

  std::optional<Split> best_split(const std::vector<std::size_t>& idx, double parent_impurity) {
    const double n = static_cast<double>(idx.size());
    double total_pos = 0;
    for (auto i : idx) total_pos += labels[i];
    std::optional<Split> best;
    double best_score = parent_impurity * n - 1e-12;
    const std::size_t min_leaf = params.min_leaf;
    for (std::size_t f = 0; f < table.features.size(); ++f) {
      if (table.features[f].kind == AttrKind::Numeric) {
        std::vector<std::pair<double, bool>> xs;
        xs.reserve(idx.size());
        for (auto i : idx) {
          const Value& v = table.rows[i][f];
          xs.emplace_back(is_numeric(v) ? as_number(v) : 0.0, labels[i]);
        }
        std::stable_sort(xs.begin(), xs.end(),
                         [](const auto& a, const auto& b) { return a.first < b.first; });
        double lp = 0;
        for (std::size_t k = 0; k + 1 < xs.size(); ++k) {
          lp += xs[k].second;
          const std::size_t nl = k + 1, nr = xs.size() - nl;
          if (nl < min_leaf) continue;
          if (nr < min_leaf) break;
          if (xs[k].first == xs[k + 1].first) continue;
          const double rp = total_pos - lp;
          const double score = gini(lp, static_cast<double>(nl)) * static_cast<double>(nl) +
                               gini(rp, static_cast<double>(nr)) * static_cast<double>(nr);
          if (score < best_score) {
            best_score = score;
            best = Split{static_cast<int>(f), 0.5 * (xs[k].first + xs[k + 1].first), {}, score};
          }
        }
      } else {
        std::map<std::string, std::pair<double, double>> counts;  // value -> (n, pos)
        for (auto i : idx) {
          const Value& v = table.rows[i][f];
          if (is_numeric(v)) continue;
          auto& c = counts[as_category(v)];
          c.first += 1;
          c.second += labels[i];
        }
        if (counts.size() < 2) continue;
        for (const auto& [cat, c] : counts) {
          if (cat == kUnsetCategory) continue;
          const double nl = c.first, nr = n - nl;
          if (nl < static_cast<double>(min_leaf) || nr < static_cast<double>(min_leaf)) continue;
          const double score = gini(c.second, nl) * nl + gini(total_pos - c.second, nr) * nr;
          if (score < best_score) {
            best_score = score;
            best = Split{static_cast<int>(f), 0.0, cat, score};
          }
        }
      }
    }
    return best;
  }

  int build(const std::vector<std::size_t>& idx, int depth) {
    ClassificationTree::Node node;
    for (auto i : idx) (labels[i] ? node.positives : node.negatives)++;
    const int me = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);
    const double n = static_cast<double>(idx.size());
    const double imp = gini(static_cast<double>(node.positives), n);
    if (depth >= params.max_depth || idx.size() < 2 * params.min_leaf || imp == 0.0) return me;
    auto split = best_split(idx, imp);
    if (!split) return me;
    std::vector<std::size_t> l, r;
    const auto f = static_cast<std::size_t>(split->feature);
    for (auto i : idx) {
      const Value& v = table.rows[i][f];
      bool left = table.features[f].kind == AttrKind::Numeric
                      ? (is_numeric(v) ? as_number(v) : 0.0) <= split->threshold
                      : !is_numeric(v) && as_category(v) == split->category;
      (left ? l : r).push_back(i);
    }
    const int li = build(l, depth + 1);
    const int ri = build(r, depth + 1);
    auto& self = tree.nodes[static_cast<std::size_t>(me)];
    self.feature = split->feature;
    self.threshold = split->threshold;
    self.category = split->category;
    self.left = li;
    self.right = ri;
    return me;
  }
};

}  // namespace

int ClassificationTree::depth() const { return nodes.empty() ? 0 : depth_at(*this, 0); }

ClassificationTree fit_classification_tree(const FeatureTable& table,
                                           const std::vector<bool>& labels,
                                           const TreeParams& params,
                                           const std::vector<std::size_t>* subset) {
  Builder b{table, labels, params, {}};
  b.params.min_leaf = std::max<std::size_t>(1, params.min_leaf);
  b.tree.features = table.features;
  std::vector<std::size_t> idx;
  if (subset) {
    idx = *subset;
  } else {
    idx.resize(table.rows.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  }
  b.build(idx, 0);
  return b.tree;
}

double cross_validated_accuracy(const FeatureTable& table, const std::vector<bool>& labels,
                                const TreeParams& params, int folds) {
  const std::size_t n = table.rows.size();
  if (n == 0) return 0.0;
  folds = std::max(2, folds);
  std::size_t correct = 0;
  for (int k = 0; k < folds; ++k) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < n; ++i)
      (static_cast<int>(i % static_cast<std::size_t>(folds)) == k ? test : train).push_back(i);
    if (test.empty()) continue;
    auto tree = fit_classification_tree(table, labels, params, &train);
    for (auto i : test) correct += tree.predict(table.rows[i]) == labels[i];
  }
  return static_cast<double>(correct) / static_cast<double>(n);
}

std::vector<std::size_t> qualifying_leaves(const ClassificationTree& tree, double purity_min) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
    const auto& n = tree.nodes[i];
    if (n.is_leaf() && n.positives > 0 && n.purity() >= purity_min) out.push_back(i);
  }
  return out;
}

namespace {

struct PathStep {
  int feature;
  bool left;
  double threshold;
  std::string category;
};

void collect_paths(const ClassificationTree& t, std::size_t i, std::vector<PathStep>& path,
                   const std::set<std::size_t>& wanted, std::vector<std::vector<PathStep>>& out) {
  const auto& n = t.nodes[i];
  if (n.is_leaf()) {
    if (wanted.count(i)) out.push_back(path);
    return;
  }
  path.push_back({n.feature, true, n.threshold, n.category});
  collect_paths(t, static_cast<std::size_t>(n.left), path, wanted, out);
  path.back().left = false;
  collect_paths(t, static_cast<std::size_t>(n.right), path, wanted, out);
  path.pop_back();
}

Condition path_condition(const ClassificationTree& t, const std::vector<PathStep>& steps) {
  struct Bounds {
    std::optional<double> lo;  // x > lo
    std::optional<double> hi;  // x <= hi
    std::optional<std::string> eq;
    std::vector<std::string> ne;
  };
  std::map<int, Bounds> per;
  std::vector<int> order;
  for (const auto& s : steps) {
    if (!per.count(s.feature)) order.push_back(s.feature);
    auto& b = per[s.feature];
    if (t.features[static_cast<std::size_t>(s.feature)].kind == AttrKind::Numeric) {
      if (s.left) b.hi = b.hi ? std::min(*b.hi, s.threshold) : s.threshold;
      else b.lo = b.lo ? std::max(*b.lo, s.threshold) : s.threshold;
    } else {
      if (s.left) b.eq = s.category;
      else b.ne.push_back(s.category);
    }
  }
  std::vector<Condition> terms;
  for (int f : order) {
    const auto& b = per[f];
    const std::string& name = t.features[static_cast<std::size_t>(f)].name;
    if (b.lo && b.hi) terms.push_back(Condition::in_range(name, *b.lo, *b.hi));
    else if (b.hi) terms.push_back(Condition::le(name, *b.hi));
    else if (b.lo) terms.push_back(Condition::gt(name, *b.lo));
    if (b.eq) {
      terms.push_back(Condition::eq(name, *b.eq));
    } else {
      for (const auto& v : b.ne) terms.push_back(Condition::ne(name, v));
    }
  }
  if (terms.empty()) return Condition::always();
  return Condition::all_of(std::move(terms));
}

}  // namespace

Condition extract_condition(const ClassificationTree& tree, double purity_min) {
  if (tree.nodes.empty()) return Condition::always();
  auto leaves = qualifying_leaves(tree, purity_min);
  if (leaves.empty()) return Condition::always();
  std::set<std::size_t> wanted(leaves.begin(), leaves.end());
  std::vector<std::vector<PathStep>> paths;
  std::vector<PathStep> path;
  collect_paths(tree, 0, path, wanted, paths);
  std::vector<Condition> disj;
  for (const auto& p : paths) {
    Condition c = path_condition(tree, p);
    if (c.is_true()) return c;
    disj.push_back(std::move(c));
  }
  return Condition::any_of(std::move(disj));
}

}  // namespace dasim
