#include "dasim/update_rules.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "dasim/errors.hpp"
#include "dasim/kernels.hpp"

namespace dasim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double mean_of(std::span<const double> v) {
  return v.empty() ? 0.0 : kernels::sum(v) / static_cast<double>(v.size());
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

LinearRule fit_linear(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  const double mx = mean_of(x), my = mean_of(y);
  const double sxx = kernels::centered_sq_sum(x, mx);
  if (!(sxx > 1e-12 * n * std::max(1.0, mx * mx))) return {0.0, my};
  const double sxy = kernels::dot(x, y) - n * mx * my;
  const double a = sxy / sxx;
  return {a, my - a * mx};
}

namespace {

struct TreeBuilder {
  std::vector<std::pair<double, double>> xy;  // sorted by x
  int max_depth;
  std::size_t min_leaf;
  RegressionTree tree;

  int build(std::size_t lo, std::size_t hi, int depth) {
    const std::size_t n = hi - lo;
    double sum = 0, sq = 0;
    for (std::size_t i = lo; i < hi; ++i) sum += xy[i].second, sq += xy[i].second * xy[i].second;
    RegressionTree::Node node;
    node.value = sum / static_cast<double>(n);
    node.n = n;
    int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(node);
    if (depth >= max_depth || n < 2 * min_leaf) return idx;

    const double sse_parent = sq - sum * sum / static_cast<double>(n);
    double best_gain = 1e-12 * std::max(1.0, std::abs(sse_parent));
    std::size_t best_split = 0;
    double ls = 0, lq = 0;
    for (std::size_t i = lo; i + 1 < hi; ++i) {
      ls += xy[i].second;
      lq += xy[i].second * xy[i].second;
      const std::size_t nl = i + 1 - lo, nr = n - nl;
      if (nl < min_leaf) continue;
      if (nr < min_leaf) break;
      if (xy[i].first == xy[i + 1].first) continue;
      const double rs = sum - ls, rq = sq - lq;
      const double sse = (lq - ls * ls / static_cast<double>(nl)) + (rq - rs * rs / static_cast<double>(nr));
      const double gain = sse_parent - sse;
      if (gain > best_gain) best_gain = gain, best_split = i + 1;
    }
    if (best_split == 0) return idx;
    const double thr = 0.5 * (xy[best_split - 1].first + xy[best_split].first);
    int l = build(lo, best_split, depth + 1);
    int r = build(best_split, hi, depth + 1);
    auto& me = tree.nodes[static_cast<std::size_t>(idx)];
    me.threshold = thr;
    me.left = l;
    me.right = r;
    return idx;
  }
};

}  // namespace

RegressionTree fit_regression_tree(std::span<const double> x, std::span<const double> y,
                                   int max_depth, std::size_t min_leaf) {
  TreeBuilder b;
  b.max_depth = max_depth;
  b.min_leaf = std::max<std::size_t>(1, min_leaf);
  const std::size_t n = std::min(x.size(), y.size());
  if (n == 0) {
    b.tree.nodes.push_back({});
    return b.tree;
  }
  b.xy.reserve(n);
  for (std::size_t i = 0; i < n; ++i) b.xy.emplace_back(x[i], y[i]);
  std::stable_sort(b.xy.begin(), b.xy.end(),
                   [](const auto& p, const auto& q) { return p.first < q.first; });
  b.build(0, n, 0);
  return b.tree;
}

double tree_mse(const RegressionTree& t, std::span<const double> x, std::span<const double> y) {
  double s = 0;
  const std::size_t n = std::min(x.size(), y.size());
  for (std::size_t i = 0; i < n; ++i) {
    double d = y[i] - t.predict(x[i]);
    s += d * d;
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

namespace {

std::vector<double> score_levels(int m) {
  std::vector<double> t(static_cast<std::size_t>(m));
  for (int j = 0; j < m; ++j) t[static_cast<std::size_t>(j)] = (j + 0.5) / m;
  return t;
}

std::vector<double> quantile_grid(const Distribution& d, const std::vector<double>& levels) {
  std::vector<double> q(levels.size());
  for (std::size_t j = 0; j < levels.size(); ++j) q[j] = d.quantile(levels[j]);
  return q;
}

double grid_crps(std::span<const double> q, std::span<const double> levels, double y) {
  return 2.0 * kernels::pinball_sum(q, levels, y) / static_cast<double>(levels.size());
}

}  // namespace

double numeric_rule_error(const UpdateRule& rule, std::span<const TransitionPair> pairs,
                          const FitOptions& opts) {
  if (pairs.empty()) return kInf;
  const auto levels = score_levels(std::max(1, opts.score_levels));
  double total = 0.0;
  if (const auto* g = std::get_if<GeneratorRule>(&rule)) {
    const auto q = quantile_grid(g->dist, levels);
    for (const auto& p : pairs) total += grid_crps(q, levels, as_number(p.after));
  } else if (const auto* d = std::get_if<DeltaRule>(&rule)) {
    const auto q = quantile_grid(d->delta, levels);
    for (const auto& p : pairs) total += grid_crps(q, levels, as_number(p.after) - as_number(p.before));
  } else {
    std::vector<double> pred(pairs.size()), obs(pairs.size());
    std::mt19937_64 unused(0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      pred[i] = as_number(apply_rule(rule, pairs[i].before, unused));
      obs[i] = as_number(pairs[i].after);
    }
    total = kernels::abs_diff_sum(pred, obs);
  }
  double e = total / static_cast<double>(pairs.size());
  return std::isfinite(e) ? e : kInf;
}

namespace {

std::vector<double> smoothed_marginal(const std::vector<std::string>& states,
                                      std::span<const TransitionPair> pairs) {
  std::vector<double> c(states.size(), 1.0);
  double total = static_cast<double>(states.size());
  for (const auto& p : pairs) {
    if (is_numeric(p.after)) continue;
    auto it = std::lower_bound(states.begin(), states.end(), as_category(p.after));
    if (it != states.end() && *it == as_category(p.after)) {
      c[static_cast<std::size_t>(it - states.begin())] += 1.0;
      total += 1.0;
    }
  }
  for (auto& x : c) x /= total;
  return c;
}

std::ptrdiff_t state_index(const std::vector<std::string>& states, const Value& v) {
  if (is_numeric(v)) return -1;
  auto it = std::lower_bound(states.begin(), states.end(), as_category(v));
  if (it == states.end() || *it != as_category(v)) return -1;
  return it - states.begin();
}

}  // namespace

double categorical_rule_error(const UpdateRule& rule, std::span<const TransitionPair> pairs) {
  if (pairs.empty()) return kInf;
  const std::vector<std::string>* states = nullptr;
  if (const auto* m = std::get_if<MarkovRule>(&rule)) states = &m->states;
  else if (const auto* c = std::get_if<CategoricalRule>(&rule)) states = &c->states;
  else return kInf;
  const auto marginal = smoothed_marginal(*states, pairs);
  const double floor = 1.0 / (static_cast<double>(pairs.size()) + static_cast<double>(states->size()) + 1.0);
  double nll = 0.0;
  for (const auto& p : pairs) {
    auto s = state_index(*states, p.after);
    double prob = 0.0;
    if (s >= 0) {
      if (const auto* m = std::get_if<MarkovRule>(&rule)) {
        auto r = state_index(*states, p.before);
        prob = r >= 0 ? m->matrix[static_cast<std::size_t>(r)][static_cast<std::size_t>(s)]
                      : marginal[static_cast<std::size_t>(s)];
      } else {
        prob = marginal[static_cast<std::size_t>(s)];
      }
    }
    nll -= std::log(std::max(prob, floor));
  }
  return nll / static_cast<double>(pairs.size());
}

std::vector<FitReport> fit_numeric_candidates(std::span<const TransitionPair> pairs,
                                              const FitOptions& opts) {
  std::vector<FitReport> out;
  if (pairs.size() < 2) return out;
  std::vector<double> x(pairs.size()), y(pairs.size()), d(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!is_numeric(pairs[i].before) || !is_numeric(pairs[i].after))
      throw ArgumentError("numeric rule fit on categorical values");
    x[i] = as_number(pairs[i].before);
    y[i] = as_number(pairs[i].after);
    d[i] = y[i] - x[i];
  }
  if (!all_finite(x) || !all_finite(y) || !all_finite(d)) return out;

  auto push = [&](UpdateRule r) {
    if (!check_rule(r).empty()) return;
    double e = numeric_rule_error(r, pairs, opts);
    if (std::isfinite(e)) out.push_back({std::move(r), e, pairs.size()});
  };
  push(fit_linear(x, y));
  push(TreeRule{fit_regression_tree(x, y, opts.tree_max_depth, opts.tree_min_leaf)});
  auto fd = fit_distribution(d);
  if (std::isfinite(fd.ks)) push(DeltaRule{fd.dist});
  auto fy = fit_distribution(y);
  if (std::isfinite(fy.ks)) push(GeneratorRule{fy.dist});
  return out;
}

std::vector<FitReport> fit_categorical_candidates(std::span<const TransitionPair> pairs) {
  std::vector<FitReport> out;
  if (pairs.size() < 2) return out;
  std::vector<std::string> states;
  for (const auto& p : pairs) {
    if (is_numeric(p.after) || is_numeric(p.before))
      throw ArgumentError("categorical rule fit on numeric values");
    states.push_back(as_category(p.after));
  }
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  const std::size_t k = states.size();

  MarkovRule m;
  m.states = states;
  m.counts.assign(k, std::vector<double>(k, 0.0));
  std::vector<double> marg(k, 0.0);
  for (const auto& p : pairs) {
    auto s = static_cast<std::size_t>(state_index(states, p.after));
    marg[s] += 1.0;
    auto r = state_index(states, p.before);
    if (r >= 0) m.counts[static_cast<std::size_t>(r)][s] += 1.0;
  }
  m.matrix.assign(k, std::vector<double>(k, 0.0));
  for (std::size_t r = 0; r < k; ++r) {
    double row = std::accumulate(m.counts[r].begin(), m.counts[r].end(), 0.0);
    for (std::size_t s = 0; s < k; ++s)
      m.matrix[r][s] = (m.counts[r][s] + 1.0) / (row + static_cast<double>(k));
  }
  const double n = static_cast<double>(pairs.size());
  m.fallback.resize(k);
  for (std::size_t s = 0; s < k; ++s) m.fallback[s] = marg[s] / n;

  CategoricalRule c{states, m.fallback};
  UpdateRule ur5 = std::move(m), ur6 = std::move(c);
  double e5 = categorical_rule_error(ur5, pairs), e6 = categorical_rule_error(ur6, pairs);
  if (std::isfinite(e5)) out.push_back({std::move(ur5), e5, pairs.size()});
  if (std::isfinite(e6)) out.push_back({std::move(ur6), e6, pairs.size()});
  return out;
}

std::optional<FitReport> select_min_error(std::span<const FitReport> candidates) {
  const FitReport* best = nullptr;
  for (const auto& c : candidates) {
    if (!std::isfinite(c.error)) continue;
    if (!best || c.error < best->error ||
        (c.error == best->error && c.rule.index() < best->rule.index()))
      best = &c;
  }
  if (!best) return std::nullopt;
  return *best;
}

bool value_changed(const Value& before, const Value& after) {
  if (is_numeric(before) && is_numeric(after)) {
    double b = as_number(before), a = as_number(after);
    return std::abs(a - b) > 1e-9 * std::max(1.0, std::abs(b));
  }
  return before != after;
}

bool keep_rule(std::span<const TransitionPair> pairs, double change_ratio) {
  if (pairs.empty()) return false;
  std::size_t changed = 0;
  for (const auto& p : pairs) changed += value_changed(p.before, p.after);
  return static_cast<double>(changed) >= change_ratio * static_cast<double>(pairs.size()) &&
         changed > 0;
}

std::optional<FitReport> fit_best_rule(std::span<const TransitionPair> pairs,
                                       const FitOptions& opts) {
  if (pairs.empty()) return std::nullopt;
  auto cands = is_numeric(pairs.front().after) ? fit_numeric_candidates(pairs, opts)
                                               : fit_categorical_candidates(pairs);
  return select_min_error(cands);
}

UpdateRule fit_generator(std::span<const Value> values) {
  if (values.empty()) throw ArgumentError("fit_generator: no values");
  if (is_numeric(values.front())) {
    std::vector<double> xs;
    for (const auto& v : values) xs.push_back(as_number(v));
    auto fit = fit_distribution(xs);
    return GeneratorRule{fit.dist};
  }
  std::map<std::string, double> freq;
  for (const auto& v : values) freq[as_category(v)] += 1.0;
  CategoricalRule c;
  for (const auto& [s, n] : freq) {
    c.states.push_back(s);
    c.probs.push_back(n / static_cast<double>(values.size()));
  }
  return c;
}

}  // namespace dasim
