#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dasim/update_rule.hpp"
#include "dasim/value.hpp"

namespace dasim {

/// Attribute value before an activity started and after it completed.
struct TransitionPair {
  Value before;
  Value after;
  friend bool operator==(const TransitionPair&, const TransitionPair&) = default;
};

struct FitOptions {
  int tree_max_depth = 4;
  std::size_t tree_min_leaf = 10;
  /// Quantile levels used to score distributional numeric rules.
  int score_levels = 99;
  double change_ratio = 0.1;
};

struct FitReport {
  UpdateRule rule;
  double error = 0.0;
  std::size_t n = 0;
};

LinearRule fit_linear(std::span<const double> x, std::span<const double> y);
/// Least-squares regression tree on one input.
RegressionTree fit_regression_tree(std::span<const double> x, std::span<const double> y,
                                   int max_depth, std::size_t min_leaf);
/// Mean squared error of a tree on (x, y).
double tree_mse(const RegressionTree& t, std::span<const double> x, std::span<const double> y);

/// Mean continuous ranked probability score of a numeric rule on the pairs. For a
/// deterministic rule this is the mean absolute error.
double numeric_rule_error(const UpdateRule& rule, std::span<const TransitionPair> pairs,
                          const FitOptions& opts = {});
/// Mean negative log-likelihood with add-one smoothing over the rule's states.
double categorical_rule_error(const UpdateRule& rule, std::span<const TransitionPair> pairs);

/// UR1..UR4 candidates in family order. Non-finite candidates are dropped.
std::vector<FitReport> fit_numeric_candidates(std::span<const TransitionPair> pairs,
                                              const FitOptions& opts = {});
/// UR5 and UR6 candidates.
std::vector<FitReport> fit_categorical_candidates(std::span<const TransitionPair> pairs);

/// Smallest finite error; ties keep the earlier family. Nullopt if none is finite.
std::optional<FitReport> select_min_error(std::span<const FitReport> candidates);

/// True when the attribute changed in at least `change_ratio` of the pairs.
bool keep_rule(std::span<const TransitionPair> pairs, double change_ratio = 0.1);
bool value_changed(const Value& before, const Value& after);

/// Fits the candidates of the pairs' kind and selects the best.
std::optional<FitReport> fit_best_rule(std::span<const TransitionPair> pairs,
                                       const FitOptions& opts = {});

/// Generator over a sample of values: a fitted distribution or empirical frequencies.
UpdateRule fit_generator(std::span<const Value> values);

}  // namespace dasim
