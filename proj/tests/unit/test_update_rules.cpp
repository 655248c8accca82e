#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "dasim/update_rules.hpp"

using namespace dasim;

namespace {

std::vector<TransitionPair> numeric_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<TransitionPair> out;
  for (std::size_t i = 0; i < x.size(); ++i) out.push_back({x[i], y[i]});
  return out;
}

const FitReport& candidate(const std::vector<FitReport>& c, RuleFamily f) {
  for (const auto& r : c)
    if (family_of(r.rule) == f) return r;
  throw std::runtime_error("candidate missing");
}

std::vector<TransitionPair> cat_pairs(const std::vector<std::pair<std::string, std::string>>& v) {
  std::vector<TransitionPair> out;
  for (const auto& [a, b] : v) out.push_back({a, b});
  return out;
}

}  // namespace

TEST(NumericCandidates, ExactLinearRelation) {
  std::vector<double> x, y;
  for (int i = 0; i < 60; ++i) {
    x.push_back(i * 0.7 - 3);
    y.push_back(2 * x.back() + 1);
  }
  auto pairs = numeric_pairs(x, y);
  auto best = fit_best_rule(pairs);
  ASSERT_TRUE(best);
  const auto& lin = std::get<LinearRule>(best->rule);
  EXPECT_NEAR(lin.slope, 2.0, 1e-9);
  EXPECT_NEAR(lin.intercept, 1.0, 1e-9);
  EXPECT_NEAR(best->error, 0.0, 1e-9);
  EXPECT_EQ(best->n, 60u);
}

TEST(NumericCandidates, ConstantShiftGivesFixedDelta) {
  std::vector<double> x, y;
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 100);
  for (int i = 0; i < 80; ++i) {
    x.push_back(u(rng));
    y.push_back(x.back() + 5);
  }
  auto pairs = numeric_pairs(x, y);
  auto cands = fit_numeric_candidates(pairs);
  const auto& delta = candidate(cands, RuleFamily::Delta);
  EXPECT_EQ(std::get<DeltaRule>(delta.rule).delta.family, Family::Fixed);
  EXPECT_NEAR(std::get<DeltaRule>(delta.rule).delta.params[0], 5.0, 1e-9);
  EXPECT_NEAR(delta.error, 0.0, 1e-9);
  // the linear fit is exact as well and wins the tie by precedence
  EXPECT_EQ(family_of(select_min_error(cands)->rule), RuleFamily::Linear);
}

TEST(NumericCandidates, IndependentNormalPicksGenerator) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> prev(50, 30), next(100, 10);
  std::vector<double> x, y;
  for (int i = 0; i < 2000; ++i) {
    x.push_back(prev(rng));
    y.push_back(next(rng));
  }
  auto best = fit_best_rule(numeric_pairs(x, y));
  ASSERT_TRUE(best);
  ASSERT_EQ(family_of(best->rule), RuleFamily::Generator);
  const auto& d = std::get<GeneratorRule>(best->rule).dist;
  EXPECT_EQ(d.family, Family::Normal);
  double mean = 0, sd = 0;
  for (double v : y) mean += v / y.size();
  for (double v : y) sd += (v - mean) * (v - mean);
  sd = std::sqrt(sd / (y.size() - 1));
  EXPECT_NEAR(d.params[0], mean, 1e-9);
  EXPECT_NEAR(d.params[1], sd, 1e-9);
  EXPECT_NEAR(d.params[0], 100, 1);
  EXPECT_NEAR(d.params[1], 10, 1);
}

TEST(NumericCandidates, DegenerateInputs) {
  auto lin = fit_linear(std::vector<double>{3, 3, 3}, std::vector<double>{1, 2, 6});
  EXPECT_DOUBLE_EQ(lin.slope, 0.0);
  EXPECT_DOUBLE_EQ(lin.intercept, 3.0);
  auto tree = fit_regression_tree(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 2, 3, 4}, 4, 10);
  EXPECT_EQ(tree.leaf_count(), 1u);
  EXPECT_DOUBLE_EQ(tree.predict(100), 2.5);
  EXPECT_TRUE(fit_numeric_candidates(numeric_pairs({1}, {2})).empty());
}

TEST(NumericCandidates, NonFiniteCandidatesAreDropped) {
  const double big = std::numeric_limits<double>::max();
  auto pairs = numeric_pairs({big, -big, big / 2, 1}, {big, -big, -big, 2});
  for (const auto& c : fit_numeric_candidates(pairs)) EXPECT_TRUE(std::isfinite(c.error));
}

TEST(CategoricalCandidates, DeterministicCycle) {
  std::vector<std::pair<std::string, std::string>> v;
  for (int i = 0; i < 40; ++i) v.push_back(i % 2 ? std::pair{"y", "x"} : std::pair{"x", "y"});
  auto cands = fit_categorical_candidates(cat_pairs(v));
  const auto& mk = std::get<MarkovRule>(candidate(cands, RuleFamily::Markov).rule);
  ASSERT_EQ(mk.states, (std::vector<std::string>{"x", "y"}));
  // Laplace: (0+1)/(20+2) and (20+1)/(20+2)
  EXPECT_NEAR(mk.matrix[0][0], 1.0 / 22, 1e-12);
  EXPECT_NEAR(mk.matrix[0][1], 21.0 / 22, 1e-12);
  EXPECT_NEAR(mk.matrix[1][0], 21.0 / 22, 1e-12);
  EXPECT_LT(candidate(cands, RuleFamily::Markov).error, candidate(cands, RuleFamily::Categorical).error);
}

TEST(CategoricalCandidates, IndependentUniformGenerator) {
  std::mt19937_64 rng(3);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::pair<std::string, std::string>> v;
  for (int i = 0; i < 2000; ++i) v.push_back({coin(rng) ? "a" : "b", coin(rng) ? "a" : "b"});
  auto cands = fit_categorical_candidates(cat_pairs(v));
  const auto& g = std::get<CategoricalRule>(candidate(cands, RuleFamily::Categorical).rule);
  ASSERT_EQ(g.states.size(), 2u);
  EXPECT_NEAR(g.probs[0], 0.5, 0.03);
  EXPECT_NEAR(g.probs[1], 0.5, 0.03);
}

TEST(CategoricalCandidates, SingleStateIsCertain) {
  std::vector<std::pair<std::string, std::string>> v(30, {"s", "s"});
  auto cands = fit_categorical_candidates(cat_pairs(v));
  std::mt19937_64 rng(4);
  for (const auto& c : cands)
    for (int i = 0; i < 50; ++i) EXPECT_EQ(as_category(apply_rule(c.rule, std::string("s"), rng)), "s");
}

TEST(SelectMinError, PrecedenceAndFailure) {
  std::vector<FitReport> c{{LinearRule{}, 0.1, 1}, {TreeRule{}, 0.2, 1},
                           {DeltaRule{}, 0.3, 1}, {GeneratorRule{}, 0.4, 1}};
  EXPECT_EQ(family_of(select_min_error(c)->rule), RuleFamily::Linear);
  c[2].error = 0.1;
  std::swap(c[0], c[2]);
  EXPECT_EQ(family_of(select_min_error(c)->rule), RuleFamily::Linear);
  for (auto& r : c) r.error = std::numeric_limits<double>::infinity();
  EXPECT_FALSE(select_min_error(c).has_value());
  c[3].error = std::nan("");
  EXPECT_FALSE(select_min_error(c).has_value());
}

TEST(KeepRule, ChangeRatio) {
  std::vector<TransitionPair> same(10, {1.0, 1.0});
  EXPECT_FALSE(keep_rule(same));
  auto half = same;
  for (int i = 0; i < 5; ++i) half[i].after = 2.0;
  EXPECT_TRUE(keep_rule(half));
  std::vector<TransitionPair> rare(20, {1.0, 1.0});
  rare[0].after = 3.0;
  EXPECT_FALSE(keep_rule(rare, 0.1));
  EXPECT_FALSE(value_changed(1e6, 1e6 + 1e-4));
  EXPECT_TRUE(value_changed(std::string("a"), std::string("b")));
}

TEST(UpdateRulesProperty, OlsResidualsOrthogonal) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 30; ++rep) {
    std::vector<double> x, y;
    for (int i = 0; i < 200; ++i) {
      x.push_back(10 * n(rng) + rep);
      y.push_back(3 * x.back() - 2 + 5 * n(rng));
    }
    auto lin = fit_linear(x, y);
    double dot = 0, scale = 0, sum = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double r = y[i] - (lin.slope * x[i] + lin.intercept);
      dot += r * x[i];
      sum += r;
      scale += std::abs(y[i] * x[i]);
    }
    EXPECT_LE(std::abs(dot), 1e-6 * scale);
    EXPECT_LE(std::abs(sum), 1e-6 * scale);
  }
}

TEST(UpdateRulesProperty, TreeErrorNonIncreasingWithDepth) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 10);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 10; ++rep) {
    std::vector<double> x, y;
    for (int i = 0; i < 300; ++i) {
      x.push_back(u(rng));
      y.push_back(std::sin(x.back()) * 5 + n(rng));
    }
    double prev = std::numeric_limits<double>::infinity();
    for (int d = 0; d <= 6; ++d) {
      double e = tree_mse(fit_regression_tree(x, y, d, 10), x, y);
      EXPECT_LE(e, prev + 1e-12);
      prev = e;
    }
  }
}

TEST(UpdateRulesProperty, MarkovRowsSumToOne) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> s(0, 5);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<std::pair<std::string, std::string>> v;
    for (int i = 0; i < 50 + rep * 10; ++i)
      v.push_back({std::string(1, 'a' + s(rng)), std::string(1, 'a' + s(rng) % (1 + rep % 6))});
    auto cands = fit_categorical_candidates(cat_pairs(v));
    const auto& mk = std::get<MarkovRule>(candidate(cands, RuleFamily::Markov).rule);
    for (const auto& row : mk.matrix) {
      double sum = 0;
      for (double p : row) sum += p;
      EXPECT_NEAR(sum, 1.0, 1e-9);
    }
    EXPECT_TRUE(check_rule(mk).empty());
  }
}

TEST(UpdateRulesProperty, SelectionIsMinimum) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0, 1);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> x, y;
    for (int i = 0; i < 100; ++i) {
      x.push_back(n(rng) * 10);
      y.push_back(rep % 2 ? x.back() + n(rng) : 50 + n(rng) * 3);
    }
    auto cands = fit_numeric_candidates(numeric_pairs(x, y));
    auto best = select_min_error(cands);
    for (const auto& c : cands) EXPECT_LE(best->error, c.error);
  }
}

TEST(FitGenerator, KindsAndEmpirical) {
  auto g = fit_generator(std::vector<Value>{std::string("a"), std::string("b"), std::string("a"),
                                            std::string("a")});
  const auto& c = std::get<CategoricalRule>(g);
  EXPECT_EQ(c.states, (std::vector<std::string>{"a", "b"}));
  EXPECT_NEAR(c.probs[0], 0.75, 1e-12);
  auto n = fit_generator(std::vector<Value>{2.0, 2.0, 2.0});
  EXPECT_EQ(std::get<GeneratorRule>(n).dist, Distribution::fixed(2.0));
}
