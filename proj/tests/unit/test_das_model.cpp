#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "dasim/das_model.hpp"
#include "dasim/errors.hpp"
#include "dasim/scenario_gen.hpp"
#include "support.hpp"

using namespace dasim;
using namespace dasim::testing;

TEST(ApplyRule, Examples) {
  std::mt19937_64 rng(1);
  EXPECT_DOUBLE_EQ(as_number(apply_rule(LinearRule{1, 0}, 7.3, rng)), 7.3);
  EXPECT_DOUBLE_EQ(as_number(apply_rule(LinearRule{2, 1}, 3.0, rng)), 7.0);
  EXPECT_DOUBLE_EQ(as_number(apply_rule(DeltaRule{Distribution::fixed(5)}, 10.0, rng)), 15.0);
  MarkovRule m{{"x", "y"}, {{0, 1}, {1, 0}}, {0.5, 0.5}, {}};
  for (int i = 0; i < 100; ++i) EXPECT_EQ(as_category(apply_rule(m, std::string("x"), rng)), "y");
}

TEST(ApplyRule, TreeRuleFollowsThresholds) {
  RegressionTree t;
  t.nodes = {{5.0, 1, 2, 0, 10}, {0, -1, -1, 1.5, 5}, {0, -1, -1, 9.0, 5}};
  std::mt19937_64 rng(1);
  EXPECT_DOUBLE_EQ(as_number(apply_rule(TreeRule{t}, 5.0, rng)), 1.5);
  EXPECT_DOUBLE_EQ(as_number(apply_rule(TreeRule{t}, 5.1, rng)), 9.0);
}

TEST(ApplyRuleProperty, GeneratorsIgnorePrevious) {
  std::vector<UpdateRule> gens{GeneratorRule{Distribution::normal(3, 2)},
                               GeneratorRule{Distribution::lognormal(1, 0.3)},
                               CategoricalRule{{"a", "b", "c"}, {0.2, 0.3, 0.5}}};
  for (const auto& g : gens) {
    std::vector<Value> prevs;
    if (rule_kind(g) == AttrKind::Numeric) prevs = {0.0, -5.0, 1e9};
    else prevs = {std::string("a"), std::string("zzz"), std::string(kUnsetCategory)};
    std::vector<Value> ref;
    for (std::size_t p = 0; p < prevs.size(); ++p) {
      std::mt19937_64 rng(99);
      std::vector<Value> out;
      for (int i = 0; i < 50; ++i) out.push_back(apply_rule(g, prevs[p], rng));
      if (p == 0) ref = out;
      else EXPECT_EQ(out, ref);
    }
  }
}

TEST(ApplyRuleProperty, MarkovRowFrequencies) {
  MarkovRule m{{"a", "b", "c"}, {{0.1, 0.6, 0.3}, {0.3, 0.3, 0.4}, {1, 0, 0}}, {1 / 3., 1 / 3., 1 / 3.}, {}};
  std::mt19937_64 rng(2024);
  std::map<std::string, double> freq;
  const int n = 100000;
  for (int i = 0; i < n; ++i) freq[as_category(apply_rule(m, std::string("a"), rng))] += 1.0 / n;
  EXPECT_NEAR(freq["a"], 0.1, 0.01);
  EXPECT_NEAR(freq["b"], 0.6, 0.01);
  EXPECT_NEAR(freq["c"], 0.3, 0.01);
}

TEST(ApplyRule, UnknownMarkovStateUsesFallbackAndCounts) {
  MarkovRule m{{"a", "b"}, {{1, 0}, {1, 0}}, {0, 1}, {}};
  std::mt19937_64 rng(3);
  RuleCounters counters;
  for (int i = 0; i < 20; ++i)
    EXPECT_EQ(as_category(apply_rule(m, std::string("q"), rng, &counters)), "b");
  EXPECT_EQ(counters.unknown_markov_state, 20u);
}

TEST(RuleCheck, RowsAndProbabilities) {
  EXPECT_TRUE(check_rule(MarkovRule{{"a", "b"}, {{0.5, 0.5}, {0, 1}}, {0.5, 0.5}, {}}).empty());
  EXPECT_FALSE(check_rule(MarkovRule{{"a", "b"}, {{0.5, 0.6}, {0, 1}}, {0.5, 0.5}, {}}).empty());
  EXPECT_FALSE(check_rule(CategoricalRule{{"a", "b"}, {0.5, 0.4}}).empty());
  EXPECT_FALSE(check_rule(GeneratorRule{Distribution::normal(0, -1)}).empty());
  EXPECT_EQ(family_code(family_of(UpdateRule{CategoricalRule{}})), "UR6");
}

TEST(Distribution, DomainsAndClamping) {
  EXPECT_TRUE(Distribution::normal(0, 0).check().empty());
  EXPECT_FALSE(Distribution::exponential(0).check().empty());
  EXPECT_FALSE(Distribution::uniform(2, 1).check().empty());
  EXPECT_FALSE(Distribution::lognormal(0, -1).check().empty());
  std::mt19937_64 rng(4);
  for (int i = 0; i < 1000; ++i) {
    EXPECT_GE(Distribution::exponential(2).sample(rng), 0.0);
    EXPECT_GE(Distribution::lognormal(0, 2).sample(rng), 0.0);
  }
  EXPECT_DOUBLE_EQ(Distribution::normal(4, 0).sample(rng), 4.0);
  EXPECT_NEAR(Distribution::uniform(0, 10).quantile(0.25), 2.5, 1e-12);
  EXPECT_NEAR(Distribution::exponential(0.5).mean(), 2.0, 1e-12);
}

TEST(Distribution, FitRecoversFamily) {
  std::mt19937_64 rng(5);
  auto draw = [&](const Distribution& d) {
    std::vector<double> v;
    for (int i = 0; i < 3000; ++i) v.push_back(d.sample(rng));
    return v;
  };
  EXPECT_EQ(fit_distribution(draw(Distribution::normal(100, 10))).dist.family, Family::Normal);
  EXPECT_EQ(fit_distribution(draw(Distribution::exponential(0.1))).dist.family, Family::Exponential);
  EXPECT_EQ(fit_distribution(draw(Distribution::uniform(-3, 7))).dist.family, Family::Uniform);
  EXPECT_EQ(fit_distribution(draw(Distribution::lognormal(2, 0.8))).dist.family, Family::Lognormal);
  auto fixed = fit_distribution(std::vector<double>(50, 3.5));
  EXPECT_EQ(fixed.dist, Distribution::fixed(3.5));
  EXPECT_DOUBLE_EQ(fixed.ks, 0.0);
}

TEST(Condition, EvaluateAndUnsetIsFalse) {
  AttributeMap s{{"x", 5.0}, {"c", std::string("red")}, {"u", std::string(kUnsetCategory)}};
  EXPECT_TRUE(evaluate(Condition::le("x", 10), s));
  EXPECT_FALSE(evaluate(Condition::gt("x", 10), s));
  EXPECT_TRUE(evaluate(Condition::in_range("x", 5, 6), s));
  EXPECT_FALSE(evaluate(Condition::in_range("x", 4, 5), s));
  EXPECT_TRUE(evaluate(Condition::eq("c", "red"), s));
  EXPECT_TRUE(evaluate(Condition::ne("c", "blue"), s));
  EXPECT_FALSE(evaluate(Condition::ne("u", "blue"), s));
  EXPECT_FALSE(evaluate(Condition::eq("u", "blue"), s));
  EXPECT_FALSE(evaluate(Condition::le("missing", 1), s));
  EXPECT_FALSE(evaluate(Condition::le("c", 1), s));
  EXPECT_TRUE(evaluate(Condition::any_of({Condition::eq("c", "no"), Condition::le("x", 5)}), s));
  EXPECT_FALSE(evaluate(Condition::all_of({Condition::eq("c", "no"), Condition::le("x", 5)}), s));
  EXPECT_TRUE(evaluate(Condition::always(), s));
  auto c = Condition::all_of({Condition::le("x", 1), Condition::any_of({Condition::eq("c", "a"),
                                                                       Condition::gt("y", 2)})});
  EXPECT_EQ(c.depth(), 3);
  EXPECT_EQ(condition_from_json(to_json(c)), c);
}

namespace {

DASModel sample_model() {
  auto [m, truth] = build_condition_scenario({GateType::Xor, ConditionPattern::CC3,
                                              AttributeBasis::Event, 1, 0.2, 4});
  m.attributes.push_back({"g", Scope::Global, AttrKind::Categorical,
                          CategoricalRule{{"p", "q"}, {0.5, 0.5}}, true});
  m.rules.push_back({"g", Anchor::task_completion("A1"),
                     MarkovRule{{"p", "q"}, {{0.9, 0.1}, {0.2, 0.8}}, {0.5, 0.5}, {{9, 1}, {2, 8}}}});
  m.rules.push_back({"x", Anchor::task_completion("B1_1"), DeltaRule{Distribution::normal(0, 1)}});
  RegressionTree t;
  t.nodes = {{5.0, 1, 2, 0, 10}, {0, -1, -1, 1.5, 5}, {0, -1, -1, 9.0, 5}};
  m.rules.push_back({"x", Anchor::task_completion("B1_2"), TreeRule{t}});
  m.rules.push_back({"x", Anchor::task_completion("B1_3"), LinearRule{0.5, 2}});
  std::vector<WeeklyCalendar::Interval> ivs{{Millis(3600000), Millis(7200000)}};
  m.resources.pools.push_back({"night", 2, WeeklyCalendar(ivs)});
  m.resources.task_pool["B2_1"] = "night";
  m.validate();
  return m;
}

}  // namespace

TEST(DasJson, RoundTrip) {
  auto m = sample_model();
  std::stringstream ss;
  save_das(ss, m);
  auto back = load_das(ss);
  EXPECT_EQ(back, m);
  EXPECT_EQ(das_to_json(back), das_to_json(m));
}

TEST(DasJson, XorProbabilitiesMustSumToOne) {
  auto j = das_to_json(sample_model());
  auto& flows = j["policies"]["s1"]["flows"];
  flows[0]["probability"] = 0.5;
  flows[1]["probability"] = 0.6;
  try {
    das_from_json(j);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("sum"), std::string::npos);
  }
}

TEST(DasJson, UnknownActivityIsNamed) {
  auto j = das_to_json(sample_model());
  j["rules"][0]["activity"] = "Ghost task";
  try {
    das_from_json(j);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Ghost task"), std::string::npos);
  }
}

TEST(DasJson, DiagnosticsCarryJsonPath) {
  auto j = das_to_json(sample_model());
  std::size_t idx = 0;
  while (j["rules"][idx]["rule"]["type"] != "delta_distribution") ++idx;
  j["rules"][idx]["rule"]["delta"]["family"] = "cauchy";
  try {
    das_from_json(j);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("$.rules[" + std::to_string(idx) + "]"), std::string::npos)
        << e.what();
  }
}

TEST(DasModel, CheckCatchesBrokenReferences) {
  auto m = sample_model();
  m.rules.push_back({"nobody", Anchor::task_completion("A1"), LinearRule{}});
  m.rules.push_back({"x", Anchor::task_completion("A1"), LinearRule{}});
  m.rules.push_back({"cat", Anchor::task_completion("A2"), LinearRule{}});
  m.resources.task_pool.erase("A3");
  auto issues = m.check();
  EXPECT_GE(issues.size(), 4u);
  EXPECT_THROW(m.validate(), ValidationError);
}

TEST(DasModel, CaseAttributesOnlyAtCreation) {
  auto m = with_resources(chain({"A"}));
  m.attributes.push_back({"c", Scope::Case, AttrKind::Numeric, GeneratorRule{Distribution::fixed(1)}});
  m.rules.push_back({"c", Anchor::task_completion("A"), LinearRule{}});
  EXPECT_THROW(m.validate(), ValidationError);
  m.rules.back().anchor = Anchor::case_creation();
  EXPECT_NO_THROW(m.validate());
}

TEST(DataState, ScopesAndImmutability) {
  std::vector<AttributeDecl> decls{
      {"g", Scope::Global, AttrKind::Numeric, GeneratorRule{Distribution::fixed(0)}},
      {"c", Scope::Case, AttrKind::Categorical, CategoricalRule{{"a"}, {1}}},
      {"e", Scope::Event, AttrKind::Numeric, GeneratorRule{Distribution::fixed(0)}}};
  DataState s(decls);
  s.create_case("k1");
  s.create_case("k2");
  EXPECT_EQ(as_category(*s.get("k1", "c")), std::string(kUnsetCategory));
  s.set("k1", "c", std::string("gold"));
  s.freeze_case("k1");
  EXPECT_THROW(s.set("k1", "c", std::string("silver")), ImmutableAttributeError);
  s.set("k1", "g", 4.0);
  EXPECT_DOUBLE_EQ(as_number(*s.get("k2", "g")), 4.0);
  s.set("k1", "e", 1.0);
  EXPECT_DOUBLE_EQ(as_number(*s.get("k2", "e")), 0.0);
  EXPECT_THROW(s.set("k1", "e", std::string("oops")), ArgumentError);
  EXPECT_THROW(s.set("k1", "undeclared", 1.0), ArgumentError);
  EXPECT_EQ(s.snapshot("k1").size(), 3u);
  s.remove_case("k1");
  EXPECT_FALSE(s.has_case("k1"));
}
