// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dasim/calendar.hpp"
#include "dasim/cli.hpp"
#include "dasim/das_model.hpp"
#include "dasim/event_log.hpp"
#include "dasim/metrics.hpp"
#include "dasim/scenario_gen.hpp"
#include "dasim/sim_engine.hpp"
#include "dasim/update_rules.hpp"

using namespace dasim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

fs::path g_dir;

std::string path(const std::string& name) { return (g_dir / name).string(); }

nlohmann::json read_json(const std::string& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::string slurp(const std::string& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run(const std::vector<std::string>& args) {
  std::streambuf* saved = std::cout.rdbuf();
  std::ostringstream sink;
  std::cout.rdbuf(sink.rdbuf());
  int rc = cli::run(args);
  std::cout.rdbuf(saved);
  return rc;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::runtime_error(what);
}

void require_ok(const std::vector<std::string>& args) {
  int rc = run(args);
  if (rc != 0) {
    std::string cmd;
    for (const auto& a : args) cmd += a + " ";
    throw std::runtime_error("command failed (" + std::to_string(rc) + "): " + cmd);
  }
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int n, const std::string& title, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << n << ": " << title << " | " << o.detail
            << std::endl;
  if (!o.pass) ++g_failures;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

/// Generates an attribute scenario through the CLI and returns the log path.
std::string attribute_scenario(const std::string& pattern, const std::string& placement, int cases,
                               int seed) {
  std::string out = path(pattern + "_" + placement + ".csv");
  require_ok({"scenario", "--pattern", pattern, "--placement", placement, "--cases", std::to_string(cases),
              "--seed", std::to_string(seed), "--out", out});
  return out;
}

// 1 ------------------------------------------------------------------------------

Outcome scope_round_trip() {
  const std::vector<std::string> patterns{"LT", "AR1", "UD", "ND"};
  const std::vector<std::string> placements{"SE", "ME", "SG", "MG"};
  auto t0 = Clock::now();
  int right = 0, total = 0;
  std::string misses;
  for (const auto& p : patterns) {
    for (const auto& pl : placements) {
      auto log = attribute_scenario(p, pl, 2000, 7);
      auto truth = read_json(log + ".manifest.json").at("truth");
      auto das = log + ".found.json";
      require_ok({"discover", "--log", log, "--model", log + ".das.json", "--out", das});
      auto found = read_json(das);
      std::string scope = "missing";
      for (const auto& a : found.at("attributes"))
        if (a.at("name") == "attr") scope = a.at("scope").get<std::string>();
      ++total;
      if (scope == truth.at("scope").get<std::string>()) ++right;
      else misses += " " + p + "-" + pl + "(" + scope + ")";
    }
  }
  double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  double share = double(right) / total;
  return {share >= 0.9 && secs <= 300.0,
          std::to_string(right) + "/" + std::to_string(total) + " scopes recovered (" + fmt(100 * share, 3) +
              "%), " + fmt(secs, 3) + " s" + (misses.empty() ? "" : ", missed:" + misses)};
}

// 2 ------------------------------------------------------------------------------

Outcome rule_recovery() {
  // linear pattern, single event-scope modifier
  auto lt = attribute_scenario("LT", "SE", 2000, 8);
  auto truth = read_json(lt + ".manifest.json").at("truth");
  auto want = std::get<LinearRule>(rule_from_json(truth.at("rule")));
  const std::string mod = truth.at("modifiers").at(0);
  require_ok({"discover", "--log", lt, "--model", lt + ".das.json", "--out", lt + ".found.json"});
  DASModel found = load_das_file(lt + ".found.json");
  const UpdateRule* got = nullptr;
  for (const auto& r : found.rules)
    if (r.attribute == "attr" && r.anchor == Anchor::task_completion(mod)) got = &r.rule;
  require(got != nullptr, "no rule for attr at " + mod);
  require(family_of(*got) == RuleFamily::Linear, "LT selected " + describe(*got));
  const auto& lin = std::get<LinearRule>(*got);
  bool slope_ok = std::abs(lin.slope - want.slope) <= 0.05 * std::max(1.0, std::abs(want.slope));
  bool icpt_ok = std::abs(lin.intercept - want.intercept) <= 0.05 * std::max(1.0, std::abs(want.intercept));

  // Markov pattern, single global modifier
  auto hst = attribute_scenario("HST", "SG", 2000, 8);
  auto htruth = read_json(hst + ".manifest.json").at("truth");
  auto mk_want = std::get<MarkovRule>(rule_from_json(htruth.at("rule")));
  const std::string hmod = htruth.at("modifiers").at(0);
  require_ok({"discover", "--log", hst, "--model", hst + ".das.json", "--out", hst + ".found.json"});
  DASModel hfound = load_das_file(hst + ".found.json");
  const MarkovRule* mk = nullptr;
  for (const auto& r : hfound.rules)
    if (r.attribute == "attr" && r.anchor == Anchor::task_completion(hmod) &&
        family_of(r.rule) == RuleFamily::Markov)
      mk = &std::get<MarkovRule>(r.rule);
  require(mk != nullptr, "HST rule at " + hmod + " is not Markov");
  require(!mk->counts.empty(), "recovered Markov rule carries no counts");
  double worst = 0;
  for (std::size_t i = 0; i < mk_want.states.size(); ++i) {
    auto ri = std::find(mk->states.begin(), mk->states.end(), mk_want.states[i]);
    require(ri != mk->states.end(), "state " + mk_want.states[i] + " not recovered");
    const auto& row = mk->counts[static_cast<std::size_t>(ri - mk->states.begin())];
    double n = 0;
    for (double c : row) n += c;
    require(n > 0, "state " + mk_want.states[i] + " never left");
    double l1 = 0;
    for (std::size_t j = 0; j < mk_want.states.size(); ++j) {
      auto cj = std::find(mk->states.begin(), mk->states.end(), mk_want.states[j]);
      double p = cj == mk->states.end() ? 0.0 : row[static_cast<std::size_t>(cj - mk->states.begin())] / n;
      l1 += std::abs(p - mk_want.matrix[i][j]);
    }
    worst = std::max(worst, l1);
  }
  return {slope_ok && icpt_ok && worst <= 0.1,
          "LT slope " + fmt(lin.slope, 6) + " (truth " + fmt(want.slope) + "), intercept " +
              fmt(lin.intercept, 6) + " (truth " + fmt(want.intercept) + "); HST worst row L1 " + fmt(worst)};
}

// 3 ------------------------------------------------------------------------------

Outcome gateway_semantics() {
  AttributeMap state{{"x", 5.0}};
  AttributeLookup lookup = [&](const std::string& n) -> const Value* {
    auto it = state.find(n);
    return it == state.end() ? nullptr : &it->second;
  };
  std::mt19937_64 rng(2024);
  GatewayPolicy xor_pol{{{"f1", Condition::always(), 0.2}, {"f2", Condition::always(), 0.8}}};
  const int draws = 10000;
  int first = 0;
  for (int i = 0; i < draws; ++i) {
    auto sel = evaluate_gateway(xor_pol, GateType::Xor, {"f1", "f2"}, "f2", lookup, rng);
    require(sel.size() == 1, "XOR selected " + std::to_string(sel.size()) + " flows");
    first += sel[0] == "f1";
  }
  double f1 = double(first) / draws;
  GatewayPolicy or_pol{{{"f1", Condition::gt("x", 10), 0.9}, {"f2", Condition::gt("x", 20), 0.9},
                        {"f3", Condition::le("x", 0), 0.9}}};
  int defaults = 0;
  for (int i = 0; i < draws; ++i) {
    auto sel = evaluate_gateway(or_pol, GateType::Or, {"f1", "f2", "f3"}, "f2", lookup, rng);
    defaults += sel == std::vector<std::string>{"f2"};
  }
  bool ok = std::abs(f1 - 0.2) <= 0.02 && std::abs((1 - f1) - 0.8) <= 0.02 && defaults == draws;
  return {ok, "XOR frequencies " + fmt(f1) + "/" + fmt(1 - f1) + "; OR default taken " +
                  std::to_string(defaults) + "/" + std::to_string(draws)};
}

// 4 ------------------------------------------------------------------------------

struct Comparison {
  double das = 0, ndas = 0;
};

Comparison das_vs_ndas(const std::string& name, const nlohmann::json& spec) {
  const std::string base = path("c4_" + name);
  std::ofstream(base + ".spec.json") << spec.dump();
  require_ok({"scenario", "--spec", base + ".spec.json", "--cases", "2000", "--seed", "3", "--out", base + ".csv"});
  require_ok({"split", "--log", base + ".csv", "--ratio", "0.5", "--train", base + ".train.csv", "--test",
              base + ".test.csv"});
  Comparison c;
  for (bool data : {true, false}) {
    std::string tag = data ? ".das" : ".ndas";
    std::vector<std::string> disc{"discover", "--log", base + ".train.csv", "--model", base + ".csv.das.json",
                                  "--out", base + tag + ".json"};
    if (!data) disc.push_back("--no-data");
    require_ok(disc);
    require_ok({"simulate", "--das", base + tag + ".json", "--out", base + tag + ".sim.csv", "--cases", "1000",
                "--seed", "5"});
    EventLog test = parse_log_file(base + ".test.csv"), sim = parse_log_file(base + tag + ".sim.csv");
    (data ? c.das : c.ndas) = ngram_distance(test, sim, 3);
  }
  return c;
}

Outcome das_direction() {
  int xor_wins = 0;
  std::string detail;
  for (std::string p : {"EQ", "RD", "ND", "ED"}) {
    auto c = das_vs_ndas("xor_" + p, {{"type", "condition"}, {"gateway", "XOR"}, {"pattern", p},
                                      {"basis", "case"}, {"noise", 0.0}, {"seed", 3}});
    xor_wins += c.das < c.ndas;
    detail += p + " " + fmt(c.das, 3) + "/" + fmt(c.ndas, 3) + "; ";
  }
  bool or_ok = true;
  for (int k : {2, 5}) {
    auto c = das_vs_ndas("or_F" + std::to_string(k),
                         {{"type", "condition"}, {"gateway", "OR"}, {"pattern", "EQ"}, {"basis", "case"},
                          {"flows_activated", k}, {"noise", 0.0}, {"seed", 3}});
    or_ok &= c.das <= 0.5 * c.ndas;
    detail += "OR F" + std::to_string(k) + " " + fmt(c.das, 3) + "/" + fmt(c.ndas, 3) + "; ";
  }
  return {xor_wins == 4 && or_ok, "3-gram DAS/NDAS: " + detail + "XOR wins " + std::to_string(xor_wins) + "/4"};
}

// 5 ------------------------------------------------------------------------------

/// Optimal transport between two empirical measures by exhaustive assignment: both
/// samples are replicated to a common size L and the cheapest perfect matching is
/// found over all subsets (a uniform-to-uniform plan is attained at a permutation).
double brute_emd(const std::vector<int>& a, const std::vector<int>& b) {
  const std::size_t L = std::lcm(a.size(), b.size());
  std::vector<int> x, y;
  for (int v : a)
    for (std::size_t r = 0; r < L / a.size(); ++r) x.push_back(v);
  for (int v : b)
    for (std::size_t r = 0; r < L / b.size(); ++r) y.push_back(v);
  std::vector<double> best(std::size_t(1) << L, 1e300);
  best[0] = 0;
  for (std::size_t mask = 0; mask < best.size(); ++mask) {
    if (best[mask] >= 1e300) continue;
    const auto i = static_cast<std::size_t>(__builtin_popcountll(mask));
    if (i == L) continue;
    for (std::size_t j = 0; j < L; ++j) {
      if (mask & (std::size_t(1) << j)) continue;
      auto& slot = best[mask | (std::size_t(1) << j)];
      slot = std::min(slot, best[mask] + std::abs(x[i] - y[j]));
    }
  }
  return best.back() / static_cast<double>(L);
}

void multisets(int size, int lo, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == size) {
    out.push_back(cur);
    return;
  }
  for (int v = lo; v <= 3; ++v) {
    cur.push_back(v);
    multisets(size, v, cur, out);
    cur.pop_back();
  }
}

double brute_ks(const std::vector<double>& a, const std::vector<double>& b) {
  double best = 0;
  auto ecdf = [](const std::vector<double>& s, double t) {
    return double(std::count_if(s.begin(), s.end(), [&](double v) { return v <= t; })) / s.size();
  };
  for (const auto* s : {&a, &b})
    for (double t : *s) best = std::max(best, std::abs(ecdf(a, t) - ecdf(b, t)));
  return best;
}

EventLog alphabet_log(const std::string& prefix) {
  std::vector<Event> evs;
  for (int c = 0; c < 5; ++c)
    for (int k = 0; k < 3; ++k)
      evs.push_back({"c" + std::to_string(c), prefix + std::to_string((c + k) % 3), std::nullopt,
                     TimePoint{} + Millis(k * 1000), TimePoint{} + Millis(k * 1000 + 500), {}});
  return EventLog(std::move(evs), {});
}

Outcome metric_oracles() {
  std::vector<std::vector<int>> samples;
  for (int n = 1; n <= 4; ++n) {
    std::vector<int> cur;
    multisets(n, 0, cur, samples);
  }
  std::size_t pairs = 0, emd_bad = 0;
  for (const auto& a : samples)
    for (const auto& b : samples) {
      std::vector<double> da(a.begin(), a.end()), db(b.begin(), b.end());
      ++pairs;
      if (std::abs(emd_1d(da, db) - brute_emd(a, b)) > 1e-9) ++emd_bad;
    }
  std::mt19937_64 rng(55);
  std::uniform_int_distribution<int> len(1, 40), val(0, 20);
  std::size_t ks_bad = 0;
  for (int i = 0; i < 100; ++i) {
    std::vector<double> a(len(rng)), b(len(rng));
    for (auto& v : a) v = val(rng) * 0.5;
    for (auto& v : b) v = val(rng) * 0.75;
    if (std::abs(ks_stat(a, b) - brute_ks(a, b)) > 1e-12) ++ks_bad;
  }
  auto l1 = alphabet_log("A"), l2 = alphabet_log("Z");
  double same = ngram_distance(l1, l1, 3), disjoint = ngram_distance(l1, l2, 3);
  return {emd_bad == 0 && ks_bad == 0 && same == 0.0 && disjoint == 1.0,
          "emd mismatches " + std::to_string(emd_bad) + "/" + std::to_string(pairs) + ", ks mismatches " +
              std::to_string(ks_bad) + "/100, ngram identical " + fmt(same) + ", disjoint " + fmt(disjoint)};
}

// 6 ------------------------------------------------------------------------------

Outcome determinism() {
  const std::string base = path("c6");
  std::ofstream(base + ".spec.json") << nlohmann::json{{"type", "condition"}, {"gateway", "OR"},
                                                        {"pattern", "CC3"}, {"basis", "event"},
                                                        {"flows_activated", 2}, {"noise", 0.1},
                                                        {"seed", 6}}
                                            .dump();
  require_ok({"scenario", "--spec", base + ".spec.json", "--cases", "500", "--seed", "6", "--out", base + ".csv"});
  require_ok({"simulate", "--das", base + ".csv.das.json", "--out", base + ".s1.csv", "--cases", "500", "--seed", "9"});
  require_ok({"simulate", "--das", base + ".csv.das.json", "--out", base + ".s2.csv", "--cases", "500", "--seed", "9"});
  bool sim_same = slurp(base + ".s1.csv") == slurp(base + ".s2.csv");
  require_ok({"discover", "--log", base + ".csv", "--model", base + ".csv.das.json", "--out", base + ".d1.json"});
  require_ok({"discover", "--log", base + ".csv", "--model", base + ".csv.das.json", "--out", base + ".d2.json"});
  bool json_same = read_json(base + ".d1.json") == read_json(base + ".d2.json");
  bool model_same = load_das_file(base + ".d1.json") == load_das_file(base + ".d2.json");
  return {sim_same && json_same && model_same,
          std::string("simulate byte-identical: ") + (sim_same ? "yes" : "no") +
              ", discover structurally identical: " + (json_same && model_same ? "yes" : "no")};
}

// 7 ------------------------------------------------------------------------------

Outcome invariants() {
  std::vector<std::string> broken;
  // Markov rows of every fitted categorical candidate sum to one
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> st(0, 4);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<TransitionPair> pairs;
    for (int i = 0; i < 40 + rep; ++i)
      pairs.push_back({std::string(1, char('a' + st(rng))), std::string(1, char('a' + st(rng) % (1 + rep % 5)))});
    for (const auto& c : fit_categorical_candidates(pairs))
      if (!check_rule(c.rule).empty()) broken.push_back("markov/categorical rows");
  }
  // XOR probabilities of discovered models are normalized
  for (std::string p : {"EQ", "RD", "ND", "ED"}) {
    DASModel m = load_das_file(path("c4_xor_" + p + ".das.json"));
    for (const auto& [g, pol] : m.policies) {
      double s = 0;
      for (const auto& f : pol.flows) s += f.probability;
      if (std::abs(s - 1.0) > 1e-9) broken.push_back("xor sum at " + g + " in " + p);
    }
  }
  // conservation and case immutability on simulated condition scenarios
  for (auto gate : {GateType::Xor, GateType::Or}) {
    ConditionScenario s;
    s.gateway = gate;
    s.pattern = ConditionPattern::CC5;
    s.flows_activated = 3;
    s.noise = 0.1;
    s.seed = 7;
    auto [m, truth] = build_condition_scenario(s);
    SimConfig cfg;
    cfg.n_cases = 500;
    cfg.seed = 7;
    auto log = simulate(m, cfg).log;
    std::map<std::string, std::vector<const Event*>> cases;
    for (const auto& e : log.events()) cases[e.case_id].push_back(&e);
    if (cases.size() != 500) broken.push_back("case count");
    for (const auto& [id, evs] : cases) {
      std::set<std::string> seen;
      for (auto* e : evs) seen.insert(e->activity);
      for (auto a : {"A1", "A2", "A3"})
        if (!seen.count(a)) broken.push_back("case " + id + " lost a token before " + a);
      for (const auto& d : m.attributes) {
        if (d.scope != Scope::Case) continue;
        for (auto* e : evs)
          if (e->attributes.at(d.name) != evs.front()->attributes.at(d.name))
            broken.push_back("case attribute " + d.name + " changed in " + id);
      }
    }
  }
  // calendar compliance
  std::vector<WeeklyCalendar::Interval> iv;
  for (int d = 0; d < 5; ++d)
    iv.push_back({d * kDay + Millis(9LL * 3600 * 1000), d * kDay + Millis(17LL * 3600 * 1000)});
  WeeklyCalendar cal(iv);
  DASModel m = base_attribute_model();
  for (auto& pool : m.resources.pools) pool.calendar = cal;
  SimConfig cfg;
  cfg.n_cases = 300;
  cfg.seed = 8;
  for (const auto& e : simulate(m, cfg).log.events()) {
    bool ok = cal.is_open(e.start_time) &&
              (e.end_time == e.start_time || cal.is_open(e.end_time - Millis(1))) &&
              cal.advance(e.start_time, cal.open_time_between(e.start_time, e.end_time)) == e.end_time;
    if (!ok) broken.push_back("calendar breach by " + e.case_id + "/" + e.activity);
  }
  return {broken.empty(), broken.empty() ? "markov rows, xor sums, conservation, case immutability, calendar "
                                           "compliance hold (full suite in dasim_unit)"
                                         : std::to_string(broken.size()) + " violations, first: " + broken.front()};
}

}  // namespace

int main() {
  g_dir = fs::temp_directory_path() / "dasim_acceptance";
  fs::remove_all(g_dir);
  fs::create_directories(g_dir);

  report(1, "scope classification round trip", scope_round_trip);
  report(2, "update rule recovery", rule_recovery);
  report(3, "gateway semantics", gateway_semantics);
  report(4, "DAS vs NDAS direction", das_direction);
  report(5, "metric oracles", metric_oracles);
  report(6, "determinism", determinism);
  report(7, "invariant suites", invariants);

  fs::remove_all(g_dir);
  std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures == 0 ? 0 : 1;
}
