#include "dasim/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "dasim/errors.hpp"
#include "dasim/sim_engine.hpp"

namespace dasim {
namespace {

const std::vector<std::string> kNumeric{"LT", "EG", "LN", "AR1", "CE", "SS", "SR", "PL", "UD", "ND"};
const std::vector<std::string> kCategorical{"HST", "UET", "UIT", "RST", "SDT",
                                            "CT",  "E2P", "N2P", "E5P", "N5P"};
const std::vector<std::string> kCasePatterns{"CFX", "CEX", "CND", "CUD", "C2E",
                                             "C2N", "C5E", "C5N", "C10E", "C10N"};
const std::set<std::string, std::less<>> kScripted{"AR1", "CE", "SS", "SR", "PL"};

bool contains(const std::vector<std::string>& v, std::string_view s) {
  return std::find(v.begin(), v.end(), s) != v.end();
}

double param(const nlohmann::json& params, const char* key, double fallback) {
  if (!params.is_object() || !params.contains(key)) return fallback;
  const auto& v = params[key];
  if (!v.is_number()) throw ArgumentError(std::string("pattern parameter '") + key + "' must be a number");
  return v.get<double>();
}

std::vector<std::string> state_names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(std::string(1, static_cast<char>('A' + i)));
  return out;
}

std::vector<double> normalized(std::vector<double> w) {
  double s = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= s;
  return w;
}

MarkovRule markov(std::vector<std::string> states, std::vector<std::vector<double>> m) {
  MarkovRule r;
  r.fallback.assign(states.size(), 1.0 / static_cast<double>(states.size()));
  r.states = std::move(states);
  r.matrix = std::move(m);
  return r;
}

CategoricalRule categorical(std::vector<std::string> states, std::vector<double> probs) {
  return {std::move(states), normalized(std::move(probs))};
}

std::mt19937_64 stream(std::uint64_t seed, std::uint64_t tag) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag)};
  return std::mt19937_64(seq);
}

struct PatternForm {
  AttrKind kind = AttrKind::Numeric;
  std::optional<UpdateRule> rule;
  ScriptStep script;
  UpdateRule event_init = GeneratorRule{Distribution::fixed(0.0)};
  UpdateRule global_init = GeneratorRule{Distribution::fixed(0.0)};
  std::vector<std::string> states;
  nlohmann::json params = nlohmann::json::object();
};

PatternForm numeric_form(const std::string& p, Placement placement, const nlohmann::json& in) {
  PatternForm f;
  auto& out = f.params;
  if (p == "LT") {
    bool single = placement == Placement::SE;
    double a = param(in, "slope", single ? 2.0 : 1.0);
    double b = param(in, "intercept", single ? 5.0 : 1.0);
    f.rule = LinearRule{a, b};
    if (single) f.event_init = GeneratorRule{Distribution::uniform(0.0, 100.0)};
    out = {{"slope", a}, {"intercept", b}};
  } else if (p == "EG") {
    double g = param(in, "growth", 1.05);
    if (g <= 1.0) throw ArgumentError("EG growth must exceed 1");
    f.rule = LinearRule{g, 0.0};
    f.event_init = f.global_init = GeneratorRule{Distribution::fixed(1.0)};
    out = {{"growth", g}, {"init", 1.0}};
  } else if (p == "LN") {
    double mu = param(in, "mu", 3.0), sigma = param(in, "sigma", 0.5);
    f.rule = GeneratorRule{Distribution::lognormal(mu, sigma)};
    out = {{"mu", mu}, {"sigma", sigma}};
  } else if (p == "AR1") {
    double phi = param(in, "phi", 0.8), c = param(in, "c", 10.0), sd = param(in, "sd", 2.0);
    if (std::abs(phi) >= 1.0) throw ArgumentError("AR1 coefficient must lie in (-1, 1)");
    f.script = [phi, c, sd](double x, std::size_t, std::mt19937_64& rng) {
      return phi * x + c + std::normal_distribution<double>(0.0, sd)(rng);
    };
    f.global_init = GeneratorRule{Distribution::fixed(c / (1.0 - phi))};
    out = {{"phi", phi}, {"c", c}, {"sd", sd}};
  } else if (p == "CE") {
    double g = param(in, "growth", 1.1), cap = param(in, "cap", 500.0);
    f.script = [g, cap](double x, std::size_t, std::mt19937_64&) {
      return x < cap ? g * x + 1.0 : x / 2.0;
    };
    out = {{"growth", g}, {"cap", cap}, {"form", "x < cap ? growth*x + 1 : x/2"}};
  } else if (p == "SS") {
    double level = param(in, "level", 50.0), amp = param(in, "amplitude", 20.0);
    double period = param(in, "period", 12.0);
    if (period <= 0) throw ArgumentError("SS period must be positive");
    f.script = [level, amp, period](double, std::size_t k, std::mt19937_64&) {
      return level + amp * std::sin(2.0 * std::numbers::pi * static_cast<double>(k) / period);
    };
    out = {{"level", level}, {"amplitude", amp}, {"period", period},
           {"form", "level + amplitude*sin(2*pi*k/period), k = update count"}};
  } else if (p == "SR") {
    double split = param(in, "split", 50.0);
    f.script = [split](double x, std::size_t, std::mt19937_64& rng) {
      double e = std::normal_distribution<double>(0.0, 1.0)(rng);
      return x < split ? 1.2 * x + 5.0 + e : 0.6 * x + 2.0 + e;
    };
    out = {{"split", split}, {"form", "x < split ? 1.2x + 5 + e : 0.6x + 2 + e, e ~ N(0,1)"}};
  } else if (p == "PL") {
    double up = param(in, "up", 1.0), down = param(in, "down", -0.5);
    double len = param(in, "segment", 20.0);
    if (len < 1) throw ArgumentError("PL segment must be at least 1");
    auto seg = static_cast<std::size_t>(len);
    f.script = [up, down, seg](double x, std::size_t k, std::mt19937_64&) {
      return x + ((k / seg) % 2 == 0 ? up : down);
    };
    out = {{"up", up}, {"down", down}, {"segment", len}};
  } else if (p == "UD") {
    double w = param(in, "width", 5.0);
    if (w <= 0) throw ArgumentError("UD width must be positive");
    f.rule = DeltaRule{Distribution::uniform(-w, w)};
    out = {{"lo", -w}, {"hi", w}};
  } else if (p == "ND") {
    double mean = param(in, "mean", 100.0), sd = param(in, "sd", 10.0);
    if (sd <= 0) throw ArgumentError("ND sd must be positive");
    f.rule = GeneratorRule{Distribution::normal(mean, sd)};
    out = {{"mean", mean}, {"sd", sd}};
  }
  return f;
}

PatternForm categorical_form(const std::string& p, const nlohmann::json& in) {
  PatternForm f;
  f.kind = AttrKind::Categorical;
  auto three = state_names(3);
  if (p == "HST") {
    double d = param(in, "diagonal", 0.9);
    if (d <= 0 || d >= 1) throw ArgumentError("HST diagonal must lie in (0, 1)");
    double off = (1.0 - d) / 2.0;
    f.rule = markov(three, {{d, off, off}, {off, d, off}, {off, off, d}});
    f.params = {{"diagonal", d}};
  } else if (p == "UET") {
    f.rule = markov(three, {{0, 0.5, 0.5}, {0.5, 0, 0.5}, {0.5, 0.5, 0}});
  } else if (p == "UIT") {
    double t = 1.0 / 3.0;
    f.rule = markov(three, {{t, t, t}, {t, t, t}, {t, t, t}});
  } else if (p == "RST") {
    double r = param(in, "rare", 0.02);
    if (r <= 0 || r >= 1) throw ArgumentError("RST rare probability must lie in (0, 1)");
    double h = (1.0 - r) / 2.0;
    f.rule = markov(three, {{h, h, r}, {h, h, r}, {0.5, 0.5, 0.0}});
    f.params = {{"rare", r}};
  } else if (p == "SDT") {
    double d = param(in, "dominant", 0.8);
    if (d <= 0 || d >= 1) throw ArgumentError("SDT dominant probability must lie in (0, 1)");
    double o = (1.0 - d) / 2.0;
    f.rule = markov(three, {{d, o, o}, {d, o, o}, {d, o, o}});
    f.params = {{"dominant", d}};
  } else if (p == "CT") {
    f.rule = markov(three, {{0, 1, 0}, {0, 0, 1}, {1, 0, 0}});
  } else if (p == "E2P") {
    f.rule = categorical(state_names(2), {1, 1});
  } else if (p == "N2P") {
    f.rule = categorical(state_names(2), {0.8, 0.2});
  } else if (p == "E5P") {
    f.rule = categorical(state_names(5), {1, 1, 1, 1, 1});
  } else if (p == "N5P") {
    f.rule = categorical(state_names(5), {0.1, 0.15, 0.2, 0.25, 0.3});
  }
  if (auto* m = std::get_if<MarkovRule>(&*f.rule)) {
    f.states = m->states;
    f.params["matrix"] = m->matrix;
  } else {
    const auto& c = std::get<CategoricalRule>(*f.rule);
    f.states = c.states;
    f.params["probs"] = c.probs;
  }
  f.params["states"] = f.states;
  f.event_init = f.global_init = CategoricalRule{{f.states.front()}, {1.0}};
  return f;
}

PatternForm case_form(const std::string& p) {
  PatternForm f;
  auto cat = [&](std::size_t n, bool equal) {
    f.kind = AttrKind::Categorical;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = equal ? 1.0 : static_cast<double>(i + 1);
    auto r = categorical(state_names(n), w);
    f.states = r.states;
    f.event_init = r;
  };
  if (p == "CFX") f.event_init = GeneratorRule{Distribution::fixed(42.0)};
  else if (p == "CEX") f.event_init = GeneratorRule{Distribution::exponential(1.0 / 50.0)};
  else if (p == "CND") f.event_init = GeneratorRule{Distribution::normal(100.0, 15.0)};
  else if (p == "CUD") f.event_init = GeneratorRule{Distribution::uniform(0.0, 100.0)};
  else if (p == "C2E") cat(2, true);
  else if (p == "C2N") cat(2, false);
  else if (p == "C5E") cat(5, true);
  else if (p == "C5N") cat(5, false);
  else if (p == "C10E") cat(10, true);
  else if (p == "C10N") cat(10, false);
  f.params["initializer"] = to_json(f.event_init);
  return f;
}

PatternForm pattern_form(const PatternSpec& spec) {
  if (contains(kNumeric, spec.pattern)) return numeric_form(spec.pattern, spec.placement, spec.params);
  if (contains(kCategorical, spec.pattern)) return categorical_form(spec.pattern, spec.params);
  if (contains(kCasePatterns, spec.pattern)) return case_form(spec.pattern);
  throw ArgumentError("unknown pattern '" + spec.pattern + "'");
}

Scope placement_scope(Placement p) {
  return p == Placement::SE || p == Placement::ME ? Scope::Event : Scope::Global;
}

bool single_modifier(Placement p) { return p == Placement::SE || p == Placement::SG; }

}  // namespace

std::string_view to_string(Placement p) {
  switch (p) {
    case Placement::SE: return "SE";
    case Placement::ME: return "ME";
    case Placement::SG: return "SG";
    case Placement::MG: return "MG";
  }
  return "?";
}

Placement parse_placement(std::string_view text) {
  if (text == "SE") return Placement::SE;
  if (text == "ME") return Placement::ME;
  if (text == "SG") return Placement::SG;
  if (text == "MG") return Placement::MG;
  throw ArgumentError("unknown placement '" + std::string(text) + "'");
}

bool is_numeric_pattern(std::string_view p) { return contains(kNumeric, p); }
bool is_case_pattern(std::string_view p) { return contains(kCasePatterns, p); }
bool is_scripted_pattern(std::string_view p) { return kScripted.count(p) > 0; }
std::vector<std::string> numeric_patterns() { return kNumeric; }
std::vector<std::string> categorical_patterns() { return kCategorical; }
std::vector<std::string> case_patterns() { return kCasePatterns; }

DASModel base_attribute_model() {
  const std::vector<std::string> labels{"Receive application", "Check credit", "Assess risk",
                                        "Review documents",    "Make decision", "Notify applicant"};
  std::vector<Node> nodes{{"start", NodeKind::StartEvent, "", {}, {}}};
  std::vector<Flow> flows;
  std::string prev = "start";
  DASModel m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    std::string id = "t" + std::to_string(i + 1);
    nodes.push_back({id, NodeKind::Task, labels[i], {}, {}});
    flows.push_back({"f" + std::to_string(i + 1), prev, id});
    prev = id;
    std::string pool = "pool_" + std::to_string(i + 1);
    m.resources.pools.push_back({pool, 1, WeeklyCalendar::always_open()});
    m.resources.task_pool[labels[i]] = pool;
    m.resources.proc_time[labels[i]] = Distribution::exponential(1.0 / 300.0);
  }
  nodes.push_back({"end", NodeKind::EndEvent, "", {}, {}});
  flows.push_back({"f" + std::to_string(labels.size() + 1), prev, "end"});
  m.process = ProcessModel(std::move(nodes), std::move(flows), {});
  m.arrivals.inter_arrival = Distribution::exponential(1.0 / 600.0);
  return m;
}

AttributeScenario build_attribute_scenario(const PatternSpec& spec, const DASModel& base) {
  if (spec.noise < 0.0 || spec.noise > 1.0) throw ArgumentError("noise must lie in [0, 1]");
  if (spec.attribute.empty()) throw ArgumentError("attribute name must not be empty");
  if (base.attribute(spec.attribute))
    throw ArgumentError("base model already declares '" + spec.attribute + "'");
  auto labels = base.process.task_labels();
  if (labels.empty()) throw ArgumentError("base model has no activity");

  PatternForm form = pattern_form(spec);
  AttributeScenario sc;
  sc.spec = spec;
  sc.base = base;
  sc.states = form.states;

  AttributeTruth& t = sc.truth;
  t.attribute = spec.attribute;
  t.pattern = spec.pattern;
  t.placement = spec.placement;
  t.kind = form.kind;
  t.params = form.params;

  if (is_case_pattern(spec.pattern)) {
    t.scope = Scope::Case;
    t.initializer = form.event_init;
  } else {
    t.scope = placement_scope(spec.placement);
    t.initializer = t.scope == Scope::Event ? form.event_init : form.global_init;
    t.rule = form.rule;
    sc.script = form.script;
    if (single_modifier(spec.placement)) {
      // The entry activity is excluded so the value observed before the change is visible.
      std::string entry = base.process.node(base.process.outgoing(base.process.start_node().id)
                                                .front()->target).label;
      std::vector<std::string> pool;
      for (const auto& l : labels)
        if (l != entry || labels.size() == 1) pool.push_back(l);
      auto rng = stream(spec.seed, 0);
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      t.modifiers = {pool[pick(rng)]};
    } else {
      t.modifiers = labels;
    }
  }

  sc.model = base;
  sc.model.attributes.push_back({t.attribute, t.scope, t.kind, t.initializer, false});
  if (t.rule)
    for (const auto& m : t.modifiers)
      sc.model.rules.push_back({t.attribute, Anchor::task_completion(m), *t.rule});
  sc.model.validate();
  return sc;
}

namespace {

struct Walk {
  Value value;
  std::size_t steps = 0;
};

struct InjectResult {
  EventLog log;
  std::vector<double> numeric;
};

InjectResult inject(const AttributeScenario& sc, const EventLog& base, std::uint64_t seed,
                    double noise_sd, double label_noise) {
  const AttributeTruth& t = sc.truth;
  auto rng = stream(seed, 1);
  auto noise_rng = stream(seed, 2);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::set<std::string, std::less<>> modifiers(t.modifiers.begin(), t.modifiers.end());

  auto perturb = [&](Value& v) {
    if (t.kind == AttrKind::Numeric) {
      if (noise_sd > 0.0) v = as_number(v) + noise_sd * gauss(noise_rng);
    } else if (label_noise > 0.0 && !sc.states.empty() && unit(noise_rng) < label_noise) {
      std::uniform_int_distribution<std::size_t> pick(0, sc.states.size() - 1);
      v = sc.states[pick(noise_rng)];
    }
  };
  auto initial = [&]() {
    Walk w{apply_rule(t.initializer, default_value(t.kind), rng), 0};
    if (t.scope == Scope::Case) perturb(w.value);
    return w;
  };

  std::vector<std::size_t> order(base.size());
  std::iota(order.begin(), order.end(), 0);
  const auto& ev = base.events();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return ev[a].end_time < ev[b].end_time; });

  Walk global;
  if (t.scope == Scope::Global) global = initial();
  std::map<std::string, Walk> per_case;
  std::vector<Event> out = ev;
  InjectResult res;
  for (std::size_t i : order) {
    Walk* w = &global;
    if (t.scope != Scope::Global) {
      auto it = per_case.find(ev[i].case_id);
      if (it == per_case.end()) it = per_case.emplace(ev[i].case_id, initial()).first;
      w = &it->second;
    }
    if (t.scope != Scope::Case && modifiers.count(ev[i].activity)) {
      if (sc.script) {
        double next = sc.script(as_number(w->value), w->steps, rng);
        if (std::isfinite(next)) w->value = next;
      } else {
        Value next = apply_rule(*t.rule, w->value, rng);
        if (!is_numeric(next) || std::isfinite(as_number(next))) w->value = std::move(next);
      }
      ++w->steps;
      perturb(w->value);
    }
    bool unset = !is_numeric(w->value) && as_category(w->value) == kUnsetCategory;
    if (!unset) out[i].attributes[t.attribute] = w->value;
    if (is_numeric(w->value)) res.numeric.push_back(as_number(w->value));
  }
  Schema schema = base.schema();
  schema[t.attribute] = t.kind;
  res.log = EventLog(std::move(out), std::move(schema));
  return res;
}

}  // namespace

EventLog generate_attribute_log(const AttributeScenario& sc, std::size_t n_cases,
                                std::uint64_t seed) {
  SimConfig cfg;
  cfg.n_cases = n_cases;
  cfg.seed = seed;
  EventLog base = simulate(sc.base, cfg).log;
  double noise = sc.spec.noise;
  if (noise <= 0.0) return inject(sc, base, seed, 0.0, 0.0).log;
  if (sc.truth.kind == AttrKind::Categorical) return inject(sc, base, seed, 0.0, noise).log;

  auto clean = inject(sc, base, seed, 0.0, 0.0);
  double sd = 0.0;
  if (clean.numeric.size() > 1) {
    double mean = std::accumulate(clean.numeric.begin(), clean.numeric.end(), 0.0) /
                  static_cast<double>(clean.numeric.size());
    double ss = 0.0;
    for (double v : clean.numeric) ss += (v - mean) * (v - mean);
    sd = std::sqrt(ss / static_cast<double>(clean.numeric.size() - 1));
  }
  return inject(sc, base, seed, noise * sd, 0.0).log;
}

// ---------------------------------------------------------------------------

std::string_view to_string(ConditionPattern p) {
  static constexpr std::string_view names[] = {"EQ",  "UB",  "RD",  "ND",  "ED",
                                               "CC1", "CC2", "CC3", "CC4", "CC5"};
  return names[static_cast<int>(p)];
}

ConditionPattern parse_condition_pattern(std::string_view text) {
  for (int i = 0; i <= static_cast<int>(ConditionPattern::CC5); ++i)
    if (to_string(static_cast<ConditionPattern>(i)) == text) return static_cast<ConditionPattern>(i);
  throw ArgumentError("unknown condition pattern '" + std::string(text) + "'");
}

namespace {

constexpr int kBranches = 5;
const std::vector<std::string> kValues{"v1", "v2", "v3", "v4", "v5"};

struct ConditionForm {
  bool uses_cat = false;
  bool uses_x = false;
  UpdateRule cat_gen = CategoricalRule{kValues, {0.2, 0.2, 0.2, 0.2, 0.2}};
  UpdateRule x_gen = GeneratorRule{Distribution::uniform(0.0, 100.0)};
  std::vector<Condition> regions;  // mutually exclusive, jointly exhaustive
};

Condition band(double lo, double hi) {
  return Condition::all_of({Condition::gt("x", lo), Condition::le("x", hi)});
}

std::vector<Condition> cuts(double a, double b, double c, double d) {
  return {Condition::le("x", a), band(a, b), band(b, c), band(c, d), Condition::gt("x", d)};
}

Condition cat_is(int i) { return Condition::eq("cat", kValues[static_cast<std::size_t>(i)]); }

ConditionForm condition_form(ConditionPattern p) {
  using C = Condition;
  ConditionForm f;
  switch (p) {
    case ConditionPattern::EQ:
    case ConditionPattern::RD:
      f.uses_cat = true;
      if (p == ConditionPattern::RD) f.cat_gen = CategoricalRule{kValues, {0.4, 0.25, 0.15, 0.12, 0.08}};
      for (int i = 0; i < kBranches; ++i) f.regions.push_back(cat_is(i));
      break;
    case ConditionPattern::UB:
      f.uses_cat = true;
      f.regions.push_back(C::ne("cat", "none"));
      for (int i = 1; i < kBranches; ++i) f.regions.push_back(C::eq("cat", "none"));
      break;
    case ConditionPattern::ND:
      f.uses_x = true;
      f.x_gen = GeneratorRule{Distribution::normal(50.0, 15.0)};
      f.regions = cuts(35, 45, 55, 65);
      break;
    case ConditionPattern::ED:
      f.uses_x = true;
      f.x_gen = GeneratorRule{Distribution::exponential(1.0 / 20.0)};
      f.regions = cuts(5, 12, 22, 40);
      break;
    case ConditionPattern::CC1:
      f.uses_cat = f.uses_x = true;
      f.regions = {C::all_of({cat_is(0), C::le("x", 50)}), C::all_of({cat_is(0), C::gt("x", 50)}),
                   C::any_of({cat_is(1), cat_is(2)}), cat_is(3), cat_is(4)};
      break;
    case ConditionPattern::CC2:
      f.uses_cat = f.uses_x = true;
      f.regions = {C::le("x", 20), C::all_of({band(20, 40), C::ne("cat", kValues[0])}),
                   C::all_of({band(20, 40), cat_is(0)}), band(40, 70), C::gt("x", 70)};
      break;
    case ConditionPattern::CC3: {
      f.uses_cat = f.uses_x = true;
      C low = C::any_of({cat_is(0), cat_is(1)});
      f.regions = {C::all_of({low, C::le("x", 30)}), C::all_of({low, C::gt("x", 30)}),
                   C::all_of({cat_is(2), C::le("x", 60)}), C::all_of({cat_is(2), C::gt("x", 60)}),
                   C::any_of({cat_is(3), cat_is(4)})};
      break;
    }
    case ConditionPattern::CC4:
      f.uses_cat = f.uses_x = true;
      f.regions = {C::all_of({C::le("x", 25), cat_is(0)}),
                   C::all_of({C::le("x", 25), C::ne("cat", kValues[0])}), band(25, 50),
                   C::all_of({C::gt("x", 50), C::any_of({cat_is(1), cat_is(2)})}),
                   C::all_of({C::gt("x", 50), C::ne("cat", kValues[1]), C::ne("cat", kValues[2])})};
      break;
    case ConditionPattern::CC5: {
      f.uses_cat = f.uses_x = true;
      C mid = C::any_of({cat_is(2), cat_is(3)});
      f.regions = {cat_is(0), C::all_of({cat_is(1), C::le("x", 50)}),
                   C::all_of({cat_is(1), C::gt("x", 50)}), C::all_of({mid, C::le("x", 80)}),
                   C::any_of({cat_is(4), C::all_of({mid, C::gt("x", 80)})})};
      break;
    }
  }
  return f;
}

}  // namespace

std::pair<DASModel, ConditionTruth> build_condition_scenario(const ConditionScenario& s) {
  if (s.gateway == GateType::And) throw ArgumentError("condition scenarios need an XOR or OR gateway");
  if (s.noise < 0.0 || s.noise > 1.0) throw ArgumentError("noise must lie in [0, 1]");
  if (s.gateway == GateType::Or && (s.flows_activated < 1 || s.flows_activated > kBranches))
    throw ArgumentError("flows activated must lie in [1, 5]");

  auto rng = stream(s.seed, 3);
  DASModel m;
  std::vector<Node> nodes{{"start", NodeKind::StartEvent, "", {}, {}}};
  std::vector<Flow> flows;
  std::map<std::string, std::string> defaults;
  m.resources.pools.push_back({"staff", 100, WeeklyCalendar::always_open()});
  std::uniform_real_distribution<double> mean_dist(60.0, 600.0);
  std::uniform_int_distribution<int> family(0, 2);
  auto add_task = [&](const std::string& id, const std::string& label) {
    nodes.push_back({id, NodeKind::Task, label, {}, {}});
    m.resources.task_pool[label] = "staff";
    double mu = mean_dist(rng);
    switch (family(rng)) {
      case 0: m.resources.proc_time[label] = Distribution::exponential(1.0 / mu); break;
      case 1: m.resources.proc_time[label] = Distribution::normal(mu, mu / 5.0); break;
      default: m.resources.proc_time[label] = Distribution::uniform(mu / 2.0, 1.5 * mu); break;
    }
  };

  ConditionForm form = condition_form(s.pattern);
  ConditionTruth truth;
  std::string prev = "start";
  for (int k = 1; k <= 3; ++k) {
    std::string ks = std::to_string(k);
    std::string a = "a" + ks, split = "s" + ks, join = "j" + ks;
    add_task(a, "A" + ks);
    flows.push_back({"f" + ks + "_0in", prev, a});
    flows.push_back({"f" + ks + "_1sp", a, split});
    nodes.push_back({split, NodeKind::Gateway, "", s.gateway, Direction::Split});
    nodes.push_back({join, NodeKind::Gateway, "", s.gateway, Direction::Join});
    GatewayPolicy policy;
    for (int i = 0; i < kBranches; ++i) {
      std::string is = std::to_string(i + 1);
      std::string b = "b" + ks + is;
      add_task(b, "B" + ks + "_" + is);
      std::string out = "f" + ks + "_b" + is;
      flows.push_back({out, split, b});
      flows.push_back({"f" + ks + "_m" + is, b, join});
      Condition c;
      double prob;
      if (s.gateway == GateType::Xor) {
        c = form.regions[static_cast<std::size_t>(i)];
        prob = i + 1 < kBranches ? 1.0 / kBranches : 1.0 - (kBranches - 1) * (1.0 / kBranches);
      } else {
        std::vector<Condition> any;
        for (int r = i; r < std::min(kBranches, i + s.flows_activated); ++r)
          any.push_back(form.regions[static_cast<std::size_t>(r)]);
        c = Condition::any_of(std::move(any));
        prob = 1.0;
      }
      if (s.noise > 0.0) c = Condition::all_of({Condition::eq("noise_flag", "ok"), std::move(c)});
      policy.flows.push_back({out, std::move(c), prob});
    }
    defaults[split] = s.gateway == GateType::Xor ? "f" + ks + "_b5" : "f" + ks + "_b1";
    m.policies[split] = policy;
    truth.policies[split] = policy;
    prev = join;
  }
  nodes.push_back({"end", NodeKind::EndEvent, "", {}, {}});
  flows.push_back({"f4_end", prev, "end"});
  m.process = ProcessModel(std::move(nodes), std::move(flows), std::move(defaults));
  m.arrivals.inter_arrival = Distribution::exponential(1.0 / 300.0);

  auto declare = [&](const std::string& name, AttrKind kind, const UpdateRule& gen) {
    if (s.basis == AttributeBasis::Case) {
      m.attributes.push_back({name, Scope::Case, kind, gen, false});
    } else {
      m.attributes.push_back({name, Scope::Event, kind,
                              kind == AttrKind::Numeric
                                  ? UpdateRule{GeneratorRule{Distribution::fixed(0.0)}}
                                  : UpdateRule{CategoricalRule{{std::string(kUnsetCategory)}, {1.0}}},
                              false});
      for (int k = 1; k <= 3; ++k)
        m.rules.push_back({name, Anchor::task_completion("A" + std::to_string(k)), gen});
    }
  };
  if (form.uses_cat) declare("cat", AttrKind::Categorical, form.cat_gen);
  if (form.uses_x) declare("x", AttrKind::Numeric, form.x_gen);
  if (s.noise > 0.0)
    m.attributes.push_back({"noise_flag", Scope::Case, AttrKind::Categorical,
                            CategoricalRule{{"noise", "ok"}, {s.noise, 1.0 - s.noise}}, false});
  m.validate();
  truth.params = to_json(s);
  return {std::move(m), std::move(truth)};
}

nlohmann::json to_json(const PatternSpec& s) {
  return {{"pattern", s.pattern},     {"placement", to_string(s.placement)},
          {"noise", s.noise},         {"seed", s.seed},
          {"attribute", s.attribute}, {"params", s.params}};
}

PatternSpec pattern_spec_from_json(const nlohmann::json& j) {
  try {
    PatternSpec s;
    s.pattern = j.at("pattern").get<std::string>();
    s.placement = parse_placement(j.value("placement", std::string("SE")));
    s.noise = j.value("noise", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    s.attribute = j.value("attribute", std::string("attr"));
    if (j.contains("params")) s.params = j["params"];
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("pattern spec: ") + e.what());
  }
}

nlohmann::json to_json(const AttributeTruth& t) {
  nlohmann::json j{{"attribute", t.attribute},
                   {"pattern", t.pattern},
                   {"placement", to_string(t.placement)},
                   {"scope", to_string(t.scope)},
                   {"kind", to_string(t.kind)},
                   {"modifiers", t.modifiers},
                   {"initializer", to_json(t.initializer)},
                   {"params", t.params},
                   {"scripted", is_scripted_pattern(t.pattern)}};
  j["rule"] = t.rule ? to_json(*t.rule) : nlohmann::json(nullptr);
  return j;
}

nlohmann::json to_json(const ConditionScenario& s) {
  return {{"gateway", to_string(s.gateway)},
          {"pattern", to_string(s.pattern)},
          {"basis", s.basis == AttributeBasis::Case ? "case" : "event"},
          {"flows_activated", s.flows_activated},
          {"noise", s.noise},
          {"seed", s.seed}};
}

ConditionScenario condition_scenario_from_json(const nlohmann::json& j) {
  try {
    ConditionScenario s;
    auto g = j.value("gateway", std::string("XOR"));
    if (g == "XOR") s.gateway = GateType::Xor;
    else if (g == "OR") s.gateway = GateType::Or;
    else throw ArgumentError("gateway must be XOR or OR");
    s.pattern = parse_condition_pattern(j.value("pattern", std::string("EQ")));
    auto b = j.value("basis", std::string("case"));
    if (b == "case") s.basis = AttributeBasis::Case;
    else if (b == "event") s.basis = AttributeBasis::Event;
    else throw ArgumentError("basis must be case or event");
    s.flows_activated = j.value("flows_activated", 1);
    s.noise = j.value("noise", 0.0);
    s.seed = j.value("seed", std::uint64_t{0});
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("condition scenario: ") + e.what());
  }
}

}  // namespace dasim
