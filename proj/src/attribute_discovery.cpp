#include "dasim/attribute_discovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "dasim/errors.hpp"

namespace dasim {

InitGenerator default_init(const Schema& schema, const std::set<std::string>& attributes) {
  InitGenerator init;
  for (const auto& a : attributes) {
    auto it = schema.find(a);
    if (it != schema.end()) init.emplace(a, default_value(it->second));
  }
  return init;
}

namespace {

UpdateRule constant_rule(const Value& v) {
  if (is_numeric(v)) return GeneratorRule{Distribution::fixed(as_number(v))};
  return CategoricalRule{{as_category(v)}, {1.0}};
}

}  // namespace

CaseAttributeResult classify_case_attributes(const EventLog& log, double threshold) {
  if (!(threshold > 0 && threshold <= 1))
    throw ArgumentError("case-attribute threshold must be in (0, 1]");
  CaseAttributeResult out;
  const auto ts = traces(log);
  for (const auto& [name, kind] : log.schema()) {
    std::size_t observing = 0, constant = 0;
    std::vector<Value> firsts;
    for (const auto& t : ts) {
      const Value* first = nullptr;
      bool same = true;
      for (const Event* e : t.events) {
        auto it = e->attributes.find(name);
        if (it == e->attributes.end()) continue;
        if (!first) first = &it->second;
        else if (*first != it->second) same = false;
      }
      if (!first) continue;
      ++observing;
      constant += same;
      firsts.push_back(*first);
    }
    if (observing == 0) continue;
    double share = static_cast<double>(constant) / static_cast<double>(observing);
    out.constant_share[name] = share;
    if (share >= threshold) {
      out.attributes.insert(name);
      out.initializers.emplace(name, fit_generator(firsts));
    }
  }
  return out;
}

std::vector<HalfEvent> split_event_log(const EventLog& log) {
  std::vector<HalfEvent> out;
  out.reserve(2 * log.size());
  const auto& evs = log.events();
  for (std::size_t i = 0; i < evs.size(); ++i) {
    const auto& e = evs[i];
    const bool inst = e.start_time == e.end_time;
    out.push_back({e.case_id, e.activity, e.start_time, Phase::Start, i, nullptr, inst});
    out.push_back({e.case_id, e.activity, e.end_time, Phase::End, i, &e.attributes, inst});
  }
  return out;
}

namespace {
int phase_rank(const HalfEvent& h) {
  if (h.phase == Phase::Start) return 1;
  return h.instantaneous ? 2 : 0;
}
}  // namespace

bool half_event_before(const HalfEvent& a, const HalfEvent& b) {
  if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
  int ra = phase_rank(a), rb = phase_rank(b);
  if (ra != rb) return ra < rb;
  if (a.event_index != b.event_index) return a.event_index < b.event_index;
  return a.phase < b.phase;
}

std::vector<HalfEvent> order_half_events(const EventLog& log, Hypothesis h) {
  auto halves = split_event_log(log);
  if (h == Hypothesis::Global) {
    std::stable_sort(halves.begin(), halves.end(), half_event_before);
  } else {
    std::map<std::string_view, std::pair<TimePoint, std::size_t>> first;
    for (std::size_t i = 0; i < log.size(); ++i) {
      const auto& e = log.events()[i];
      auto [it, fresh] = first.emplace(e.case_id, std::make_pair(e.start_time, i));
      if (!fresh && std::make_pair(e.start_time, i) < it->second) it->second = {e.start_time, i};
    }
    std::stable_sort(halves.begin(), halves.end(), [&](const HalfEvent& a, const HalfEvent& b) {
      if (a.case_id != b.case_id) return first.at(a.case_id) < first.at(b.case_id);
      return half_event_before(a, b);
    });
  }
  return halves;
}

const std::vector<TransitionPair>* TransitionStore::find(const std::string& activity,
                                                         const std::string& attribute) const {
  auto it = pairs.find({activity, attribute});
  return it == pairs.end() ? nullptr : &it->second;
}

TransitionStore find_data_values(const std::vector<HalfEvent>& halves, const InitGenerator& init,
                                 bool reset_each_case) {
  TransitionStore store;
  InitGenerator beta = init;
  std::map<std::pair<std::string, std::string>, std::deque<InitGenerator>> starts;
  std::string_view current_case;
  bool first = true;
  for (const auto& h : halves) {
    if (reset_each_case && (first || h.case_id != current_case)) beta = init;
    first = false;
    current_case = h.case_id;
    std::pair<std::string, std::string> key{std::string(h.case_id), std::string(h.activity)};
    if (h.phase == Phase::Start) {
      starts[key].push_back(beta);
      continue;
    }
    auto sit = starts.find(key);
    const bool matched = sit != starts.end() && !sit->second.empty();
    InitGenerator start_values;
    if (matched) {
      start_values = std::move(sit->second.front());
      sit->second.pop_front();
    } else {
      ++store.unmatched_ends;
    }
    if (!h.attributes) continue;
    for (const auto& [name, value] : *h.attributes) {
      auto b = beta.find(name);
      if (b == beta.end()) continue;
      if (matched) {
        store.pairs[{std::string(h.activity), name}].push_back({start_values.at(name), value});
      }
      b->second = value;
    }
  }
  return store;
}

namespace {

HypothesisScore score_hypothesis(const TransitionStore& store, const std::string& attr,
                                 const ClassificationOptions& opts) {
  HypothesisScore s;
  double weighted = 0.0;
  for (const auto& [key, pairs] : store.pairs) {
    if (key.second != attr || pairs.size() < opts.min_samples) continue;
    auto best = fit_best_rule(pairs, opts.fit);
    if (!best) continue;
    weighted += best->error * static_cast<double>(pairs.size());
    s.samples += pairs.size();
    s.rules.emplace(key.first, std::move(*best));
  }
  s.error = s.samples ? weighted / static_cast<double>(s.samples)
                      : std::numeric_limits<double>::infinity();
  return s;
}

}  // namespace

ClassificationResult classify_dynamic(const EventLog& log, const std::set<std::string>& dynamic,
                                      const InitGenerator& init,
                                      const ClassificationOptions& opts) {
  ClassificationResult result;
  InitGenerator tracked;
  for (const auto& a : dynamic) {
    auto it = init.find(a);
    if (it != init.end()) tracked.insert(*it);
    else if (auto s = log.schema().find(a); s != log.schema().end())
      tracked.emplace(a, default_value(s->second));
  }
  const auto global_timeline = order_half_events(log, Hypothesis::Global);
  const auto ev = find_data_values(order_half_events(log, Hypothesis::Event), tracked, true);
  const auto gl = find_data_values(global_timeline, tracked, false);
  result.unmatched_ends = ev.unmatched_ends + gl.unmatched_ends;

  for (const auto& [name, start] : tracked) {
    AttributeClassification c;
    c.name = name;
    c.kind = kind_of(start);
    c.event = score_hypothesis(ev, name, opts);
    c.global = score_hypothesis(gl, name, opts);

    if (c.event.samples == 0 && c.global.samples == 0) {
      c.scope = Scope::Event;
      c.low_confidence = true;
      std::vector<Value> all;
      std::map<std::string, std::vector<Value>> by_activity;
      std::map<std::string, bool> changes;
      for (const auto& [key, pairs] : ev.pairs) {
        if (key.second != name) continue;
        for (const auto& p : pairs) {
          all.push_back(p.after);
          by_activity[key.first].push_back(p.after);
        }
        changes[key.first] = keep_rule(pairs, opts.fit.change_ratio);
      }
      if (!all.empty()) c.initializer = fit_generator(all);
      else c.initializer = constant_rule(start);
      for (const auto& [act, vals] : by_activity)
        if (changes[act]) c.kept_rules.emplace(act, fit_generator(vals));
      result.attributes.emplace(name, std::move(c));
      continue;
    }

    const double ee = c.event.error, eg = c.global.error;
    const double tol = 1e-9 * std::max({1.0, std::abs(ee), std::abs(eg)});
    const bool global_wins = std::isfinite(eg) && (!std::isfinite(ee) || eg < ee - tol);
    c.scope = global_wins ? Scope::Global : Scope::Event;
    const auto& store = global_wins ? gl : ev;
    const auto& win = global_wins ? c.global : c.event;
    for (const auto& [act, rep] : win.rules) {
      const auto* pairs = store.find(act, name);
      if (pairs && keep_rule(*pairs, opts.fit.change_ratio)) c.kept_rules.emplace(act, rep.rule);
    }
    if (global_wins) {
      const Value* first_seen = nullptr;
      for (const auto& h : global_timeline) {
        if (!h.attributes) continue;
        auto it = h.attributes->find(name);
        if (it != h.attributes->end()) {
          first_seen = &it->second;
          break;
        }
      }
      c.initializer = constant_rule(first_seen ? *first_seen : start);
    } else {
      c.initializer = constant_rule(start);
    }
    result.attributes.emplace(name, std::move(c));
  }
  return result;
}

}  // namespace dasim
