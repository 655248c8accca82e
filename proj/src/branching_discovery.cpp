#include "dasim/branching_discovery.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "dasim/attribute_discovery.hpp"
#include "dasim/errors.hpp"

namespace dasim {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

/// Index-based view of a process model with the reachability tables replay needs.
struct Graph {
  const ProcessModel& pm;
  std::size_t N = 0, F = 0;
  std::vector<std::size_t> src, dst;              // per flow
  std::vector<std::vector<std::size_t>> out, in;  // per node, flows sorted by id
  std::vector<std::vector<bool>> silent;          // [f][g]: g reachable from f via gateways only
  std::vector<bool> silent_end;                   // an end event reachable via gateways only
  std::map<std::string, std::size_t, std::less<>> task_in;
  std::map<std::size_t, std::size_t> or_join;     // OR split node -> join node
  std::map<std::size_t, std::vector<std::set<std::string>>> branch_tasks;  // OR split -> per out flow
  std::map<std::size_t, std::set<std::string>> after_join;

  explicit Graph(const ProcessModel& m) : pm(m) {
    N = m.nodes().size();
    F = m.flows().size();
    src.resize(F);
    dst.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
      src[f] = m.node_index(m.flows()[f].source);
      dst[f] = m.node_index(m.flows()[f].target);
    }
    out.resize(N);
    in.resize(N);
    for (std::size_t n = 0; n < N; ++n) {
      for (auto* f : m.outgoing(m.nodes()[n].id)) out[n].push_back(m.flow_index(f->id));
      for (auto* f : m.incoming(m.nodes()[n].id)) in[n].push_back(m.flow_index(f->id));
      const auto& node = m.nodes()[n];
      if (node.kind == NodeKind::Task) task_in.emplace(node.label, in[n].front());
    }
    silent.assign(F, std::vector<bool>(F, false));
    silent_end.assign(F, false);
    for (std::size_t f = 0; f < F; ++f) {
      std::vector<std::size_t> stack{f};
      while (!stack.empty()) {
        auto g = stack.back();
        stack.pop_back();
        if (silent[f][g]) continue;
        silent[f][g] = true;
        const auto& t = m.nodes()[dst[g]];
        if (t.kind == NodeKind::EndEvent) silent_end[f] = true;
        if (t.kind == NodeKind::Gateway)
          for (auto h : out[dst[g]]) stack.push_back(h);
      }
    }
    for (std::size_t n = 0; n < N; ++n) {
      const auto& node = m.nodes()[n];
      if (!(node.is_split() && node.gate_type == GateType::Or)) continue;
      auto j = m.node_index(*m.paired_join(node.id));
      or_join[n] = j;
      auto& branches = branch_tasks[n];
      for (auto g : out[n]) branches.push_back(tasks_from(g, j));
      after_join[n] = tasks_from(out[j].front(), kNone);
    }
  }

  /// Task labels reachable from flow f without entering node `stop`.
  std::set<std::string> tasks_from(std::size_t f, std::size_t stop) const {
    std::set<std::string> labels;
    std::vector<bool> seen(F, false);
    std::vector<std::size_t> stack{f};
    while (!stack.empty()) {
      auto g = stack.back();
      stack.pop_back();
      if (seen[g]) continue;
      seen[g] = true;
      auto n = dst[g];
      if (n == stop) continue;
      const auto& node = pm.nodes()[n];
      if (node.kind == NodeKind::Task) labels.insert(node.label);
      for (auto h : out[n]) stack.push_back(h);
    }
    return labels;
  }
};

struct Token {
  std::size_t flow;
  TimePoint time;
};

struct Decision {
  std::size_t gateway;
  TimePoint time;
  std::set<std::size_t> taken;
};

class TraceReplay {
 public:
  TraceReplay(const Graph& g, const Trace& t) : g_(g), trace_(t) {}

  bool run() {
    const auto start = g_.pm.node_index(g_.pm.start_node().id);
    TimePoint t0 = trace_.events.front()->start_time;
    tokens_.push_back({g_.out[start].front(), t0});
    for (std::size_t k = 0; k < trace_.events.size(); ++k)
      if (!fire_task(k)) return false;
    return finish();
  }

  const std::vector<Decision>& decisions() const { return decisions_; }

 private:
  std::size_t count_on(std::size_t f) const {
    return static_cast<std::size_t>(
        std::count_if(tokens_.begin(), tokens_.end(), [&](const Token& t) { return t.flow == f; }));
  }

  Token take(std::size_t f) {
    auto it = std::find_if(tokens_.begin(), tokens_.end(), [&](const Token& t) { return t.flow == f; });
    Token tok = *it;
    tokens_.erase(it);
    return tok;
  }

  void put(std::size_t f, TimePoint t) { tokens_.push_back({f, t}); }

  void propagate() {
    for (bool changed = true; changed;) {
      changed = false;
      for (std::size_t i = 0; i < tokens_.size() && !changed; ++i) {
        const std::size_t f = tokens_[i].flow;
        const std::size_t n = g_.dst[f];
        const auto& node = g_.pm.nodes()[n];
        if (node.kind == NodeKind::EndEvent) {
          tokens_.erase(tokens_.begin() + static_cast<std::ptrdiff_t>(i));
          changed = true;
        } else if (node.kind != NodeKind::Gateway) {
          continue;
        } else if (node.is_split() && node.gate_type == GateType::And) {
          auto tok = take(f);
          for (auto h : g_.out[n]) put(h, tok.time);
          changed = true;
        } else if (node.is_join()) {
          changed = try_join(n);
        }
      }
    }
  }

  bool try_join(std::size_t n) {
    const auto& node = g_.pm.nodes()[n];
    const auto gt = *node.gate_type;
    std::size_t needed = 0;
    if (gt == GateType::Xor) {
      needed = 1;
    } else if (gt == GateType::And) {
      for (auto f : g_.in[n])
        if (count_on(f) == 0) return false;
    } else {
      auto it = or_pending_.find(n);
      if (it == or_pending_.end() || it->second.empty()) return false;
      needed = it->second.front();
      std::size_t have = 0;
      for (auto f : g_.in[n]) have += count_on(f);
      if (have < needed) return false;
      it->second.pop_front();
    }
    TimePoint t{};
    bool any = false;
    if (gt == GateType::And) {
      for (auto f : g_.in[n]) {
        auto tok = take(f);
        t = any ? std::max(t, tok.time) : tok.time;
        any = true;
      }
    } else {
      for (auto f : g_.in[n]) {
        while (needed > 0 && count_on(f) > 0) {
          auto tok = take(f);
          t = any ? std::max(t, tok.time) : tok.time;
          any = true;
          --needed;
        }
      }
    }
    put(g_.out[n].front(), t);
    return true;
  }

  bool is_choice(std::size_t n) const {
    const auto& node = g_.pm.nodes()[n];
    return node.is_split() && node.gate_type != GateType::And;
  }

  std::vector<std::size_t> token_flows_sorted() const {
    std::vector<std::size_t> fs;
    for (const auto& t : tokens_) fs.push_back(t.flow);
    std::sort(fs.begin(), fs.end(), [&](std::size_t a, std::size_t b) {
      return g_.pm.flows()[a].id < g_.pm.flows()[b].id;
    });
    fs.erase(std::unique(fs.begin(), fs.end()), fs.end());
    return fs;
  }

  bool fire_task(std::size_t k) {
    const Event& e = *trace_.events[k];
    auto it = g_.task_in.find(e.activity);
    if (it == g_.task_in.end()) return false;
    const std::size_t target = it->second;
    const std::size_t limit = 4 * (g_.N + trace_.events.size()) + 16;
    for (std::size_t step = 0; step < limit; ++step) {
      propagate();
      if (count_on(target) > 0) {
        take(target);
        put(g_.out[g_.dst[target]].front(), e.end_time);
        return true;
      }
      bool fired = false;
      for (auto f : token_flows_sorted()) {
        const auto s = g_.dst[f];
        if (!is_choice(s)) continue;
        const auto& outs = g_.out[s];
        if (std::none_of(outs.begin(), outs.end(), [&](std::size_t h) { return g_.silent[h][target]; }))
          continue;
        auto tok = take(f);
        if (*g_.pm.nodes()[s].gate_type == GateType::Xor) {
          for (auto h : outs) {
            if (!g_.silent[h][target]) continue;
            put(h, tok.time);
            decisions_.push_back({s, tok.time, {h}});
            break;
          }
        } else if (!fire_or(s, tok, k)) {
          return false;
        }
        fired = true;
        break;
      }
      if (!fired) return false;
    }
    return false;
  }

  bool fire_or(std::size_t s, const Token& tok, std::size_t k) {
    const auto& branches = g_.branch_tasks.at(s);
    const auto& downstream = g_.after_join.at(s);
    std::set<std::string> branch_union;
    for (const auto& b : branches) branch_union.insert(b.begin(), b.end());
    std::set<std::string> seen;
    for (std::size_t j = k; j < trace_.events.size(); ++j) {
      const auto& a = trace_.events[j]->activity;
      if (downstream.count(a) && !branch_union.count(a)) break;
      seen.insert(a);
    }
    const auto& outs = g_.out[s];
    std::set<std::size_t> chosen;
    for (std::size_t i = 0; i < outs.size(); ++i)
      for (const auto& a : branches[i])
        if (seen.count(a)) {
          chosen.insert(outs[i]);
          break;
        }
    if (chosen.empty()) {
      for (std::size_t i = 0; i < outs.size(); ++i)
        if (branches[i].empty()) {
          chosen.insert(outs[i]);
          break;
        }
    }
    if (chosen.empty()) return false;
    for (auto h : chosen) put(h, tok.time);
    or_pending_[g_.or_join.at(s)].push_back(chosen.size());
    decisions_.push_back({s, tok.time, chosen});
    return true;
  }

  bool finish() {
    const std::size_t limit = 4 * g_.N + 16;
    for (std::size_t step = 0; step < limit; ++step) {
      propagate();
      if (tokens_.empty()) return true;
      bool fired = false;
      for (auto f : token_flows_sorted()) {
        const auto s = g_.dst[f];
        if (!is_choice(s)) continue;
        const auto& outs = g_.out[s];
        if (*g_.pm.nodes()[s].gate_type == GateType::Xor) {
          auto h = std::find_if(outs.begin(), outs.end(), [&](std::size_t x) { return g_.silent_end[x]; });
          if (h == outs.end()) continue;
          auto tok = take(f);
          put(*h, tok.time);
          decisions_.push_back({s, tok.time, {*h}});
        } else {
          const auto& branches = g_.branch_tasks.at(s);
          std::size_t pick = kNone;
          for (std::size_t i = 0; i < outs.size(); ++i)
            if (branches[i].empty()) {
              pick = outs[i];
              break;
            }
          if (pick == kNone) continue;
          auto tok = take(f);
          put(pick, tok.time);
          or_pending_[g_.or_join.at(s)].push_back(1);
          decisions_.push_back({s, tok.time, {pick}});
        }
        fired = true;
        break;
      }
      if (!fired) return false;
    }
    return false;
  }

  const Graph& g_;
  const Trace& trace_;
  std::vector<Token> tokens_;
  std::map<std::size_t, std::deque<std::size_t>> or_pending_;
  std::vector<Decision> decisions_;
};

/// Attribute values as of a point in time, read from the log.
class StateReader {
 public:
  StateReader(const EventLog& log, const std::vector<AttributeDecl>& attrs) : attrs_(attrs) {
    std::set<std::string> globals;
    for (const auto& a : attrs)
      if (a.scope == Scope::Global) globals.insert(a.name);
    if (globals.empty()) return;
    for (const auto& h : order_half_events(log, Hypothesis::Global)) {
      if (!h.attributes) continue;
      for (const auto& [name, v] : *h.attributes)
        if (globals.count(name)) timeline_[name].emplace_back(h.timestamp, v);
    }
  }

  AttributeMap at(const Trace& t, TimePoint when) const {
    AttributeMap out;
    for (const auto& a : attrs_) {
      Value v = default_value(a.kind);
      if (a.scope == Scope::Global) {
        auto it = timeline_.find(a.name);
        if (it != timeline_.end()) {
          const auto& tl = it->second;
          auto pos = std::upper_bound(tl.begin(), tl.end(), when,
                                      [](TimePoint w, const auto& p) { return w < p.first; });
          if (pos != tl.begin()) v = std::prev(pos)->second;
        }
      } else if (a.scope == Scope::Case) {
        for (const Event* e : t.events) {
          auto it = e->attributes.find(a.name);
          if (it != e->attributes.end()) {
            v = it->second;
            break;
          }
        }
      } else {
        std::optional<TimePoint> best;
        for (const Event* e : t.events) {
          if (e->end_time > when) continue;
          auto it = e->attributes.find(a.name);
          if (it == e->attributes.end()) continue;
          if (!best || e->end_time >= *best) {
            best = e->end_time;
            v = it->second;
          }
        }
      }
      out.emplace(a.name, std::move(v));
    }
    return out;
  }

 private:
  const std::vector<AttributeDecl>& attrs_;
  std::map<std::string, std::vector<std::pair<TimePoint, Value>>> timeline_;
};

}  // namespace

ReplayResult replay(const EventLog& log, const ProcessModel& model,
                    const std::vector<AttributeDecl>& attributes, double max_skipped_share) {
  ReplayResult result;
  Graph g(model);
  StateReader reader(log, attributes);
  const auto ts = traces(log);
  result.stats.traces = ts.size();
  for (const auto& t : ts) {
    if (t.events.empty()) continue;
    TraceReplay r(g, t);
    if (!r.run()) {
      ++result.stats.skipped;
      if (result.stats.skipped_cases.size() < 20) result.stats.skipped_cases.push_back(t.case_id);
      continue;
    }
    ++result.stats.replayed;
    for (const auto& d : r.decisions()) {
      GatewayObservation obs;
      obs.gateway = model.nodes()[d.gateway].id;
      obs.case_id = t.case_id;
      obs.time = d.time;
      obs.features = reader.at(t, d.time);
      for (auto f : d.taken) obs.taken.insert(model.flows()[f].id);
      result.observations.push_back(std::move(obs));
    }
  }
  if (result.stats.traces > 0 &&
      static_cast<double>(result.stats.skipped) >
          max_skipped_share * static_cast<double>(result.stats.traces)) {
    throw ReplayError(std::to_string(result.stats.skipped) + " of " +
                      std::to_string(result.stats.traces) +
                      " traces could not be replayed on the process model");
  }
  return result;
}

FeatureTable feature_table(const std::vector<const GatewayObservation*>& obs,
                           const std::vector<AttributeDecl>& attributes) {
  FeatureTable table;
  for (const auto& a : attributes) table.features.push_back({a.name, a.kind});
  for (const auto* o : obs) {
    std::vector<Value> row;
    for (const auto& a : attributes) {
      auto it = o->features.find(a.name);
      row.push_back(it == o->features.end() ? default_value(a.kind) : it->second);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

ClassificationTree fit_flow_tree(const std::vector<const GatewayObservation*>& obs,
                                 const std::string& flow,
                                 const std::vector<AttributeDecl>& attributes,
                                 const TreeParams& params) {
  auto table = feature_table(obs, attributes);
  std::vector<bool> labels;
  for (const auto* o : obs) labels.push_back(o->taken.count(flow) > 0);
  return fit_classification_tree(table, labels, params);
}

PolicyDiscovery discover_policies(const std::vector<GatewayObservation>& observations,
                                  const ProcessModel& model,
                                  const std::vector<AttributeDecl>& attributes,
                                  const PolicyOptions& opts) {
  PolicyDiscovery out;
  for (const auto* gw : model.split_gateways()) {
    if (gw->gate_type == GateType::And) continue;
    const bool is_xor = gw->gate_type == GateType::Xor;
    std::vector<const GatewayObservation*> obs;
    for (const auto& o : observations)
      if (o.gateway == gw->id) obs.push_back(&o);
    const auto flows = model.outgoing(gw->id);
    GatewayPolicy pol;
    if (obs.empty()) {
      out.warnings.push_back("gateway '" + gw->id +
                             "' was never observed; using uniform probabilities");
      for (auto* f : flows)
        pol.flows.push_back({f->id, Condition::always(), 1.0 / static_cast<double>(flows.size())});
      out.policies.emplace(gw->id, std::move(pol));
      continue;
    }
    const auto table = feature_table(obs, attributes);
    const double n = static_cast<double>(obs.size());
    for (auto* f : flows) {
      std::vector<bool> labels;
      std::size_t pos = 0;
      for (const auto* o : obs) {
        bool l = o->taken.count(f->id) > 0;
        labels.push_back(l);
        pos += l;
      }
      FlowPolicy fp;
      fp.flow = f->id;
      fp.probability = static_cast<double>(pos) / n;
      const bool mixed = pos > 0 && pos < obs.size();
      if (!opts.no_data && mixed && obs.size() >= opts.min_samples) {
        const double majority =
            std::max(static_cast<double>(pos), n - static_cast<double>(pos)) / n;
        const double acc = cross_validated_accuracy(table, labels, opts.tree, opts.folds);
        if (acc > majority + opts.accuracy_margin) {
          auto tree = fit_classification_tree(table, labels, opts.tree);
          fp.condition = extract_condition(tree, opts.purity_min);
        }
      }
      if (!is_xor && !fp.condition.is_true()) {
        std::size_t hold = 0, hold_pos = 0;
        for (std::size_t i = 0; i < obs.size(); ++i) {
          if (!evaluate(fp.condition, obs[i]->features)) continue;
          ++hold;
          hold_pos += labels[i];
        }
        if (hold > 0) fp.probability = static_cast<double>(hold_pos) / static_cast<double>(hold);
      }
      pol.flows.push_back(std::move(fp));
    }
    if (is_xor) {
      double total = 0;
      for (const auto& fp : pol.flows) total += fp.probability;
      if (total > 0) {
        for (auto& fp : pol.flows) fp.probability /= total;
      } else {
        for (auto& fp : pol.flows) fp.probability = 1.0 / static_cast<double>(pol.flows.size());
      }
      double rest = 0;
      for (std::size_t i = 0; i + 1 < pol.flows.size(); ++i) rest += pol.flows[i].probability;
      pol.flows.back().probability = std::max(0.0, 1.0 - rest);
    }
    out.policies.emplace(gw->id, std::move(pol));
  }
  return out;
}

}  // namespace dasim
