#include "dasim/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <queue>

#include "dasim/errors.hpp"

namespace dasim {

std::vector<std::string> evaluate_gateway(const GatewayPolicy& policy, GateType type,
                                          const std::vector<std::string>& outgoing,
                                          const std::string& default_flow,
                                          const AttributeLookup& lookup, std::mt19937_64& rng) {
  if (type == GateType::And) return outgoing;
  std::vector<std::string> holds;
  std::vector<double> probs;
  for (const auto& f : outgoing) {
    const FlowPolicy* fp = policy.find(f);
    bool ok = fp ? evaluate(fp->condition, lookup) : true;
    if (!ok) continue;
    holds.push_back(f);
    probs.push_back(fp ? fp->probability : 0.0);
  }
  if (type == GateType::Xor) {
    if (holds.empty()) return {default_flow};
    if (holds.size() == 1) return holds;
    double total = 0;
    for (double p : probs) total += p;
    if (!(total > 0)) {
      std::uniform_int_distribution<std::size_t> pick(0, holds.size() - 1);
      return {holds[pick(rng)]};
    }
    return {holds[sample_index(probs, rng)]};
  }
  std::vector<std::string> chosen;
  for (std::size_t i = 0; i < holds.size(); ++i)
    if (std::bernoulli_distribution(std::clamp(probs[i], 0.0, 1.0))(rng)) chosen.push_back(holds[i]);
  if (chosen.empty()) return {default_flow};
  return chosen;
}

PoolScheduler::PoolScheduler(const ResourcePool& pool)
    : pool_(pool),
      busy_(static_cast<std::size_t>(std::max(1, pool.size)), false),
      free_since_(busy_.size(), TimePoint::min()) {}

void PoolScheduler::enqueue(const Request& r) { queue_.insert(r); }

std::vector<PoolScheduler::Assignment> PoolScheduler::dispatch(TimePoint now) {
  std::vector<Assignment> out;
  while (!queue_.empty()) {
    std::size_t best = busy_.size();
    for (std::size_t u = 0; u < busy_.size(); ++u) {
      if (busy_[u]) continue;
      if (best == busy_.size() || free_since_[u] < free_since_[best]) best = u;
    }
    if (best == busy_.size()) break;
    auto req = *queue_.begin();
    queue_.erase(queue_.begin());
    busy_[best] = true;
    out.push_back({req.payload, best, pool_.calendar.next_open(now)});
  }
  return out;
}

void PoolScheduler::release(std::size_t unit, TimePoint at) {
  busy_[unit] = false;
  free_since_[unit] = at;
}

std::string PoolScheduler::unit_name(std::size_t unit) const {
  return pool_.name + "_" + std::to_string(unit);
}

namespace {

enum class EvKind { CaseArrival, TaskStart, TaskEnd, GatewayEval, TokenMerge };

struct SimEvent {
  TimePoint time;
  std::uint64_t seq;
  EvKind kind;
  std::size_t case_idx = 0;
  std::size_t node = 0;   // task / gateway / join node index
  std::size_t flow = 0;   // arriving flow for TokenMerge
  std::size_t work = 0;   // work item for TaskStart / TaskEnd
  bool operator>(const SimEvent& o) const {
    return time != o.time ? time > o.time : seq > o.seq;
  }
};

struct WorkItem {
  std::size_t case_idx;
  std::size_t task;  // node index
  std::size_t pool;
  std::size_t unit = 0;
  TimePoint start{};
  TimePoint end{};
};

struct CaseRT {
  std::string id;
  std::size_t live = 0;
  std::map<std::size_t, std::deque<std::size_t>> or_expected;   // join -> counts
  std::map<std::size_t, std::size_t> or_arrived;                // join -> tokens waiting
  std::map<std::size_t, std::map<std::size_t, std::size_t>> and_arrived;  // join -> flow -> n
  bool done = false;
};

class Engine {
 public:
  Engine(const DASModel& m, const SimConfig& cfg)
      : m_(m), cfg_(cfg), rng_(cfg.seed), state_(m.attributes) {
    const auto& pm = m.process;
    for (std::size_t i = 0; i < pm.nodes().size(); ++i) {
      const auto& n = pm.nodes()[i];
      std::vector<std::size_t> outs;
      for (auto* f : pm.outgoing(n.id)) outs.push_back(pm.flow_index(f->id));
      out_.push_back(std::move(outs));
      std::vector<std::size_t> ins;
      for (auto* f : pm.incoming(n.id)) ins.push_back(pm.flow_index(f->id));
      in_.push_back(std::move(ins));
    }
    for (std::size_t p = 0; p < m.resources.pools.size(); ++p) {
      pools_.emplace_back(m.resources.pools[p]);
      pool_idx_[m.resources.pools[p].name] = p;
    }
    for (std::size_t i = 0; i < pm.nodes().size(); ++i) {
      const auto& n = pm.nodes()[i];
      if (n.kind != NodeKind::Task) continue;
      task_pool_[i] = pool_idx_.at(m.resources.task_pool.at(n.label));
      for (std::size_t r = 0; r < m.rules.size(); ++r)
        if (m.rules[r].anchor.kind == Anchor::Kind::TaskCompletion &&
            m.rules[r].anchor.activity == n.label)
          task_rules_[i].push_back(r);
    }
    for (std::size_t r = 0; r < m.rules.size(); ++r)
      if (m.rules[r].anchor.kind == Anchor::Kind::CaseCreation) creation_rules_.push_back(r);
    for (const auto& a : m.attributes) schema_.emplace(a.name, a.kind);
    start_node_ = pm.node_index(pm.start_node().id);
  }

  SimResult run() {
    if (cfg_.n_cases == 0) throw ArgumentError("n_cases must be at least 1");
    for (const auto& a : m_.attributes)
      if (a.scope == Scope::Global)
        write({}, a.name, apply_rule(a.initializer, default_value(a.kind), rng_, &counters_));
    next_arrival_ = m_.arrivals.calendar.next_open(cfg_.start_time);
    schedule_arrival(next_arrival_);
    while (!queue_.empty()) {
      SimEvent ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      switch (ev.kind) {
        case EvKind::CaseArrival: on_arrival(); break;
        case EvKind::TaskStart: on_task_start(ev.work); break;
        case EvKind::TaskEnd: on_task_end(ev.work); break;
        case EvKind::GatewayEval: on_gateway(ev.case_idx, ev.node); break;
        case EvKind::TokenMerge: on_merge(ev.case_idx, ev.node, ev.flow); break;
      }
    }
    for (const auto& c : cases_) {
      if (c.done) continue;
      ++stats_.deadlocks;
      throw DeadlockError(c.id, stuck_node(c));
    }
    stats_.cases = cases_.size();
    stats_.events = events_.size();
    stats_.unknown_markov_states = counters_.unknown_markov_state;
    return {EventLog(std::move(events_), schema_), stats_};
  }

 private:
  void push(SimEvent ev) {
    ev.seq = seq_++;
    queue_.push(ev);
  }

  void schedule_arrival(TimePoint t) {
    if (cases_.size() + pending_arrivals_ >= cfg_.n_cases) return;
    if (cfg_.horizon && t > *cfg_.horizon) return;
    ++pending_arrivals_;
    push({t, 0, EvKind::CaseArrival});
  }

  std::string stuck_node(const CaseRT& c) const {
    const auto& pm = m_.process;
    for (const auto& [join, n] : c.or_arrived)
      if (n > 0) return pm.nodes()[join].id;
    for (const auto& [join, flows] : c.and_arrived)
      for (const auto& [f, n] : flows)
        if (n > 0) return pm.nodes()[join].id;
    return pm.nodes()[start_node_].id;
  }

  void on_arrival() {
    --pending_arrivals_;
    const std::size_t idx = cases_.size();
    CaseRT c;
    c.id = cfg_.case_prefix + std::to_string(idx + 1);
    cases_.push_back(c);
    const std::string& id = cases_.back().id;
    state_.create_case(id);
    for (const auto& a : m_.attributes) {
      if (a.scope == Scope::Global) continue;
      write(id, a.name, apply_rule(a.initializer, default_value(a.kind), rng_, &counters_));
    }
    for (auto r : creation_rules_) fire_rule(id, m_.rules[r]);
    state_.freeze_case(id);
    double gap = m_.arrivals.inter_arrival.sample(rng_);
    if (!std::isfinite(gap)) gap = 0;
    schedule_arrival(m_.arrivals.calendar.next_open(now_ + seconds_to_millis(std::max(0.0, gap))));
    emit_token(idx, out_[start_node_].front());
  }

  void write(const std::string& id, const std::string& name, Value v) {
    if (is_numeric(v) && !std::isfinite(as_number(v))) {
      ++stats_.skipped_rules;
      return;
    }
    state_.set(id, name, std::move(v));
  }

  void fire_rule(const std::string& id, const RuleAnchor& r) {
    const Value* prev = state_.get(id, r.attribute);
    Value base = prev ? *prev : default_value(m_.attribute(r.attribute)->kind);
    write(id, r.attribute, apply_rule(r.rule, base, rng_, &counters_));
    written_.push_back(r.attribute);
  }

  void emit_token(std::size_t c, std::size_t flow) {
    ++cases_[c].live;
    route(c, flow);
  }

  void route(std::size_t c, std::size_t flow) {
    const auto& pm = m_.process;
    const std::size_t target = pm.node_index(pm.flows()[flow].target);
    const auto& node = pm.nodes()[target];
    switch (node.kind) {
      case NodeKind::EndEvent:
        consume(c, 1);
        break;
      case NodeKind::Task: {
        const std::size_t w = work_.size();
        work_.push_back({c, target, task_pool_.at(target)});
        pools_[work_[w].pool].enqueue({now_, c, seq_++, w});
        dispatch(work_[w].pool);
        break;
      }
      case NodeKind::Gateway:
        if (node.is_split()) {
          push({now_, 0, EvKind::GatewayEval, c, target});
        } else {
          push({now_, 0, EvKind::TokenMerge, c, target, flow});
        }
        break;
      case NodeKind::StartEvent:
        break;
    }
  }

  void consume(std::size_t c, std::size_t n) {
    auto& rt = cases_[c];
    rt.live -= n;
    if (rt.live == 0) {
      rt.done = true;
      state_.remove_case(rt.id);
    }
  }

  void dispatch(std::size_t pool) {
    for (const auto& a : pools_[pool].dispatch(now_)) {
      auto& w = work_[a.payload];
      w.unit = a.unit;
      w.start = a.start;
      push({a.start, 0, EvKind::TaskStart, w.case_idx, w.task, 0, a.payload});
    }
  }

  void on_task_start(std::size_t wi) {
    auto& w = work_[wi];
    const auto& label = m_.process.nodes()[w.task].label;
    double secs = m_.resources.proc_time.at(label).sample(rng_);
    if (!std::isfinite(secs)) secs = 0;
    w.end = pools_[w.pool].pool().calendar.advance(w.start, seconds_to_millis(secs));
    push({w.end, 0, EvKind::TaskEnd, w.case_idx, w.task, 0, wi});
  }

  void on_task_end(std::size_t wi) {
    const WorkItem w = work_[wi];
    pools_[w.pool].release(w.unit, now_);
    const auto& rt = cases_[w.case_idx];
    const auto& label = m_.process.nodes()[w.task].label;
    written_.clear();
    if (auto it = task_rules_.find(w.task); it != task_rules_.end())
      for (auto r : it->second) fire_rule(rt.id, m_.rules[r]);

    Event e;
    e.case_id = rt.id;
    e.activity = label;
    e.resource = pools_[w.pool].unit_name(w.unit);
    e.start_time = w.start;
    e.end_time = w.end;
    if (cfg_.sparse_output) {
      for (const auto& name : written_)
        if (const Value* v = state_.get(rt.id, name)) e.attributes[name] = *v;
    } else {
      e.attributes = state_.snapshot(rt.id);
    }
    for (auto it = e.attributes.begin(); it != e.attributes.end();) {
      if (!is_numeric(it->second) && as_category(it->second) == kUnsetCategory)
        it = e.attributes.erase(it);
      else
        ++it;
    }
    events_.push_back(std::move(e));
    route(w.case_idx, out_[w.task].front());
    dispatch(w.pool);
  }

  void on_gateway(std::size_t c, std::size_t node) {
    const auto& pm = m_.process;
    const auto& n = pm.nodes()[node];
    const std::string& id = cases_[c].id;
    std::vector<std::string> outs;
    for (auto f : out_[node]) outs.push_back(pm.flows()[f].id);
    std::vector<std::string> chosen;
    if (n.gate_type == GateType::And) {
      chosen = outs;
    } else {
      auto lookup = [&](const std::string& name) { return state_.get(id, name); };
      chosen = evaluate_gateway(m_.policies.at(n.id), *n.gate_type, outs,
                                *pm.default_flow(n.id), lookup, rng_);
    }
    if (n.gate_type == GateType::Or)
      cases_[c].or_expected[pm.node_index(*pm.paired_join(n.id))].push_back(chosen.size());
    // The incoming token becomes the first outgoing one; every extra flow adds a token.
    cases_[c].live += chosen.size() - 1;
    for (const auto& f : chosen) route(c, pm.flow_index(f));
  }

  void on_merge(std::size_t c, std::size_t node, std::size_t flow) {
    auto& rt = cases_[c];
    const auto gt = *m_.process.nodes()[node].gate_type;
    const std::size_t out = out_[node].front();
    if (gt == GateType::Xor) {
      route(c, out);
      return;
    }
    if (gt == GateType::And) {
      auto& arrived = rt.and_arrived[node];
      ++arrived[flow];
      for (auto f : in_[node])
        if (arrived[f] == 0) return;
      for (auto f : in_[node]) --arrived[f];
      consume(c, in_[node].size() - 1);
      route(c, out);
      return;
    }
    auto& waiting = ++rt.or_arrived[node];
    auto& expected = rt.or_expected[node];
    if (expected.empty() || waiting < expected.front()) return;
    const std::size_t k = expected.front();
    expected.pop_front();
    waiting -= k;
    consume(c, k - 1);
    route(c, out);
  }

  const DASModel& m_;
  SimConfig cfg_;
  std::mt19937_64 rng_;
  DataState state_;
  RuleCounters counters_;
  SimStats stats_;
  Schema schema_;

  std::vector<std::vector<std::size_t>> out_, in_;
  std::vector<PoolScheduler> pools_;
  std::map<std::string, std::size_t> pool_idx_;
  std::map<std::size_t, std::size_t> task_pool_;
  std::map<std::size_t, std::vector<std::size_t>> task_rules_;
  std::vector<std::size_t> creation_rules_;
  std::size_t start_node_ = 0;

  std::priority_queue<SimEvent, std::vector<SimEvent>, std::greater<>> queue_;
  std::uint64_t seq_ = 0;
  TimePoint now_{};
  TimePoint next_arrival_{};
  std::size_t pending_arrivals_ = 0;

  std::vector<CaseRT> cases_;
  std::vector<WorkItem> work_;
  std::vector<Event> events_;
  std::vector<std::string> written_;
};

}  // namespace

SimResult simulate(const DASModel& model, const SimConfig& cfg) {
  Engine e(model, cfg);
  return e.run();
}

}  // namespace dasim
