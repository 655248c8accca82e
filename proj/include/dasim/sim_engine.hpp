#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dasim/das_model.hpp"
#include "dasim/event_log.hpp"

namespace dasim {

struct SimConfig {
  std::size_t n_cases = 1;
  std::uint64_t seed = 0;
  /// No case arrives after this instant.
  std::optional<TimePoint> horizon;
  TimePoint start_time{};
  /// Emit only the attributes written at each completion instead of every attribute.
  bool sparse_output = false;
  std::string case_prefix = "case_";
};

struct SimStats {
  std::size_t cases = 0;
  std::size_t events = 0;
  /// Rule applications that produced a non-finite value and were discarded.
  std::size_t skipped_rules = 0;
  std::size_t deadlocks = 0;
  std::size_t unknown_markov_states = 0;
};

struct SimResult {
  EventLog log;
  SimStats stats;
};

/// Runs the model. Deterministic for equal inputs. Throws DeadlockError when the event
/// queue drains while a case still holds tokens.
SimResult simulate(const DASModel& model, const SimConfig& cfg);

/// Two-stage choice at a split. `outgoing` lists the split's flows in id order.
/// XOR returns exactly one flow, OR a non-empty set, AND every flow.
std::vector<std::string> evaluate_gateway(const GatewayPolicy& policy, GateType type,
                                          const std::vector<std::string>& outgoing,
                                          const std::string& default_flow,
                                          const AttributeLookup& lookup, std::mt19937_64& rng);

/// Resource units of one pool. Work waits in FIFO order; each request goes to the
/// idle unit that has been free the longest.
class PoolScheduler {
 public:
  explicit PoolScheduler(const ResourcePool& pool);

  struct Request {
    TimePoint enqueued;
    std::size_t arrival_index;  // tiebreak: case arrival order
    std::uint64_t seq;
    std::size_t payload;        // opaque caller handle
    friend auto operator<=>(const Request&, const Request&) = default;
  };
  struct Assignment {
    std::size_t payload;
    std::size_t unit;
    TimePoint start;  // next open instant of the pool calendar
  };

  void enqueue(const Request& r);
  /// Assigns waiting requests to idle units at time `now`.
  std::vector<Assignment> dispatch(TimePoint now);
  void release(std::size_t unit, TimePoint at);

  const ResourcePool& pool() const { return pool_; }
  std::string unit_name(std::size_t unit) const;
  std::size_t waiting() const { return queue_.size(); }

 private:
  ResourcePool pool_;
  std::vector<bool> busy_;
  std::vector<TimePoint> free_since_;
  std::set<Request> queue_;
};

}  // namespace dasim
