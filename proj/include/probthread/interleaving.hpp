#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "probthread/interaction.hpp"
#include "probthread/thread.hpp"

namespace probthread {

/// <i, n>: the i-th thread got a turn and afterwards n threads remained.
struct HistoryStep {
  std::uint32_t turn = 1;
  std::uint32_t threads_after = 1;
  friend auto operator<=>(const HistoryStep&, const HistoryStep&) = default;
  friend bool operator==(const HistoryStep&, const HistoryStep&) = default;
};

using History = std::vector<HistoryStep>;

/// Scheduler-owned data; opaque to the interleaving engine apart from
/// equality, which keys the product construction.
struct ControlState {
  std::vector<std::int64_t> data;
  std::string to_string() const;
  friend auto operator<=>(const ControlState&, const ControlState&) = default;
  friend bool operator==(const ControlState&, const ControlState&) = default;
};

struct BasicStep {
  Action action;
};
struct ForkStep {};
struct TerminationStep {};
struct InactionStep {};

/// What the scheduled thread did: a basic action (tau included), nt, S or D.
using StepKind = std::variant<BasicStep, ForkStep, TerminationStep, InactionStep>;

/// A probabilistic interleaving strategy.
///
/// `schedule(n, h, s)` is the distribution over which of n threads gets the
/// next turn; `update(n, h, s, i, step)` the control state after thread i
/// (1-based) did `step`. Both must be pure.
///
/// Histories are unbounded, so the engine only ever passes `digest(h)` to
/// these functions and keys recursion on it. `digest` must keep whatever part
/// of the history the strategy depends on and satisfy
/// digest(h ++ p) == digest(digest(h) ++ p).
struct SchedulerSpec {
  std::string name;
  ControlState initial_state;
  std::function<std::vector<Probability>(std::size_t n, const History& h, const ControlState& s)> schedule;
  std::function<ControlState(std::size_t n, const History& h, const ControlState& s, std::size_t i,
                             const StepKind& step)>
      update;
  std::function<History(const History&)> digest;
};

/// Round robin: the first turn goes to thread 1, then to (j + 1) mod n after
/// thread j, where a result of 0 denotes thread n.
SchedulerSpec cyclic_scheduler();
/// First turn to thread 1, then 1/n each.
SchedulerSpec uniform_scheduler();

struct LotteryConfig {
  std::int64_t default_tickets = 1;
  /// Tickets of the initial threads; missing entries get default_tickets.
  std::vector<std::int64_t> initial_tickets;
};

/// Turn probability proportional to tickets. A forked thread receives
/// default_tickets; a thread that terminates or becomes inactive gives its
/// slot up.
SchedulerSpec lottery_scheduler(const LotteryConfig& config);

/// `cyclic`, `uniform`, or `lottery:defaultTickets=N[,initial=a:b:...]`.
SchedulerSpec builtin_scheduler(std::string_view spec);

/// Declarative strategy over the last history pair. One rule per line:
///
///   n=<count|*> last=<turn|-|*> : <w1> ... <wn> | uniform | first
///
/// `-` matches the empty history; the first matching rule wins; `#` starts a
/// comment. Throws ParseError on malformed input.
SchedulerSpec table_scheduler(std::string_view text);

/// n-ary strategic interleaving after history h in state s: the n-ary
/// probabilistic composition of the positional operators, weighted by the
/// scheduler's distribution (zero weights dropped). Forks are resolved, so
/// the result contains no Fork nodes. Throws WeightSumNotOne for a bad
/// schedule and NonRegularProduct once more than `bound` product states are
/// reachable.
ThreadGraph interleave(const SchedulerSpec& spec, const History& h, const ControlState& s,
                       std::span<const ThreadGraph> threads, std::size_t bound = kDefaultProductBound);

/// Interleaving that starts with thread `i` (1-based) taking the turn.
ThreadGraph positional_interleave(const SchedulerSpec& spec, std::size_t i, const History& h, const ControlState& s,
                                  std::span<const ThreadGraph> threads, std::size_t bound = kDefaultProductBound);

/// Turns termination into inaction everywhere, including in forked threads.
ThreadGraph deadlock_at_termination(const ThreadGraph& g);

}  // namespace probthread
