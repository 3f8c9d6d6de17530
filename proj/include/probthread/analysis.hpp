#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "probthread/meadow.hpp"
#include "probthread/thread.hpp"

namespace probthread {

/// Stateless reply oracle: the probability that an action gets reply True.
/// tau always replies True.
class Environment {
 public:
  Environment() = default;

  void set(const Action& action, Probability p);
  /// Throws MissingReply for an unlisted non-tau action.
  Probability reply(const Action& action) const;
  bool empty() const { return replies_.empty(); }

  /// Lines `f.m = p`; `#` starts a comment. Throws ParseError.
  static Environment parse(std::string_view text);

 private:
  std::map<Action, Probability> replies_;
};

enum class Outcome { kTerminate, kDeadlock, kSurviving };

std::string to_string(Outcome outcome);

struct TraceStep {
  Action action;
  bool reply = true;
  friend auto operator<=>(const TraceStep&, const TraceStep&) = default;
  friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

using Trace = std::vector<TraceStep>;

/// `a=T b=F ... -> outcome`; an empty trace prints as `-> outcome`.
std::string format_trace(const Trace& trace, Outcome outcome);

struct OutcomeDistribution {
  Probability terminate;
  Probability deadlock;
  Probability surviving;
  /// Keyed by format_trace; present only when requested.
  std::optional<std::map<std::string, Probability>> traces;
};

/// Exact probabilities of reaching S, D, or neither within `depth` steps.
/// Post and Fork nodes each take a step, Prob nodes none; a Fork continues
/// with its True branch. Throws MissingReply.
OutcomeDistribution outcome_distribution(const ThreadGraph& g, const Environment& env, std::size_t depth,
                                         bool with_traces = false);

/// `terminate: p` etc. in fixed order, then one line per trace.
std::string format_report(const OutcomeDistribution& d);

struct SampleResult {
  Outcome outcome = Outcome::kSurviving;
  Trace trace;
};

/// One execution driven by std::mt19937_64 seeded with `seed`. Each random
/// choice draws one 64-bit word u and takes the first branch whose cumulative
/// weight w satisfies u < w * 2^64, compared exactly.
SampleResult sample_run(const ThreadGraph& g, const Environment& env, std::size_t depth, std::uint64_t seed);

struct SampleSummary {
  std::size_t runs = 0;
  std::size_t terminate = 0;
  std::size_t deadlock = 0;
  std::size_t surviving = 0;
};

/// Runs seeds seed, seed + 1, ..., seed + runs - 1.
SampleSummary sample_runs(const ThreadGraph& g, const Environment& env, std::size_t depth, std::uint64_t seed,
                          std::size_t runs);

/// `runs: r` then the outcome frequencies as exact rationals.
std::string format_summary(const SampleSummary& s);

}  // namespace probthread
