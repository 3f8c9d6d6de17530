#pragma once

#include <random>
#include <string>
#include <vector>

#include "probthread/interleaving.hpp"
#include "probthread/meadow.hpp"
#include "probthread/service.hpp"
#include "probthread/thread.hpp"

namespace probthread::testing {

using Rng = std::mt19937_64;

inline std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

MeadowValue random_rational(Rng& rng, long max_abs = 40, long max_den = 32);
Probability random_probability(Rng& rng, long max_den = 32);

struct ThreadShape {
  std::vector<Action> actions{Action::parse("a"), Action::parse("b"), Action::tau()};
  bool forks = false;
  bool probabilities = true;
  /// Fork nodes per generated thread, negative for no limit.
  int max_forks = -1;
};

/// Finite thread of nesting depth <= depth.
ThreadGraph random_closed(Rng& rng, int depth, const ThreadShape& shape = {});
/// Guarded cyclic thread over `states` Post nodes.
ThreadGraph random_regular(Rng& rng, std::size_t states, const ThreadShape& shape = {});

/// Actions understood by the services of random_family, plus some that are not.
ThreadShape service_shape();

Service random_service(Rng& rng);
/// Random subset of the foci r, s, random, x.
ServiceFamily random_family(Rng& rng);

// Graph combinators built from whole graphs.
ThreadGraph g_stop();
ThreadGraph g_dead();
ThreadGraph g_post(const Action& a, const ThreadGraph& x, const ThreadGraph& y);
ThreadGraph g_prefix(const Action& a, const ThreadGraph& x);
ThreadGraph g_fork(const ThreadGraph& z, const ThreadGraph& x, const ThreadGraph& y);
ThreadGraph g_prob(const Probability& p, const ThreadGraph& x, const ThreadGraph& y);
ThreadGraph g_nary(const std::vector<Probability>& weights, const std::vector<ThreadGraph>& xs);

bool same_nf(const ThreadGraph& a, const ThreadGraph& b);

}  // namespace probthread::testing
