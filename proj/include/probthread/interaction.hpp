#pragma once

#include <cstddef>

#include "probthread/service.hpp"
#include "probthread/thread.hpp"

namespace probthread {

inline constexpr std::size_t kDefaultProductBound = 100000;

/// g used with u: basic actions whose focus names a service in `family` are
/// processed by that service. A processed action becomes tau followed by a
/// probabilistic choice between the two continuations; an unprocessable one
/// becomes tau followed by D; actions on unnamed foci are left alone.
///
/// Built as a product over (node, family state) pairs. Throws
/// NonRegularProduct once more than `bound` pairs are reachable.
ThreadGraph use(const ThreadGraph& g, const ServiceFamily& family, std::size_t bound = kDefaultProductBound);

/// Conceals tau. Every node is replaced by the exact distribution over the
/// first non-tau deterministic nodes reached through tau and probabilistic
/// steps; the mass that never leaves a tau/probabilistic cycle becomes D.
/// Absorption probabilities are solved exactly per strongly connected
/// component.
ThreadGraph abstract_tau(const ThreadGraph& g);

}  // namespace probthread
