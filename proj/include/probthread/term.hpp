#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "probthread/thread.hpp"

namespace probthread {

// Concrete syntax for threads:
//
//   S   D   post(a, t1, t2)   prefix(a, t)   fork(tf, t1, t2)
//   prob(p1: t1, ..., pk: tk)   rec X { X = t; Y = u; } in t   X
//
// Actions are `f.m` or `tau`; a bare identifier gets the focus `main`.
// Probabilities use the meadow rational format. `//` starts a line comment.

struct Term;
using TermPtr = std::shared_ptr<const Term>;

namespace term {

struct Stop {};
struct DeadEnd {};
struct Post {
  Action action;
  TermPtr on_true, on_false;
};
struct Fork {
  TermPtr forked, on_true, on_false;
};
struct Prob {
  std::vector<std::pair<Probability, TermPtr>> branches;
};
struct Var {
  std::string name;
};
struct Rec {
  std::vector<std::pair<std::string, TermPtr>> equations;
  TermPtr body;
};

}  // namespace term

struct Term {
  std::variant<term::Stop, term::DeadEnd, term::Post, term::Fork, term::Prob, term::Var, term::Rec> node;
};

/// Throws ParseError (with byte offset) or MalformedProbability.
TermPtr parse_term(std::string_view text);

/// Compiles a closed term; recursion knots become cycles (RDP). Throws
/// UnguardedRecursion, WeightSumNotOne, or Error for free variables.
ThreadGraph build(const Term& term);

/// parse_term followed by build.
ThreadGraph parse_thread(std::string_view text);

/// Prints a graph as a closed term. Acyclic graphs print as nested terms;
/// otherwise every Post/Fork node becomes a recursion variable. The output is
/// a deterministic function of the graph, so printing normal forms is
/// round-trip stable.
std::string format_thread(const ThreadGraph& graph);

}  // namespace probthread
