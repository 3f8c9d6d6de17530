#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "probthread/meadow.hpp"

namespace probthread {

namespace detail {
struct GraphAccess;
}

/// A basic action `focus.method`, or the internal action tau (empty focus).
class Action {
 public:
  Action() = default;  // tau
  Action(std::string focus, std::string method);

  static Action tau() { return Action(); }
  /// Parses `tau`, `f.m`, or a bare identifier (focus `main`).
  static Action parse(std::string_view text);

  bool is_tau() const { return focus_.empty(); }
  const std::string& focus() const { return focus_; }
  const std::string& method() const { return method_; }

  std::string to_string() const;

  friend bool operator==(const Action&, const Action&) = default;
  friend auto operator<=>(const Action&, const Action&) = default;

 private:
  std::string focus_;
  std::string method_;
};

using NodeId = std::uint32_t;

struct Stop {
  friend bool operator==(const Stop&, const Stop&) = default;
};

struct DeadEnd {
  friend bool operator==(const DeadEnd&, const DeadEnd&) = default;
};

/// x <| a |> y: perform `action`, continue with on_true on reply True.
struct Post {
  Action action;
  NodeId on_true = 0;
  NodeId on_false = 0;
  friend bool operator==(const Post&, const Post&) = default;
};

/// x <| nt(z) |> y: fork off `forked`, continue with on_true (or on_false).
struct Fork {
  NodeId forked = 0;
  NodeId on_true = 0;
  NodeId on_false = 0;
  friend bool operator==(const Fork&, const Fork&) = default;
};

struct Branch {
  Probability weight;
  NodeId target = 0;
  friend bool operator==(const Branch&, const Branch&) = default;
};

/// Generative probabilistic choice; weights in (0,1] summing to 1.
struct Prob {
  std::vector<Branch> branches;
  friend bool operator==(const Prob&, const Prob&) = default;
};

using Node = std::variant<Stop, DeadEnd, Post, Fork, Prob>;

bool is_deterministic(const Node& node);

/// A finite, guarded representation of a regular probabilistic thread. Every
/// node is reachable from the root and every cycle passes through a Post node.
/// Instances are immutable; build them with GraphBuilder.
class ThreadGraph {
 public:
  /// The thread S.
  ThreadGraph();

  NodeId root() const { return root_; }
  std::size_t size() const { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const { return nodes_; }

  static ThreadGraph stop();
  static ThreadGraph dead_end();

  friend bool operator==(const ThreadGraph&, const ThreadGraph&) = default;

 private:
  friend class GraphBuilder;
  friend struct detail::GraphAccess;
  ThreadGraph(std::vector<Node> nodes, NodeId root) : nodes_(std::move(nodes)), root_(root) {}

  std::vector<Node> nodes_;
  NodeId root_ = 0;
};

/// Mutable arena used to assemble ThreadGraphs. Slots may be reserved and
/// defined later, which is how recursion knots and product constructions are
/// tied. finish() resolves aliases, drops unreachable nodes, and validates.
class GraphBuilder {
 public:
  NodeId stop();
  NodeId dead_end();
  NodeId post(Action action, NodeId on_true, NodeId on_false);
  NodeId prefix(Action action, NodeId next) { return post(std::move(action), next, next); }
  NodeId fork(NodeId forked, NodeId on_true, NodeId on_false);
  /// Zero-weight branches are dropped; a single remaining branch is returned
  /// as-is. Throws WeightSumNotOne unless the weights sum to exactly 1.
  NodeId prob(std::vector<Branch> branches);
  /// x (+)_p y
  NodeId binary_prob(const Probability& p, NodeId x, NodeId y);

  NodeId reserve();
  /// Defines a reserved slot. A Prob node that collapses to a single branch
  /// turns the slot into an alias of that branch's target.
  void define(NodeId slot, Node node);
  /// Makes a reserved slot stand for another node.
  void alias(NodeId slot, NodeId target);

  /// Copies `graph` into the arena and returns the id of its root.
  NodeId import(const ThreadGraph& graph);

  std::size_t size() const { return nodes_.size(); }

  /// Throws UnguardedRecursion for alias cycles, undefined slots reachable
  /// from the root, or cycles that avoid every Post node.
  ThreadGraph finish(NodeId root) const;

 private:
  NodeId add(Node node);

  std::vector<Node> nodes_;
  std::vector<std::optional<NodeId>> alias_;
  std::vector<bool> pending_;
};

/// Right-nested n-ary probabilistic composition t_k (+)_{p_k} (... / (1 - p_k)).
/// Throws WeightSumNotOne unless the weights sum to 1.
NodeId nary_prob(GraphBuilder& builder, std::span<const Probability> weights,
                 std::span<const NodeId> targets);

/// Canonical form modulo T1 and prA1-prA4 and bisimulation: a single Prob layer
/// over deterministic heads, minimal, with a canonical node numbering. Two
/// graphs denote the same thread iff their normal forms are equal.
ThreadGraph normalize(const ThreadGraph& graph);

/// n-th projection: Post consumes one unit of depth; Prob and Fork do not.
ThreadGraph project(std::size_t depth, const ThreadGraph& graph);

bool equal_up_to(std::size_t depth, const ThreadGraph& a, const ThreadGraph& b);

/// Equality of regular threads, decided by partition refinement on the union
/// graph.
bool bisimilar(const ThreadGraph& a, const ThreadGraph& b);

bool contains_fork(const ThreadGraph& graph);
bool contains_prob(const ThreadGraph& graph);
bool contains_tau(const ThreadGraph& graph);

/// Number of deterministic states; an upper bound on the depth needed to
/// distinguish two non-bisimilar states.
std::size_t deterministic_count(const ThreadGraph& graph);

}  // namespace probthread
