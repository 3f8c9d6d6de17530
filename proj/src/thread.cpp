#include "probthread/thread.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

#include "probthread/error.hpp"

namespace probthread {

namespace detail {

struct GraphAccess {
  static ThreadGraph make(std::vector<Node> nodes, NodeId root) {
    return ThreadGraph(std::move(nodes), root);
  }
};

}  // namespace detail

Action::Action(std::string focus, std::string method) : focus_(std::move(focus)), method_(std::move(method)) {
  if (focus_.empty() || method_.empty()) {
    throw Error("basic action needs a focus and a method: '" + focus_ + "." + method_ + "'");
  }
}

Action Action::parse(std::string_view text) {
  if (text == "tau") return tau();
  auto dot = text.find('.');
  if (dot == std::string_view::npos) return Action("main", std::string(text));
  return Action(std::string(text.substr(0, dot)), std::string(text.substr(dot + 1)));
}

std::string Action::to_string() const { return is_tau() ? "tau" : focus_ + "." + method_; }

bool is_deterministic(const Node& node) { return !std::holds_alternative<Prob>(node); }

namespace {

template <typename F>
void for_each_child(const Node& node, F&& f) {
  if (const auto* p = std::get_if<Post>(&node)) {
    f(p->on_true);
    f(p->on_false);
  } else if (const auto* k = std::get_if<Fork>(&node)) {
    f(k->forked);
    f(k->on_true);
    f(k->on_false);
  } else if (const auto* r = std::get_if<Prob>(&node)) {
    for (const auto& b : r->branches) f(b.target);
  }
}

template <typename F>
Node remap(const Node& node, F&& f) {
  Node out = node;
  if (auto* p = std::get_if<Post>(&out)) {
    p->on_true = f(p->on_true);
    p->on_false = f(p->on_false);
  } else if (auto* k = std::get_if<Fork>(&out)) {
    k->forked = f(k->forked);
    k->on_true = f(k->on_true);
    k->on_false = f(k->on_false);
  } else if (auto* r = std::get_if<Prob>(&out)) {
    for (auto& b : r->branches) b.target = f(b.target);
  }
  return out;
}

// Drops zero weights and checks that the rest sums to exactly 1.
std::vector<Branch> clean_branches(std::vector<Branch> branches) {
  std::erase_if(branches, [](const Branch& b) { return b.weight.is_zero(); });
  MeadowValue sum;
  for (const auto& b : branches) sum += b.weight.value();
  if (sum != MeadowValue::one()) {
    throw WeightSumNotOne("probabilistic branch weights sum to " + sum.to_string() + ", expected 1");
  }
  return branches;
}

// True if some cycle of `nodes` avoids every Post node.
bool has_unguarded_cycle(const std::vector<Node>& nodes) {
  enum : std::uint8_t { kWhite, kGrey, kBlack };
  std::vector<std::uint8_t> colour(nodes.size(), kWhite);
  std::vector<std::pair<NodeId, std::size_t>> stack;
  auto children = [&](NodeId id) {
    std::vector<NodeId> out;
    if (!std::holds_alternative<Post>(nodes[id])) for_each_child(nodes[id], [&](NodeId c) { out.push_back(c); });
    return out;
  };
  for (NodeId start = 0; start < nodes.size(); ++start) {
    if (colour[start] != kWhite) continue;
    std::vector<std::vector<NodeId>> kids;
    stack.emplace_back(start, 0);
    kids.push_back(children(start));
    colour[start] = kGrey;
    while (!stack.empty()) {
      auto& [id, next] = stack.back();
      if (next < kids.back().size()) {
        NodeId c = kids.back()[next++];
        if (colour[c] == kGrey) return true;
        if (colour[c] == kWhite) {
          colour[c] = kGrey;
          stack.emplace_back(c, 0);
          kids.push_back(children(c));
        }
      } else {
        colour[id] = kBlack;
        stack.pop_back();
        kids.pop_back();
      }
    }
  }
  return false;
}

}  // namespace

ThreadGraph::ThreadGraph() : nodes_{Stop{}}, root_(0) {}

ThreadGraph ThreadGraph::stop() { return ThreadGraph(); }

ThreadGraph ThreadGraph::dead_end() { return ThreadGraph({DeadEnd{}}, 0); }

NodeId GraphBuilder::add(Node node) {
  nodes_.push_back(std::move(node));
  alias_.emplace_back();
  pending_.push_back(false);
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId GraphBuilder::stop() { return add(Stop{}); }

NodeId GraphBuilder::dead_end() { return add(DeadEnd{}); }

NodeId GraphBuilder::post(Action action, NodeId on_true, NodeId on_false) {
  return add(Post{std::move(action), on_true, on_false});
}

NodeId GraphBuilder::fork(NodeId forked, NodeId on_true, NodeId on_false) {
  return add(Fork{forked, on_true, on_false});
}

NodeId GraphBuilder::prob(std::vector<Branch> branches) {
  branches = clean_branches(std::move(branches));
  if (branches.size() == 1) return branches.front().target;
  return add(Prob{std::move(branches)});
}

NodeId GraphBuilder::binary_prob(const Probability& p, NodeId x, NodeId y) {
  return prob({{p, x}, {p.complement(), y}});
}

NodeId GraphBuilder::reserve() {
  NodeId id = add(DeadEnd{});
  pending_[id] = true;
  return id;
}

void GraphBuilder::define(NodeId slot, Node node) {
  if (auto* p = std::get_if<Prob>(&node)) {
    p->branches = clean_branches(std::move(p->branches));
    if (p->branches.size() == 1) {
      alias(slot, p->branches.front().target);
      return;
    }
  }
  nodes_.at(slot) = std::move(node);
  pending_[slot] = false;
}

void GraphBuilder::alias(NodeId slot, NodeId target) {
  alias_.at(slot) = target;
  pending_[slot] = false;
}

NodeId GraphBuilder::import(const ThreadGraph& graph) {
  auto offset = static_cast<NodeId>(nodes_.size());
  for (const auto& n : graph.nodes()) add(remap(n, [offset](NodeId id) { return id + offset; }));
  return graph.root() + offset;
}

ThreadGraph GraphBuilder::finish(NodeId root) const {
  auto resolve = [this](NodeId id) {
    std::size_t steps = 0;
    while (alias_.at(id)) {
      id = *alias_[id];
      if (++steps > nodes_.size()) throw UnguardedRecursion("recursion variable defined only in terms of itself");
    }
    if (pending_[id]) throw UnguardedRecursion("recursion variable without a definition");
    return id;
  };

  std::unordered_map<NodeId, NodeId> renumber;
  std::vector<NodeId> order;
  NodeId start = resolve(root);
  renumber.emplace(start, 0);
  order.push_back(start);
  for (std::size_t i = 0; i < order.size(); ++i) {
    for_each_child(nodes_[order[i]], [&](NodeId c) {
      NodeId r = resolve(c);
      if (renumber.emplace(r, static_cast<NodeId>(order.size())).second) order.push_back(r);
    });
  }

  std::vector<Node> out;
  out.reserve(order.size());
  for (NodeId old : order) {
    out.push_back(remap(nodes_[old], [&](NodeId c) { return renumber.at(resolve(c)); }));
  }
  if (has_unguarded_cycle(out)) throw UnguardedRecursion("cycle that performs no action");
  return detail::GraphAccess::make(std::move(out), 0);
}

NodeId nary_prob(GraphBuilder& builder, std::span<const Probability> weights, std::span<const NodeId> targets) {
  if (weights.empty() || weights.size() != targets.size()) {
    throw WeightSumNotOne("n-ary probabilistic composition needs equally many (>= 1) weights and targets");
  }
  MeadowValue sum;
  for (const auto& w : weights) sum += w.value();
  if (sum != MeadowValue::one()) throw WeightSumNotOne("weights sum to " + sum.to_string() + ", expected 1");

  // level k carries the weights pi_i / (1 - pi_k) of the inner composition
  std::vector<MeadowValue> scaled;
  for (const auto& w : weights) scaled.push_back(w.value());
  std::vector<Probability> head(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    head[k] = Probability(scaled[k]);
    MeadowValue rest = (MeadowValue::one() - scaled[k]).inverse();
    for (std::size_t i = k + 1; i < weights.size(); ++i) scaled[i] = scaled[i] * rest;
  }
  NodeId acc = targets.back();
  for (std::size_t k = weights.size() - 1; k-- > 0;) acc = builder.binary_prob(head[k], targets[k], acc);
  return acc;
}

namespace {

using Dist = std::vector<std::pair<NodeId, MeadowValue>>;

void merge_into(std::map<NodeId, MeadowValue>& acc, const Dist& dist, const MeadowValue& scale) {
  for (const auto& [id, w] : dist) acc[id] += w * scale;
}

// Partition refinement over the deterministic nodes reachable from `roots`.
// Class numbers are a canonical function of the bisimulation class, so two
// graphs with bisimilar roots produce identical numberings.
class Refinement {
 public:
  Refinement(const std::vector<Node>& nodes, std::span<const NodeId> roots) : nodes_(nodes) {
    heads_.resize(nodes.size());
    computed_.assign(nodes.size(), false);
    index_.assign(nodes.size(), kNone);
    for (NodeId r : roots) discover(head(r));
    for (std::size_t i = 0; i < dets_.size(); ++i) {
      const Node& n = nodes_[dets_[i]];
      std::vector<NodeId> succ;
      if (const auto* p = std::get_if<Post>(&n)) {
        succ = {p->on_true, p->action.is_tau() ? p->on_true : p->on_false};
      } else if (const auto* k = std::get_if<Fork>(&n)) {
        succ = {k->forked, k->on_true, k->on_false};
      }
      for (NodeId s : succ) discover(head(s));
      successors_.push_back(std::move(succ));
    }
    refine();
  }

  std::size_t class_count() const { return class_count_; }
  std::uint32_t class_of_det(std::size_t det_index) const { return rank_[det_index]; }
  const std::vector<NodeId>& dets() const { return dets_; }
  const std::vector<NodeId>& successors(std::size_t det_index) const { return successors_[det_index]; }

  using ClassDist = std::vector<std::pair<std::uint32_t, MeadowValue>>;

  ClassDist class_dist(NodeId node) { return aggregate(head(node), rank_); }

 private:
  static constexpr std::uint32_t kNone = ~std::uint32_t{0};

  const Dist& head(NodeId id) {
    if (computed_[id]) return heads_[id];
    // iterative post-order over the (acyclic) Prob layer
    std::vector<NodeId> stack{id};
    while (!stack.empty()) {
      NodeId cur = stack.back();
      if (computed_[cur]) {
        stack.pop_back();
        continue;
      }
      const auto* p = std::get_if<Prob>(&nodes_[cur]);
      if (!p) {
        heads_[cur] = {{cur, MeadowValue::one()}};
        computed_[cur] = true;
        stack.pop_back();
        continue;
      }
      bool ready = true;
      for (const auto& b : p->branches) {
        if (!computed_[b.target]) {
          stack.push_back(b.target);
          ready = false;
        }
      }
      if (!ready) continue;
      std::map<NodeId, MeadowValue> acc;
      for (const auto& b : p->branches) merge_into(acc, heads_[b.target], b.weight.value());
      Dist d;
      for (auto& [k, w] : acc) {
        if (!w.is_zero()) d.emplace_back(k, std::move(w));
      }
      heads_[cur] = std::move(d);
      computed_[cur] = true;
      stack.pop_back();
    }
    return heads_[id];
  }

  void discover(const Dist& dist) {
    for (const auto& [id, w] : dist) {
      if (index_[id] == kNone) {
        index_[id] = static_cast<std::uint32_t>(dets_.size());
        dets_.push_back(id);
      }
    }
  }

  ClassDist aggregate(const Dist& dist, const std::vector<std::uint32_t>& rank) const {
    std::map<std::uint32_t, MeadowValue> acc;
    for (const auto& [id, w] : dist) acc[rank[index_[id]]] += w;
    return {acc.begin(), acc.end()};
  }

  struct Signature {
    std::uint32_t previous;
    std::vector<ClassDist> successors;
    friend auto operator<=>(const Signature&, const Signature&) = default;
    friend bool operator==(const Signature&, const Signature&) = default;
  };

  struct Label {
    int kind;
    Action action;
    friend auto operator<=>(const Label&, const Label&) = default;
    friend bool operator==(const Label&, const Label&) = default;
  };

  template <typename Key>
  std::size_t assign_ranks(const std::vector<Key>& keys) {
    std::vector<std::uint32_t> order(keys.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return keys[a] < keys[b]; });
    rank_.assign(keys.size(), 0);
    std::uint32_t r = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (i > 0 && !(keys[order[i - 1]] == keys[order[i]])) ++r;
      rank_[order[i]] = r;
    }
    return keys.empty() ? 0 : r + 1;
  }

  void refine() {
    std::vector<Label> labels;
    for (NodeId id : dets_) {
      const Node& n = nodes_[id];
      Label l{static_cast<int>(n.index()), Action::tau()};
      if (const auto* p = std::get_if<Post>(&n)) l.action = p->action;
      labels.push_back(std::move(l));
    }
    class_count_ = assign_ranks(labels);
    while (true) {
      std::vector<Signature> sigs;
      sigs.reserve(dets_.size());
      for (std::size_t i = 0; i < dets_.size(); ++i) {
        Signature s{rank_[i], {}};
        for (NodeId succ : successors_[i]) s.successors.push_back(aggregate(heads_[succ], rank_));
        sigs.push_back(std::move(s));
      }
      std::size_t count = assign_ranks(sigs);
      if (count == class_count_) break;
      class_count_ = count;
    }
  }

  const std::vector<Node>& nodes_;
  std::vector<Dist> heads_;
  std::vector<bool> computed_;
  std::vector<std::uint32_t> index_;
  std::vector<NodeId> dets_;
  std::vector<std::vector<NodeId>> successors_;
  std::vector<std::uint32_t> rank_;
  std::size_t class_count_ = 0;
};

}  // namespace

ThreadGraph normalize(const ThreadGraph& graph) {
  NodeId root = graph.root();
  Refinement refinement(graph.nodes(), std::span<const NodeId>(&root, 1));
  const auto classes = static_cast<NodeId>(refinement.class_count());

  // one representative deterministic node per class
  std::vector<std::size_t> representative(classes, 0);
  std::vector<bool> seen(classes, false);
  for (std::size_t i = 0; i < refinement.dets().size(); ++i) {
    auto c = refinement.class_of_det(i);
    if (!seen[c]) {
      seen[c] = true;
      representative[c] = i;
    }
  }

  using ClassDist = Refinement::ClassDist;
  auto is_point = [](const ClassDist& d) { return d.size() == 1; };
  std::map<ClassDist, NodeId> prob_nodes;
  std::vector<std::vector<ClassDist>> succ_dists(classes);
  for (NodeId c = 0; c < classes; ++c) {
    for (NodeId s : refinement.successors(representative[c])) {
      auto d = refinement.class_dist(s);
      if (!is_point(d)) prob_nodes.emplace(d, 0);
      succ_dists[c].push_back(std::move(d));
    }
  }
  ClassDist root_dist = refinement.class_dist(graph.root());
  if (!is_point(root_dist)) prob_nodes.emplace(root_dist, 0);

  NodeId next = classes;
  for (auto& [d, id] : prob_nodes) id = next++;
  auto ref = [&](const ClassDist& d) { return is_point(d) ? d.front().first : prob_nodes.at(d); };

  std::vector<Node> out(next);
  for (NodeId c = 0; c < classes; ++c) {
    const Node& n = graph.node(refinement.dets()[representative[c]]);
    const auto& sd = succ_dists[c];
    if (std::holds_alternative<Stop>(n)) {
      out[c] = Stop{};
    } else if (std::holds_alternative<DeadEnd>(n)) {
      out[c] = DeadEnd{};
    } else if (const auto* p = std::get_if<Post>(&n)) {
      out[c] = Post{p->action, ref(sd[0]), ref(sd[1])};
    } else {
      out[c] = Fork{ref(sd[0]), ref(sd[1]), ref(sd[2])};
    }
  }
  for (const auto& [d, id] : prob_nodes) {
    Prob p;
    for (const auto& [c, w] : d) p.branches.push_back({Probability(w), c});
    out[id] = std::move(p);
  }
  return detail::GraphAccess::make(std::move(out), ref(root_dist));
}

ThreadGraph project(std::size_t depth, const ThreadGraph& graph) {
  GraphBuilder builder;
  NodeId cut = builder.dead_end();
  std::unordered_map<std::uint64_t, NodeId> slots;
  std::vector<std::pair<NodeId, std::size_t>> work;
  auto get = [&](NodeId node, std::size_t d) -> NodeId {
    if (d == 0) return cut;
    std::uint64_t key = static_cast<std::uint64_t>(node) * (depth + 1) + d;
    auto [it, fresh] = slots.emplace(key, 0);
    if (fresh) {
      it->second = builder.reserve();
      work.emplace_back(node, d);
    }
    return it->second;
  };
  NodeId root = get(graph.root(), depth);
  while (!work.empty()) {
    auto [node, d] = work.back();
    work.pop_back();
    NodeId slot = slots.at(static_cast<std::uint64_t>(node) * (depth + 1) + d);
    const Node& n = graph.node(node);
    if (const auto* p = std::get_if<Post>(&n)) {
      builder.define(slot, Post{p->action, get(p->on_true, d - 1), get(p->on_false, d - 1)});
    } else if (const auto* k = std::get_if<Fork>(&n)) {
      builder.define(slot, Fork{get(k->forked, d), get(k->on_true, d), get(k->on_false, d)});
    } else if (const auto* r = std::get_if<Prob>(&n)) {
      Prob out;
      for (const auto& b : r->branches) out.branches.push_back({b.weight, get(b.target, d)});
      builder.define(slot, std::move(out));
    } else {
      builder.define(slot, n);
    }
  }
  return builder.finish(root);
}

bool equal_up_to(std::size_t depth, const ThreadGraph& a, const ThreadGraph& b) {
  return normalize(project(depth, a)) == normalize(project(depth, b));
}

bool bisimilar(const ThreadGraph& a, const ThreadGraph& b) {
  std::vector<Node> nodes = a.nodes();
  auto offset = static_cast<NodeId>(nodes.size());
  for (const auto& n : b.nodes()) nodes.push_back(remap(n, [offset](NodeId id) { return id + offset; }));
  const std::vector<NodeId> roots{a.root(), b.root() + offset};
  Refinement refinement(nodes, roots);
  return refinement.class_dist(roots[0]) == refinement.class_dist(roots[1]);
}

bool contains_fork(const ThreadGraph& graph) {
  return std::ranges::any_of(graph.nodes(), [](const Node& n) { return std::holds_alternative<Fork>(n); });
}

bool contains_prob(const ThreadGraph& graph) {
  return std::ranges::any_of(graph.nodes(), [](const Node& n) { return std::holds_alternative<Prob>(n); });
}

bool contains_tau(const ThreadGraph& graph) {
  return std::ranges::any_of(graph.nodes(), [](const Node& n) {
    const auto* p = std::get_if<Post>(&n);
    return p && p->action.is_tau();
  });
}

std::size_t deterministic_count(const ThreadGraph& graph) {
  return static_cast<std::size_t>(std::ranges::count_if(graph.nodes(), is_deterministic));
}

}  // namespace probthread
