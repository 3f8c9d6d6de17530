#include "probthread/interaction.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

#include "probthread/error.hpp"

namespace probthread {

ThreadGraph use(const ThreadGraph& g, const ServiceFamily& family, std::size_t bound) {
  GraphBuilder builder;
  std::vector<ServiceFamily> families;
  std::unordered_map<std::string, std::uint32_t> family_index;
  auto intern = [&](const ServiceFamily& f) {
    auto [it, fresh] = family_index.emplace(f.key(), static_cast<std::uint32_t>(families.size()));
    if (fresh) families.push_back(f);
    return it->second;
  };

  std::unordered_map<std::uint64_t, NodeId> slots;
  std::vector<std::pair<NodeId, std::uint32_t>> work;
  auto key_of = [](NodeId node, std::uint32_t fam) { return (static_cast<std::uint64_t>(fam) << 32) | node; };
  auto get = [&](NodeId node, std::uint32_t fam) {
    auto [it, fresh] = slots.emplace(key_of(node, fam), 0);
    if (fresh) {
      if (slots.size() > bound) {
        throw NonRegularProduct("use: more than " + std::to_string(bound) + " reachable (thread, service) states");
      }
      it->second = builder.reserve();
      work.emplace_back(node, fam);
    }
    return it->second;
  };

  std::optional<NodeId> dead;
  auto dead_end = [&] {
    if (!dead) dead = builder.dead_end();
    return *dead;
  };

  NodeId root = get(g.root(), intern(family));
  while (!work.empty()) {
    auto [node, fam] = work.back();
    work.pop_back();
    NodeId slot = slots.at(key_of(node, fam));
    const Node& n = g.node(node);
    if (const auto* p = std::get_if<Post>(&n)) {
      if (p->action.is_tau()) {
        NodeId next = get(p->on_true, fam);
        builder.define(slot, Post{Action::tau(), next, next});
        continue;
      }
      const Service* service = families[fam].find(p->action.focus());
      if (!service) {
        builder.define(slot, Post{p->action, get(p->on_true, fam), get(p->on_false, fam)});
        continue;
      }
      auto reply = service->reply(p->action.method());
      if (!reply) {
        builder.define(slot, Post{Action::tau(), dead_end(), dead_end()});
        continue;
      }
      // the rest of the family is left untouched; only focus f is derived
      std::uint32_t next_fam =
          intern(families[fam].with(p->action.focus(), service->derive(p->action.method())));
      NodeId choice = builder.binary_prob(*reply, get(p->on_true, next_fam), get(p->on_false, next_fam));
      builder.define(slot, Post{Action::tau(), choice, choice});
    } else if (const auto* k = std::get_if<Fork>(&n)) {
      builder.define(slot, Fork{get(k->forked, fam), get(k->on_true, fam), get(k->on_false, fam)});
    } else if (const auto* r = std::get_if<Prob>(&n)) {
      Prob out;
      for (const auto& b : r->branches) out.branches.push_back({b.weight, get(b.target, fam)});
      builder.define(slot, std::move(out));
    } else {
      builder.define(slot, n);
    }
  }
  return builder.finish(root);
}

namespace {

using SparseDist = std::map<NodeId, MeadowValue>;

void add_scaled(SparseDist& acc, const SparseDist& d, const MeadowValue& scale) {
  if (scale.is_zero()) return;
  for (const auto& [k, w] : d) {
    auto& slot = acc[k];
    slot += w * scale;
    if (slot.is_zero()) acc.erase(k);
  }
}

bool is_transient(const Node& n) {
  if (std::holds_alternative<Prob>(n)) return true;
  const auto* p = std::get_if<Post>(&n);
  return p && p->action.is_tau();
}

std::vector<std::pair<NodeId, MeadowValue>> transient_successors(const Node& n) {
  if (const auto* p = std::get_if<Post>(&n)) return {{p->on_true, MeadowValue::one()}};
  std::vector<std::pair<NodeId, MeadowValue>> out;
  for (const auto& b : std::get<Prob>(n).branches) out.emplace_back(b.target, b.weight.value());
  return out;
}

// Iterative Tarjan; components come out successors-first.
std::vector<std::vector<NodeId>> strongly_connected(const std::vector<std::vector<NodeId>>& edges,
                                                    const std::vector<bool>& member) {
  const std::size_t n = edges.size();
  constexpr std::uint32_t kUnset = ~std::uint32_t{0};
  std::vector<std::uint32_t> index(n, kUnset), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeId> stack;
  std::vector<std::vector<NodeId>> out;
  std::uint32_t counter = 0;
  std::vector<std::pair<NodeId, std::size_t>> call;
  for (NodeId start = 0; start < n; ++start) {
    if (!member[start] || index[start] != kUnset) continue;
    call.emplace_back(start, 0);
    index[start] = low[start] = counter++;
    stack.push_back(start);
    on_stack[start] = true;
    while (!call.empty()) {
      auto& [v, i] = call.back();
      if (i < edges[v].size()) {
        NodeId w = edges[v][i++];
        if (index[w] == kUnset) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = true;
          call.emplace_back(w, 0);
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<NodeId> component;
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          component.push_back(w);
        } while (w != v);
        out.push_back(std::move(component));
      }
      NodeId finished = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[finished]);
    }
  }
  return out;
}

}  // namespace

ThreadGraph abstract_tau(const ThreadGraph& g) {
  const std::size_t n = g.size();
  const auto trap = static_cast<NodeId>(n);  // stands for the never-escaping mass

  std::vector<bool> transient(n);
  for (NodeId v = 0; v < n; ++v) transient[v] = is_transient(g.node(v));

  // transient nodes from which some non-transient node is reachable
  std::vector<std::vector<NodeId>> reverse(n);
  std::vector<NodeId> frontier;
  std::vector<bool> escapes(n, false);
  for (NodeId v = 0; v < n; ++v) {
    if (!transient[v]) continue;
    for (const auto& [w, p] : transient_successors(g.node(v))) {
      if (transient[w]) {
        reverse[w].push_back(v);
      } else if (!escapes[v]) {
        escapes[v] = true;
        frontier.push_back(v);
      }
    }
  }
  while (!frontier.empty()) {
    NodeId w = frontier.back();
    frontier.pop_back();
    for (NodeId v : reverse[w]) {
      if (!escapes[v]) {
        escapes[v] = true;
        frontier.push_back(v);
      }
    }
  }

  std::vector<SparseDist> dist(n);
  auto terminal = [&](NodeId w) -> SparseDist {
    if (!transient[w]) return {{w, MeadowValue::one()}};
    if (!escapes[w]) return {{trap, MeadowValue::one()}};
    return dist[w];
  };

  std::vector<std::vector<NodeId>> edges(n);
  for (NodeId v = 0; v < n; ++v) {
    if (!escapes[v]) continue;
    for (const auto& [w, p] : transient_successors(g.node(v))) {
      if (escapes[w]) edges[v].push_back(w);
    }
  }

  for (const auto& component : strongly_connected(edges, escapes)) {
    if (component.size() == 1 &&
        std::find(edges[component[0]].begin(), edges[component[0]].end(), component[0]) == edges[component[0]].end()) {
      NodeId v = component[0];
      SparseDist acc;
      for (const auto& [w, p] : transient_successors(g.node(v))) add_scaled(acc, terminal(w), p);
      dist[v] = std::move(acc);
      continue;
    }
    // solve (I - Q) x = c over the component
    const std::size_t k = component.size();
    std::unordered_map<NodeId, std::size_t> local;
    for (std::size_t i = 0; i < k; ++i) local.emplace(component[i], i);
    std::vector<std::vector<MeadowValue>> a(k, std::vector<MeadowValue>(k));
    std::vector<SparseDist> c(k);
    for (std::size_t i = 0; i < k; ++i) {
      a[i][i] = MeadowValue::one();
      for (const auto& [w, p] : transient_successors(g.node(component[i]))) {
        if (auto it = local.find(w); it != local.end()) {
          a[i][it->second] -= p;
        } else {
          add_scaled(c[i], terminal(w), p);
        }
      }
    }
    for (std::size_t col = 0; col < k; ++col) {
      std::size_t pivot = col;
      while (pivot < k && a[pivot][col].is_zero()) ++pivot;
      if (pivot == k) throw Error("abstraction: singular absorption system");
      std::swap(a[pivot], a[col]);
      std::swap(c[pivot], c[col]);
      MeadowValue scale = a[col][col].inverse();
      for (auto& x : a[col]) x *= scale;
      SparseDist scaled;
      add_scaled(scaled, c[col], scale);
      c[col] = std::move(scaled);
      for (std::size_t row = 0; row < k; ++row) {
        if (row == col || a[row][col].is_zero()) continue;
        MeadowValue factor = a[row][col];
        for (std::size_t j = col; j < k; ++j) a[row][j] -= factor * a[col][j];
        add_scaled(c[row], c[col], -factor);
      }
    }
    for (std::size_t i = 0; i < k; ++i) dist[component[i]] = std::move(c[i]);
  }

  GraphBuilder builder;
  std::unordered_map<NodeId, NodeId> slot;
  std::vector<NodeId> work;
  std::optional<NodeId> dead;
  auto image = [&](NodeId w) -> NodeId {
    if (w == trap) {
      if (!dead) dead = builder.dead_end();
      return *dead;
    }
    auto [it, fresh] = slot.emplace(w, 0);
    if (fresh) {
      it->second = builder.reserve();
      work.push_back(w);
    }
    return it->second;
  };
  std::unordered_map<NodeId, NodeId> abstracted;
  auto abstract_of = [&](NodeId v) -> NodeId {
    if (!transient[v]) return image(v);
    if (auto it = abstracted.find(v); it != abstracted.end()) return it->second;
    std::vector<Branch> branches;
    for (const auto& [w, p] : terminal(v)) branches.push_back({Probability(p), image(w)});
    NodeId id = builder.prob(std::move(branches));
    abstracted.emplace(v, id);
    return id;
  };

  NodeId root = abstract_of(g.root());
  while (!work.empty()) {
    NodeId v = work.back();
    work.pop_back();
    const Node& node = g.node(v);
    if (const auto* p = std::get_if<Post>(&node)) {
      builder.define(slot.at(v), Post{p->action, abstract_of(p->on_true), abstract_of(p->on_false)});
    } else if (const auto* k = std::get_if<Fork>(&node)) {
      builder.define(slot.at(v), Fork{abstract_of(k->forked), abstract_of(k->on_true), abstract_of(k->on_false)});
    } else {
      builder.define(slot.at(v), node);
    }
  }
  return builder.finish(root);
}

}  // namespace probthread
