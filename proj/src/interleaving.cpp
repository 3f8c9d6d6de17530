#include "probthread/interleaving.hpp"

#include <cctype>
#include <charconv>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "probthread/error.hpp"

namespace probthread {

std::string ControlState::to_string() const {
  std::string out = "[";
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(data[i]);
  }
  return out + "]";
}

namespace {

History keep_last(const History& h) {
  if (h.empty()) return {};
  return {h.back()};
}

std::vector<Probability> point_mass(std::size_t n, std::size_t index) {
  std::vector<Probability> w(n);
  w.at(index - 1) = Probability::one();
  return w;
}

ControlState unchanged(std::size_t, const History&, const ControlState& s, std::size_t, const StepKind&) { return s; }

}  // namespace

SchedulerSpec cyclic_scheduler() {
  SchedulerSpec spec;
  spec.name = "cyclic";
  spec.schedule = [](std::size_t n, const History& h, const ControlState&) {
    if (h.empty()) return point_mass(n, 1);
    std::size_t next = (h.back().turn + 1) % n;
    return point_mass(n, next == 0 ? n : next);
  };
  spec.update = unchanged;
  spec.digest = keep_last;
  return spec;
}

SchedulerSpec uniform_scheduler() {
  SchedulerSpec spec;
  spec.name = "uniform";
  spec.schedule = [](std::size_t n, const History& h, const ControlState&) {
    if (h.empty()) return point_mass(n, 1);
    return std::vector<Probability>(n, Probability(MeadowValue(mpz_class(1), mpz_class(static_cast<unsigned long>(n)))));
  };
  spec.update = unchanged;
  spec.digest = keep_last;
  return spec;
}

SchedulerSpec lottery_scheduler(const LotteryConfig& config) {
  if (config.default_tickets < 1) throw Error("lottery: defaultTickets must be at least 1");
  for (auto t : config.initial_tickets) {
    if (t < 1) throw Error("lottery: every thread needs at least one ticket");
  }
  const std::int64_t fallback = config.default_tickets;
  auto tickets = [fallback](std::size_t n, const ControlState& s) {
    std::vector<std::int64_t> t = s.data;
    t.resize(n, fallback);
    return t;
  };
  SchedulerSpec spec;
  spec.name = "lottery:defaultTickets=" + std::to_string(fallback);
  spec.initial_state.data = config.initial_tickets;
  spec.schedule = [tickets](std::size_t n, const History&, const ControlState& s) {
    auto t = tickets(n, s);
    mpz_class total = 0;
    for (auto x : t) total += static_cast<long>(x);
    std::vector<Probability> w;
    for (auto x : t) w.emplace_back(MeadowValue(mpz_class(static_cast<long>(x)), total));
    return w;
  };
  spec.update = [tickets, fallback](std::size_t n, const History&, const ControlState& s, std::size_t i,
                                    const StepKind& step) {
    ControlState out{tickets(n, s)};
    if (std::holds_alternative<ForkStep>(step)) {
      out.data.push_back(fallback);
    } else if (std::holds_alternative<TerminationStep>(step) || std::holds_alternative<InactionStep>(step)) {
      out.data.erase(out.data.begin() + static_cast<std::ptrdiff_t>(i - 1));
    }
    return out;
  };
  spec.digest = [](const History&) { return History{}; };
  return spec;
}

namespace {

std::int64_t parse_int(std::string_view text, std::string_view what) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error("scheduler: malformed " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

}  // namespace

SchedulerSpec builtin_scheduler(std::string_view spec) {
  if (spec == "cyclic") return cyclic_scheduler();
  if (spec == "uniform") return uniform_scheduler();
  if (spec == "lottery") return lottery_scheduler({});
  if (spec.starts_with("lottery:")) {
    LotteryConfig config;
    std::string_view rest = spec.substr(8);
    while (!rest.empty()) {
      auto comma = rest.find(',');
      std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      auto eq = item.find('=');
      if (eq == std::string_view::npos) throw Error("scheduler: expected key=value in '" + std::string(item) + "'");
      std::string_view key = item.substr(0, eq);
      std::string_view value = item.substr(eq + 1);
      if (key == "defaultTickets") {
        config.default_tickets = parse_int(value, "defaultTickets");
      } else if (key == "initial") {
        while (!value.empty()) {
          auto colon = value.find(':');
          config.initial_tickets.push_back(parse_int(value.substr(0, colon), "ticket count"));
          value = colon == std::string_view::npos ? std::string_view{} : value.substr(colon + 1);
        }
      } else {
        throw Error("scheduler: unknown lottery option '" + std::string(key) + "'");
      }
    }
    return lottery_scheduler(config);
  }
  throw Error("unknown scheduler '" + std::string(spec) + "'");
}

namespace {

struct TableRule {
  std::optional<std::size_t> count;  // nullopt: any
  enum class Last { kAny, kEmpty, kTurn } last = Last::kAny;
  std::uint32_t turn = 0;
  enum class Kind { kWeights, kUniform, kFirst } kind = Kind::kWeights;
  std::vector<Probability> weights;

  bool matches(std::size_t n, const History& h) const {
    if (count && *count != n) return false;
    switch (last) {
      case Last::kAny:
        return true;
      case Last::kEmpty:
        return h.empty();
      case Last::kTurn:
        return !h.empty() && h.back().turn == turn;
    }
    return false;
  }
};

}  // namespace

SchedulerSpec table_scheduler(std::string_view text) {
  std::vector<TableRule> rules;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string line(text.substr(line_start, line_end - line_start));
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    if (!words.empty()) {
      if (words.size() < 4 || !words[0].starts_with("n=") || !words[1].starts_with("last=") || words[2] != ":") {
        throw ParseError("expected 'n=<count|*> last=<turn|-|*> : <weights>'", line_start);
      }
      TableRule rule;
      std::string count = words[0].substr(2);
      if (count != "*") {
        rule.count = static_cast<std::size_t>(parse_int(count, "thread count"));
        if (*rule.count == 0) throw ParseError("thread count must be positive", line_start);
      }
      std::string last = words[1].substr(5);
      if (last == "-") {
        rule.last = TableRule::Last::kEmpty;
      } else if (last != "*") {
        rule.last = TableRule::Last::kTurn;
        rule.turn = static_cast<std::uint32_t>(parse_int(last, "turn"));
      }
      if (words[3] == "uniform" && words.size() == 4) {
        rule.kind = TableRule::Kind::kUniform;
      } else if (words[3] == "first" && words.size() == 4) {
        rule.kind = TableRule::Kind::kFirst;
      } else {
        if (!rule.count) throw ParseError("explicit weights need a fixed thread count", line_start);
        for (std::size_t i = 3; i < words.size(); ++i) {
          try {
            rule.weights.push_back(Probability::parse(words[i]));
          } catch (const Error& e) {
            throw ParseError(std::string("bad weight: ") + e.what(), line_start);
          }
        }
        if (rule.weights.size() != *rule.count) throw ParseError("weight count differs from n", line_start);
        MeadowValue sum;
        for (const auto& w : rule.weights) sum += w.value();
        if (sum != MeadowValue::one()) throw ParseError("weights must sum to 1", line_start);
      }
      rules.push_back(std::move(rule));
    }
    line_start = line_end + 1;
  }
  if (rules.empty()) throw ParseError("scheduler table has no rules", 0);

  SchedulerSpec spec;
  spec.name = "table";
  spec.schedule = [rules](std::size_t n, const History& h, const ControlState&) {
    for (const auto& r : rules) {
      if (!r.matches(n, h)) continue;
      switch (r.kind) {
        case TableRule::Kind::kWeights:
          return r.weights;
        case TableRule::Kind::kFirst:
          return point_mass(n, 1);
        case TableRule::Kind::kUniform:
          return std::vector<Probability>(
              n, Probability(MeadowValue(mpz_class(1), mpz_class(static_cast<unsigned long>(n)))));
      }
    }
    std::string last = h.empty() ? "-" : std::to_string(h.back().turn);
    throw Error("scheduler table has no rule for n=" + std::to_string(n) + " last=" + last);
  };
  spec.update = unchanged;
  spec.digest = keep_last;
  return spec;
}

namespace {

class Interleaver {
 public:
  Interleaver(const SchedulerSpec& spec, std::span<const ThreadGraph> threads, std::size_t bound)
      : spec_(spec), bound_(bound) {
    if (threads.empty()) throw Error("interleaving needs at least one thread");
    for (const auto& t : threads) {
      ThreadGraph g = normalize(t);
      auto offset = static_cast<NodeId>(nodes_.size());
      for (const auto& n : g.nodes()) nodes_.push_back(shift(n, offset));
      roots_.push_back(g.root() + offset);
    }
  }

  ThreadGraph run(std::optional<std::size_t> position, const History& h, const ControlState& s) {
    State start{position.has_value(), static_cast<std::uint32_t>(position.value_or(0)), false, spec_.digest(h), s,
                roots_};
    if (position && (*position < 1 || *position > roots_.size())) {
      throw Error("positional interleaving: position out of range");
    }
    NodeId root = get(start);
    while (!work_.empty()) {
      State st = std::move(work_.back());
      work_.pop_back();
      NodeId slot = slots_.at(encode(st));
      if (st.positional) {
        positional(slot, st);
      } else {
        strategic(slot, st);
      }
    }
    return builder_.finish(root);
  }

 private:
  struct State {
    bool positional;
    std::uint32_t position;  // 1-based, positional states only
    bool deadlock_at_termination;
    History history;         // digest
    ControlState control;
    std::vector<NodeId> threads;
  };

  static Node shift(const Node& n, NodeId offset) {
    Node out = n;
    if (auto* p = std::get_if<Post>(&out)) {
      p->on_true += offset;
      p->on_false += offset;
    } else if (auto* k = std::get_if<Fork>(&out)) {
      k->forked += offset;
      k->on_true += offset;
      k->on_false += offset;
    } else if (auto* r = std::get_if<Prob>(&out)) {
      for (auto& b : r->branches) b.target += offset;
    }
    return out;
  }

  static std::string encode(const State& st) {
    std::string key;
    auto put = [&key](std::uint64_t v) { key.append(reinterpret_cast<const char*>(&v), sizeof v); };
    put(st.positional);
    put(st.position);
    put(st.deadlock_at_termination);
    put(st.history.size());
    for (const auto& p : st.history) put((static_cast<std::uint64_t>(p.turn) << 32) | p.threads_after);
    put(st.control.data.size());
    for (auto v : st.control.data) put(static_cast<std::uint64_t>(v));
    put(st.threads.size());
    for (auto t : st.threads) put(t);
    return key;
  }

  NodeId get(State st) {
    auto [it, fresh] = slots_.emplace(encode(st), 0);
    if (fresh) {
      if (slots_.size() > bound_) {
        throw NonRegularProduct("interleaving: more than " + std::to_string(bound_) + " reachable product states");
      }
      it->second = builder_.reserve();
      work_.push_back(std::move(st));
    }
    return it->second;
  }

  NodeId dead_end() {
    if (!dead_) dead_ = builder_.dead_end();
    return *dead_;
  }

  NodeId stop() {
    if (!stop_) stop_ = builder_.stop();
    return *stop_;
  }

  State strategic_state(bool sd, History h, ControlState s, std::vector<NodeId> threads) const {
    return State{false, 0, sd, spec_.digest(h), std::move(s), std::move(threads)};
  }

  void strategic(NodeId slot, const State& st) {
    const std::size_t n = st.threads.size();
    std::vector<Probability> weights = spec_.schedule(n, st.history, st.control);
    if (weights.size() != n) {
      throw WeightSumNotOne("scheduler '" + spec_.name + "' returned " + std::to_string(weights.size()) +
                            " weights for " + std::to_string(n) + " threads");
    }
    Prob choice;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i].is_zero()) continue;
      State pos = st;
      pos.positional = true;
      pos.position = static_cast<std::uint32_t>(i + 1);
      choice.branches.push_back({weights[i], get(std::move(pos))});
    }
    builder_.define(slot, std::move(choice));
  }

  void positional(NodeId slot, const State& st) {
    const std::size_t n = st.threads.size();
    const std::size_t i = st.position;
    const Node& head = nodes_[st.threads[i - 1]];
    auto after = [&](std::uint32_t count) {
      History h = st.history;
      h.push_back({static_cast<std::uint32_t>(i), count});
      return h;
    };
    auto without_i = [&] {
      std::vector<NodeId> rest = st.threads;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i - 1));
      return rest;
    };
    auto replaced = [&](NodeId x) {
      std::vector<NodeId> t = st.threads;
      t[i - 1] = x;
      return t;
    };

    if (std::holds_alternative<DeadEnd>(head)) {
      if (n == 1) {
        builder_.alias(slot, dead_end());
        return;
      }
      auto h = after(static_cast<std::uint32_t>(n - 1));
      auto s = spec_.update(n, st.history, st.control, i, InactionStep{});
      builder_.alias(slot, get(strategic_state(true, std::move(h), std::move(s), without_i())));
    } else if (std::holds_alternative<Stop>(head)) {
      if (n == 1) {
        builder_.alias(slot, st.deadlock_at_termination ? dead_end() : stop());
        return;
      }
      auto h = after(static_cast<std::uint32_t>(n - 1));
      auto s = spec_.update(n, st.history, st.control, i, TerminationStep{});
      builder_.alias(slot, get(strategic_state(st.deadlock_at_termination, std::move(h), std::move(s), without_i())));
    } else if (const auto* f = std::get_if<Fork>(&head)) {
      // the reply False of a fork is never produced
      auto threads = replaced(f->on_true);
      threads.push_back(f->forked);
      auto h = after(static_cast<std::uint32_t>(n + 1));
      auto s = spec_.update(n, st.history, st.control, i, ForkStep{});
      NodeId next = get(strategic_state(st.deadlock_at_termination, std::move(h), std::move(s), std::move(threads)));
      builder_.define(slot, Post{Action::tau(), next, next});
    } else if (const auto* p = std::get_if<Post>(&head)) {
      auto h = after(static_cast<std::uint32_t>(n));
      auto s = spec_.update(n, st.history, st.control, i, BasicStep{p->action});
      NodeId yes = get(strategic_state(st.deadlock_at_termination, h, s, replaced(p->on_true)));
      NodeId no = get(strategic_state(st.deadlock_at_termination, h, s, replaced(p->on_false)));
      builder_.define(slot, Post{p->action, yes, no});
    } else {
      Prob out;
      for (const auto& b : std::get<Prob>(head).branches) {
        State next = st;
        next.threads[i - 1] = b.target;
        out.branches.push_back({b.weight, get(std::move(next))});
      }
      builder_.define(slot, std::move(out));
    }
  }

  const SchedulerSpec& spec_;
  std::size_t bound_;
  std::vector<Node> nodes_;
  std::vector<NodeId> roots_;
  GraphBuilder builder_;
  std::unordered_map<std::string, NodeId> slots_;
  std::vector<State> work_;
  std::optional<NodeId> dead_, stop_;
};

}  // namespace

ThreadGraph interleave(const SchedulerSpec& spec, const History& h, const ControlState& s,
                       std::span<const ThreadGraph> threads, std::size_t bound) {
  return Interleaver(spec, threads, bound).run(std::nullopt, h, s);
}

ThreadGraph positional_interleave(const SchedulerSpec& spec, std::size_t i, const History& h, const ControlState& s,
                                  std::span<const ThreadGraph> threads, std::size_t bound) {
  return Interleaver(spec, threads, bound).run(i, h, s);
}

ThreadGraph deadlock_at_termination(const ThreadGraph& g) {
  GraphBuilder builder;
  std::vector<NodeId> slot(g.size());
  for (auto& id : slot) id = builder.reserve();
  for (NodeId v = 0; v < g.size(); ++v) {
    Node n = g.node(v);
    if (std::holds_alternative<Stop>(n)) n = DeadEnd{};
    if (auto* p = std::get_if<Post>(&n)) {
      p->on_true = slot[p->on_true];
      p->on_false = slot[p->on_false];
    } else if (auto* k = std::get_if<Fork>(&n)) {
      k->forked = slot[k->forked];
      k->on_true = slot[k->on_true];
      k->on_false = slot[k->on_false];
    } else if (auto* r = std::get_if<Prob>(&n)) {
      for (auto& b : r->branches) b.target = slot[b.target];
    }
    builder.define(slot[v], std::move(n));
  }
  return builder.finish(slot[g.root()]);
}

}  // namespace probthread
