#include "probthread/analysis.hpp"

#include <array>
#include <random>
#include <sstream>
#include <unordered_map>

#include "probthread/error.hpp"

namespace probthread {

void Environment::set(const Action& action, Probability p) { replies_.insert_or_assign(action, std::move(p)); }

Probability Environment::reply(const Action& action) const {
  if (action.is_tau()) return Probability::one();
  auto it = replies_.find(action);
  if (it == replies_.end()) throw MissingReply("environment has no reply for " + action.to_string());
  return it->second;
}

Environment Environment::parse(std::string_view text) {
  Environment env;
  std::size_t line_start = 0;
  while (line_start <= text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string line(text.substr(line_start, line_end - line_start));
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream in(line);
    std::string action, eq, value, extra;
    if (in >> action) {
      if (!(in >> eq >> value) || eq != "=" || (in >> extra)) {
        throw ParseError("expected 'f.m = p'", line_start);
      }
      Action a = Action::parse(action);
      if (a.is_tau()) throw ParseError("tau always replies True", line_start);
      try {
        env.set(a, Probability::parse(value));
      } catch (const ParseError& e) {
        throw ParseError("malformed probability", line_start);
      }
    }
    line_start = line_end + 1;
  }
  return env;
}

std::string to_string(Outcome outcome) {
  switch (outcome) {
    case Outcome::kTerminate:
      return "terminate";
    case Outcome::kDeadlock:
      return "deadlock";
    case Outcome::kSurviving:
      return "surviving";
  }
  return "";
}

std::string format_trace(const Trace& trace, Outcome outcome) {
  std::string out;
  for (const auto& step : trace) {
    out += step.action.to_string();
    out += step.reply ? "=T " : "=F ";
  }
  return out + "-> " + to_string(outcome);
}

namespace {

constexpr std::size_t kMaxTraces = 1'000'000;

using Masses = std::array<MeadowValue, 3>;

class Expander {
 public:
  Expander(const ThreadGraph& g, const Environment& env) : g_(g), env_(env) {}

  Masses masses(NodeId v, std::size_t remaining) {
    std::uint64_t key = (static_cast<std::uint64_t>(remaining) << 32) | v;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Masses out{};
    const Node& n = g_.node(v);
    if (std::holds_alternative<Stop>(n)) {
      out[0] = MeadowValue::one();
    } else if (std::holds_alternative<DeadEnd>(n)) {
      out[1] = MeadowValue::one();
    } else if (const auto* r = std::get_if<Prob>(&n)) {
      for (const auto& b : r->branches) accumulate(out, masses(b.target, remaining), b.weight.value());
    } else if (remaining == 0) {
      out[2] = MeadowValue::one();
    } else if (const auto* p = std::get_if<Post>(&n)) {
      Probability yes = env_.reply(p->action);
      accumulate(out, masses(p->on_true, remaining - 1), yes.value());
      accumulate(out, masses(p->on_false, remaining - 1), yes.complement().value());
    } else {
      out = masses(std::get<Fork>(n).on_true, remaining - 1);
    }
    memo_.emplace(key, out);
    return out;
  }

  void traces(NodeId v, std::size_t remaining, const MeadowValue& mass, Trace& prefix,
              std::map<std::string, Probability>& table) {
    if (mass.is_zero()) return;
    const Node& n = g_.node(v);
    auto leaf = [&](Outcome o) {
      auto [it, fresh] = table.emplace(format_trace(prefix, o), Probability::zero());
      if (fresh && table.size() > kMaxTraces) throw Error("trace table exceeds " + std::to_string(kMaxTraces) + " entries");
      it->second = Probability(it->second.value() + mass);
    };
    if (std::holds_alternative<Stop>(n)) return leaf(Outcome::kTerminate);
    if (std::holds_alternative<DeadEnd>(n)) return leaf(Outcome::kDeadlock);
    if (const auto* r = std::get_if<Prob>(&n)) {
      for (const auto& b : r->branches) traces(b.target, remaining, mass * b.weight.value(), prefix, table);
      return;
    }
    if (remaining == 0) return leaf(Outcome::kSurviving);
    if (const auto* p = std::get_if<Post>(&n)) {
      Probability yes = env_.reply(p->action);
      prefix.push_back({p->action, true});
      traces(p->on_true, remaining - 1, mass * yes.value(), prefix, table);
      prefix.back().reply = false;
      traces(p->on_false, remaining - 1, mass * yes.complement().value(), prefix, table);
      prefix.pop_back();
      return;
    }
    traces(std::get<Fork>(n).on_true, remaining - 1, mass, prefix, table);
  }

 private:
  static void accumulate(Masses& acc, const Masses& m, const MeadowValue& w) {
    if (w.is_zero()) return;
    for (std::size_t i = 0; i < 3; ++i) acc[i] += m[i] * w;
  }

  const ThreadGraph& g_;
  const Environment& env_;
  std::unordered_map<std::uint64_t, Masses> memo_;
};

}  // namespace

OutcomeDistribution outcome_distribution(const ThreadGraph& g, const Environment& env, std::size_t depth,
                                         bool with_traces) {
  Expander expander(g, env);
  Masses m = expander.masses(g.root(), depth);
  OutcomeDistribution d{Probability(m[0]), Probability(m[1]), Probability(m[2]), std::nullopt};
  if (with_traces) {
    std::map<std::string, Probability> table;
    Trace prefix;
    expander.traces(g.root(), depth, MeadowValue::one(), prefix, table);
    d.traces = std::move(table);
  }
  return d;
}

std::string format_report(const OutcomeDistribution& d) {
  std::string out = "terminate: " + d.terminate.to_string() + "\n" + "deadlock: " + d.deadlock.to_string() + "\n" +
                    "surviving: " + d.surviving.to_string() + "\n";
  if (d.traces) {
    for (const auto& [trace, p] : *d.traces) out += "trace " + trace + ": " + p.to_string() + "\n";
  }
  return out;
}

namespace {

mpz_class draw(std::mt19937_64& rng) {
  std::uint64_t word = rng();
  mpz_class u;
  mpz_import(u.get_mpz_t(), 1, 1, sizeof word, 0, 0, &word);
  return u;
}

// u / 2^64 < w
bool below(const mpz_class& u, const MeadowValue& w) {
  mpz_class scaled = w.numerator() << 64;
  return u * w.denominator() < scaled;
}

}  // namespace

SampleResult sample_run(const ThreadGraph& g, const Environment& env, std::size_t depth, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  SampleResult result;
  NodeId v = g.root();
  std::size_t remaining = depth;
  while (true) {
    const Node& n = g.node(v);
    if (std::holds_alternative<Stop>(n)) {
      result.outcome = Outcome::kTerminate;
      return result;
    }
    if (std::holds_alternative<DeadEnd>(n)) {
      result.outcome = Outcome::kDeadlock;
      return result;
    }
    if (const auto* r = std::get_if<Prob>(&n)) {
      mpz_class u = draw(rng);
      MeadowValue cumulative;
      v = r->branches.back().target;
      for (const auto& b : r->branches) {
        cumulative += b.weight.value();
        if (below(u, cumulative)) {
          v = b.target;
          break;
        }
      }
      continue;
    }
    if (remaining == 0) {
      result.outcome = Outcome::kSurviving;
      return result;
    }
    --remaining;
    if (const auto* p = std::get_if<Post>(&n)) {
      bool reply = p->action.is_tau() || below(draw(rng), env.reply(p->action).value());
      result.trace.push_back({p->action, reply});
      v = reply ? p->on_true : p->on_false;
    } else {
      v = std::get<Fork>(n).on_true;
    }
  }
}

SampleSummary sample_runs(const ThreadGraph& g, const Environment& env, std::size_t depth, std::uint64_t seed,
                          std::size_t runs) {
  SampleSummary s;
  s.runs = runs;
  for (std::size_t i = 0; i < runs; ++i) {
    switch (sample_run(g, env, depth, seed + i).outcome) {
      case Outcome::kTerminate:
        ++s.terminate;
        break;
      case Outcome::kDeadlock:
        ++s.deadlock;
        break;
      case Outcome::kSurviving:
        ++s.surviving;
        break;
    }
  }
  return s;
}

std::string format_summary(const SampleSummary& s) {
  auto freq = [&](std::size_t k) {
    return MeadowValue(mpz_class(static_cast<unsigned long>(k)), mpz_class(static_cast<unsigned long>(s.runs)))
        .to_string();
  };
  return "runs: " + std::to_string(s.runs) + "\n" + "terminate: " + freq(s.terminate) + "\n" +
         "deadlock: " + freq(s.deadlock) + "\n" + "surviving: " + freq(s.surviving) + "\n";
}

}  // namespace probthread
