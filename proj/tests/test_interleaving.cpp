#include <doctest.h>

#include "probthread/error.hpp"
#include "probthread/interleaving.hpp"
#include "probthread/term.hpp"
#include "support/generators.hpp"
#include "support/laws.hpp"

using namespace probthread;
using namespace probthread::testing;

namespace {

ThreadGraph t(std::string_view text) { return parse_thread(text); }
Probability p(std::string_view text) { return Probability::parse(text); }

ThreadGraph run(const SchedulerSpec& spec, std::vector<ThreadGraph> ts) {
  return interleave(spec, {}, spec.initial_state, ts);
}

std::vector<std::string> weights(const std::vector<Probability>& ws) {
  std::vector<std::string> out;
  for (const auto& w : ws) out.push_back(w.to_string());
  return out;
}

using Strings = std::vector<std::string>;

// Turn order by hand: thread 1 first, then the thread after the last one to
// move, wrapping around; a finished thread leaves on its turn.
std::vector<Action> round_robin(std::vector<std::vector<Action>> threads) {
  std::vector<Action> trace;
  std::size_t last = 0;
  bool first = true;
  while (!threads.empty()) {
    std::size_t n = threads.size();
    std::size_t turn = first ? 1 : (last % n) + 1;
    first = false;
    auto& th = threads[turn - 1];
    last = turn;
    if (th.empty()) {
      threads.erase(threads.begin() + static_cast<std::ptrdiff_t>(turn - 1));
      continue;
    }
    trace.push_back(th.front());
    th.erase(th.begin());
  }
  return trace;
}

ThreadGraph sequence(const std::vector<Action>& actions) {
  ThreadGraph g = g_stop();
  for (auto it = actions.rbegin(); it != actions.rend(); ++it) g = g_prefix(*it, g);
  return g;
}

}  // namespace

TEST_CASE("built-in schedules") {
  auto cyclic = cyclic_scheduler();
  CHECK(weights(cyclic.schedule(2, {}, {})) == Strings{"1", "0"});
  CHECK(weights(cyclic.schedule(2, {{1, 2}}, {})) == Strings{"0", "1"});
  CHECK(weights(cyclic.schedule(2, {{2, 2}}, {})) == Strings{"1", "0"});
  CHECK(weights(cyclic.schedule(3, {{2, 3}}, {})) == Strings{"0", "0", "1"});
  auto uniform = uniform_scheduler();
  CHECK(weights(uniform.schedule(3, {}, {})) == Strings{"1", "0", "0"});
  CHECK(weights(uniform.schedule(3, {{2, 3}}, {})) == Strings{"1/3", "1/3", "1/3"});
  auto lottery = lottery_scheduler({1, {3, 1}});
  CHECK(weights(lottery.schedule(2, {}, lottery.initial_state)) == Strings{"3/4", "1/4"});
  CHECK(weights(lottery.schedule(3, {}, lottery.initial_state)) == Strings{"3/5", "1/5", "1/5"});
  auto forked = lottery.update(2, {}, lottery.initial_state, 1, ForkStep{});
  CHECK(forked.data == std::vector<std::int64_t>{3, 1, 1});
  auto gone = lottery.update(2, {}, lottery.initial_state, 1, TerminationStep{});
  CHECK(gone.data == std::vector<std::int64_t>{1});
  CHECK(lottery.update(2, {}, lottery.initial_state, 2, BasicStep{Action::parse("a")}) == lottery.initial_state);

  CHECK(builtin_scheduler("lottery:defaultTickets=2,initial=3:1").initial_state.data == std::vector<std::int64_t>{3, 1});
  CHECK_THROWS_AS(builtin_scheduler("lottery:defaultTickets=0"), Error);
  CHECK_THROWS_AS(builtin_scheduler("fifo"), Error);
}

TEST_CASE("table scheduler") {
  auto spec = table_scheduler("# comment\nn=2 last=- : 1 0\nn=2 last=1 : 0 1\nn=* last=* : uniform\n");
  CHECK(weights(spec.schedule(2, {}, {})) == Strings{"1", "0"});
  CHECK(weights(spec.schedule(2, {{1, 2}}, {})) == Strings{"0", "1"});
  CHECK(weights(spec.schedule(2, {{2, 2}}, {})) == Strings{"1/2", "1/2"});
  CHECK(weights(spec.schedule(1, {}, {})) == Strings{"1"});
  CHECK_THROWS_AS(table_scheduler("n=2 last=- : 1/2 1/3"), ParseError);
  CHECK_THROWS_AS(table_scheduler("n=2 last=- : 1"), ParseError);
  CHECK_THROWS_AS(table_scheduler("n=* last=- : 1 0"), ParseError);
  CHECK_THROWS_AS(table_scheduler("garbage"), ParseError);
  auto partial = table_scheduler("n=1 last=* : first");
  CHECK_THROWS_AS(run(partial, {t("prefix(a, S)"), t("S")}), Error);
}

TEST_CASE("interleave examples") {
  auto cyclic = cyclic_scheduler();
  CHECK(same_nf(run(cyclic, {t("S"), t("S")}), t("S")));
  CHECK(same_nf(run(cyclic, {t("D"), t("S")}), t("D")));
  CHECK(same_nf(run(cyclic, {t("S"), t("prefix(a, S)")}), t("prefix(a, S)")));
  CHECK(same_nf(run(cyclic, {t("D"), t("prefix(a, S)")}), t("prefix(a, D)")));
  CHECK(same_nf(run(uniform_scheduler(), {t("prefix(a, S)"), t("prefix(b, S)")}),
                t("prefix(a, prefix(b, S))")));
  CHECK(same_nf(positional_interleave(cyclic, 1, {}, {}, std::vector<ThreadGraph>{t("S")}), t("S")));
  CHECK(same_nf(positional_interleave(cyclic, 1, {}, {}, std::vector<ThreadGraph>{t("D")}), t("D")));
  CHECK(same_nf(run(cyclic, {t("fork(prefix(b, S), prefix(a, S), D)")}),
                t("prefix(tau, prefix(b, prefix(a, S)))")));
}

TEST_CASE("uniform scheduling splits evenly after the first turn") {
  ThreadGraph g = run(uniform_scheduler(), {t("prefix(a, prefix(c, S))"), t("prefix(b, S)")});
  CHECK(same_nf(g, t("prefix(a, prob(1/2: prefix(c, prefix(b, S)), 1/2: prefix(b, prefix(c, S))))")));
}

TEST_CASE("deadlock at termination") {
  CHECK(same_nf(deadlock_at_termination(t("S")), t("D")));
  CHECK(same_nf(deadlock_at_termination(t("D")), t("D")));
  CHECK(same_nf(deadlock_at_termination(t("prob(1/3: prefix(a, S), 2/3: S)")), t("prob(1/3: prefix(a, D), 2/3: D)")));
  CHECK(same_nf(deadlock_at_termination(t("fork(S, prefix(a, S), S)")), t("fork(D, prefix(a, D), D)")));
}

TEST_CASE("cyclic alternates strictly") {
  Rng rng(13);
  std::vector<Action> alphabet{Action::parse("a"), Action::parse("b"), Action::parse("c"), Action("f", "m")};
  for (int k = 0; k < 50; ++k) {
    std::vector<std::vector<Action>> threads(1 + pick(rng, 3));
    for (auto& th : threads) {
      std::size_t len = pick(rng, 4);
      for (std::size_t j = 0; j < len; ++j) th.push_back(alphabet[pick(rng, alphabet.size())]);
    }
    std::vector<ThreadGraph> graphs;
    for (const auto& th : threads) graphs.push_back(sequence(th));
    CHECK(same_nf(run(cyclic_scheduler(), graphs), sequence(round_robin(threads))));
  }
}

TEST_CASE("deterministic schedulers keep deterministic threads deterministic") {
  Rng rng(37);
  ThreadShape shape;
  shape.forks = true;
  shape.actions = {Action::parse("a"), Action::parse("b")};
  shape.probabilities = false;
  auto table = table_scheduler("n=* last=* : first");
  for (int k = 0; k < 100; ++k) {
    std::vector<ThreadGraph> ts;
    for (std::size_t j = 0; j < 1 + pick(rng, 3); ++j) {
      ts.push_back(random_closed(rng, 3, shape));
    }
    CHECK_FALSE(contains_prob(run(cyclic_scheduler(), ts)));
    CHECK_FALSE(contains_prob(run(table, ts)));
  }
}

TEST_CASE("errors") {
  SchedulerSpec bad = cyclic_scheduler();
  bad.schedule = [](std::size_t n, const History&, const ControlState&) {
    return std::vector<Probability>(n, p("1/3"));
  };
  CHECK_THROWS_AS(run(bad, {t("S"), t("S")}), WeightSumNotOne);

  // a history that keeps growing makes the product infinite
  SchedulerSpec forgetful = cyclic_scheduler();
  forgetful.digest = [](const History& h) { return h; };
  CHECK_THROWS_AS(interleave(forgetful, {}, {}, std::vector<ThreadGraph>{t("rec X { X = prefix(a, X); } in X")}, 200),
                  NonRegularProduct);
}

TEST_CASE("interleaving laws") {
  auto report = interleaving_laws(53, 80);
  INFO(report.summary());
  CHECK(report.ok());
  auto proj = interleaving_projection_identities(59, 40);
  INFO(proj.summary());
  CHECK(proj.ok());
}
