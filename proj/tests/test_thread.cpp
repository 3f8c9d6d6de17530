#include <doctest.h>

#include "probthread/error.hpp"
#include "probthread/term.hpp"
#include "probthread/thread.hpp"
#include "support/generators.hpp"
#include "support/laws.hpp"

using namespace probthread;
using namespace probthread::testing;

namespace {

ThreadGraph t(std::string_view text) { return parse_thread(text); }
Probability p(std::string_view text) { return Probability::parse(text); }

}  // namespace

TEST_CASE("actions") {
  CHECK(Action::parse("tau").is_tau());
  CHECK(Action::parse("f.m") == Action("f", "m"));
  CHECK(Action::parse("a") == Action("main", "a"));
  CHECK(Action::parse("random.get(1/2)").method() == "get(1/2)");
  CHECK(Action("r", "set:true").to_string() == "r.set:true");
}

TEST_CASE("build") {
  CHECK(t("S") == ThreadGraph());
  CHECK(t("S").size() == 1);

  ThreadGraph loop = t("rec X { X = prefix(a, X); } in X");
  REQUIRE(loop.size() == 1);
  const auto& post = std::get<Post>(loop.node(loop.root()));
  CHECK(post.on_true == loop.root());
  CHECK(post.on_false == loop.root());

  CHECK(normalize(t("prob(1: prefix(a, S), 0: D)")) == normalize(t("prefix(a, S)")));
  CHECK_THROWS_AS(t("rec X { X = X; } in X"), UnguardedRecursion);
  CHECK_THROWS_AS(t("rec X { X = prob(1/2: X, 1/2: S); } in X"), UnguardedRecursion);
  CHECK_THROWS_AS(t("prob(3/2: S, -1/2: D)"), MalformedProbability);
  CHECK_THROWS_AS(t("prob(1/2: S, 1/4: D)"), WeightSumNotOne);
  CHECK_THROWS_AS(t("post(a, S"), ParseError);
  CHECK_THROWS(t("prefix(a, Y)"));
}

TEST_CASE("printing round-trips") {
  Rng rng(11);
  ThreadShape shape;
  shape.forks = true;
  for (int k = 0; k < 200; ++k) {
    ThreadGraph g = normalize(k % 2 ? random_closed(rng, 4, shape) : random_regular(rng, 1 + k % 5));
    std::string text = format_thread(g);
    INFO(text);
    CHECK(normalize(parse_thread(text)) == g);
    CHECK(format_thread(normalize(parse_thread(text))) == text);
  }
  CHECK(format_thread(normalize(t("prob(1: S)"))) == "S");
  CHECK(format_thread(normalize(t("post(tau, S, D)"))) == "prefix(tau, S)");
}

TEST_CASE("normalize") {
  ThreadGraph x = t("prefix(x, S)"), y = t("prefix(y, S)"), z = t("prefix(z, S)");
  ThreadGraph nested = g_prob(p("1/2"), x, g_prob(p("1/2"), y, z));
  ThreadGraph flat = t("prob(1/2: prefix(x, S), 1/4: prefix(y, S), 1/4: prefix(z, S))");
  CHECK(normalize(nested) == normalize(flat));
  // regrouped right-hand side with outer weight 3/4 and inner 2/3
  CHECK(normalize(nested) == normalize(g_prob(p("3/4"), g_prob(p("2/3"), x, y), z)));
  CHECK(normalize(g_prob(p("1/2"), x, x)) == normalize(x));
  CHECK(normalize(g_prob(p("0"), x, g_prob(p("0"), y, z))) == normalize(z));
  CHECK(normalize(g_prob(p("0"), g_prob(p("0"), x, y), z)) == normalize(z));

  Rng rng(3);
  for (int k = 0; k < 200; ++k) {
    ThreadGraph g = k % 2 ? random_closed(rng, 5) : random_regular(rng, 1 + k % 6);
    ThreadGraph n = normalize(g);
    CHECK(normalize(n) == n);
    for (const auto& node : n.nodes()) {
      if (const auto* r = std::get_if<Prob>(&node)) {
        MeadowValue sum;
        for (const auto& b : r->branches) {
          sum += b.weight.value();
          CHECK_FALSE(std::holds_alternative<Prob>(n.node(b.target)));
        }
        CHECK(sum == 1);
      }
    }
  }
}

TEST_CASE("normal forms do not depend on how a regular thread is unrolled") {
  ThreadGraph once = t("rec X { X = prefix(a, X); } in X");
  ThreadGraph twice = t("rec Y { Y = prefix(a, prefix(a, Y)); } in Y");
  CHECK(normalize(once) == normalize(twice));
  CHECK(bisimilar(once, twice));
  for (std::size_t n = 0; n <= 4; ++n) CHECK(equal_up_to(n, once, twice));
}

TEST_CASE("nary_prob") {
  ThreadGraph a = t("prefix(a, S)"), b = t("prefix(b, S)"), c = t("prefix(c, S)");
  CHECK(normalize(g_nary({Probability::one()}, {a})) == normalize(a));
  ThreadGraph third = g_nary({p("1/3"), p("1/3"), p("1/3")}, {a, b, c});
  CHECK(normalize(third) == normalize(t("prob(1/3: prefix(a, S), 1/3: prefix(b, S), 1/3: prefix(c, S))")));
  // the inductive definition: 1/3 first, then (1/3)/(2/3)
  CHECK(normalize(third) == normalize(g_prob(p("1/3"), a, g_prob(p("1/2"), b, c))));
  CHECK(normalize(g_nary({p("1/2"), p("1/2")}, {a, a})) == normalize(a));
  CHECK_THROWS_AS(g_nary({p("1/2"), p("1/3")}, {a, b}), WeightSumNotOne);
}

TEST_CASE("project") {
  ThreadGraph loop = t("rec X { X = prefix(a, X); } in X");
  CHECK(normalize(project(0, loop)) == normalize(t("D")));
  CHECK(normalize(project(0, t("S"))) == normalize(t("D")));
  CHECK(normalize(project(2, loop)) == normalize(t("prefix(a, prefix(a, D))")));
  CHECK(normalize(project(1, t("prob(1/2: prefix(a, S), 1/2: S)"))) == normalize(t("prob(1/2: prefix(a, D), 1/2: S)")));
  CHECK(normalize(project(1, t("fork(prefix(b, S), prefix(a, S), D)"))) ==
        normalize(t("fork(prefix(b, D), prefix(a, D), D)")));

  Rng rng(5);
  ThreadShape shape;
  shape.forks = true;
  for (int k = 0; k < 100; ++k) {
    ThreadGraph g = k % 2 ? random_closed(rng, 5, shape) : random_regular(rng, 1 + k % 4);
    for (std::size_t n = 0; n <= 5; ++n) {
      CHECK(normalize(project(n, project(n + 1, g))) == normalize(project(n, g)));
      CHECK(normalize(project(n, project(n, g))) == normalize(project(n, g)));
    }
  }
}

TEST_CASE("equal_up_to and bisimilar") {
  ThreadGraph a = t("prefix(a, S)"), b = t("prefix(b, S)");
  CHECK_FALSE(equal_up_to(1, a, b));
  CHECK(equal_up_to(0, a, b));
  CHECK_FALSE(bisimilar(t("S"), t("D")));
  CHECK(bisimilar(t("post(tau, prefix(a, S), D)"), t("prefix(tau, prefix(a, S))")));

  // oracle: bisimilar regular graphs agree up to twice the state count
  Rng rng(9);
  for (int k = 0; k < 200; ++k) {
    ThreadGraph g = random_regular(rng, 1 + k % 3);
    ThreadGraph h = random_regular(rng, 1 + k % 3);
    bool deep = true;
    std::size_t bound = 2 * (g.size() + h.size());
    for (std::size_t n = 0; n <= bound && deep; ++n) deep = equal_up_to(n, g, h);
    CHECK(bisimilar(g, h) == deep);
    CHECK(bisimilar(g, g));
  }
}

TEST_CASE("recursive specifications have unique solutions") {
  // both satisfy X = a.(b.X); the second is a different unrolling
  ThreadGraph spec = t("rec X { X = prefix(a, prefix(b, X)); } in X");
  ThreadGraph other = t("rec Y { Y = prefix(a, Z); Z = prefix(b, prefix(a, Z)); } in Y");
  for (std::size_t n = 0; n <= 2 * (spec.size() + other.size()); ++n) REQUIRE(equal_up_to(n, spec, other));
  CHECK(bisimilar(spec, other));
}

TEST_CASE("thread laws") {
  auto report = thread_laws(17, 200);
  INFO(report.summary());
  CHECK(report.ok());
}
