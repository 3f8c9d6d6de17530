#include <doctest.h>

#include "probthread/analysis.hpp"
#include "probthread/error.hpp"
#include "probthread/interaction.hpp"
#include "probthread/term.hpp"
#include "support/generators.hpp"
#include "support/laws.hpp"

using namespace probthread;
using namespace probthread::testing;

namespace {

ThreadGraph t(std::string_view text) { return parse_thread(text); }

class Unbounded : public ServiceBehavior {
 public:
  explicit Unbounded(long n) : n_(n) {}
  std::optional<Probability> reply(std::string_view) const override { return Probability::one(); }
  Service derive(std::string_view) const override { return Service(std::make_shared<Unbounded>(n_ + 1)); }
  std::string key() const override { return "Unbounded(" + std::to_string(n_) + ")"; }

 private:
  long n_;
};

MeadowValue terminating_mass(const ThreadGraph& g) {
  return outcome_distribution(g, Environment::parse("main.a = 1"), 2).terminate.value();
}

}  // namespace

TEST_CASE("use") {
  auto random = singleton("random", make_random());
  CHECK(same_nf(use(t("post(random.get(1/2), S, D)"), random), t("prefix(tau, prob(1/2: S, 1/2: D))")));
  CHECK(same_nf(use(t("post(f.m, S, D)"), empty_family()), t("post(f.m, S, D)")));
  CHECK(same_nf(use(t("post(r.get, S, D)"), singleton("r", make_register(true))), t("prefix(tau, S)")));
  CHECK(same_nf(use(t("post(r.nope, S, S)"), singleton("r", make_register(true))), t("prefix(tau, D)")));
  // the register remembers what was set
  CHECK(same_nf(use(t("prefix(r.set:false, post(r.get, prefix(a, S), prefix(b, S)))"), singleton("r", make_register(true))),
                t("prefix(tau, prefix(tau, prefix(b, S)))")));
  // only the addressed focus changes
  auto two = compose(singleton("r", make_register(false)), singleton("s", make_register(true)));
  CHECK(same_nf(use(t("prefix(r.set:true, post(s.get, post(r.get, S, D), D))"), two),
                t("prefix(tau, prefix(tau, prefix(tau, S)))")));
  // a regular loop against a finite-state service stays regular
  ThreadGraph toggler = t("rec X { X = prefix(r.set:true, prefix(r.set:false, X)); } in X");
  CHECK(same_nf(use(toggler, singleton("r", make_register(true))), t("rec Y { Y = prefix(tau, Y); } in Y")));
}

TEST_CASE("use reports unbounded service state") {
  ThreadGraph loop = t("rec X { X = prefix(c.inc, X); } in X");
  auto u = singleton("c", Service(std::make_shared<Unbounded>(0)));
  CHECK_THROWS_AS(use(loop, u, 50), NonRegularProduct);
  CHECK_NOTHROW(use(t("prefix(c.inc, prefix(c.inc, S))"), u, 50));
}

TEST_CASE("abstract_tau") {
  CHECK(same_nf(abstract_tau(t("prefix(tau, S)")), t("S")));
  CHECK(same_nf(abstract_tau(t("rec X { X = prefix(tau, X); } in X")), t("D")));
  ThreadGraph retry = t("rec X { X = prob(1/2: prefix(a, S), 1/2: prefix(tau, X)); } in X");
  CHECK(same_nf(abstract_tau(retry), t("prefix(a, S)")));
  // 1/3 escapes to a, 1/3 to b, the rest loops: a and b get 1/2 each
  ThreadGraph split = t("rec X { X = prob(1/3: prefix(a, S), 1/3: prefix(b, S), 1/3: prefix(tau, X)); } in X");
  CHECK(same_nf(abstract_tau(split), t("prob(1/2: prefix(a, S), 1/2: prefix(b, S))")));
  // a tau cycle with a trapped part: half the mass never leaves
  ThreadGraph trapped = t("rec X { X = prob(1/2: prefix(a, S), 1/2: Y); Y = prefix(tau, Y); } in X");
  CHECK(same_nf(abstract_tau(trapped), t("prob(1/2: prefix(a, S), 1/2: D)")));
  // actions under tau loops are abstracted recursively
  ThreadGraph nested = t("rec X { X = post(a, Y, S); Y = prob(1/4: X, 3/4: prefix(tau, Y)); } in X");
  CHECK(same_nf(abstract_tau(nested), t("rec Z { Z = post(a, Z, S); } in Z")));
}

TEST_CASE("divergent retry converges to the solved value") {
  ThreadGraph retry = t("rec X { X = prob(1/2: prefix(a, S), 1/2: prefix(tau, X)); } in X");
  CHECK(terminating_mass(abstract_tau(retry)) == 1);
  for (std::size_t m = 1; m <= 20; ++m) {
    // a∘S survives the cut when a is reached within m - 1 steps
    MeadowValue expected = MeadowValue(1) - MeadowValue(mpz_class(1), mpz_class(1) << (m - 1));
    CHECK(terminating_mass(abstract_tau(project(m, retry))) == expected);
  }
}

TEST_CASE("abstraction is idempotent on its image") {
  Rng rng(31);
  ThreadShape shape = service_shape();
  for (int k = 0; k < 150; ++k) {
    ThreadGraph g = k % 2 ? random_closed(rng, 4, shape) : random_regular(rng, 1 + k % 4, shape);
    ThreadGraph a = abstract_tau(use(g, random_family(rng)));
    CHECK(same_nf(abstract_tau(a), a));
    CHECK_FALSE(contains_tau(a));
  }
}

TEST_CASE("use and abstraction laws") {
  auto report = use_abstraction_laws(41, 150);
  INFO(report.summary());
  CHECK(report.ok());
  auto c = use_projection_identity(43, 60);
  INFO(c.summary());
  CHECK(c.ok());
  auto d = abstraction_projection_limit(47, 30);
  INFO(d.summary());
  CHECK(d.ok());
}
