#include <doctest.h>

#include "probthread/error.hpp"
#include "probthread/service.hpp"
#include "support/laws.hpp"

using namespace probthread;

namespace {

Probability p(std::string_view text) { return Probability::parse(text); }

class Counter : public ServiceBehavior {
 public:
  explicit Counter(int n) : n_(n) {}
  std::optional<Probability> reply(std::string_view method) const override {
    if (method == "inc") return Probability::one();
    return std::nullopt;
  }
  Service derive(std::string_view method) const override {
    if (method == "inc") return Service(std::make_shared<Counter>((n_ + 1) % 3));
    return Service::empty();
  }
  std::string key() const override { return "Counter(" + std::to_string(n_) + ")"; }

 private:
  int n_;
};

class Broken : public ServiceBehavior {
 public:
  std::optional<Probability> reply(std::string_view) const override { return std::nullopt; }
  Service derive(std::string_view) const override { return Service(std::make_shared<Broken>()); }
  std::string key() const override { return "Broken"; }
};

}  // namespace

TEST_CASE("random service") {
  Service r = make_random();
  CHECK(r.reply(random_get_method(p("1/2"))) == p("1/2"));
  CHECK(r.derive(random_get_method(p("1/3"))) == r);
  CHECK_FALSE(r.reply("set:true"));
  CHECK(r.derive("set:true").is_empty());
  CHECK_FALSE(r.reply("get"));
  CHECK(random_get_method(p("2/4")) == "get(1/2)");
}

TEST_CASE("register service") {
  CHECK(make_register(true).reply("get") == Probability::one());
  CHECK(make_register(false).reply("get") == Probability::zero());
  Service flipped = make_register(false).derive("set:true");
  CHECK(flipped.reply("get") == Probability::one());
  CHECK(flipped == make_register(true));
  CHECK(make_register(true).derive("get") == make_register(true));
  CHECK(make_register(true).derive("nope").is_empty());
}

TEST_CASE("empty service absorbs") {
  Service e;
  CHECK_FALSE(e.reply("get"));
  CHECK(e.derive("get").derive("x").is_empty());
  CHECK(e.key() == "Empty");
}

TEST_CASE("families") {
  Service r = make_random(), g = make_register(true);
  CHECK(empty_family().size() == 0);
  CHECK(singleton("random", r).find("random") != nullptr);
  CHECK(compose(singleton("f", r), empty_family()) == singleton("f", r));
  CHECK(compose(singleton("f", r), singleton("f", g)) == singleton("f", Service::empty()));
  auto both = compose(singleton("f", r), singleton("g", g));
  CHECK(both.size() == 2);
  CHECK(encapsulate({"f"}, singleton("f", r)) == empty_family());
  CHECK(encapsulate({"f"}, singleton("g", r)) == singleton("g", r));
  CHECK(encapsulate({"f"}, empty_family()) == empty_family());
  CHECK(both.with("f", g).find("f")->key() == g.key());
}

TEST_CASE("registry") {
  auto registry = ServiceRegistry::with_builtins();
  auto u = registry.parse_family("{random: Random, r1: Register(true), e: Empty}");
  CHECK(u.size() == 3);
  CHECK(*u.find("random") == make_random());
  CHECK(*u.find("r1") == make_register(true));
  CHECK(u.find("e")->is_empty());
  CHECK(registry.parse_family("{}") == empty_family());
  CHECK_THROWS_AS(registry.parse_family("{r: Nope}"), Error);
  CHECK_THROWS_AS(registry.parse_family("{r: Random"), ParseError);

  std::vector<std::string> probes{"inc", "dec", "get"};
  registry.add("Counter", [](std::string_view) { return Service(std::make_shared<Counter>(0)); }, "", probes);
  CHECK(registry.parse_family("{c: Counter}").find("c")->key() == "Counter(0)");
  CHECK_THROWS_AS(
      registry.add("Broken", [](std::string_view) { return Service(std::make_shared<Broken>()); }, "", probes), Error);
  CHECK(conformance_violation(Service(std::make_shared<Broken>()), probes) == "inc");
  CHECK_FALSE(conformance_violation(make_random(), probes));
}

TEST_CASE("service family laws") {
  auto report = testing::family_laws(23, 300);
  INFO(report.summary());
  CHECK(report.ok());
}
