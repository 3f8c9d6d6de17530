#include <doctest.h>

#include "probthread/error.hpp"
#include "probthread/meadow.hpp"
#include "support/laws.hpp"

using namespace probthread;

namespace {

MeadowValue q(long n, long d) { return MeadowValue(mpz_class(n), mpz_class(d)); }

// cross-multiplication oracle on plain integers
bool frac_less(long a, long b, long c, long d) { return a * d < c * b; }

}  // namespace

TEST_CASE("canonical form") {
  CHECK(q(2, 4) == q(1, 2));
  CHECK(q(3, -6).to_string() == "-1/2");
  CHECK(q(5, 0) == MeadowValue());
  CHECK(q(0, 7).to_string() == "0");
  CHECK(q(4, 2).to_string() == "2");
  CHECK(MeadowValue::parse("-3/4") == q(-3, 4));
  CHECK(MeadowValue::parse("6/8").to_string() == "3/4");
  CHECK_THROWS_AS(MeadowValue::parse("1/0"), ParseError);
  CHECK_THROWS_AS(MeadowValue::parse("1/2x"), ParseError);
  CHECK_THROWS_AS(MeadowValue::parse(""), ParseError);
}

TEST_CASE("arithmetic") {
  CHECK(add(q(1, 2), q(1, 3)) == q(5, 6));
  CHECK(mul(q(2, 3), q(9, 4)) == q(3, 2));
  CHECK(neg(q(1, 5)) == q(-1, 5));
  CHECK(inv(MeadowValue()) == MeadowValue());
  CHECK(inv(q(2, 3)) == q(3, 2));
  CHECK(inv(q(-2, 3)) == q(-3, 2));
  CHECK(q(1, 2) / MeadowValue() == MeadowValue());
  mpz_class big = 1;
  big <<= 200;
  MeadowValue b(big, big + 1);
  CHECK(inv(inv(b)) == b);
}

TEST_CASE("signum and order") {
  CHECK(signum(MeadowValue(-1)) == -1);
  CHECK(signum(MeadowValue()) == 0);
  CHECK(signum(q(7, 3)) == 1);
  CHECK(lt(0, 1));
  CHECK(leq(q(1, 2), q(1, 2)));
  CHECK_FALSE(lt(q(2, 3), q(1, 2)));
  for (long a = -5; a <= 5; ++a) {
    for (long b = 1; b <= 4; ++b) {
      for (long c = -5; c <= 5; ++c) {
        for (long d = 1; d <= 4; ++d) {
          CHECK(lt(q(a, b), q(c, d)) == frac_less(a, b, c, d));
          CHECK(leq(q(a, b), q(c, d)) == !frac_less(c, d, a, b));
        }
      }
    }
  }
}

TEST_CASE("probabilities") {
  CHECK(as_probability(q(1, 2)).value() == q(1, 2));
  CHECK_THROWS_AS(as_probability(q(3, 2)), OutOfRange);
  CHECK_THROWS_AS(as_probability(q(-1, 3)), OutOfRange);
  CHECK(as_probability(MeadowValue()).is_zero());
  CHECK(as_probability(1).is_one());
  CHECK(is_probability(q(1, 3)));
  CHECK_FALSE(is_probability(q(4, 3)));
  CHECK(Probability::parse("1/3").complement().value() == q(2, 3));
  CHECK_THROWS_AS(Probability::parse("5/4"), OutOfRange);
}

TEST_CASE("meadow laws") {
  auto report = testing::meadow_laws(7, 300);
  INFO(report.summary());
  CHECK(report.ok());
}
