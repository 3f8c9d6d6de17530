#include "probthread/meadow.hpp"

#include <cctype>

#include "probthread/error.hpp"

namespace probthread {

MeadowValue::MeadowValue(mpz_class num, mpz_class den) : num_(std::move(num)), den_(std::move(den)) {
  if (sgn(den_) == 0) {
    num_ = 0;
    den_ = 1;
    return;
  }
  canonicalize();
}

void MeadowValue::canonicalize() {
  if (sgn(den_) < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  if (sgn(num_) == 0) {
    den_ = 1;
    return;
  }
  mpz_class g;
  mpz_gcd(g.get_mpz_t(), num_.get_mpz_t(), den_.get_mpz_t());
  if (g != 1) {
    mpz_divexact(num_.get_mpz_t(), num_.get_mpz_t(), g.get_mpz_t());
    mpz_divexact(den_.get_mpz_t(), den_.get_mpz_t(), g.get_mpz_t());
  }
}

namespace {

bool parse_digits(std::string_view text, std::size_t& pos, mpz_class& out) {
  std::size_t start = pos;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
  if (pos == start) return false;
  out.set_str(std::string(text.substr(start, pos - start)), 10);
  return true;
}

}  // namespace

MeadowValue MeadowValue::parse(std::string_view text) {
  std::size_t pos = 0;
  bool negative = false;
  if (pos < text.size() && text[pos] == '-') {
    negative = true;
    ++pos;
  }
  mpz_class num;
  if (!parse_digits(text, pos, num)) throw ParseError("expected digits in rational", pos);
  mpz_class den = 1;
  if (pos < text.size() && text[pos] == '/') {
    ++pos;
    if (!parse_digits(text, pos, den)) throw ParseError("expected denominator in rational", pos);
    if (sgn(den) == 0) throw ParseError("zero denominator in rational", pos - 1);
  }
  if (pos != text.size()) throw ParseError("unexpected character in rational", pos);
  if (negative) num = -num;
  return MeadowValue(std::move(num), std::move(den));
}

MeadowValue MeadowValue::inverse() const {
  MeadowValue result;
  if (is_zero()) return result;
  result.num_ = den_;
  result.den_ = num_;
  result.canonicalize();
  return result;
}

MeadowValue MeadowValue::signum() const { return MeadowValue(static_cast<long>(sgn(num_))); }

MeadowValue operator+(const MeadowValue& a, const MeadowValue& b) {
  if (a.den_ == b.den_) return MeadowValue(a.num_ + b.num_, a.den_);
  return MeadowValue(a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_);
}

MeadowValue operator-(const MeadowValue& a, const MeadowValue& b) { return a + (-b); }

MeadowValue operator*(const MeadowValue& a, const MeadowValue& b) {
  return MeadowValue(a.num_ * b.num_, a.den_ * b.den_);
}

MeadowValue operator-(const MeadowValue& a) {
  MeadowValue result = a;
  result.num_ = -result.num_;
  return result;
}

std::strong_ordering operator<=>(const MeadowValue& a, const MeadowValue& b) {
  int c = (a.den_ == b.den_) ? cmp(a.num_, b.num_) : cmp(a.num_ * b.den_, b.num_ * a.den_);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::string MeadowValue::to_string() const {
  if (den_ == 1) return num_.get_str();
  return num_.get_str() + "/" + den_.get_str();
}

double MeadowValue::to_double() const {
  mpq_class q(num_, den_);
  return q.get_d();
}

std::size_t MeadowValue::hash() const {
  std::size_t h = std::hash<std::string>{}(num_.get_str(16));
  h ^= std::hash<std::string>{}(den_.get_str(16)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::ostream& operator<<(std::ostream& os, const MeadowValue& value) { return os << value.to_string(); }

bool lt(const MeadowValue& a, const MeadowValue& b) { return (b - a).signum() == MeadowValue(1); }

bool leq(const MeadowValue& a, const MeadowValue& b) {
  return ((b - a).signum() + MeadowValue(1)).signum() == MeadowValue(1);
}

bool is_probability(const MeadowValue& v) {
  const MeadowValue one(1);
  MeadowValue lower = (v.signum() + one).signum();
  MeadowValue upper = ((one - v).signum() + one).signum();
  return lower * upper == one;
}

Probability::Probability(MeadowValue value) : value_(std::move(value)) {
  if (!is_probability(value_)) throw OutOfRange("value " + value_.to_string() + " is not in [0,1]");
}

Probability Probability::parse(std::string_view text) { return Probability(MeadowValue::parse(text)); }

Probability Probability::complement() const { return Probability(MeadowValue::one() - value_); }

Probability as_probability(const MeadowValue& value) { return Probability(value); }

std::ostream& operator<<(std::ostream& os, const Probability& p) { return os << p.value(); }

}  // namespace probthread
