#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>

namespace probthread {

/// An element of the zero-totalized field of rationals, the signed
/// cancellation meadow every probability in the library lives in.
///
/// Values are kept in lowest terms with a positive denominator, so two values
/// are equal exactly when their (numerator, denominator) pairs are equal.
/// Division is total: x / 0 = x * 0^-1 = 0.
class MeadowValue {
 public:
  MeadowValue() : num_(0), den_(1) {}
  MeadowValue(long value) : num_(value), den_(1) {}  // NOLINT(google-explicit-constructor)
  explicit MeadowValue(mpz_class integer) : num_(std::move(integer)), den_(1) {}

  /// num / den in the meadow sense; a zero denominator yields 0.
  MeadowValue(mpz_class num, mpz_class den);

  static MeadowValue zero() { return MeadowValue(); }
  static MeadowValue one() { return MeadowValue(1); }

  /// Parses `num/den` or `num`, optional leading '-'. Rejects den = 0 and any
  /// trailing characters. Non-canonical input such as `2/4` is accepted and
  /// reduced.
  static MeadowValue parse(std::string_view text);

  const mpz_class& numerator() const { return num_; }
  const mpz_class& denominator() const { return den_; }

  bool is_zero() const { return sgn(num_) == 0; }

  MeadowValue inverse() const;
  /// -1, 0 or 1.
  MeadowValue signum() const;
  int sign() const { return sgn(num_); }

  friend MeadowValue operator+(const MeadowValue& a, const MeadowValue& b);
  friend MeadowValue operator-(const MeadowValue& a, const MeadowValue& b);
  friend MeadowValue operator*(const MeadowValue& a, const MeadowValue& b);
  friend MeadowValue operator/(const MeadowValue& a, const MeadowValue& b) {
    return a * b.inverse();
  }
  friend MeadowValue operator-(const MeadowValue& a);

  MeadowValue& operator+=(const MeadowValue& other) { return *this = *this + other; }
  MeadowValue& operator-=(const MeadowValue& other) { return *this = *this - other; }
  MeadowValue& operator*=(const MeadowValue& other) { return *this = *this * other; }

  friend bool operator==(const MeadowValue& a, const MeadowValue& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  /// Numeric order (agrees with lt/leq).
  friend std::strong_ordering operator<=>(const MeadowValue& a, const MeadowValue& b);

  /// `num/den`, den omitted when 1, sign on the numerator.
  std::string to_string() const;
  double to_double() const;

  std::size_t hash() const;

 private:
  void canonicalize();

  mpz_class num_;
  mpz_class den_;
};

std::ostream& operator<<(std::ostream& os, const MeadowValue& value);

inline MeadowValue add(const MeadowValue& a, const MeadowValue& b) { return a + b; }
inline MeadowValue mul(const MeadowValue& a, const MeadowValue& b) { return a * b; }
inline MeadowValue neg(const MeadowValue& a) { return -a; }
inline MeadowValue inv(const MeadowValue& a) { return a.inverse(); }
inline MeadowValue signum(const MeadowValue& a) { return a.signum(); }

/// a < b  iff  sign(b - a) = 1
bool lt(const MeadowValue& a, const MeadowValue& b);
/// a <= b  iff  sign(sign(b - a) + 1) = 1
bool leq(const MeadowValue& a, const MeadowValue& b);

/// sign(sign(v) + 1) * sign(sign(1 - v) + 1) = 1, i.e. 0 <= v <= 1.
bool is_probability(const MeadowValue& v);

/// A meadow value known to lie in [0, 1].
class Probability {
 public:
  Probability() = default;

  /// Throws OutOfRange if `value` is outside [0, 1].
  explicit Probability(MeadowValue value);

  static Probability zero() { return Probability(); }
  static Probability one() { return Probability(MeadowValue::one()); }
  /// Parses the meadow textual format and checks the range.
  static Probability parse(std::string_view text);

  const MeadowValue& value() const { return value_; }
  /// 1 - p
  Probability complement() const;

  bool is_zero() const { return value_.is_zero(); }
  bool is_one() const { return value_ == MeadowValue::one(); }

  std::string to_string() const { return value_.to_string(); }

  friend bool operator==(const Probability&, const Probability&) = default;
  friend std::strong_ordering operator<=>(const Probability& a, const Probability& b) {
    return a.value_ <=> b.value_;
  }

 private:
  MeadowValue value_;
};

/// Throws OutOfRange when the value is not a probability.
Probability as_probability(const MeadowValue& value);

std::ostream& operator<<(std::ostream& os, const Probability& p);

}  // namespace probthread

template <>
struct std::hash<probthread::MeadowValue> {
  std::size_t operator()(const probthread::MeadowValue& v) const noexcept { return v.hash(); }
};
