#pragma once

// Decimal floating-point arithmetic with a runtime number of significant digits.
//
// A Value is sign * coefficient * 10^exponent with an integer coefficient of at
// most kMaxDigits decimal digits. A Context rounds the exact result of every
// add/sub/mul/div/sqrt to `digits` significant decimal digits, round-to-nearest
// with ties-to-even. Intermediate results are held exactly in a 512-bit integer
// (or carry a sticky bit when an operand falls entirely below the rounding
// position), so each operation is correctly rounded: there is no binary
// intermediate and no double rounding.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace mlat::mp {

inline constexpr int kMinDigits = 4;
inline constexpr int kMaxDigits = 50;

using Coefficient = boost::multiprecision::uint512_t;

class Context;

class Value {
 public:
  /// Zero.
  Value() = default;

  /// Exact decimal text such as "-12.5e-3". Inputs longer than kMaxDigits
  /// significant digits are rounded to kMaxDigits.
  static Value parse(std::string_view text);

  /// The shortest decimal string that round-trips to `x`. Non-finite input throws.
  static Value from_double(double x);

  static Value from_integer(long long n);

  /// 10^e, exactly.
  static Value power_of_ten(int e);

  bool is_zero() const { return coefficient_.is_zero(); }
  bool negative() const { return negative_; }
  const Coefficient& coefficient() const { return coefficient_; }
  int exponent() const { return exponent_; }
  int digit_count() const;

  /// The same value scaled by 10^k (exact).
  Value scaled(int k) const;

  Value operator-() const;
  Value abs() const;

  /// Nearest double.
  double to_double() const;

  /// Plain scientific form with every stored digit, e.g. "-1.2500e-3".
  std::string to_string() const;

  friend std::strong_ordering operator<=>(const Value& a, const Value& b);
  friend bool operator==(const Value& a, const Value& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  friend class Context;
  Value(bool negative, Coefficient coefficient, int exponent);

  Coefficient coefficient_{};
  int exponent_ = 0;
  bool negative_ = false;
};

enum class OpKind { add, sub, mul, div, sqrt };

const char* to_string(OpKind kind);

/// Immutable rounding context. Cheap to copy; holds no shared state.
class Context {
 public:
  /// Throws ConfigError when digits is outside [kMinDigits, kMaxDigits].
  explicit Context(int digits);

  int digits() const { return digits_; }

  /// Nearest value with at most `digits` significant digits.
  Value round(const Value& x) const;

  Value add(const Value& a, const Value& b) const;
  Value sub(const Value& a, const Value& b) const;
  Value mul(const Value& a, const Value& b) const;
  /// Throws DomainError on b == 0.
  Value div(const Value& a, const Value& b) const;
  /// Throws DomainError on a < 0.
  Value sqrt(const Value& a) const;

  /// Dispatch by kind; `b` is required for the binary kinds and ignored by sqrt.
  Value op(OpKind kind, const Value& a, const std::optional<Value>& b = std::nullopt) const;

  friend bool operator==(const Context&, const Context&) = default;

 private:
  Value round_exact(bool negative, Coefficient c, int exponent, bool sticky) const;

  int digits_;
};

Context make_context(int digits);

/// A Value bound to the precision it was computed in, with arithmetic
/// operators. Mixing Reals of different precision throws std::logic_error.
class Real {
 public:
  Real(const Context& ctx, const Value& v) : value_(ctx.round(v)), digits_(ctx.digits()) {}
  Real(const Context& ctx, long long n) : Real(ctx, Value::from_integer(n)) {}

  const Value& value() const { return value_; }
  int digits() const { return digits_; }
  Context context() const { return Context(digits_); }
  double to_double() const { return value_.to_double(); }
  bool is_zero() const { return value_.is_zero(); }

  Real operator-() const { return Real(-value_, digits_); }
  Real& operator+=(const Real& b);
  Real& operator-=(const Real& b);
  Real& operator*=(const Real& b);
  Real& operator/=(const Real& b);

  friend Real operator+(Real a, const Real& b) { return a += b; }
  friend Real operator-(Real a, const Real& b) { return a -= b; }
  friend Real operator*(Real a, const Real& b) { return a *= b; }
  friend Real operator/(Real a, const Real& b) { return a /= b; }
  friend Real sqrt(const Real& a);
  friend Real abs(const Real& a) { return Real(a.value_.abs(), a.digits_); }

  friend std::strong_ordering operator<=>(const Real& a, const Real& b) { return a.value_ <=> b.value_; }
  friend bool operator==(const Real& a, const Real& b) { return a.value_ == b.value_; }

 private:
  Real(Value v, int digits) : value_(std::move(v)), digits_(digits) {}
  void check_same(const Real& b) const;

  Value value_;
  int digits_;
};

}  // namespace mlat::mp
