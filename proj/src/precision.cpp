#include "mlat/precision.hpp"

#include "mlat/errors.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace mlat::mp {
namespace {

namespace bmp = boost::multiprecision;

// 10^154 < 2^512 < 10^155.
constexpr int kMaxPow = 154;
// Widest exact alignment in add(): result may carry one more digit.
constexpr int kAlignLimit = 152;

struct Tables {
  std::array<Coefficient, kMaxPow + 1> pow10;
  std::array<Coefficient, kMaxPow + 1> half;  // 5 * 10^(k-1), half[0] unused

  Tables() {
    pow10[0] = 1;
    for (int k = 1; k <= kMaxPow; ++k) {
      pow10[k] = pow10[k - 1] * 10u;
      half[k] = pow10[k - 1] * 5u;
    }
  }
};

const Tables& tables() {
  static const Tables t;
  return t;
}

const Coefficient& pow10(int k) { return tables().pow10[k]; }

std::strong_ordering compare(const Coefficient& a, const Coefficient& b) {
  const int c = a.compare(b);
  if (c < 0) return std::strong_ordering::less;
  if (c > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

int count_digits(const Coefficient& c) {
  if (c.is_zero()) return 0;
  const unsigned bits = bmp::msb(c) + 1;
  const int t = static_cast<int>((bits * 1233u) >> 12);
  return t + (c >= pow10(t) ? 1 : 0);
}

// Round an exact magnitude (plus an optional sticky fraction strictly below
// its last digit) to `digits` significant digits. When sticky is set the
// caller guarantees at least digits + 1 digits in c.
void round_magnitude(Coefficient& c, int& exponent, bool sticky, int digits) {
  const int n = count_digits(c);
  if (n <= digits) return;
  const int k = n - digits;
  Coefficient q;
  Coefficient r;
  bmp::divide_qr(c, pow10(k), q, r);
  const Coefficient& half = tables().half[k];
  bool up = false;
  if (r > half) {
    up = true;
  } else if (r == half) {
    up = sticky || bmp::bit_test(q, 0);
  }
  exponent += k;
  if (up) {
    ++q;
    if (q == pow10(digits)) {
      q = pow10(digits - 1);
      ++exponent;
    }
  }
  c = std::move(q);
}

}  // namespace

// ---------------------------------------------------------------- Value

Value::Value(bool negative, Coefficient coefficient, int exponent)
    : coefficient_(std::move(coefficient)), exponent_(exponent), negative_(negative) {
  if (coefficient_.is_zero()) {
    exponent_ = 0;
    negative_ = false;
  }
}

int Value::digit_count() const { return count_digits(coefficient_); }

Value Value::parse(std::string_view text) {
  const std::string_view original = text;
  auto fail = [&]() -> Value {
    throw ConfigError("malformed decimal number '" + std::string(original) + "'");
  };
  if (text.empty()) return fail();

  bool negative = false;
  if (text.front() == '+' || text.front() == '-') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }

  Coefficient c = 0;
  int exponent = 0;
  int kept = 0;
  bool sticky = false;
  bool any_digit = false;
  bool seen_point = false;
  // Keep one guard digit beyond kMaxDigits; the rest only contributes stickiness.
  size_t pos = 0;
  for (; pos < text.size(); ++pos) {
    const char ch = text[pos];
    if (ch == '.') {
      if (seen_point) return fail();
      seen_point = true;
      continue;
    }
    if (ch < '0' || ch > '9') break;
    any_digit = true;
    const int d = ch - '0';
    if (kept == 0 && d == 0) {
      if (seen_point) --exponent;
      continue;
    }
    if (kept <= kMaxDigits) {
      c = c * 10u + static_cast<unsigned>(d);
      ++kept;
      if (seen_point) --exponent;
    } else {
      if (d != 0) sticky = true;
      if (!seen_point) ++exponent;
    }
  }
  if (!any_digit) return fail();

  if (pos < text.size()) {
    if (text[pos] != 'e' && text[pos] != 'E') return fail();
    ++pos;
    std::string_view exp_text = text.substr(pos);
    if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
    int e = 0;
    const auto [ptr, ec] = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), e);
    if (ec != std::errc{} || ptr != exp_text.data() + exp_text.size() || exp_text.empty()) return fail();
    if (e > 100000 || e < -100000) throw ConfigError("decimal exponent out of range in '" + std::string(original) + "'");
    exponent += e;
  }

  if (c.is_zero()) return Value();
  round_magnitude(c, exponent, sticky, kMaxDigits);
  return Value(negative, std::move(c), exponent);
}

Value Value::from_double(double x) {
  if (!std::isfinite(x)) throw DomainError("cannot convert a non-finite double to a decimal value");
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc{}) throw std::logic_error("to_chars failed");
  return parse(std::string_view(buf, static_cast<size_t>(ptr - buf)));
}

Value Value::from_integer(long long n) {
  const bool negative = n < 0;
  const unsigned long long mag = negative ? 0ull - static_cast<unsigned long long>(n) : static_cast<unsigned long long>(n);
  return Value(negative, Coefficient(mag), 0);
}

Value Value::power_of_ten(int e) { return Value(false, Coefficient(1u), e); }

Value Value::scaled(int k) const {
  if (is_zero()) return *this;
  return Value(negative_, coefficient_, exponent_ + k);
}

Value Value::operator-() const {
  Value v = *this;
  if (!v.is_zero()) v.negative_ = !v.negative_;
  return v;
}

Value Value::abs() const {
  Value v = *this;
  v.negative_ = false;
  return v;
}

std::string Value::to_string() const {
  if (is_zero()) return "0";
  const std::string digits = coefficient_.str();
  std::string out;
  if (negative_) out += '-';
  out += digits[0];
  if (digits.size() > 1) {
    out += '.';
    out.append(digits, 1, std::string::npos);
  }
  const int sci_exponent = exponent_ + static_cast<int>(digits.size()) - 1;
  if (sci_exponent != 0) {
    out += 'e';
    out += std::to_string(sci_exponent);
  }
  return out;
}

double Value::to_double() const {
  if (is_zero()) return 0.0;
  std::string s = coefficient_.str();
  s += 'e';
  s += std::to_string(exponent_);
  double x = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
  if (ec == std::errc::result_out_of_range) {
    // from_chars leaves x untouched on range errors.
    x = exponent_ > 0 ? HUGE_VAL : 0.0;
  } else if (ec != std::errc{}) {
    throw std::logic_error("from_chars failed on '" + s + "'");
  }
  return negative_ ? -x : x;
}

std::strong_ordering operator<=>(const Value& a, const Value& b) {
  if (a.is_zero() && b.is_zero()) return std::strong_ordering::equal;
  if (a.is_zero()) return b.negative_ ? std::strong_ordering::greater : std::strong_ordering::less;
  if (b.is_zero()) return a.negative_ ? std::strong_ordering::less : std::strong_ordering::greater;
  if (a.negative_ != b.negative_) return a.negative_ ? std::strong_ordering::less : std::strong_ordering::greater;

  // Same sign: compare magnitudes, then flip for negatives.
  std::strong_ordering mag = std::strong_ordering::equal;
  const int na = a.digit_count();
  const int nb = b.digit_count();
  const int top_a = a.exponent_ + na;
  const int top_b = b.exponent_ + nb;
  if (top_a != top_b) {
    mag = top_a <=> top_b;
  } else if (a.exponent_ >= b.exponent_) {
    const Coefficient scaled = a.coefficient_ * pow10(a.exponent_ - b.exponent_);
    mag = compare(scaled, b.coefficient_);
  } else {
    const Coefficient scaled = b.coefficient_ * pow10(b.exponent_ - a.exponent_);
    mag = compare(a.coefficient_, scaled);
  }
  if (a.negative_) {
    if (mag == std::strong_ordering::less) return std::strong_ordering::greater;
    if (mag == std::strong_ordering::greater) return std::strong_ordering::less;
  }
  return mag;
}

const char* to_string(OpKind kind) {
  switch (kind) {
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::div: return "div";
    case OpKind::sqrt: return "sqrt";
  }
  return "?";
}

// ---------------------------------------------------------------- Context

Context::Context(int digits) : digits_(digits) {
  if (digits < kMinDigits || digits > kMaxDigits) {
    throw ConfigError("precision of " + std::to_string(digits) + " digits is outside the supported range [" +
                      std::to_string(kMinDigits) + ", " + std::to_string(kMaxDigits) + "]");
  }
}

Context make_context(int digits) { return Context(digits); }

Value Context::round_exact(bool negative, Coefficient c, int exponent, bool sticky) const {
  round_magnitude(c, exponent, sticky, digits_);
  return Value(negative, std::move(c), exponent);
}

Value Context::round(const Value& x) const {
  if (x.digit_count() <= digits_) return x;
  return round_exact(x.negative_, x.coefficient_, x.exponent_, false);
}

Value Context::add(const Value& a, const Value& b) const {
  if (a.is_zero()) return round(b);
  if (b.is_zero()) return round(a);

  // x has the larger (or equal) exponent.
  const bool a_first = a.exponent_ >= b.exponent_;
  const Value& x = a_first ? a : b;
  const Value& y = a_first ? b : a;
  const int shift = x.exponent_ - y.exponent_;
  const int nx = x.digit_count();
  const bool same_sign = x.negative_ == y.negative_;

  if (shift + nx <= kAlignLimit) {
    Coefficient xs = x.coefficient_ * pow10(shift);
    if (same_sign) return round_exact(x.negative_, xs + y.coefficient_, y.exponent_, false);
    if (xs >= y.coefficient_) return round_exact(x.negative_, xs - y.coefficient_, y.exponent_, false);
    return round_exact(y.negative_, y.coefficient_ - xs, y.exponent_, false);
  }

  // y lies entirely below one unit of the last digit of the widened x; it only
  // decides the direction of rounding.
  const int s = std::max(0, digits_ + 2 - nx);
  Coefficient xs = x.coefficient_ * pow10(s);
  if (same_sign) return round_exact(x.negative_, std::move(xs), x.exponent_ - s, true);
  --xs;
  return round_exact(x.negative_, std::move(xs), x.exponent_ - s, true);
}

Value Context::sub(const Value& a, const Value& b) const { return add(a, -b); }

Value Context::mul(const Value& a, const Value& b) const {
  if (a.is_zero() || b.is_zero()) return Value();
  return round_exact(a.negative_ != b.negative_, a.coefficient_ * b.coefficient_, a.exponent_ + b.exponent_, false);
}

Value Context::div(const Value& a, const Value& b) const {
  if (b.is_zero()) throw DomainError("div: division by zero");
  if (a.is_zero()) return Value();
  const int na = a.digit_count();
  const int nb = b.digit_count();
  const int k = std::max(0, digits_ + 2 + nb - na);
  Coefficient q;
  Coefficient r;
  bmp::divide_qr(Coefficient(a.coefficient_ * pow10(k)), b.coefficient_, q, r);
  return round_exact(a.negative_ != b.negative_, std::move(q), a.exponent_ - b.exponent_ - k, !r.is_zero());
}

Value Context::sqrt(const Value& a) const {
  if (a.is_zero()) return Value();
  if (a.negative_) throw DomainError("sqrt: negative argument " + a.to_string());
  const int n = a.digit_count();
  int k = std::max(0, 2 * digits_ + 3 - n);
  if (((a.exponent_ - k) % 2) != 0) ++k;
  Coefficient r;
  Coefficient root = bmp::sqrt(Coefficient(a.coefficient_ * pow10(k)), r);
  return round_exact(false, std::move(root), (a.exponent_ - k) / 2, !r.is_zero());
}

Value Context::op(OpKind kind, const Value& a, const std::optional<Value>& b) const {
  if (kind != OpKind::sqrt && !b) {
    throw std::invalid_argument(std::string(to_string(kind)) + ": missing second operand");
  }
  switch (kind) {
    case OpKind::add: return add(a, *b);
    case OpKind::sub: return sub(a, *b);
    case OpKind::mul: return mul(a, *b);
    case OpKind::div: return div(a, *b);
    case OpKind::sqrt: return sqrt(a);
  }
  throw std::invalid_argument("unknown operation");
}

// ---------------------------------------------------------------- Real

void Real::check_same(const Real& b) const {
  if (digits_ != b.digits_) {
    throw std::logic_error("mixed-precision arithmetic: " + std::to_string(digits_) + " vs " +
                           std::to_string(b.digits_) + " digits");
  }
}

Real& Real::operator+=(const Real& b) {
  check_same(b);
  value_ = Context(digits_).add(value_, b.value_);
  return *this;
}

Real& Real::operator-=(const Real& b) {
  check_same(b);
  value_ = Context(digits_).sub(value_, b.value_);
  return *this;
}

Real& Real::operator*=(const Real& b) {
  check_same(b);
  value_ = Context(digits_).mul(value_, b.value_);
  return *this;
}

Real& Real::operator/=(const Real& b) {
  check_same(b);
  value_ = Context(digits_).div(value_, b.value_);
  return *this;
}

Real sqrt(const Real& a) { return Real(Context(a.digits_).sqrt(a.value_), a.digits_); }

}  // namespace mlat::mp
