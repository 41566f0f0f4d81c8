#pragma once

#include <cmath>
#include <limits>

namespace koethe {

// Nonnegative extended-real scalar stored as its natural logarithm.
//
// Weight families produce quantities like 2^((k*j)^i) whose logarithms
// already overflow double at modest depths, so the payload is a long
// double (80-bit extended on x86-64, good to about 1e4932).  A stored
// log of -inf means the value 0, +inf means the value +infinity.
//
// Division follows the convention x/0 = +inf for every x >= 0 (including
// 0/0), and x + inf = inf.  These match how sublevel ratios and padded
// sums are used downstream; they are not IEEE semantics.
class LogValue {
public:
  constexpr LogValue() : log_(-inf_) {}  // the value 0

  static LogValue from_log(long double l) {
    LogValue v;
    v.log_ = std::isnan(l) ? -inf_ : l;
    return v;
  }
  static LogValue from_value(long double x) {
    LogValue v;
    if (x <= 0.0L) return v;  // negatives clamp to zero; callers validate signs
    v.log_ = std::log(x);
    return v;
  }
  static constexpr LogValue zero() { return LogValue(); }
  static LogValue one() { return from_log(0.0L); }
  static LogValue infinity() { return from_log(inf_); }

  bool is_zero() const { return log_ == -inf_; }
  bool is_infinite() const { return log_ == inf_; }
  bool is_finite() const { return !is_zero() && !is_infinite(); }

  long double log() const { return log_; }
  double log_d() const { return static_cast<double>(log_); }
  long double value() const { return is_zero() ? 0.0L : std::exp(log_); }
  double value_d() const { return static_cast<double>(value()); }

  friend LogValue operator*(LogValue a, LogValue b) {
    if (a.is_zero() || b.is_zero()) return zero();
    return from_log(a.log_ + b.log_);
  }
  friend LogValue operator/(LogValue a, LogValue b) {
    if (b.is_zero()) return infinity();  // x/0 = +inf, including 0/0
    if (a.is_zero()) return zero();
    if (a.is_infinite()) return infinity();
    if (b.is_infinite()) return zero();
    return from_log(a.log_ - b.log_);
  }
  // Log-sum-exp addition; exact at the extremes, stable in between.
  friend LogValue operator+(LogValue a, LogValue b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_infinite() || b.is_infinite()) return infinity();
    long double hi = a.log_, lo = b.log_;
    if (hi < lo) std::swap(hi, lo);
    return from_log(hi + std::log1p(std::exp(lo - hi)));
  }

  // v^t with 0^0 = 1 and 0^t = +inf for t < 0 (the 1/0 convention).
  LogValue pow(long double t) const {
    if (t == 0.0L) return one();
    if (is_zero()) return t > 0.0L ? zero() : infinity();
    if (is_infinite()) return t > 0.0L ? infinity() : zero();
    return from_log(log_ * t);
  }

  friend bool operator==(LogValue a, LogValue b) { return a.log_ == b.log_; }
  friend bool operator!=(LogValue a, LogValue b) { return a.log_ != b.log_; }
  friend bool operator<(LogValue a, LogValue b) { return a.log_ < b.log_; }
  friend bool operator<=(LogValue a, LogValue b) { return a.log_ <= b.log_; }
  friend bool operator>(LogValue a, LogValue b) { return a.log_ > b.log_; }
  friend bool operator>=(LogValue a, LogValue b) { return a.log_ >= b.log_; }

  static LogValue max(LogValue a, LogValue b) { return a < b ? b : a; }
  static LogValue min(LogValue a, LogValue b) { return a < b ? a : b; }

private:
  static constexpr long double inf_ = std::numeric_limits<long double>::infinity();
  long double log_;
};

}  // namespace koethe
