#pragma once

#include <cmath>

namespace bdm {

/// Neumaier-compensated running sum. Summation order is the call order, so
/// results are deterministic for a fixed sequence of additions.
class CompensatedSum {
 public:
  void add(double x) noexcept {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }

  CompensatedSum& operator+=(double x) noexcept {
    add(x);
    return *this;
  }

  [[nodiscard]] double value() const noexcept { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

}  // namespace bdm

namespace bdm {

/// Unevaluated sum hi + lo carrying roughly twice the working precision.
struct DoubleDouble {
  double hi = 0.0;
  double lo = 0.0;

  [[nodiscard]] double value() const noexcept { return hi + lo; }
};

[[nodiscard]] inline DoubleDouble two_sum(double a, double b) noexcept {
  const double s = a + b;
  const double bb = s - a;
  const double err = (a - (s - bb)) + (b - bb);
  return {s, err};
}

[[nodiscard]] inline DoubleDouble two_prod(double a, double b) noexcept {
  const double p = a * b;
  return {p, std::fma(a, b, -p)};
}

[[nodiscard]] inline DoubleDouble operator+(DoubleDouble x, double y) noexcept {
  DoubleDouble s = two_sum(x.hi, y);
  s.lo += x.lo;
  return two_sum(s.hi, s.lo);
}

[[nodiscard]] inline DoubleDouble operator+(DoubleDouble x, DoubleDouble y) noexcept {
  DoubleDouble s = two_sum(x.hi, y.hi);
  s.lo += x.lo + y.lo;
  return two_sum(s.hi, s.lo);
}

/// exp(hi + lo) with the low part folded in to first order.
[[nodiscard]] inline double exp(DoubleDouble x) noexcept { return std::exp(x.hi) * (1.0 + x.lo); }

}  // namespace bdm
