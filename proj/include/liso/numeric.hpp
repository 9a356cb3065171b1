#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>

namespace liso {

// Neumaier-compensated accumulator. Long weighted sums feed the mean
// conservation identity, which has to survive thousands of refit cycles.
class CompensatedSum {
public:
  void add(double v) {
    double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  void add(double w, double v) { add(w * v); }
  double value() const { return sum_ + comp_; }
  void reset() { sum_ = comp_ = 0.0; }

private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double weighted_sum(std::span<const double> w, std::span<const double> v) {
  CompensatedSum s;
  for (std::size_t i = 0; i < v.size(); ++i) s.add(w[i] * v[i]);
  return s.value();
}

inline double weighted_mean(std::span<const double> w, std::span<const double> v) {
  CompensatedSum sw, swv;
  for (std::size_t i = 0; i < v.size(); ++i) {
    sw.add(w[i]);
    swv.add(w[i] * v[i]);
  }
  return swv.value() / sw.value();
}

// Relative comparison against the larger magnitude; values this close are
// treated as ties when merging levels or snapping increments to zero.
inline bool nearly_equal(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

}  // namespace liso
