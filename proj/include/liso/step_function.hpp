#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace liso {

// Right-continuous piecewise-constant function with knots at observed
// covariate values: values[j] on [knots[j], knots[j+1]), values.front()
// below the first knot, values.back() above the last. Immutable; every
// operation returns a new object.
class StepFunction {
public:
  StepFunction() = default;  // empty function, stands in for a zero component
  StepFunction(std::vector<double> knots, std::vector<double> values);

  bool empty() const { return knots_.empty(); }
  std::size_t size() const { return knots_.size(); }
  const std::vector<double>& knots() const { return knots_; }
  const std::vector<double>& values() const { return values_; }

  double operator()(double x) const;       // step evaluation
  double evaluate_linear(double x) const;  // interpolating variant for prediction
  double total_variation() const;
  // Total variation with increments at or below `tol` (relative) ignored;
  // used when deciding whether a component counts as active.
  double total_variation_snapped(double tol = 1e-12) const;
  bool non_decreasing() const;
  bool non_increasing() const;

private:
  std::vector<double> knots_;
  std::vector<double> values_;
};

inline double evaluate(const StepFunction& f, double x) { return f(x); }
inline double total_variation(const StepFunction& f) { return f.total_variation(); }

// Subtracts the weighted mean of the values; knot_weights carries the
// multiplicity of each knot in the data the function was fitted on.
StepFunction center(const StepFunction& f, std::span<const double> knot_weights);

struct SignedParts {
  StepFunction plus;   // non-decreasing
  StepFunction minus;  // non-increasing
};

// Splits f into the running sum of its positive increments and of its
// negative increments, each recentred to weighted mean zero. Increment
// magnitudes within 1e-12 relative of zero count as flat, so a monotone
// input maps to (itself recentred, zero-valued partner).
SignedParts decompose(const StepFunction& f, std::span<const double> knot_weights);

// Pointwise sum; both functions must live on the identical knot grid.
StepFunction add(const StepFunction& a, const StepFunction& b);

}  // namespace liso
