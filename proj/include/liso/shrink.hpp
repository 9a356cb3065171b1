#pragma once

#include <span>

#include "liso/pava.hpp"
#include "liso/step_function.hpp"

namespace liso {

// Clipping levels for the penalised univariate fit: block levels are
// winsorized to [a, b]. a and b absorb exactly lambda of weighted mass
// from each end, which keeps the weighted mean of the fit unchanged.
struct ThresholdPair {
  double a, b;
  bool at_mean;  // penalty large enough that the fit collapses to the mean
};

// Solves sum_b W_b (L_b - b)_+ = lambda and sum_b W_b (a - L_b)_+ = lambda
// over the regressogram's levels. Exact piecewise-linear roots. When
// 2*lambda >= sum_b W_b |L_b - mean| the fit is the constant mean (ties
// included), reported with at_mean = true and a = b = mean.
ThresholdPair thresholds_for(const Regressogram& r, const SortedSeries& s, double lambda);

// One-dimensional penalised isotonic fit: the isotonic regression
// winsorized at the thresholds for lambda * penalty_weight. Ties in x are
// merged first; knots are the distinct x values.
StepFunction univariate_liso(const SortedSeries& s, double lambda,
                             double penalty_weight = 1.0);

// Smallest penalty guaranteed to flatten the fit:
// max_m |sum_{i<=m} w_i (y_i - ybar)| over the sorted series.
double zero_threshold(const SortedSeries& s);

namespace detail {

// Same computation on raw block arrays; levels must be non-decreasing.
ThresholdPair thresholds_from_blocks(std::span<const double> levels,
                                     std::span<const double> weights, double lambda);

}  // namespace detail

}  // namespace liso
