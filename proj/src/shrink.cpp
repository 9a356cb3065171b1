#include "liso/shrink.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liso/numeric.hpp"

namespace liso {

namespace detail {

ThresholdPair thresholds_from_blocks(std::span<const double> levels,
                                     std::span<const double> weights, double lambda) {
  if (levels.empty()) throw std::invalid_argument("thresholds: no blocks");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("thresholds: lambda must be finite and >= 0");
  const std::size_t q = levels.size();

  CompensatedSum sw, swl;
  for (std::size_t b = 0; b < q; ++b) {
    sw.add(weights[b]);
    swl.add(weights[b] * levels[b]);
  }
  const double mean = swl.value() / sw.value();

  CompensatedSum dev;
  for (std::size_t b = 0; b < q; ++b) dev.add(weights[b] * std::abs(levels[b] - mean));
  if (2.0 * lambda >= dev.value()) return {mean, mean, true};

  // upper threshold: walk blocks from the top until the root falls inside
  // the current segment
  double b_thr = levels.back();
  {
    CompensatedSum v, t;
    for (std::size_t k = 1; k <= q; ++k) {
      v.add(weights[q - k]);
      t.add(weights[q - k] * levels[q - k]);
      double cand = (t.value() - lambda) / v.value();
      if (k == q || cand >= levels[q - k - 1]) {
        b_thr = cand;
        break;
      }
    }
  }
  // lower threshold, mirrored from the bottom
  double a_thr = levels.front();
  {
    CompensatedSum v, t;
    for (std::size_t k = 0; k < q; ++k) {
      v.add(weights[k]);
      t.add(weights[k] * levels[k]);
      double cand = (t.value() + lambda) / v.value();
      if (k + 1 == q || cand <= levels[k + 1]) {
        a_thr = cand;
        break;
      }
    }
  }
  return {a_thr, b_thr, false};
}

}  // namespace detail

ThresholdPair thresholds_for(const Regressogram& r, const SortedSeries& s, double lambda) {
  if (r.total_points() != s.size())
    throw std::invalid_argument("thresholds_for: regressogram does not cover the series");
  std::vector<double> levels, weights;
  levels.reserve(r.blocks.size());
  weights.reserve(r.blocks.size());
  for (const auto& b : r.blocks) {
    levels.push_back(b.level);
    weights.push_back(b.weight);
  }
  return detail::thresholds_from_blocks(levels, weights, lambda);
}

StepFunction univariate_liso(const SortedSeries& s, double lambda, double penalty_weight) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("univariate_liso: lambda must be finite and >= 0");
  if (!(penalty_weight > 0.0) || !std::isfinite(penalty_weight))
    throw std::invalid_argument("univariate_liso: penalty_weight must be positive");
  if (s.size() == 0) throw std::invalid_argument("univariate_liso: empty series");

  SortedSeries merged = s.has_ties() ? merge_ties(s.x, s.y, s.w) : s;
  Regressogram r = pava_fit(merged);
  ThresholdPair t = thresholds_for(r, merged, lambda * penalty_weight);

  std::vector<double> values(merged.size());
  for (const auto& b : r.blocks) {
    double v = std::clamp(b.level, t.a, t.b);
    for (std::size_t i = b.begin; i < b.end; ++i) values[i] = v;
  }
  return StepFunction(merged.x, std::move(values));
}

double zero_threshold(const SortedSeries& s) {
  if (s.size() == 0) throw std::invalid_argument("zero_threshold: empty series");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (s.x[i] < s.x[i - 1]) throw std::invalid_argument("zero_threshold: x must be sorted");
  SortedSeries merged = s.has_ties() ? merge_ties(s.x, s.y, s.w) : s;
  double mean = weighted_mean(merged.w, merged.y);
  CompensatedSum partial;
  double best = 0.0;
  for (std::size_t i = 0; i < merged.size(); ++i) {
    partial.add(merged.w[i] * (merged.y[i] - mean));
    best = std::max(best, std::abs(partial.value()));
  }
  return best;
}

}  // namespace liso
