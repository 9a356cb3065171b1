#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace liso {

// One covariate's observations sorted by x. x is non-decreasing; duplicate
// x values are legal and are collapsed by merge_ties before fitting.
struct SortedSeries {
  std::vector<double> x, y, w;
  std::size_t size() const { return x.size(); }
  bool has_ties() const;
};

// Sorts by x and collapses duplicates into single points carrying the
// summed weight and the weighted mean response.
SortedSeries merge_ties(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w);

struct RegressogramBlock {
  std::size_t begin, end;  // [begin, end) index range into the series
  double x_lo, x_hi;       // covariate range covered by the block
  double level;            // weighted mean response of the members
  double weight;           // summed member weight
};

// Non-decreasing step fit as a sequence of constant blocks.
struct Regressogram {
  std::vector<RegressogramBlock> blocks;
  std::size_t total_points() const {
    return blocks.empty() ? 0 : blocks.back().end;
  }
};

// Weighted least-squares isotonic (non-decreasing) regression by
// pool-adjacent-violators. Runs of equal x are pooled up front, so the fit
// is a genuine function of x even when the series still contains ties.
Regressogram pava_fit(const SortedSeries& s);

// Expands a regressogram back to one fitted value per series entry.
std::vector<double> fitted_values(const Regressogram& r, const SortedSeries& s);

namespace detail {

// Block buffers reused across backfitting cycles to avoid reallocation.
// wy keeps the exact weighted response sum so merged levels stay means.
struct PavaBuffers {
  std::vector<double> level, weight, wy;
  std::vector<std::size_t> count;
  void clear() {
    level.clear();
    weight.clear();
    wy.clear();
    count.clear();
  }
};

// Stack pass over pre-merged points: only strict violations are pooled, so
// adjacent blocks that happen to share a level stay separate here. Appends
// one entry per block; count is the number of consumed input points.
void pava_pool(std::span<const double> y, std::span<const double> w, PavaBuffers& out);

}  // namespace detail

}  // namespace liso
