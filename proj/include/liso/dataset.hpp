#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace liso {

enum class Direction { increasing, decreasing, unconstrained };

// Immutable fitting problem: centred response, covariate columns,
// observation weights, and per-covariate sort/tie structure built once so
// refit cycles never re-sort.
class Dataset {
public:
  static Dataset make(std::vector<double> y,
                      std::vector<std::vector<double>> columns,
                      std::vector<double> weights = {});

  std::size_t n() const { return y_.size(); }
  std::size_t p() const { return columns_.size(); }

  // response minus its weighted mean; fitting happens on this scale
  const std::vector<double>& y_centered() const { return y_; }
  double y_mean() const { return y_mean_; }
  double response(std::size_t i) const { return y_[i] + y_mean_; }
  const std::vector<double>& weights() const { return w_; }
  double weight_total() const { return w_total_; }
  const std::vector<double>& column(std::size_t k) const { return columns_[k]; }
  const std::vector<std::vector<double>>& columns() const { return columns_; }

  struct CovariateIndex {
    std::vector<std::uint32_t> order;         // observation ids, ascending x
    std::vector<std::uint32_t> group_offset;  // m+1 offsets into order
    std::vector<double> distinct_x;           // m strictly increasing values
    std::vector<double> group_weight;         // summed weight per distinct x
    std::size_t groups() const { return distinct_x.size(); }
  };
  const CovariateIndex& covariate_index(std::size_t k) const { return index_[k]; }

  // Rows re-packed into a fresh problem (y recentred on the subset).
  Dataset subset(std::span<const std::size_t> rows) const;

private:
  Dataset() = default;
  std::vector<double> y_;
  std::vector<std::vector<double>> columns_;
  std::vector<double> w_;
  std::vector<CovariateIndex> index_;
  double y_mean_ = 0.0;
  double w_total_ = 0.0;
};

}  // namespace liso
