#include "liso/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "liso/numeric.hpp"

namespace liso {

Dataset Dataset::make(std::vector<double> y, std::vector<std::vector<double>> columns,
                      std::vector<double> weights) {
  const std::size_t n = y.size();
  if (n < 2) throw std::invalid_argument("Dataset: need at least 2 observations");
  if (columns.empty()) throw std::invalid_argument("Dataset: need at least one covariate");
  for (const auto& c : columns)
    if (c.size() != n) throw std::invalid_argument("Dataset: column length mismatch");
  if (weights.empty()) weights.assign(n, 1.0);
  if (weights.size() != n) throw std::invalid_argument("Dataset: weight length mismatch");

  for (double v : y)
    if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite response");
  for (const auto& c : columns)
    for (double v : c)
      if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite covariate");
  for (double v : weights)
    if (!(v > 0.0) || !std::isfinite(v))
      throw std::invalid_argument("Dataset: weights must be positive and finite");

  Dataset d;
  d.w_ = std::move(weights);
  CompensatedSum sw;
  for (double v : d.w_) sw.add(v);
  d.w_total_ = sw.value();
  d.y_mean_ = weighted_mean(d.w_, y);
  d.y_ = std::move(y);
  for (double& v : d.y_) v -= d.y_mean_;
  d.columns_ = std::move(columns);

  d.index_.resize(d.columns_.size());
  for (std::size_t k = 0; k < d.columns_.size(); ++k) {
    const auto& x = d.columns_[k];
    auto& idx = d.index_[k];
    idx.order.resize(n);
    std::iota(idx.order.begin(), idx.order.end(), std::uint32_t{0});
    std::stable_sort(idx.order.begin(), idx.order.end(),
                     [&](std::uint32_t a, std::uint32_t b) { return x[a] < x[b]; });
    idx.group_offset.push_back(0);
    std::size_t i = 0;
    while (i < n) {
      std::size_t j = i;
      CompensatedSum gw;
      while (j < n && x[idx.order[j]] == x[idx.order[i]]) {
        gw.add(d.w_[idx.order[j]]);
        ++j;
      }
      idx.distinct_x.push_back(x[idx.order[i]]);
      idx.group_weight.push_back(gw.value());
      idx.group_offset.push_back(static_cast<std::uint32_t>(j));
      i = j;
    }
  }
  return d;
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  if (rows.size() < 2) throw std::invalid_argument("Dataset::subset: need at least 2 rows");
  std::vector<double> y(rows.size()), w(rows.size());
  std::vector<std::vector<double>> cols(p(), std::vector<double>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n()) throw std::invalid_argument("Dataset::subset: row out of range");
    y[i] = response(rows[i]);
    w[i] = w_[rows[i]];
    for (std::size_t k = 0; k < p(); ++k) cols[k][i] = columns_[k][rows[i]];
  }
  return make(std::move(y), std::move(cols), std::move(w));
}

}  // namespace liso
