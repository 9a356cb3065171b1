#include "liso/pava.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "liso/numeric.hpp"

namespace liso {

bool SortedSeries::has_ties() const {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (x[i] == x[i - 1]) return true;
  return false;
}

namespace {

void validate_series(std::span<const double> x, std::span<const double> y,
                     std::span<const double> w, bool require_sorted) {
  if (x.size() != y.size() || x.size() != w.size())
    throw std::invalid_argument("series: x, y, w differ in length");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
      throw std::invalid_argument("series: non-finite x or y");
    if (!(w[i] > 0.0) || !std::isfinite(w[i]))
      throw std::invalid_argument("series: weights must be positive and finite");
    if (require_sorted && i > 0 && x[i] < x[i - 1])
      throw std::invalid_argument("series: x must be sorted");
  }
}

// near-equality used when fusing fitted levels; absolute floor keeps
// levels straddling zero mergeable
bool levels_equal(double a, double b) {
  return std::abs(a - b) <= 1e-14 * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

SortedSeries merge_ties(std::span<const double> x, std::span<const double> y,
                        std::span<const double> w) {
  validate_series(x, y, w, false);
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });

  SortedSeries s;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    CompensatedSum sw, swy;
    while (j < order.size() && x[order[j]] == x[order[i]]) {
      sw.add(w[order[j]]);
      swy.add(w[order[j]] * y[order[j]]);
      ++j;
    }
    s.x.push_back(x[order[i]]);
    s.y.push_back(swy.value() / sw.value());
    s.w.push_back(sw.value());
    i = j;
  }
  return s;
}

namespace detail {

void pava_pool(std::span<const double> y, std::span<const double> w, PavaBuffers& out) {
  out.clear();
  for (std::size_t i = 0; i < y.size(); ++i) {
    out.level.push_back(y[i]);
    out.weight.push_back(w[i]);
    out.wy.push_back(w[i] * y[i]);
    out.count.push_back(1);
    // pool strictly decreasing neighbours; equal levels stay separate
    while (out.level.size() >= 2 && out.level.back() < out.level[out.level.size() - 2]) {
      std::size_t t = out.level.size() - 1;
      out.weight[t - 1] += out.weight[t];
      out.wy[t - 1] += out.wy[t];
      out.count[t - 1] += out.count[t];
      out.level[t - 1] = out.wy[t - 1] / out.weight[t - 1];
      out.level.pop_back();
      out.weight.pop_back();
      out.wy.pop_back();
      out.count.pop_back();
    }
  }
}

}  // namespace detail

Regressogram pava_fit(const SortedSeries& s) {
  validate_series(s.x, s.y, s.w, true);

  // pre-pool runs of equal x so the fit is single-valued in x
  std::vector<double> gx, gy, gw;
  std::vector<std::size_t> gn;  // series entries per group
  std::size_t i = 0;
  while (i < s.size()) {
    std::size_t j = i;
    CompensatedSum sw, swy;
    while (j < s.size() && s.x[j] == s.x[i]) {
      sw.add(s.w[j]);
      swy.add(s.w[j] * s.y[j]);
      ++j;
    }
    gx.push_back(s.x[i]);
    gy.push_back(swy.value() / sw.value());
    gw.push_back(sw.value());
    gn.push_back(j - i);
    i = j;
  }

  detail::PavaBuffers buf;
  detail::pava_pool(gy, gw, buf);

  // fuse adjacent blocks whose levels coincide up to rounding
  std::vector<double> bw, bwy;
  std::vector<std::size_t> bn;  // groups per block
  for (std::size_t b = 0; b < buf.level.size(); ++b) {
    if (!bw.empty() && levels_equal(bwy.back() / bw.back(), buf.level[b])) {
      bw.back() += buf.weight[b];
      bwy.back() += buf.wy[b];
      bn.back() += buf.count[b];
    } else {
      bw.push_back(buf.weight[b]);
      bwy.push_back(buf.wy[b]);
      bn.push_back(buf.count[b]);
    }
  }

  Regressogram r;
  std::size_t group = 0, series_pos = 0;
  for (std::size_t b = 0; b < bw.size(); ++b) {
    RegressogramBlock blk;
    blk.begin = series_pos;
    blk.x_lo = gx[group];
    blk.x_hi = gx[group + bn[b] - 1];
    for (std::size_t g = 0; g < bn[b]; ++g) series_pos += gn[group + g];
    group += bn[b];
    blk.end = series_pos;
    blk.level = bwy[b] / bw[b];
    blk.weight = bw[b];
    r.blocks.push_back(blk);
  }
  return r;
}

std::vector<double> fitted_values(const Regressogram& r, const SortedSeries& s) {
  if (r.total_points() != s.size())
    throw std::invalid_argument("fitted_values: regressogram does not cover the series");
  std::vector<double> fit(s.size());
  for (const auto& b : r.blocks) {
    if (b.begin > b.end || b.end > s.size())
      throw std::invalid_argument("fitted_values: malformed block ranges");
    for (std::size_t i = b.begin; i < b.end; ++i) fit[i] = b.level;
  }
  return fit;
}

}  // namespace liso
