#include "liso/backfit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "liso/numeric.hpp"
#include "liso/pava.hpp"
#include "liso/rng.hpp"
#include "liso/shrink.hpp"

namespace liso {

void LisoConfig::validate(std::size_t p) const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("config: lambda must be finite and >= 0");
  if (!penalty_weights.empty()) {
    if (penalty_weights.size() != p)
      throw std::invalid_argument("config: penalty_weights length mismatch");
    for (double w : penalty_weights)
      if (std::isnan(w) || w < 0.0)
        throw std::invalid_argument(
            "config: penalty weights must be >= 0 (0 unpenalised, inf drops)");
  }
  if (!directions.empty() && directions.size() != p)
    throw std::invalid_argument("config: directions length mismatch");
  if (!(tol_loss > 0.0) || !(tol_change > 0.0))
    throw std::invalid_argument("config: tolerances must be positive");
  if (max_cycles < 1) throw std::invalid_argument("config: max_cycles must be >= 1");
}

bool AdditiveModel::component_active(std::size_t k, double tol) const {
  return !components[k].empty() && components[k].total_variation_snapped(tol) > 0.0;
}

std::size_t AdditiveModel::active_count(double tol) const {
  std::size_t c = 0;
  for (std::size_t k = 0; k < components.size(); ++k)
    if (component_active(k, tol)) ++c;
  return c;
}

std::size_t AdditiveModel::step_count(std::size_t k, double tol) const {
  const auto& f = components[k];
  if (f.empty()) return 0;
  double scale = 1.0;
  for (double v : f.values()) scale = std::max(scale, std::abs(v));
  std::size_t steps = 0;
  for (std::size_t j = 1; j < f.size(); ++j)
    if (std::abs(f.values()[j] - f.values()[j - 1]) > tol * scale) ++steps;
  return steps;
}

namespace detail {

std::vector<SubColumn> subcolumns_for(const Dataset& d, const LisoConfig& c) {
  std::vector<SubColumn> cols;
  for (std::size_t k = 0; k < d.p(); ++k) {
    double pw = c.penalty_weight(k);
    if (std::isinf(pw)) continue;
    auto kk = static_cast<std::uint32_t>(k);
    switch (c.direction(k)) {
      case Direction::increasing:
        cols.push_back({kk, false, pw});
        break;
      case Direction::decreasing:
        cols.push_back({kk, true, pw});
        break;
      case Direction::unconstrained:
        cols.push_back({kk, false, pw});
        cols.push_back({kk, true, pw});
        break;
    }
  }
  return cols;
}

void remove_overlap(std::span<double> inc_values, std::span<double> dec_values) {
  if (inc_values.size() != dec_values.size())
    throw std::invalid_argument("remove_overlap: length mismatch");
  if (inc_values.empty()) return;
  double gshift = 0.0, hshift = 0.0;
  double gprev = inc_values[0], hprev = dec_values[0];
  for (std::size_t j = 1; j < inc_values.size(); ++j) {
    double dg = inc_values[j] - gprev;  // >= 0 up to rounding
    double dh = hprev - dec_values[j];  // >= 0 up to rounding
    gprev = inc_values[j];
    hprev = dec_values[j];
    double ov = std::min(dg, dh);
    if (ov > 0.0) {
      gshift -= ov;
      hshift += ov;
    }
    inc_values[j] += gshift;
    dec_values[j] += hshift;
  }
}

BackfitResult backfit_engine(const Dataset& d, std::span<const SubColumn> cols,
                             const BackfitOptions& opts,
                             const std::vector<std::vector<double>>* warm) {
  if (!(opts.lambda >= 0.0) || !std::isfinite(opts.lambda))
    throw std::invalid_argument("backfit: lambda must be finite and >= 0");
  if (opts.max_cycles < 1) throw std::invalid_argument("backfit: max_cycles must be >= 1");
  for (const auto& sc : cols) {
    if (sc.covariate >= d.p()) throw std::invalid_argument("backfit: covariate out of range");
    if (!(sc.penalty_weight >= 0.0) || !std::isfinite(sc.penalty_weight))
      throw std::invalid_argument("backfit: subcolumn weight must be finite and >= 0");
  }

  const std::size_t n = d.n();
  const auto& w = d.weights();
  const auto& yc = d.y_centered();

  BackfitResult res;
  res.values.resize(cols.size());
  std::size_t max_groups = 0;
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const std::size_t m = d.covariate_index(cols[c].covariate).groups();
    max_groups = std::max(max_groups, m);
    if (warm && !(*warm)[c].empty()) {
      if ((*warm)[c].size() != m)
        throw std::invalid_argument("backfit: warm values do not match the dataset");
      res.values[c] = (*warm)[c];
    } else {
      res.values[c].assign(m, 0.0);
    }
  }

  std::vector<double> r(yc);
  auto recompute_residual = [&] {
    r = yc;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& idx = d.covariate_index(cols[c].covariate);
      const auto& v = res.values[c];
      for (std::size_t g = 0; g < v.size(); ++g) {
        if (v[g] == 0.0) continue;
        for (auto t = idx.group_offset[g]; t < idx.group_offset[g + 1]; ++t)
          r[idx.order[t]] -= v[g];
      }
    }
  };
  recompute_residual();

  std::vector<double> tv(cols.size(), 0.0);
  for (std::size_t c = 0; c < cols.size(); ++c) {
    const auto& v = res.values[c];
    for (std::size_t g = 1; g < v.size(); ++g) tv[c] += std::abs(v[g] - v[g - 1]);
  }

  auto current_loss = [&] {
    CompensatedSum q;
    for (std::size_t i = 0; i < n; ++i) q.add(w[i] * r[i] * r[i]);
    double pen = 0.0;
    for (std::size_t c = 0; c < cols.size(); ++c) pen += cols[c].penalty_weight * tv[c];
    return 0.5 * q.value() + opts.lambda * pen;
  };

  double loss = current_loss();
  if (opts.record_loss_trace) res.diag.loss_trace.push_back(loss);

  std::vector<std::size_t> order(cols.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(opts.cycle_seed);

  PavaBuffers buf;
  std::vector<double> zbar(max_groups);

  int cycle = 1;
  for (; cycle <= opts.max_cycles; ++cycle) {
    if (opts.random_cycle_order) rng.shuffle(order);
    double max_change = 0.0;
    for (std::size_t oc : order) {
      const SubColumn& sc = cols[oc];
      auto& v = res.values[oc];
      const auto& idx = d.covariate_index(sc.covariate);
      const std::size_t m = idx.groups();

      // group means of the partial residual, flipped onto the increasing scale
      for (std::size_t g = 0; g < m; ++g) {
        double s = 0.0;
        for (auto t = idx.group_offset[g]; t < idx.group_offset[g + 1]; ++t) {
          auto i = idx.order[t];
          s += w[i] * r[i];
        }
        double z = s / idx.group_weight[g] + v[g];
        zbar[g] = sc.decreasing ? -z : z;
      }

      pava_pool({zbar.data(), m}, {idx.group_weight.data(), m}, buf);
      ThresholdPair thr =
          thresholds_from_blocks(buf.level, buf.weight, opts.lambda * sc.penalty_weight);

      std::size_t g = 0;
      double newtv = 0.0, prev = 0.0;
      for (std::size_t b = 0; b < buf.level.size(); ++b) {
        double val = std::clamp(buf.level[b], thr.a, thr.b);
        if (sc.decreasing) val = -val;
        for (std::size_t rpt = 0; rpt < buf.count[b]; ++rpt, ++g) {
          double dv = val - v[g];
          if (dv != 0.0) {
            for (auto t = idx.group_offset[g]; t < idx.group_offset[g + 1]; ++t)
              r[idx.order[t]] -= dv;
            v[g] = val;
            max_change = std::max(max_change, std::abs(dv));
          }
          if (g > 0) newtv += std::abs(v[g] - prev);
          prev = v[g];
        }
      }
      tv[oc] = newtv;
    }

    if (cycle % 50 == 0) recompute_residual();
    double new_loss = current_loss();
    double decrease = loss - new_loss;
    if (opts.record_loss_trace) res.diag.loss_trace.push_back(new_loss);
    res.diag.last_loss_decrease = decrease;
    res.diag.last_max_change = max_change;
    loss = new_loss;
    if (decrease <= opts.tol_loss * std::max(1.0, std::abs(loss)) &&
        max_change < opts.tol_change) {
      res.diag.converged = true;
      break;
    }
  }
  res.diag.cycles = std::min(cycle, opts.max_cycles);
  res.diag.final_loss = loss;
  return res;
}

}  // namespace detail

namespace {

// Per-subcolumn starting values pulled out of an existing model; assumes
// the model was fitted on the same dataset.
std::vector<std::vector<double>> warm_subcolumn_values(const Dataset& d, const LisoConfig& c,
                                                       std::span<const detail::SubColumn> cols,
                                                       const AdditiveModel& warm) {
  std::vector<std::vector<double>> out(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) {
    const std::size_t k = cols[i].covariate;
    const auto& idx = d.covariate_index(k);
    const StepFunction& f = warm.components[k];
    if (f.empty()) {
      out[i].assign(idx.groups(), 0.0);
      continue;
    }
    if (f.size() != idx.groups() || f.knots() != idx.distinct_x)
      throw std::invalid_argument("liso_fit: warm start was fitted on a different dataset");
    if (c.direction(k) == Direction::unconstrained) {
      SignedParts parts = decompose(f, idx.group_weight);
      out[i] = cols[i].decreasing ? parts.minus.values() : parts.plus.values();
    } else {
      out[i] = f.values();
    }
  }
  return out;
}

void center_in_place(std::vector<double>& v, std::span<const double> weights) {
  double m = weighted_mean(weights, v);
  for (double& x : v) x -= m;
}

}  // namespace

AdditiveModel liso_fit(const Dataset& d, const LisoConfig& c, const AdditiveModel* warm_start) {
  c.validate(d.p());
  auto cols = detail::subcolumns_for(d, c);
  detail::BackfitOptions opts{c.lambda,  c.tol_loss,           c.tol_change,
                              c.max_cycles, c.random_cycle_order, c.cycle_seed,
                              c.record_loss_trace};

  std::vector<std::vector<double>> warm_vals;
  const std::vector<std::vector<double>>* warm_ptr = nullptr;
  if (warm_start) {
    if (warm_start->p() != d.p())
      throw std::invalid_argument("liso_fit: warm start covariate count mismatch");
    warm_vals = warm_subcolumn_values(d, c, cols, *warm_start);
    warm_ptr = &warm_vals;
  }

  auto res = detail::backfit_engine(d, cols, opts, warm_ptr);

  AdditiveModel m;
  m.intercept = d.y_mean();
  m.lambda = c.lambda;
  m.directions.resize(d.p());
  m.components.resize(d.p());
  m.diagnostics = std::move(res.diag);

  std::vector<int> inc_col(d.p(), -1), dec_col(d.p(), -1);
  for (std::size_t i = 0; i < cols.size(); ++i)
    (cols[i].decreasing ? dec_col : inc_col)[cols[i].covariate] = static_cast<int>(i);

  for (std::size_t k = 0; k < d.p(); ++k) {
    m.directions[k] = c.direction(k);
    const int ic = inc_col[k], dc = dec_col[k];
    if (ic < 0 && dc < 0) continue;  // dropped covariate: identically zero
    const auto& idx = d.covariate_index(k);
    std::vector<double> vals;
    if (ic >= 0 && dc >= 0) {
      detail::remove_overlap(res.values[ic], res.values[dc]);
      vals.resize(idx.groups());
      for (std::size_t g = 0; g < vals.size(); ++g)
        vals[g] = res.values[ic][g] + res.values[dc][g];
    } else {
      vals = std::move(res.values[ic >= 0 ? ic : dc]);
    }
    center_in_place(vals, idx.group_weight);
    m.components[k] = StepFunction(idx.distinct_x, std::move(vals));
  }
  return m;
}

double lambda_max(const Dataset& d, const LisoConfig& c) {
  c.validate(d.p());
  const auto& w = d.weights();
  const auto& yc = d.y_centered();
  double mu = weighted_mean(w, yc);  // ~0; kept for exactness
  double lmax = 0.0;
  for (std::size_t k = 0; k < d.p(); ++k) {
    double pw = c.penalty_weight(k);
    // dropped and unpenalised covariates put no ceiling on the grid
    if (std::isinf(pw) || pw == 0.0) continue;
    const auto& idx = d.covariate_index(k);
    CompensatedSum partial;
    double best = 0.0;
    for (std::size_t g = 0; g < idx.groups(); ++g) {
      for (auto t = idx.group_offset[g]; t < idx.group_offset[g + 1]; ++t) {
        auto i = idx.order[t];
        partial.add(w[i] * (yc[i] - mu));
      }
      best = std::max(best, std::abs(partial.value()));
    }
    lmax = std::max(lmax, best / pw);
  }
  return lmax;
}

std::vector<AdditiveModel> liso_path(const Dataset& d, std::span<const double> grid,
                                     const LisoConfig& c) {
  c.validate(d.p());
  if (grid.empty()) throw std::invalid_argument("liso_path: empty grid");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
      throw std::invalid_argument("liso_path: grid values must be positive and finite");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      throw std::invalid_argument("liso_path: grid must be strictly decreasing");
  }
  std::vector<AdditiveModel> out;
  out.reserve(grid.size());
  LisoConfig cfg = c;
  const AdditiveModel* warm = nullptr;
  for (double lam : grid) {
    cfg.lambda = lam;
    out.push_back(liso_fit(d, cfg, warm));
    warm = &out.back();
  }
  return out;
}

std::vector<double> fitted(const Dataset& d, const AdditiveModel& m) {
  if (m.p() != d.p()) throw std::invalid_argument("fitted: covariate count mismatch");
  std::vector<double> out(d.n(), m.intercept);
  for (std::size_t k = 0; k < d.p(); ++k) {
    const StepFunction& f = m.components[k];
    if (f.empty()) continue;
    const auto& idx = d.covariate_index(k);
    if (f.knots() == idx.distinct_x) {
      for (std::size_t g = 0; g < idx.groups(); ++g)
        for (auto t = idx.group_offset[g]; t < idx.group_offset[g + 1]; ++t)
          out[idx.order[t]] += f.values()[g];
    } else {
      const auto& x = d.column(k);
      for (std::size_t i = 0; i < d.n(); ++i) out[i] += f(x[i]);
    }
  }
  return out;
}

double objective(const Dataset& d, const AdditiveModel& m, const LisoConfig& c) {
  c.validate(d.p());
  if (m.p() != d.p()) throw std::invalid_argument("objective: covariate count mismatch");
  auto fit = fitted(d, m);
  const auto& w = d.weights();
  CompensatedSum q;
  for (std::size_t i = 0; i < d.n(); ++i) {
    double e = d.response(i) - fit[i];
    q.add(w[i] * e * e);
  }
  double pen = 0.0;
  for (std::size_t k = 0; k < d.p(); ++k) {
    if (m.components[k].empty()) continue;
    pen += c.penalty_weight(k) * m.components[k].total_variation();
  }
  return 0.5 * q.value() + c.lambda * pen;
}

std::vector<double> predict(const AdditiveModel& m,
                            const std::vector<std::vector<double>>& columns,
                            bool linear_interp) {
  if (columns.size() != m.p()) throw std::invalid_argument("predict: column count mismatch");
  const std::size_t n = columns.empty() ? 0 : columns[0].size();
  for (const auto& col : columns)
    if (col.size() != n) throw std::invalid_argument("predict: column length mismatch");
  std::vector<double> out(n, m.intercept);
  for (std::size_t k = 0; k < m.p(); ++k) {
    const StepFunction& f = m.components[k];
    if (f.empty()) continue;
    for (std::size_t i = 0; i < n; ++i)
      out[i] += linear_interp ? f.evaluate_linear(columns[k][i]) : f(columns[k][i]);
  }
  return out;
}

double max_refit_change(const Dataset& d, const AdditiveModel& m, const LisoConfig& c) {
  c.validate(d.p());
  if (m.p() != d.p()) throw std::invalid_argument("max_refit_change: covariate count mismatch");
  auto cols = detail::subcolumns_for(d, c);
  auto warm_vals = warm_subcolumn_values(d, c, cols, m);
  detail::BackfitOptions opts;
  opts.lambda = c.lambda;
  opts.tol_loss = c.tol_loss;
  opts.tol_change = c.tol_change;
  opts.max_cycles = 1;
  auto res = detail::backfit_engine(d, cols, opts, &warm_vals);
  return res.diag.last_max_change;
}

}  // namespace liso
