#include "liso/modelsel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "liso/numeric.hpp"
#include "liso/rng.hpp"

namespace liso {

namespace {

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw std::invalid_argument("grid must be non-empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i]))
      throw std::invalid_argument("grid values must be positive and finite");
    if (i > 0 && !(grid[i] < grid[i - 1]))
      throw std::invalid_argument("grid must be strictly decreasing");
  }
}

std::vector<double> log_grid(double top, std::size_t count, double min_ratio) {
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = top;
    return g;
  }
  for (std::size_t i = 0; i < count; ++i)
    g[i] = top * std::pow(min_ratio, static_cast<double>(i) / (count - 1.0));
  return g;
}

}  // namespace

PathFitter plain_path_fitter(const LisoConfig& base) {
  return [base](const Dataset& train, const std::vector<double>& grid) {
    return liso_path(train, grid, base);
  };
}

std::vector<double> default_lambda_grid(const Dataset& d, const LisoConfig& base,
                                        std::size_t count, double min_ratio) {
  if (count < 1) throw std::invalid_argument("default_lambda_grid: count must be >= 1");
  if (!(min_ratio > 0.0) || !(min_ratio < 1.0))
    throw std::invalid_argument("default_lambda_grid: min_ratio must be in (0, 1)");
  double lmax = lambda_max(d, base);
  if (!(lmax > 0.0))
    throw std::invalid_argument("default_lambda_grid: lambda_max is zero (degenerate data)");
  return log_grid(lmax, count, min_ratio);
}

double holdout_mse(const AdditiveModel& m, const Dataset& holdout) {
  auto pred = predict(m, holdout.columns());
  const auto& w = holdout.weights();
  CompensatedSum s;
  for (std::size_t i = 0; i < holdout.n(); ++i) {
    double e = holdout.response(i) - pred[i];
    s.add(w[i] * e * e);
  }
  return s.value() / holdout.weight_total();
}

CvReport cross_validate(const Dataset& d, const std::vector<double>& grid, int folds,
                        const PathFitter& fit_path, std::uint64_t seed) {
  check_grid(grid);
  const std::size_t n = d.n();
  if (folds < 2 || static_cast<std::size_t>(folds) > n)
    throw std::invalid_argument("cross_validate: folds must lie in [2, n]");

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(perm);
  std::vector<int> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[perm[i]] = static_cast<int>(i % folds);

  CvReport rep;
  rep.grid = grid;
  rep.folds = folds;
  rep.seed = seed;
  rep.fold_mse.resize(folds);

  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < n; ++i)
      (fold_of[i] == f ? test_rows : train_rows).push_back(i);
    if (test_rows.empty() || train_rows.size() < 2)
      throw std::invalid_argument("cross_validate: fold leaves too little data");

    Dataset train = d.subset(train_rows);
    auto models = fit_path(train, grid);
    if (models.size() != grid.size())
      throw std::runtime_error("cross_validate: path fitter returned a short path");

    // score on the raw held-out rows (a fold may be a single row)
    std::vector<std::vector<double>> cols(d.p(), std::vector<double>(test_rows.size()));
    std::vector<double> resp(test_rows.size()), tw(test_rows.size());
    for (std::size_t t = 0; t < test_rows.size(); ++t) {
      resp[t] = d.response(test_rows[t]);
      tw[t] = d.weights()[test_rows[t]];
      for (std::size_t k = 0; k < d.p(); ++k) cols[k][t] = d.column(k)[test_rows[t]];
    }
    auto& row = rep.fold_mse[f];
    row.resize(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      auto pred = predict(models[j], cols);
      CompensatedSum se, sw;
      for (std::size_t t = 0; t < test_rows.size(); ++t) {
        double e = resp[t] - pred[t];
        se.add(tw[t] * e * e);
        sw.add(tw[t]);
      }
      row[j] = se.value() / sw.value();
    }
  }

  rep.mean_mse.resize(grid.size());
  rep.sd_mse.resize(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CompensatedSum s;
    for (int f = 0; f < folds; ++f) s.add(rep.fold_mse[f][j]);
    double mean = s.value() / folds;
    CompensatedSum v;
    for (int f = 0; f < folds; ++f) {
      double dd = rep.fold_mse[f][j] - mean;
      v.add(dd * dd);
    }
    rep.mean_mse[j] = mean;
    rep.sd_mse[j] = std::sqrt(v.value() / (folds - 1));
  }

  std::size_t jmin = 0;
  for (std::size_t j = 1; j < grid.size(); ++j)
    if (rep.mean_mse[j] < rep.mean_mse[jmin]) jmin = j;  // ties keep the larger lambda
  rep.lambda_min = grid[jmin];
  double limit = rep.mean_mse[jmin] + rep.sd_mse[jmin];
  for (std::size_t j = 0; j < grid.size(); ++j)
    if (rep.mean_mse[j] <= limit) {
      rep.lambda_1se = grid[j];
      break;
    }
  return rep;
}

ValidationChoice validation_tune(const Dataset& train, const Dataset& valid,
                                 const std::vector<double>& grid, const PathFitter& fit_path) {
  check_grid(grid);
  if (train.p() != valid.p())
    throw std::invalid_argument("validation_tune: covariate count mismatch");
  auto models = fit_path(train, grid);
  if (models.size() != grid.size())
    throw std::runtime_error("validation_tune: path fitter returned a short path");
  ValidationChoice best;
  best.mse = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < grid.size(); ++j) {
    double m = holdout_mse(models[j], valid);
    if (m < best.mse) {  // ties keep the larger lambda
      best.index = j;
      best.lambda = grid[j];
      best.mse = m;
    }
  }
  best.model = std::move(models[best.index]);
  return best;
}

namespace {

// Ceiling for the stage-two grid under the given reweighting scheme.
double stage2_top(const Dataset& train, const AdditiveModel& pilot, const ReweightSpec& spec,
                  const LisoConfig& base) {
  if (spec.scheme == ReweightScheme::adaptive) {
    auto w = reweight_from(pilot, spec, 1.0);
    bool any = false;
    for (double v : w) any = any || std::isfinite(v);
    if (!any) return 0.0;
    LisoConfig c = base;
    c.penalty_weights = std::move(w);
    return lambda_max(train, c);
  }
  // scad weights are 1 at and above the component variations, so this
  // ceiling flattens everything
  LisoConfig c = base;
  c.penalty_weights.clear();
  double top = lambda_max(train, c);
  for (std::size_t k = 0; k < pilot.p(); ++k)
    if (!pilot.components[k].empty())
      top = std::max(top, pilot.components[k].total_variation());
  return top;
}

AdditiveModel zero_fit(const Dataset& train, const LisoConfig& base) {
  LisoConfig c = base;
  c.lambda = 0.0;
  c.penalty_weights.assign(train.p(), std::numeric_limits<double>::infinity());
  return liso_fit(train, c);
}

}  // namespace

TwoStageChoice cross_validate_two_stage(const Dataset& d, const std::vector<double>& grid0,
                                        int folds, const ReweightSpec& spec,
                                        const LisoConfig& base, std::uint64_t seed) {
  spec.validate();
  base.validate(d.p());
  TwoStageChoice out;
  out.stage1 = cross_validate(d, grid0, folds, plain_path_fitter(base), seed);
  out.lambda0 = out.stage1.lambda_min;

  LisoConfig c0 = base;
  c0.lambda = out.lambda0;
  c0.penalty_weights.clear();
  AdditiveModel pilot = liso_fit(d, c0);
  double top = stage2_top(d, pilot, spec, base);
  if (!(top > 0.0)) {
    out.lambda1 = 0.0;  // pilot dropped everything; the refit is the zero model
    return out;
  }
  std::vector<double> grid1 = log_grid(top, grid0.size(), grid0.back() / grid0.front());

  const double lambda0 = out.lambda0;
  PathFitter stage2 = [spec, base, lambda0](const Dataset& train,
                                            const std::vector<double>& grid) {
    LisoConfig cc = base;
    cc.lambda = lambda0;
    cc.penalty_weights.clear();
    AdditiveModel fold_pilot = liso_fit(train, cc);
    std::vector<AdditiveModel> models;
    models.reserve(grid.size());
    const AdditiveModel* warm = nullptr;
    for (double lam : grid) {
      LisoConfig c1 = base;
      c1.lambda = lam;
      c1.penalty_weights = reweight_from(fold_pilot, spec, lam);
      models.push_back(liso_fit(train, c1, warm));
      warm = &models.back();
    }
    return models;
  };
  out.stage2 = cross_validate(d, grid1, folds, stage2, Rng::derive(seed, 1));
  out.lambda1 = out.stage2.lambda_min;
  return out;
}

TwoStageValidationChoice validation_tune_two_stage(const Dataset& train, const Dataset& valid,
                                                   const ReweightSpec& spec,
                                                   const LisoConfig& base, std::size_t coarse,
                                                   double min_ratio) {
  spec.validate();
  base.validate(train.p());
  if (train.p() != valid.p())
    throw std::invalid_argument("validation_tune_two_stage: covariate count mismatch");
  if (coarse < 2) throw std::invalid_argument("validation_tune_two_stage: coarse must be >= 2");

  LisoConfig plain = base;
  plain.penalty_weights.clear();
  std::vector<double> grid0 = default_lambda_grid(train, plain, coarse, min_ratio);

  TwoStageValidationChoice best;
  best.mse = std::numeric_limits<double>::infinity();

  auto eval_cell = [&](const AdditiveModel& pilot, double lam0,
                       const std::vector<double>& grid1) {
    if (grid1.empty()) {
      AdditiveModel z = zero_fit(train, base);
      double m = holdout_mse(z, valid);
      if (m < best.mse) best = {lam0, 0.0, m, std::move(z)};
      return;
    }
    const AdditiveModel* warm = nullptr;
    AdditiveModel prev;
    for (double lam1 : grid1) {
      LisoConfig c1 = base;
      c1.lambda = lam1;
      c1.penalty_weights = reweight_from(pilot, spec, lam1);
      AdditiveModel m1 = liso_fit(train, c1, warm);
      double m = holdout_mse(m1, valid);
      prev = std::move(m1);
      warm = &prev;
      if (m < best.mse) best = {lam0, lam1, m, prev};
    }
  };

  auto grid_for = [&](const AdditiveModel& pilot) {
    double top = stage2_top(train, pilot, spec, base);
    return top > 0.0 ? log_grid(top, coarse, min_ratio) : std::vector<double>{};
  };

  auto pilots = liso_path(train, grid0, plain);
  for (std::size_t i = 0; i < grid0.size(); ++i)
    eval_cell(pilots[i], grid0[i], grid_for(pilots[i]));

  // one refinement pass around the winning cell
  double f0 = std::pow(1.0 / min_ratio, 1.0 / (coarse - 1.0));
  std::vector<double> refine0 = log_grid(best.lambda0 * f0, 5, 1.0 / (f0 * f0));
  double best_l1 = best.lambda1;
  for (double lam0 : refine0) {
    LisoConfig c0 = plain;
    c0.lambda = lam0;
    AdditiveModel pilot = liso_fit(train, c0);
    std::vector<double> grid1;
    if (best_l1 > 0.0)
      grid1 = log_grid(best_l1 * f0, 5, 1.0 / (f0 * f0));
    else
      grid1 = grid_for(pilot);
    eval_cell(pilot, lam0, grid1);
  }
  return best;
}

}  // namespace liso
