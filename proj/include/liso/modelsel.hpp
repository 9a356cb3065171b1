#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "liso/backfit.hpp"
#include "liso/dataset.hpp"
#include "liso/variants.hpp"

namespace liso {

struct CvReport {
  std::vector<double> grid;                   // descending lambdas
  std::vector<std::vector<double>> fold_mse;  // [fold][grid point]
  std::vector<double> mean_mse;
  std::vector<double> sd_mse;  // sample sd over folds
  double lambda_min = 0.0;     // smallest mean mse, ties to the larger lambda
  double lambda_1se = 0.0;     // largest lambda within one sd of the minimum
  int folds = 0;
  std::uint64_t seed = 0;
};

// Fits a whole path on a training split; lets cross-validation drive plain
// fits, reweighted refits, or signed fits through one interface.
using PathFitter =
    std::function<std::vector<AdditiveModel>(const Dataset& train, const std::vector<double>& grid)>;

PathFitter plain_path_fitter(const LisoConfig& base = {});

// Log-spaced descending grid from lambda_max(d) down to min_ratio times
// it. Errors when lambda_max degenerates to zero.
std::vector<double> default_lambda_grid(const Dataset& d, const LisoConfig& base = {},
                                        std::size_t count = 50, double min_ratio = 1e-3);

// Seeded shuffled round-robin folds; the grid is shared across folds so
// every fold scores the same lambda values. Every fold must be non-empty
// and leave a training complement of at least 2 rows.
CvReport cross_validate(const Dataset& d, const std::vector<double>& grid, int folds,
                        const PathFitter& fit_path, std::uint64_t seed);

// Weighted mean squared prediction error on held-out data.
double holdout_mse(const AdditiveModel& m, const Dataset& holdout);

struct ValidationChoice {
  std::size_t index = 0;
  double lambda = 0.0;
  double mse = 0.0;
  AdditiveModel model;  // the path model at the selected lambda
};

// Picks the grid lambda with the smallest validation MSE; ties go to the
// larger lambda.
ValidationChoice validation_tune(const Dataset& train, const Dataset& valid,
                                 const std::vector<double>& grid, const PathFitter& fit_path);

struct TwoStageChoice {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  CvReport stage1, stage2;
};

// Per-stage cross-validation for reweighted fits: stage one tunes the
// pilot penalty by plain CV; stage two fixes lambda0, recomputes pilot
// weights inside each training fold, and tunes the refit penalty on a
// shared grid built from the full-data reweighted problem.
TwoStageChoice cross_validate_two_stage(const Dataset& d, const std::vector<double>& grid0,
                                        int folds, const ReweightSpec& spec,
                                        const LisoConfig& base, std::uint64_t seed);

struct TwoStageValidationChoice {
  double lambda0 = 0.0;
  double lambda1 = 0.0;
  double mse = 0.0;
  AdditiveModel model;  // refit at (lambda0, lambda1) on the training data
};

// Validation-set tuning of a two-stage fit over a coarse log product grid
// followed by one local refinement pass around the best cell.
TwoStageValidationChoice validation_tune_two_stage(const Dataset& train, const Dataset& valid,
                                                   const ReweightSpec& spec,
                                                   const LisoConfig& base = {},
                                                   std::size_t coarse = 10,
                                                   double min_ratio = 1e-3);

}  // namespace liso
