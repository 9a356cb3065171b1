#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "liso/dataset.hpp"
#include "liso/step_function.hpp"

namespace liso {

struct LisoConfig {
  double lambda = 0.0;
  // Empty means unit weights. +inf removes the covariate from the fit
  // entirely (how zero-variation covariates are dropped by reweighting);
  // 0 leaves it unpenalised, which the scad scheme can produce.
  std::vector<double> penalty_weights;
  // Empty means all increasing. 'unconstrained' fits an increasing and a
  // decreasing part for the covariate and reports their sum.
  std::vector<Direction> directions;
  double tol_loss = 1e-9;
  double tol_change = 1e-8;
  int max_cycles = 10000;
  bool random_cycle_order = false;
  std::uint64_t cycle_seed = 0;
  bool record_loss_trace = false;

  double penalty_weight(std::size_t k) const {
    return penalty_weights.empty() ? 1.0 : penalty_weights[k];
  }
  Direction direction(std::size_t k) const {
    return directions.empty() ? Direction::increasing : directions[k];
  }
  void validate(std::size_t p) const;
};

struct FitDiagnostics {
  int cycles = 0;
  double final_loss = 0.0;
  bool converged = false;
  double last_loss_decrease = 0.0;
  double last_max_change = 0.0;
  std::vector<double> loss_trace;  // objective after each cycle when recorded
  std::string note;
};

struct AdditiveModel {
  double intercept = 0.0;
  double lambda = 0.0;
  std::vector<StepFunction> components;  // empty StepFunction = identically zero
  std::vector<Direction> directions;
  FitDiagnostics diagnostics;

  std::size_t p() const { return components.size(); }
  bool component_active(std::size_t k, double tol = 1e-12) const;
  std::size_t active_count(double tol = 1e-12) const;
  // jumps of size above tol (relative to the component's scale)
  std::size_t step_count(std::size_t k, double tol = 1e-12) const;
};

// Block coordinate descent over the covariates: each pass refits one
// component against the partial residual by thresholded isotonic
// regression. Stops once a pass both decreases the objective by less than
// tol_loss (relative) and moves no fitted value by tol_change or more.
AdditiveModel liso_fit(const Dataset& d, const LisoConfig& c,
                       const AdditiveModel* warm_start = nullptr);

// Smallest penalty at which every positively-weighted component is flat
// (dropped and unpenalised covariates don't bound the grid).
double lambda_max(const Dataset& d, const LisoConfig& c = {});

// One fit per grid value, warm-started from the previous one; grid must be
// strictly decreasing and positive.
std::vector<AdditiveModel> liso_path(const Dataset& d, std::span<const double> grid,
                                     const LisoConfig& c);

double objective(const Dataset& d, const AdditiveModel& m, const LisoConfig& c);

// intercept + sum of components at the training points
std::vector<double> fitted(const Dataset& d, const AdditiveModel& m);

// Predictions for new columns (column-major, one vector per covariate).
// Step evaluation by default; linear_interp switches to interpolation
// between knots.
std::vector<double> predict(const AdditiveModel& m,
                            const std::vector<std::vector<double>>& columns,
                            bool linear_interp = false);

// Runs one extra full cycle from the fitted model and reports the largest
// fitted-value change: a cheap fixed-point certificate for the optimum.
double max_refit_change(const Dataset& d, const AdditiveModel& m, const LisoConfig& c);

namespace detail {

// One monotone piece of the fit. Unconstrained covariates own two
// subcolumns (one per direction); penalty weights are per subcolumn.
struct SubColumn {
  std::uint32_t covariate;
  bool decreasing;
  double penalty_weight;
};

struct BackfitOptions {
  double lambda = 0.0;
  double tol_loss = 1e-9;
  double tol_change = 1e-8;
  int max_cycles = 10000;
  bool random_cycle_order = false;
  std::uint64_t cycle_seed = 0;
  bool record_loss_trace = false;
};

struct BackfitResult {
  // fitted value per distinct x of the subcolumn's covariate, true sign
  std::vector<std::vector<double>> values;
  FitDiagnostics diag;
};

BackfitResult backfit_engine(const Dataset& d, std::span<const SubColumn> cols,
                             const BackfitOptions& opts,
                             const std::vector<std::vector<double>>* warm = nullptr);

std::vector<SubColumn> subcolumns_for(const Dataset& d, const LisoConfig& c);

// Cancels pointwise-opposed increments between a non-decreasing and a
// non-increasing part. Leaves their sum unchanged at every knot and makes
// tv(inc) + tv(dec) equal the sum's total variation exactly.
void remove_overlap(std::span<double> inc_values, std::span<double> dec_values);

}  // namespace detail

}  // namespace liso
