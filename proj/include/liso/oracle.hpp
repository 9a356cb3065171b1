#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "liso/dataset.hpp"

namespace liso {

// 0/1 step-indicator expansion: column (k, j) is 1 where covariate k
// exceeds its j-th distinct value's predecessors, j = 1..m_k-1. A monotone
// additive step model is exactly a non-negative combination of these
// columns plus a constant, which turns the fit into a non-negative lasso
// and gives an independent check of the backfitting engine.
struct ExpandedDesign {
  std::size_t n = 0;
  std::vector<std::vector<double>> columns;
  // (covariate, step position 1..m_k-1) per column
  std::vector<std::pair<std::uint32_t, std::uint32_t>> column_index;
  std::size_t p() const { return columns.size(); }
};

// Refuses expansions beyond max_columns; the expansion is a verification
// device for small problems, not a production path.
ExpandedDesign build_expanded(const Dataset& d, std::size_t max_columns = 5000);

struct NnLassoResult {
  std::vector<double> beta;    // per expanded column, >= 0
  std::vector<double> fitted;  // centred fitted values, length n
  double objective = 0.0;
  int sweeps = 0;
  bool converged = false;  // KKT satisfied at tol
};

// Coordinate descent for 0.5 * sum_i w_i (y_i - (X beta)_i)^2 +
// lambda * sum_j c_{cov(j)} beta_j over beta >= 0, with columns centred to
// weighted mean zero first (the constant lives outside). Convergence is a
// KKT check, not just small updates.
NnLassoResult nn_lasso_solve(const ExpandedDesign& design, std::span<const double> y_centered,
                             std::span<const double> w, double lambda,
                             std::span<const double> covariate_penalty = {},
                             double tol = 1e-10, int max_sweeps = 100000);

struct IrrepresentableReport {
  std::vector<std::size_t> inactive;  // column ids the values refer to
  std::vector<double> values;
  double max_value = 0.0;
  bool pass = false;      // every value <= lambda
  bool boundary = false;  // some value within 1e-9 of lambda
};

// Sign-recovery condition on the raw 0/1 expansion: for the active column
// set S, checks X_j' X_S (X_S' X_S)^{-1} lambda 1 <= lambda for every
// inactive j. Errors when the active gram matrix is singular.
IrrepresentableReport irrepresentable_check(const ExpandedDesign& design,
                                            const std::vector<std::size_t>& active,
                                            double lambda);

}  // namespace liso
