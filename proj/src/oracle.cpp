#include "liso/oracle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liso/numeric.hpp"

namespace liso {

ExpandedDesign build_expanded(const Dataset& d, std::size_t max_columns) {
  std::size_t total = 0;
  for (std::size_t k = 0; k < d.p(); ++k) total += d.covariate_index(k).groups() - 1;
  if (total > max_columns)
    throw std::invalid_argument("build_expanded: expansion exceeds the column cap");

  ExpandedDesign X;
  X.n = d.n();
  X.columns.reserve(total);
  X.column_index.reserve(total);
  for (std::size_t k = 0; k < d.p(); ++k) {
    const auto& idx = d.covariate_index(k);
    for (std::size_t j = 1; j < idx.groups(); ++j) {
      std::vector<double> col(d.n(), 0.0);
      for (auto t = idx.group_offset[j]; t < idx.group_offset[idx.groups()]; ++t)
        col[idx.order[t]] = 1.0;
      X.columns.push_back(std::move(col));
      X.column_index.emplace_back(static_cast<std::uint32_t>(k),
                                  static_cast<std::uint32_t>(j));
    }
  }
  return X;
}

NnLassoResult nn_lasso_solve(const ExpandedDesign& design, std::span<const double> y_centered,
                             std::span<const double> w, double lambda,
                             std::span<const double> covariate_penalty, double tol,
                             int max_sweeps) {
  const std::size_t n = design.n, p = design.p();
  if (y_centered.size() != n || w.size() != n)
    throw std::invalid_argument("nn_lasso_solve: length mismatch");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("nn_lasso_solve: lambda must be finite and >= 0");
  if (!(tol > 0.0)) throw std::invalid_argument("nn_lasso_solve: tol must be positive");

  auto penalty_of = [&](std::size_t j) {
    if (covariate_penalty.empty()) return 1.0;
    return covariate_penalty[design.column_index[j].first];
  };

  // centre the columns once; norms are fixed across sweeps
  std::vector<std::vector<double>> c(p);
  std::vector<double> norm(p);
  for (std::size_t j = 0; j < p; ++j) {
    const auto& raw = design.columns[j];
    double mean = weighted_mean(w, raw);
    c[j].resize(n);
    CompensatedSum nn;
    for (std::size_t i = 0; i < n; ++i) {
      c[j][i] = raw[i] - mean;
      nn.add(w[i] * c[j][i] * c[j][i]);
    }
    norm[j] = nn.value();
    if (!(norm[j] > 0.0))
      throw std::invalid_argument("nn_lasso_solve: constant expanded column");
  }

  NnLassoResult res;
  res.beta.assign(p, 0.0);
  std::vector<double> r(y_centered.begin(), y_centered.end());

  const double kkt_scale = std::max(1.0, lambda);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (std::size_t j = 0; j < p; ++j) {
      double grad = 0.0;
      for (std::size_t i = 0; i < n; ++i) grad += w[i] * c[j][i] * r[i];
      double bnew = std::max(0.0, res.beta[j] + (grad - lambda * penalty_of(j)) / norm[j]);
      double db = bnew - res.beta[j];
      if (db != 0.0) {
        for (std::size_t i = 0; i < n; ++i) r[i] -= db * c[j][i];
        res.beta[j] = bnew;
      }
    }
    // KKT: active columns at equality, inactive below the penalty
    bool ok = true;
    for (std::size_t j = 0; j < p && ok; ++j) {
      double grad = 0.0;
      for (std::size_t i = 0; i < n; ++i) grad += w[i] * c[j][i] * r[i];
      double pen = lambda * penalty_of(j);
      if (res.beta[j] > 0.0)
        ok = std::abs(grad - pen) <= tol * kkt_scale;
      else
        ok = grad <= pen + tol * kkt_scale;
    }
    res.sweeps = sweep;
    if (ok) {
      res.converged = true;
      break;
    }
  }

  res.fitted.assign(n, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    if (res.beta[j] == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) res.fitted[i] += res.beta[j] * c[j][i];
  }
  CompensatedSum q;
  for (std::size_t i = 0; i < n; ++i) {
    double e = y_centered[i] - res.fitted[i];
    q.add(w[i] * e * e);
  }
  double pen = 0.0;
  for (std::size_t j = 0; j < p; ++j) pen += penalty_of(j) * res.beta[j];
  res.objective = 0.5 * q.value() + lambda * pen;
  return res;
}

IrrepresentableReport irrepresentable_check(const ExpandedDesign& design,
                                            const std::vector<std::size_t>& active,
                                            double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("irrepresentable_check: lambda must be positive");
  if (active.empty())
    throw std::invalid_argument("irrepresentable_check: empty active set");
  const std::size_t n = design.n, s = active.size();
  for (std::size_t j : active)
    if (j >= design.p()) throw std::invalid_argument("irrepresentable_check: bad column id");

  Eigen::MatrixXd A(n, s);
  for (std::size_t a = 0; a < s; ++a)
    for (std::size_t i = 0; i < n; ++i) A(i, a) = design.columns[active[a]][i];

  Eigen::MatrixXd G = A.transpose() * A;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  if (!lu.isInvertible())
    throw std::runtime_error("irrepresentable_check: active gram matrix is singular");

  Eigen::VectorXd u = lu.solve(Eigen::VectorXd::Constant(s, lambda));
  Eigen::VectorXd t = A * u;

  IrrepresentableReport rep;
  std::vector<bool> is_active(design.p(), false);
  for (std::size_t j : active) is_active[j] = true;
  rep.pass = true;
  for (std::size_t j = 0; j < design.p(); ++j) {
    if (is_active[j]) continue;
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) v += design.columns[j][i] * t[i];
    rep.inactive.push_back(j);
    rep.values.push_back(v);
    rep.max_value = std::max(rep.max_value, v);
    if (v > lambda) rep.pass = false;
    if (std::abs(v - lambda) <= 1e-9 * std::max(1.0, lambda)) rep.boundary = true;
  }
  return rep;
}

}  // namespace liso
