#include "liso/sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "liso/modelsel.hpp"
#include "liso/numeric.hpp"
#include "liso/rng.hpp"
#include "liso/variants.hpp"

namespace liso {

namespace {

constexpr std::uint64_t kCalibrationStream = 0x5eedf1a75ca1ab1eull;
constexpr std::size_t kCalibrationDraws = 100000;
constexpr std::size_t kSignalCount4 = 4;

double signed_power(double v, double exponent) {
  if (v == 0.0) return 0.0;
  return std::copysign(std::pow(std::abs(v), exponent), v);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

// One design row on the uniform scale: independent draws, or a Gaussian
// copula with correlation 2^{-|i-j|} realised by an AR(1) recursion.
void draw_uniform_row(Rng& rng, bool correlated, std::vector<double>& u) {
  if (!correlated) {
    for (double& v : u) v = rng.uniform();
    return;
  }
  double z = rng.normal();
  u[0] = normal_cdf(z);
  const double rho = 0.5;
  const double fresh = std::sqrt(1.0 - rho * rho);
  for (std::size_t j = 1; j < u.size(); ++j) {
    z = rho * z + fresh * rng.normal();
    u[j] = normal_cdf(z);
  }
}

// Maps the uniform scale to the scenario's design: (-1, 1) for the
// comparison scenarios, standardised (mean 0, variance 1) for the
// artificial one.
void to_design_row(Scenario kind, std::vector<double>& u) {
  if (kind == Scenario::artificial_4var) {
    const double scale = std::sqrt(12.0);
    for (double& v : u) v = (v - 0.5) * scale;
  } else {
    for (double& v : u) v = 2.0 * v - 1.0;
  }
}

struct SignalPlan {
  std::vector<std::size_t> covariates;  // formula order
  std::vector<double> shifts;           // mixed_powers only
};

// Draws k distinct indices from [0, p) by a partial shuffle.
std::vector<std::size_t> choose_without_replacement(Rng& rng, std::size_t p, std::size_t k) {
  std::vector<std::size_t> idx(p);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(static_cast<std::uint64_t>(p - i)));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(k);
  return idx;
}

SignalPlan plan_signal(const SimScenario& sc, Rng& rng) {
  SignalPlan plan;
  switch (sc.kind) {
    case Scenario::all_linear:
      plan.covariates = choose_without_replacement(rng, sc.p, 5);
      break;
    case Scenario::mixed_powers:
      plan.covariates = choose_without_replacement(rng, sc.p, 5);
      plan.shifts.resize(5);
      for (double& c : plan.shifts) c = rng.uniform(-0.25, 0.25);
      break;
    case Scenario::artificial_4var:
      plan.covariates = {0, 1, 2, 3};
      break;
  }
  return plan;
}

constexpr double kMixedExponents[5] = {0.2, 0.3, 0.4, 0.8, 1.0};

double signal_value(const SimScenario& sc, const SignalPlan& plan,
                    const std::vector<double>& row) {
  switch (sc.kind) {
    case Scenario::all_linear: {
      double s = 0.0;
      for (std::size_t c : plan.covariates) s += row[c];
      return s;
    }
    case Scenario::mixed_powers: {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k)
        s += signed_power(row[plan.covariates[k]] + plan.shifts[k], kMixedExponents[k]);
      return s;
    }
    case Scenario::artificial_4var: {
      double x1 = std::max(row[0], 0.0);
      return 2.0 * x1 * x1 + row[1] + signed_power(row[2], 0.2) + (row[3] > 0.0 ? 2.0 : 0.0);
    }
  }
  return 0.0;
}

}  // namespace

std::string scenario_name(Scenario s) {
  switch (s) {
    case Scenario::all_linear: return "all_linear";
    case Scenario::mixed_powers: return "mixed_powers";
    case Scenario::artificial_4var: return "artificial_4var";
  }
  return "unknown";
}

Scenario scenario_from_name(const std::string& name) {
  if (name == "all_linear") return Scenario::all_linear;
  if (name == "mixed_powers") return Scenario::mixed_powers;
  if (name == "artificial_4var") return Scenario::artificial_4var;
  throw std::invalid_argument("unknown scenario: " + name);
}

std::size_t SimScenario::signals() const {
  return kind == Scenario::artificial_4var ? kSignalCount4 : 5;
}

void SimScenario::validate() const {
  if (n < 2) throw std::invalid_argument("scenario: n must be >= 2");
  if (n_test < 2) throw std::invalid_argument("scenario: n_test must be >= 2");
  if (p < signals())
    throw std::invalid_argument("scenario: p is below the signal covariate count");
  if (std::isnan(snr) || snr <= 0.0) throw std::invalid_argument("scenario: snr must be > 0");
}

double calibrate_sigma(const SimScenario& sc) {
  sc.validate();
  if (std::isinf(sc.snr)) return 0.0;
  std::uint64_t stream = Rng::derive(
      kCalibrationStream,
      static_cast<std::uint64_t>(sc.kind) * 2 + (sc.correlated ? 1 : 0));
  Rng rng(Rng::derive(stream, static_cast<std::uint64_t>(sc.p)));
  CompensatedSum sum, sumsq;
  std::vector<double> row(sc.p);
  for (std::size_t i = 0; i < kCalibrationDraws; ++i) {
    SignalPlan plan = plan_signal(sc, rng);  // fresh choices and shifts per draw
    draw_uniform_row(rng, sc.correlated, row);
    to_design_row(sc.kind, row);
    double v = signal_value(sc, plan, row);
    sum.add(v);
    sumsq.add(v * v);
  }
  double mean = sum.value() / static_cast<double>(kCalibrationDraws);
  double var = sumsq.value() / static_cast<double>(kCalibrationDraws) - mean * mean;
  var = std::max(var, 0.0);
  return std::sqrt(var / sc.snr);
}

SimDraw generate(const SimScenario& sc) { return generate(sc, sc.seed); }

SimDraw generate(const SimScenario& sc, std::uint64_t seed) {
  sc.validate();
  double sigma = calibrate_sigma(sc);
  Rng rng(seed);
  SignalPlan plan = plan_signal(sc, rng);

  auto make_set = [&](std::size_t rows, bool with_noise) {
    std::vector<std::vector<double>> cols(sc.p, std::vector<double>(rows));
    std::vector<double> y(rows);
    std::vector<double> row(sc.p);
    for (std::size_t r = 0; r < rows; ++r) {
      draw_uniform_row(rng, sc.correlated, row);
      to_design_row(sc.kind, row);
      for (std::size_t j = 0; j < sc.p; ++j) cols[j][r] = row[j];
      y[r] = signal_value(sc, plan, row);
    }
    if (with_noise && sigma > 0.0)
      for (double& v : y) v += sigma * rng.normal();
    return Dataset::make(y, cols);
  };

  SimDraw draw{make_set(sc.n, true), make_set(sc.n, true), make_set(sc.n_test, false), sigma};
  return draw;
}

double mse(const AdditiveModel& m, const Dataset& test) {
  std::vector<double> fit = fitted(test, m);
  CompensatedSum err;
  for (std::size_t i = 0; i < test.n(); ++i) {
    double e = fit[i] - test.response(i);
    err.add(e * e);
  }
  return err.value() / static_cast<double>(test.n());
}

std::vector<std::vector<double>> relative_mse(const std::vector<std::vector<double>>& mse_runs) {
  std::vector<std::vector<double>> rel(mse_runs.size());
  for (std::size_t r = 0; r < mse_runs.size(); ++r) {
    const auto& run = mse_runs[r];
    if (run.empty()) throw std::invalid_argument("relative_mse: empty run");
    double lo = *std::min_element(run.begin(), run.end());
    rel[r].resize(run.size());
    for (std::size_t j = 0; j < run.size(); ++j)
      rel[r][j] = run[j] == lo ? 1.0
                 : lo > 0.0    ? run[j] / lo
                               : std::numeric_limits<double>::infinity();
  }
  return rel;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::plain: return "liso";
    case Method::adaptive: return "liso-adaptive";
    case Method::scad: return "liso-scad";
  }
  return "unknown";
}

Method method_from_name(const std::string& name) {
  if (name == "liso" || name == "plain") return Method::plain;
  if (name == "liso-adaptive" || name == "adaptive") return Method::adaptive;
  if (name == "liso-scad" || name == "scad") return Method::scad;
  throw std::invalid_argument("unknown method: " + name);
}

namespace {

AdditiveModel tuned_fit(const SimDraw& draw, Method method) {
  switch (method) {
    case Method::plain: {
      auto grid = default_lambda_grid(draw.train);
      return validation_tune(draw.train, draw.valid, grid, plain_path_fitter()).model;
    }
    case Method::adaptive:
      return validation_tune_two_stage(draw.train, draw.valid, ReweightSpec::adaptive()).model;
    case Method::scad:
      return validation_tune_two_stage(draw.train, draw.valid, ReweightSpec::scad()).model;
  }
  throw std::logic_error("tuned_fit: unhandled method");
}

}  // namespace

StudyResult comparison_study(const SimScenario& sc, const std::vector<Method>& methods,
                             std::size_t replications) {
  sc.validate();
  if (methods.empty()) throw std::invalid_argument("comparison_study: no methods");
  if (replications == 0)
    throw std::invalid_argument("comparison_study: replications must be >= 1");

  StudyResult out;
  out.methods = methods;
  out.mse_runs.assign(replications, std::vector<double>(methods.size(), 0.0));
  for (std::size_t r = 0; r < replications; ++r) {
    SimDraw draw = generate(sc, Rng::derive(sc.seed, r));
    for (std::size_t j = 0; j < methods.size(); ++j)
      out.mse_runs[r][j] = mse(tuned_fit(draw, methods[j]), draw.test);
  }

  auto rel = relative_mse(out.mse_runs);
  const double reps = static_cast<double>(replications);
  for (std::size_t j = 0; j < methods.size(); ++j) {
    CompensatedSum sum, rel_sum;
    for (std::size_t r = 0; r < replications; ++r) {
      sum.add(out.mse_runs[r][j]);
      rel_sum.add(rel[r][j]);
    }
    double mean = sum.value() / reps;
    double se = 0.0;
    if (replications > 1) {
      CompensatedSum sq;
      for (std::size_t r = 0; r < replications; ++r) {
        double d = out.mse_runs[r][j] - mean;
        sq.add(d * d);
      }
      se = std::sqrt(sq.value() / (reps - 1.0) / reps);
    }
    out.rows.push_back({scenario_name(sc.kind), method_name(methods[j]), sc.snr, mean,
                        rel_sum.value() / reps, se});
  }
  return out;
}

namespace {

bool exact_signal_support(const AdditiveModel& m, std::size_t signals) {
  for (std::size_t k = 0; k < signals; ++k)
    if (!m.component_active(k)) return false;
  for (std::size_t k = signals; k < m.p(); ++k)
    if (m.component_active(k)) return false;
  return true;
}

}  // namespace

RecoveryResult recovery_study(const std::vector<std::size_t>& p_list,
                              const std::vector<std::size_t>& n_list,
                              std::size_t replications, std::uint64_t seed,
                              const RecoveryConfig& cfg) {
  if (p_list.empty() || n_list.empty())
    throw std::invalid_argument("recovery_study: empty p or n list");
  if (replications == 0)
    throw std::invalid_argument("recovery_study: replications must be >= 1");
  std::size_t p_master = *std::max_element(p_list.begin(), p_list.end());
  for (std::size_t p : p_list)
    if (p < kSignalCount4)
      throw std::invalid_argument("recovery_study: p is below the signal covariate count");
  for (std::size_t n : n_list) {
    if (n < 2) throw std::invalid_argument("recovery_study: n must be >= 2");
    if (n > cfg.master_n)
      throw std::invalid_argument("recovery_study: n exceeds the master sample");
  }
  if (cfg.fixed_grid.empty()) {
    if (cfg.grid_count == 0)
      throw std::invalid_argument("recovery_study: grid_count must be >= 1");
    if (!(cfg.grid_min_ratio > 0.0) || !(cfg.grid_min_ratio <= 1.0))
      throw std::invalid_argument("recovery_study: grid_min_ratio must be in (0, 1]");
  }

  SimScenario master_sc;
  master_sc.kind = Scenario::artificial_4var;
  master_sc.n = cfg.master_n;
  master_sc.p = p_master;
  master_sc.snr = cfg.snr;
  double sigma = calibrate_sigma(master_sc);

  // Master draw on the raw uniform scale, then empirical column
  // standardisation; the response is computed from the standardised
  // covariates and stays fixed across subsamples.
  Rng master_rng(Rng::derive(seed, 0));
  std::vector<std::vector<double>> cols(p_master, std::vector<double>(cfg.master_n));
  {
    std::vector<double> u(p_master);
    for (std::size_t r = 0; r < cfg.master_n; ++r) {
      draw_uniform_row(master_rng, false, u);
      for (std::size_t j = 0; j < p_master; ++j) cols[j][r] = u[j];
    }
  }
  const double nn = static_cast<double>(cfg.master_n);
  for (auto& col : cols) {
    CompensatedSum s;
    for (double v : col) s.add(v);
    double mean = s.value() / nn;
    CompensatedSum sq;
    for (double v : col) sq.add((v - mean) * (v - mean));
    double sd = std::sqrt(sq.value() / nn);
    if (sd > 0.0)
      for (double& v : col) v = (v - mean) / sd;
    else
      for (double& v : col) v = 0.0;
  }
  std::vector<double> master_y(cfg.master_n);
  {
    SignalPlan plan{{0, 1, 2, 3}, {}};
    std::vector<double> row(p_master);
    for (std::size_t r = 0; r < cfg.master_n; ++r) {
      for (std::size_t j = 0; j < p_master; ++j) row[j] = cols[j][r];
      master_y[r] = signal_value(master_sc, plan, row);
    }
    if (sigma > 0.0)
      for (double& v : master_y) v += sigma * master_rng.normal();
  }

  RecoveryResult out;
  out.p_list = p_list;
  out.n_list = n_list;
  out.replications = replications;
  out.proportion.assign(p_list.size(), std::vector<double>(n_list.size(), 0.0));

  std::uint64_t stream = 1;
  for (std::size_t pi = 0; pi < p_list.size(); ++pi) {
    const std::size_t p_sub = p_list[pi];
    for (std::size_t ni = 0; ni < n_list.size(); ++ni) {
      const std::size_t n_sub = n_list[ni];
      std::size_t successes = 0;
      for (std::size_t rep = 0; rep < replications; ++rep) {
        Rng sub_rng(Rng::derive(seed, stream++));
        std::vector<std::size_t> rows(cfg.master_n);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        for (std::size_t i = 0; i < n_sub; ++i) {
          std::size_t j =
              i + static_cast<std::size_t>(sub_rng.below(static_cast<std::uint64_t>(cfg.master_n - i)));
          std::swap(rows[i], rows[j]);
        }
        std::vector<std::vector<double>> sub_cols(p_sub, std::vector<double>(n_sub));
        std::vector<double> sub_y(n_sub);
        for (std::size_t i = 0; i < n_sub; ++i) {
          for (std::size_t j = 0; j < p_sub; ++j) sub_cols[j][i] = cols[j][rows[i]];
          sub_y[i] = master_y[rows[i]];
        }
        Dataset d = Dataset::make(sub_y, sub_cols);  // recentres the response

        std::vector<double> grid;
        if (!cfg.fixed_grid.empty()) {
          grid = cfg.fixed_grid;
        } else {
          try {
            grid = default_lambda_grid(d, {}, cfg.grid_count, cfg.grid_min_ratio);
          } catch (const std::invalid_argument&) {
            continue;  // centred-constant response: nothing to recover
          }
        }

        const AdditiveModel* warm = nullptr;
        AdditiveModel prev;
        for (double lam : grid) {
          LisoConfig c;
          c.lambda = lam;
          AdditiveModel m = liso_fit(d, c, warm);
          if (exact_signal_support(m, kSignalCount4)) {
            ++successes;
            break;
          }
          prev = std::move(m);
          warm = &prev;
        }
      }
      out.proportion[pi][ni] =
          static_cast<double>(successes) / static_cast<double>(replications);
    }
  }
  return out;
}

}  // namespace liso
