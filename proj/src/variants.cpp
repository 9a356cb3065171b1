#include "liso/variants.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "liso/numeric.hpp"

namespace liso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_lambda(double lambda, const char* what) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument(std::string(what) + ": lambda must be finite and >= 0");
}

double component_tv(const AdditiveModel& m, std::size_t k) {
  return m.components[k].empty() ? 0.0 : m.components[k].total_variation();
}

}  // namespace

void ReweightSpec::validate() const {
  if (scheme == ReweightScheme::scad && !(scad_a > 2.0))
    throw std::invalid_argument("ReweightSpec: scad_a must exceed 2");
  if (iterations < 1) throw std::invalid_argument("ReweightSpec: iterations must be >= 1");
}

std::vector<double> scad_weights(const AdditiveModel& pilot, double lambda, double a) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("scad_weights: lambda must be finite and positive");
  if (!(a > 2.0)) throw std::invalid_argument("scad_weights: a must exceed 2");
  std::vector<double> w(pilot.p());
  for (std::size_t k = 0; k < pilot.p(); ++k) {
    double tv = component_tv(pilot, k);
    w[k] = tv <= lambda ? 1.0 : std::max(a * lambda - tv, 0.0) / ((a - 1.0) * lambda);
  }
  return w;
}

std::vector<double> reweight_from(const AdditiveModel& pilot, const ReweightSpec& spec,
                                  double lambda) {
  spec.validate();
  std::vector<double> weights(pilot.p());
  std::vector<double> scad;
  if (spec.scheme == ReweightScheme::scad && lambda > 0.0)
    scad = scad_weights(pilot, lambda, spec.scad_a);
  for (std::size_t k = 0; k < pilot.p(); ++k) {
    double tv = component_tv(pilot, k);
    if (tv <= kDropTotalVariation) {
      if (spec.drop_zero_components)
        weights[k] = kInf;
      else
        weights[k] = spec.scheme == ReweightScheme::adaptive ? kPenaltyWeightCap : 1.0;
    } else if (spec.scheme == ReweightScheme::adaptive) {
      weights[k] = std::min(1.0 / tv, kPenaltyWeightCap);
    } else {
      weights[k] = scad.empty() ? 1.0 : scad[k];
    }
  }
  return weights;
}

AdditiveModel adaptive_liso(const Dataset& d, double lambda0, double lambda1,
                            const ReweightSpec& spec, const LisoConfig& base) {
  spec.validate();
  base.validate(d.p());
  check_lambda(lambda0, "adaptive_liso");
  check_lambda(lambda1, "adaptive_liso");

  LisoConfig c0 = base;
  c0.lambda = lambda0;
  c0.penalty_weights.clear();  // unit-weight pilot
  AdditiveModel current = liso_fit(d, c0);

  for (int iter = 0; iter < spec.iterations; ++iter) {
    std::vector<double> weights = reweight_from(current, spec, lambda1);
    bool any = false;
    for (double w : weights) any = any || std::isfinite(w);
    LisoConfig c1 = base;
    c1.lambda = lambda1;
    c1.penalty_weights = std::move(weights);
    current = liso_fit(d, c1);
    if (!any) {
      current.diagnostics.note = "pilot fit has no active covariates; model is zero";
      break;
    }
  }
  return current;
}

SignedWeights SignedWeights::unit(std::size_t p) {
  return {std::vector<double>(p, 1.0), std::vector<double>(p, 1.0)};
}

void SignedWeights::validate(std::size_t p) const {
  if (plus.size() != p || minus.size() != p)
    throw std::invalid_argument("SignedWeights: length mismatch");
  for (const auto* side : {&plus, &minus})
    for (double v : *side)
      if (std::isnan(v) || v < 0.0)
        throw std::invalid_argument("SignedWeights: weights must be >= 0");
}

SignedModel signed_liso(const Dataset& d, double lambda, const SignedWeights& sw,
                        const LisoConfig& base) {
  base.validate(d.p());
  sw.validate(d.p());
  check_lambda(lambda, "signed_liso");

  std::vector<detail::SubColumn> cols;
  std::vector<int> inc_of(d.p(), -1), dec_of(d.p(), -1);
  for (std::size_t k = 0; k < d.p(); ++k) {
    auto kk = static_cast<std::uint32_t>(k);
    if (std::isfinite(sw.plus[k])) {
      inc_of[k] = static_cast<int>(cols.size());
      cols.push_back({kk, false, sw.plus[k]});
    }
    if (std::isfinite(sw.minus[k])) {
      dec_of[k] = static_cast<int>(cols.size());
      cols.push_back({kk, true, sw.minus[k]});
    }
  }

  detail::BackfitOptions opts;
  opts.lambda = lambda;
  opts.tol_loss = base.tol_loss;
  opts.tol_change = base.tol_change;
  opts.max_cycles = base.max_cycles;
  opts.random_cycle_order = base.random_cycle_order;
  opts.cycle_seed = base.cycle_seed;
  opts.record_loss_trace = base.record_loss_trace;
  auto res = detail::backfit_engine(d, cols, opts);

  SignedModel sm;
  sm.model.intercept = d.y_mean();
  sm.model.lambda = lambda;
  sm.model.components.resize(d.p());
  sm.model.directions.assign(d.p(), Direction::unconstrained);
  sm.model.diagnostics = std::move(res.diag);
  sm.plus.resize(d.p());
  sm.minus.resize(d.p());

  for (std::size_t k = 0; k < d.p(); ++k) {
    const int ic = inc_of[k], dc = dec_of[k];
    if (ic < 0 && dc < 0) continue;
    const auto& idx = d.covariate_index(k);
    auto centered = [&](std::vector<double> v) {
      double m = weighted_mean(idx.group_weight, v);
      for (double& x : v) x -= m;
      return StepFunction(idx.distinct_x, std::move(v));
    };
    if (ic >= 0 && dc >= 0) {
      detail::remove_overlap(res.values[ic], res.values[dc]);
      sm.plus[k] = centered(std::move(res.values[ic]));
      sm.minus[k] = centered(std::move(res.values[dc]));
      sm.model.components[k] = add(sm.plus[k], sm.minus[k]);
    } else if (ic >= 0) {
      sm.plus[k] = centered(std::move(res.values[ic]));
      sm.model.components[k] = sm.plus[k];
      sm.model.directions[k] = Direction::increasing;
    } else {
      sm.minus[k] = centered(std::move(res.values[dc]));
      sm.model.components[k] = sm.minus[k];
      sm.model.directions[k] = Direction::decreasing;
    }
  }
  return sm;
}

SignedModel adaptive_sign_discovery(const Dataset& d, double lambda0, double lambda1,
                                    const LisoConfig& base) {
  check_lambda(lambda0, "adaptive_sign_discovery");
  check_lambda(lambda1, "adaptive_sign_discovery");
  SignedModel pilot = signed_liso(d, lambda0, SignedWeights::unit(d.p()), base);

  SignedWeights w;
  w.plus.assign(d.p(), kInf);
  w.minus.assign(d.p(), kInf);
  bool any = false;
  for (std::size_t k = 0; k < d.p(); ++k) {
    const StepFunction& f = pilot.model.components[k];
    if (f.empty()) continue;
    SignedParts parts = decompose(f, d.covariate_index(k).group_weight);
    double tvp = parts.plus.total_variation();
    double tvm = parts.minus.total_variation();
    if (tvp > kDropTotalVariation) {
      w.plus[k] = std::min(1.0 / tvp, kPenaltyWeightCap);
      any = true;
    }
    if (tvm > kDropTotalVariation) {
      w.minus[k] = std::min(1.0 / tvm, kPenaltyWeightCap);
      any = true;
    }
  }

  SignedModel out = signed_liso(d, lambda1, w, base);
  if (!any)
    out.model.diagnostics.note = "pilot fit has no active covariates; model is zero";
  return out;
}

}  // namespace liso
