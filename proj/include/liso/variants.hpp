#pragma once

#include "liso/backfit.hpp"

namespace liso {

enum class ReweightScheme { adaptive, scad };

// How stage-two penalty weights are derived from a pilot fit.
struct ReweightSpec {
  ReweightScheme scheme = ReweightScheme::adaptive;
  double scad_a = 3.7;
  int iterations = 1;
  // Covariates whose pilot component has (near-)zero variation: drop them
  // from the refit, or keep them at unit weight. Dropping matches the
  // adaptive scheme; the scad scheme keeps them shrinkable by default.
  bool drop_zero_components = true;

  static ReweightSpec adaptive(int iterations = 1) {
    return {ReweightScheme::adaptive, 3.7, iterations, true};
  }
  static ReweightSpec scad(double a = 3.7, int iterations = 1) {
    return {ReweightScheme::scad, a, iterations, false};
  }
  void validate() const;
};

// weights derived from component variation are clamped here; a pilot
// variation below the drop threshold counts as zero
inline constexpr double kPenaltyWeightCap = 1e8;
inline constexpr double kDropTotalVariation = 1e-10;

// Two-stage fit: pilot at lambda0 with unit weights, refit at lambda1 with
// weights 1/variation (adaptive) or the scad derivative ratio. iterations
// > 1 repeats the reweight-refit step; dropped covariates stay dropped.
// An all-zero pilot short-circuits to the zero model with a note in the
// diagnostics.
AdditiveModel adaptive_liso(const Dataset& d, double lambda0, double lambda1,
                            const ReweightSpec& spec, const LisoConfig& base = {});

// w_k = 1 when tv_k <= lambda, (a*lambda - tv_k)_+ / ((a-1)*lambda) above.
std::vector<double> scad_weights(const AdditiveModel& pilot, double lambda, double a);

// Stage-two penalty weights for a pilot fit under the given spec: inverse
// variations (capped) for the adaptive scheme, the scad ratio otherwise;
// +inf marks covariates the zero policy drops. lambda is the refit penalty
// the weights will be used with (the scad formula depends on it).
std::vector<double> reweight_from(const AdditiveModel& pilot, const ReweightSpec& spec,
                                  double lambda);

// Per-direction penalty weights for sign discovery. A non-finite weight
// removes that direction for the covariate entirely.
struct SignedWeights {
  std::vector<double> plus, minus;
  static SignedWeights unit(std::size_t p);
  void validate(std::size_t p) const;
};

struct SignedModel {
  AdditiveModel model;                    // combined fit, unconstrained directions
  std::vector<StepFunction> plus, minus;  // monotone parts, weighted mean zero
};

// Fits every covariate with both an increasing and a decreasing part,
// penalised separately by the signed weights. The parts are canonical:
// their variations add up to the combined component's variation.
SignedModel signed_liso(const Dataset& d, double lambda, const SignedWeights& w,
                        const LisoConfig& base = {});

// Stage one: unit-weight signed fit at lambda0. Stage two: reweight each
// direction by the inverse variation of the matching part of the combined
// pilot component, dropping directions the pilot left flat.
SignedModel adaptive_sign_discovery(const Dataset& d, double lambda0, double lambda1,
                                    const LisoConfig& base = {});

}  // namespace liso
