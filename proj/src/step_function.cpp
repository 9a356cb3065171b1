#include "liso/step_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "liso/numeric.hpp"

namespace liso {

StepFunction::StepFunction(std::vector<double> knots, std::vector<double> values)
    : knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size())
    throw std::invalid_argument("StepFunction: knots and values differ in length");
  for (std::size_t j = 0; j < knots_.size(); ++j) {
    if (!std::isfinite(knots_[j]) || !std::isfinite(values_[j]))
      throw std::invalid_argument("StepFunction: non-finite knot or value");
    if (j > 0 && !(knots_[j - 1] < knots_[j]))
      throw std::invalid_argument("StepFunction: knots must be strictly increasing");
  }
}

double StepFunction::operator()(double x) const {
  if (empty()) throw std::logic_error("StepFunction: evaluating an empty function");
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  if (it == knots_.begin()) return values_.front();
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::evaluate_linear(double x) const {
  if (empty()) throw std::logic_error("StepFunction: evaluating an empty function");
  if (x <= knots_.front()) return values_.front();
  if (x >= knots_.back()) return values_.back();
  auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  std::size_t j = static_cast<std::size_t>(it - knots_.begin());
  double t = (x - knots_[j - 1]) / (knots_[j] - knots_[j - 1]);
  return values_[j - 1] + t * (values_[j] - values_[j - 1]);
}

double StepFunction::total_variation() const {
  double tv = 0.0;
  for (std::size_t j = 1; j < values_.size(); ++j) tv += std::abs(values_[j] - values_[j - 1]);
  return tv;
}

double StepFunction::total_variation_snapped(double tol) const {
  if (values_.size() < 2) return 0.0;
  double scale = 1.0;
  for (double v : values_) scale = std::max(scale, std::abs(v));
  double tv = 0.0;
  for (std::size_t j = 1; j < values_.size(); ++j) {
    double d = std::abs(values_[j] - values_[j - 1]);
    if (d > tol * scale) tv += d;
  }
  return tv;
}

bool StepFunction::non_decreasing() const {
  for (std::size_t j = 1; j < values_.size(); ++j)
    if (values_[j] < values_[j - 1]) return false;
  return true;
}

bool StepFunction::non_increasing() const {
  for (std::size_t j = 1; j < values_.size(); ++j)
    if (values_[j] > values_[j - 1]) return false;
  return true;
}

namespace {

void check_weights(const StepFunction& f, std::span<const double> knot_weights) {
  if (knot_weights.size() != f.size())
    throw std::invalid_argument("knot_weights length must match the knot count");
  double total = 0.0;
  for (double w : knot_weights) {
    if (!(w >= 0.0) || !std::isfinite(w))
      throw std::invalid_argument("knot_weights must be finite and non-negative");
    total += w;
  }
  if (!(total > 0.0)) throw std::invalid_argument("knot_weights must have positive total");
}

}  // namespace

StepFunction center(const StepFunction& f, std::span<const double> knot_weights) {
  if (f.empty()) return f;
  check_weights(f, knot_weights);
  double mean = weighted_mean(knot_weights, f.values());
  std::vector<double> values = f.values();
  for (double& v : values) v -= mean;
  return StepFunction(f.knots(), std::move(values));
}

SignedParts decompose(const StepFunction& f, std::span<const double> knot_weights) {
  if (f.empty()) return {};
  check_weights(f, knot_weights);
  const auto& v = f.values();
  std::vector<double> up(v.size(), 0.0), down(v.size(), 0.0);
  for (std::size_t j = 1; j < v.size(); ++j) {
    double d = v[j] - v[j - 1];
    if (nearly_equal(v[j], v[j - 1], 1e-12)) d = 0.0;
    up[j] = up[j - 1] + std::max(d, 0.0);
    down[j] = down[j - 1] + std::min(d, 0.0);
  }
  StepFunction plus(f.knots(), std::move(up));
  StepFunction minus(f.knots(), std::move(down));
  return {center(plus, knot_weights), center(minus, knot_weights)};
}

StepFunction add(const StepFunction& a, const StepFunction& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  if (a.knots() != b.knots())
    throw std::invalid_argument("add: step functions live on different knot grids");
  std::vector<double> values(a.size());
  for (std::size_t j = 0; j < values.size(); ++j) values[j] = a.values()[j] + b.values()[j];
  return StepFunction(a.knots(), std::move(values));
}

}  // namespace liso
