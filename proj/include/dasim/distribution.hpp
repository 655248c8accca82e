#pragma once

#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace dasim {

enum class Family { Fixed, Normal, Exponential, Uniform, Lognormal };

std::string_view to_string(Family f);
Family parse_family(std::string_view text);

/// Parametric univariate distribution.
///
/// Parameters per family:
///   fixed: {value}; normal: {mean, sd}; exponential: {rate};
///   uniform: {lo, hi}; lognormal: {mu, sigma} of the underlying normal.
struct Distribution {
  Family family = Family::Fixed;
  std::vector<double> params{0.0};

  static Distribution fixed(double v) { return {Family::Fixed, {v}}; }
  static Distribution normal(double mean, double sd) { return {Family::Normal, {mean, sd}}; }
  static Distribution exponential(double rate) { return {Family::Exponential, {rate}}; }
  static Distribution uniform(double lo, double hi) { return {Family::Uniform, {lo, hi}}; }
  static Distribution lognormal(double mu, double sigma) {
    return {Family::Lognormal, {mu, sigma}};
  }

  /// Empty when the parameters are in their domain, otherwise a description.
  std::string check() const;

  double sample(std::mt19937_64& rng) const;
  double cdf(double x) const;
  /// P(X < x).
  double cdf_left(double x) const;
  double quantile(double p) const;
  double mean() const;

  friend bool operator==(const Distribution&, const Distribution&) = default;
};

nlohmann::json to_json(const Distribution& d);
/// Throws SchemaError on shape problems and ValidationError on bad parameters.
Distribution distribution_from_json(const nlohmann::json& j);

/// One-sample Kolmogorov-Smirnov statistic of `sorted` (ascending) against `d`,
/// evaluated on both sides of every jump so ties and atoms are handled exactly.
double ks_statistic(std::span<const double> sorted, const Distribution& d);

struct DistributionFit {
  Distribution dist;
  double ks = 0.0;
};

/// Fits every family by moments / maximum likelihood, skipping families whose
/// support the data violates, and keeps the one with the smallest KS statistic.
/// Ties resolve in family declaration order. `data` must be non-empty.
DistributionFit fit_distribution(std::span<const double> data);
/// Fit restricted to one family. Returns false when the support is violated.
bool fit_family(Family f, std::span<const double> sorted, Distribution& out);

}  // namespace dasim
