#include "dasim/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>

#include "dasim/errors.hpp"
#include "dasim/kernels.hpp"

namespace dasim {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::Fixed: return "fixed";
    case Family::Normal: return "normal";
    case Family::Exponential: return "exponential";
    case Family::Uniform: return "uniform";
    case Family::Lognormal: return "lognormal";
  }
  return "?";
}

Family parse_family(std::string_view text) {
  for (auto f : {Family::Fixed, Family::Normal, Family::Exponential, Family::Uniform,
                 Family::Lognormal})
    if (to_string(f) == text) return f;
  throw SchemaError("unknown distribution family '" + std::string(text) + "'");
}

namespace {
std::size_t arity(Family f) {
  return f == Family::Fixed || f == Family::Exponential ? 1 : 2;
}
}  // namespace

std::string Distribution::check() const {
  if (params.size() != arity(family))
    return std::string(to_string(family)) + " expects " + std::to_string(arity(family)) +
           " parameter(s)";
  for (double p : params)
    if (!std::isfinite(p)) return "non-finite parameter";
  switch (family) {
    case Family::Fixed: break;
    case Family::Normal:
      if (params[1] < 0) return "normal sd must be >= 0";
      break;
    case Family::Exponential:
      if (params[0] <= 0) return "exponential rate must be > 0";
      break;
    case Family::Uniform:
      if (params[0] > params[1]) return "uniform requires lo <= hi";
      break;
    case Family::Lognormal:
      if (params[1] < 0) return "lognormal sigma must be >= 0";
      break;
  }
  return {};
}

double Distribution::sample(std::mt19937_64& rng) const {
  switch (family) {
    case Family::Fixed: return params[0];
    case Family::Normal: {
      if (params[1] == 0) return params[0];
      return std::normal_distribution<double>(params[0], params[1])(rng);
    }
    case Family::Exponential:
      return std::max(0.0, std::exponential_distribution<double>(params[0])(rng));
    case Family::Uniform: {
      if (params[0] == params[1]) return params[0];
      return std::uniform_real_distribution<double>(params[0], params[1])(rng);
    }
    case Family::Lognormal: {
      if (params[1] == 0) return std::exp(params[0]);
      return std::max(0.0, std::lognormal_distribution<double>(params[0], params[1])(rng));
    }
  }
  return 0.0;
}

double Distribution::cdf(double x) const {
  using namespace boost::math;
  switch (family) {
    case Family::Fixed: return x >= params[0] ? 1.0 : 0.0;
    case Family::Normal:
      if (params[1] == 0) return x >= params[0] ? 1.0 : 0.0;
      return boost::math::cdf(normal_distribution<double>(params[0], params[1]), x);
    case Family::Exponential:
      return x <= 0 ? 0.0 : boost::math::cdf(exponential_distribution<double>(params[0]), x);
    case Family::Uniform:
      if (x < params[0]) return 0.0;
      if (x >= params[1]) return 1.0;
      return (x - params[0]) / (params[1] - params[0]);
    case Family::Lognormal:
      if (x <= 0) return 0.0;
      if (params[1] == 0) return x >= std::exp(params[0]) ? 1.0 : 0.0;
      return boost::math::cdf(lognormal_distribution<double>(params[0], params[1]), x);
  }
  return 0.0;
}

double Distribution::cdf_left(double x) const {
  switch (family) {
    case Family::Fixed: return x > params[0] ? 1.0 : 0.0;
    case Family::Normal:
      if (params[1] == 0) return x > params[0] ? 1.0 : 0.0;
      return cdf(x);
    case Family::Uniform:
      if (params[0] == params[1]) return x > params[0] ? 1.0 : 0.0;
      return cdf(x);
    case Family::Lognormal:
      if (params[1] == 0) return x > std::exp(params[0]) ? 1.0 : 0.0;
      return cdf(x);
    case Family::Exponential: return cdf(x);
  }
  return 0.0;
}

double Distribution::quantile(double p) const {
  using namespace boost::math;
  p = std::clamp(p, 0.0, 1.0);
  switch (family) {
    case Family::Fixed: return params[0];
    case Family::Normal:
      if (params[1] == 0) return params[0];
      if (p <= 0) return -std::numeric_limits<double>::infinity();
      if (p >= 1) return std::numeric_limits<double>::infinity();
      return boost::math::quantile(normal_distribution<double>(params[0], params[1]), p);
    case Family::Exponential:
      if (p >= 1) return std::numeric_limits<double>::infinity();
      return boost::math::quantile(exponential_distribution<double>(params[0]), p);
    case Family::Uniform: return params[0] + p * (params[1] - params[0]);
    case Family::Lognormal:
      if (params[1] == 0) return std::exp(params[0]);
      if (p <= 0) return 0.0;
      if (p >= 1) return std::numeric_limits<double>::infinity();
      return boost::math::quantile(lognormal_distribution<double>(params[0], params[1]), p);
  }
  return 0.0;
}

double Distribution::mean() const {
  switch (family) {
    case Family::Fixed: return params[0];
    case Family::Normal: return params[0];
    case Family::Exponential: return 1.0 / params[0];
    case Family::Uniform: return 0.5 * (params[0] + params[1]);
    case Family::Lognormal: return std::exp(params[0] + 0.5 * params[1] * params[1]);
  }
  return 0.0;
}

nlohmann::json to_json(const Distribution& d) {
  return {{"family", to_string(d.family)}, {"params", d.params}};
}

Distribution distribution_from_json(const nlohmann::json& j) {
  Distribution d;
  try {
    d.family = parse_family(j.at("family").get<std::string>());
    d.params = j.at("params").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("distribution: ") + e.what());
  }
  if (auto msg = d.check(); !msg.empty()) throw ValidationError({msg});
  return d;
}

double ks_statistic(std::span<const double> sorted, const Distribution& d) {
  const double n = static_cast<double>(sorted.size());
  double best = 0.0;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const double x = sorted[i];
    const double below = static_cast<double>(i) / n;
    const double upto = static_cast<double>(j) / n;
    best = std::max({best, std::abs(upto - d.cdf(x)), std::abs(below - d.cdf_left(x))});
    i = j;
  }
  return best;
}

bool fit_family(Family f, std::span<const double> sorted, Distribution& out) {
  const std::size_t n = sorted.size();
  if (n == 0) return false;
  const double lo = sorted.front(), hi = sorted.back();
  const double mean = kernels::sum(sorted) / static_cast<double>(n);
  const double var = n > 1 ? kernels::centered_sq_sum(sorted, mean) / static_cast<double>(n - 1) : 0.0;
  const bool spread = hi > lo;
  switch (f) {
    case Family::Fixed:
      out = Distribution::fixed(mean);
      return true;
    case Family::Normal:
      if (!spread) return false;
      out = Distribution::normal(mean, std::sqrt(var));
      return true;
    case Family::Exponential:
      if (lo < 0 || mean <= 0) return false;
      out = Distribution::exponential(1.0 / mean);
      return true;
    case Family::Uniform:
      if (!spread) return false;
      out = Distribution::uniform(lo, hi);
      return true;
    case Family::Lognormal: {
      if (lo <= 0 || !spread) return false;
      std::vector<double> logs(n);
      for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(sorted[i]);
      const double mu = kernels::sum(logs) / static_cast<double>(n);
      const double s2 = kernels::centered_sq_sum(logs, mu) / static_cast<double>(n);
      if (s2 <= 0) return false;
      out = Distribution::lognormal(mu, std::sqrt(s2));
      return true;
    }
  }
  return false;
}

DistributionFit fit_distribution(std::span<const double> data) {
  if (data.empty()) throw ArgumentError("fit_distribution: empty sample");
  std::vector<double> sorted(data.begin(), data.end());
  std::sort(sorted.begin(), sorted.end());
  DistributionFit best{Distribution::fixed(0.0), std::numeric_limits<double>::infinity()};
  for (auto f : {Family::Fixed, Family::Normal, Family::Exponential, Family::Uniform,
                 Family::Lognormal}) {
    Distribution cand;
    if (!fit_family(f, sorted, cand) || !cand.check().empty()) continue;
    double ks = ks_statistic(sorted, cand);
    if (!std::isfinite(ks)) continue;
    if (ks < best.ks) best = {cand, ks};
  }
  return best;
}

}  // namespace dasim
