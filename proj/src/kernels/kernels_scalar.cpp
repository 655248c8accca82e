#include <algorithm>
#include <cmath>

#include "dasim/kernels.hpp"

namespace dasim::kernels::scalar {

double sum(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return s;
}

double dot(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double abs_diff_sum(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = std::min(x.size(), y.size());
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += std::fabs(x[i] - y[i]);
  return s;
}

double pinball_sum(std::span<const double> q, std::span<const double> tau, double y) {
  const std::size_t n = std::min(q.size(), tau.size());
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double u = y - q[j];
    s += u * (tau[j] - (u < 0.0 ? 1.0 : 0.0));
  }
  return s;
}

double centered_sq_sum(std::span<const double> x, double c) {
  double s = 0.0;
  for (double v : x) s += (v - c) * (v - c);
  return s;
}

}  // namespace dasim::kernels::scalar
