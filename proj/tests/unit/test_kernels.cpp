#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "dasim/kernels.hpp"

using namespace dasim;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> d(0, 100);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

double tol(double scale) { return 1e-10 * std::max(1.0, std::abs(scale)); }

}  // namespace

TEST(Kernels, ScalarReference) {
  std::vector<double> x{1, 2, 3}, y{4, 5, 6, 7};
  EXPECT_DOUBLE_EQ(kernels::scalar::sum(x), 6);
  EXPECT_DOUBLE_EQ(kernels::scalar::dot(x, y), 32);
  EXPECT_DOUBLE_EQ(kernels::scalar::abs_diff_sum(x, y), 9);
  EXPECT_DOUBLE_EQ(kernels::scalar::centered_sq_sum(x, 2), 2);
  std::vector<double> q{0, 10}, lv{0.25, 0.75};
  // y=5: 0.25*5 + (5-10)*(0.75-1)
  EXPECT_DOUBLE_EQ(kernels::scalar::pinball_sum(q, lv, 5), 1.25 + 1.25);
}

TEST(Kernels, DispatchSelection) {
  auto prev = kernels::active_isa();
  EXPECT_EQ(kernels::set_active_isa(kernels::Isa::Scalar), kernels::Isa::Scalar);
  EXPECT_EQ(kernels::active_isa(), kernels::Isa::Scalar);
  EXPECT_EQ(kernels::set_active_isa(kernels::Isa::Avx2), kernels::detected_isa());
  kernels::set_active_isa(prev);
}

#ifdef DASIM_HAVE_AVX2
TEST(Kernels, Avx2MatchesScalar) {
  if (kernels::detected_isa() != kernels::Isa::Avx2) GTEST_SKIP() << "cpu lacks avx2";
  std::mt19937_64 rng(51);
  for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 15u, 16u, 17u, 99u, 1000u, 4097u}) {
    auto x = random_vec(n, rng), y = random_vec(n + n % 3, rng);
    EXPECT_NEAR(kernels::avx2::sum(x), kernels::scalar::sum(x), tol(kernels::scalar::sum(x) + n * 100));
    EXPECT_NEAR(kernels::avx2::dot(x, y), kernels::scalar::dot(x, y), tol(n * 1e4));
    EXPECT_NEAR(kernels::avx2::abs_diff_sum(x, y), kernels::scalar::abs_diff_sum(x, y), tol(n * 100));
    EXPECT_NEAR(kernels::avx2::centered_sq_sum(x, 3.5), kernels::scalar::centered_sq_sum(x, 3.5),
                tol(n * 1e4));
    std::vector<double> lv(n);
    for (std::size_t i = 0; i < n; ++i) lv[i] = (i + 1.0) / (n + 1.0);
    auto q = x;
    std::sort(q.begin(), q.end());
    for (double yv : {-50.0, 0.0, 12.5}) {
      EXPECT_NEAR(kernels::avx2::pinball_sum(q, lv, yv), kernels::scalar::pinball_sum(q, lv, yv),
                  tol(n * 100));
    }
  }
}
#endif
