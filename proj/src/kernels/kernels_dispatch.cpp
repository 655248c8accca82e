#include <atomic>

#include "dasim/kernels.hpp"

namespace dasim::kernels {
namespace {

struct Table {
  double (*sum)(std::span<const double>);
  double (*dot)(std::span<const double>, std::span<const double>);
  double (*abs_diff_sum)(std::span<const double>, std::span<const double>);
  double (*pinball_sum)(std::span<const double>, std::span<const double>, double);
  double (*centered_sq_sum)(std::span<const double>, double);
};

constexpr Table kScalar{scalar::sum, scalar::dot, scalar::abs_diff_sum, scalar::pinball_sum,
                        scalar::centered_sq_sum};
#ifdef DASIM_HAVE_AVX2
constexpr Table kAvx2{avx2::sum, avx2::dot, avx2::abs_diff_sum, avx2::pinball_sum,
                      avx2::centered_sq_sum};
#endif

bool cpu_has_avx2() {
#if defined(DASIM_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* table_for(Isa isa) {
#ifdef DASIM_HAVE_AVX2
  if (isa == Isa::Avx2) return &kAvx2;
#endif
  (void)isa;
  return &kScalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detected_isa()};
  return isa;
}

const Table& table() { return *table_for(active().load(std::memory_order_relaxed)); }

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::Avx2 ? "avx2" : "scalar"; }

Isa detected_isa() { return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar; }

Isa active_isa() { return active().load(); }

Isa set_active_isa(Isa isa) {
  if (isa == Isa::Avx2 && !cpu_has_avx2()) isa = Isa::Scalar;
  active().store(isa);
  return isa;
}

double sum(std::span<const double> x) { return table().sum(x); }
double dot(std::span<const double> x, std::span<const double> y) { return table().dot(x, y); }
double abs_diff_sum(std::span<const double> x, std::span<const double> y) {
  return table().abs_diff_sum(x, y);
}
double pinball_sum(std::span<const double> q, std::span<const double> tau, double y) {
  return table().pinball_sum(q, tau, y);
}
double centered_sq_sum(std::span<const double> x, double c) {
  return table().centered_sq_sum(x, c);
}

}  // namespace dasim::kernels
