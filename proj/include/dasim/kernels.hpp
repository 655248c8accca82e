#pragma once

// Reduction kernels used by rule fitting, scoring and the sample metrics.
// Each kernel has a scalar reference implementation and, on x86-64, an AVX2
// variant. The dispatched entry points pick the widest variant the running CPU
// supports; results agree with the scalar reference up to summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace dasim::kernels {

enum class Isa { Scalar, Avx2 };

std::string_view to_string(Isa isa);

/// Best ISA supported by both the build and the running CPU.
Isa detected_isa();
/// ISA currently used by the dispatched kernels.
Isa active_isa();
/// Pins the dispatched kernels to `isa`. Falls back to Scalar if unsupported.
/// Returns the ISA actually selected.
Isa set_active_isa(Isa isa);

double sum(std::span<const double> x);
/// Σ x_i·y_i over min(|x|, |y|) elements.
double dot(std::span<const double> x, std::span<const double> y);
/// Σ |x_i − y_i| over min(|x|, |y|) elements.
double abs_diff_sum(std::span<const double> x, std::span<const double> y);
/// Σ_j ρ_{τ_j}(y − q_j) with the pinball loss ρ_τ(u) = u·(τ − 1{u<0}).
/// `quantiles` and `levels` have equal length.
double pinball_sum(std::span<const double> quantiles, std::span<const double> levels, double y);
/// Σ (x_i − c)²
double centered_sq_sum(std::span<const double> x, double c);

namespace scalar {
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double abs_diff_sum(std::span<const double> x, std::span<const double> y);
double pinball_sum(std::span<const double> quantiles, std::span<const double> levels, double y);
double centered_sq_sum(std::span<const double> x, double c);
}  // namespace scalar

#ifdef DASIM_HAVE_AVX2
namespace avx2 {
double sum(std::span<const double> x);
double dot(std::span<const double> x, std::span<const double> y);
double abs_diff_sum(std::span<const double> x, std::span<const double> y);
double pinball_sum(std::span<const double> quantiles, std::span<const double> levels, double y);
double centered_sq_sum(std::span<const double> x, double c);
}  // namespace avx2
#endif

}  // namespace dasim::kernels
