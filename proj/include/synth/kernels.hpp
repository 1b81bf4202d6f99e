#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Dense inner loops shared by the LP solver, zonotope hulls and gemv.
// Every variant accumulates in four interleaved lanes, the lanes are
// combined as (l0 + l1) + (l2 + l3), and the tail is added last, so the
// scalar and vector paths return bit-identical results.
namespace synth::kernels {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

// Resolved once from cpuid; SYNTH_KERNELS=scalar forces the reference path.
Isa active_isa();
bool isa_available(Isa isa);
// Test hook. Returns the previous selection.
Isa select_isa(Isa isa);

double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double abs_sum(std::span<const double> a);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double abs_sum(const double* a, std::size_t n);
}  // namespace scalar

namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double abs_sum(const double* a, std::size_t n);
}  // namespace avx2

}  // namespace synth::kernels
