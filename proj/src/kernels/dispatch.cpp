#include "synth/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace synth::kernels {

namespace {

Isa detect() {
  if (const char* env = std::getenv("SYNTH_KERNELS")) {
    if (std::string(env) == "scalar") return Isa::scalar;
  }
  return isa_available(Isa::avx2) ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

void check_sizes(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernels: length mismatch");
}

}  // namespace

std::string_view isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool isa_available(Isa isa) {
  if (isa == Isa::scalar) return true;
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

Isa select_isa(Isa isa) {
  if (!isa_available(isa)) throw std::invalid_argument("kernels: ISA not available on this CPU");
  return current().exchange(isa);
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_sizes(a.size(), b.size());
  return active_isa() == Isa::avx2 ? avx2::dot(a.data(), b.data(), a.size())
                                   : scalar::dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_sizes(x.size(), y.size());
  if (active_isa() == Isa::avx2) {
    avx2::axpy(alpha, x.data(), y.data(), x.size());
  } else {
    scalar::axpy(alpha, x.data(), y.data(), x.size());
  }
}

double abs_sum(std::span<const double> a) {
  return active_isa() == Isa::avx2 ? avx2::abs_sum(a.data(), a.size()) : scalar::abs_sum(a.data(), a.size());
}

}  // namespace synth::kernels
