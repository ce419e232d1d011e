#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

#include "kernels_impl.hpp"

namespace ssvep::kernels {

namespace {

bool cpu_has_avx2() {
#if defined(SSVEP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& select() {
  if (const char* forced = std::getenv("SSVEP_SIMD")) {
    const std::string want{forced};
    if (want == "scalar") return detail::kScalarTable;
    if (want == "avx2") {
      if (const KernelTable* t = table_for(Backend::Avx2)) return *t;
    }
    if (want == "neon") {
      if (const KernelTable* t = table_for(Backend::Neon)) return *t;
    }
    // Unknown or unavailable request falls through to auto-detection.
  }
  if (const KernelTable* t = table_for(Backend::Avx2)) return *t;
  if (const KernelTable* t = table_for(Backend::Neon)) return *t;
  return detail::kScalarTable;
}

void check_same_size(std::size_t a, std::size_t b) {
  if (a != b) throw std::invalid_argument("kernels: span length mismatch");
}

}  // namespace

const KernelTable& scalar_table() { return detail::kScalarTable; }

const KernelTable* table_for(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return &detail::kScalarTable;
    case Backend::Avx2:
#if defined(SSVEP_HAVE_AVX2)
      if (cpu_has_avx2()) return &detail::kAvx2Table;
#endif
      return nullptr;
    case Backend::Neon:
#if defined(SSVEP_HAVE_NEON)
      return &detail::kNeonTable;  // mandatory on AArch64
#else
      return nullptr;
#endif
  }
  return nullptr;
}

namespace {
std::atomic<const KernelTable*>& active_slot() {
  static std::atomic<const KernelTable*> slot{&select()};
  return slot;
}
}  // namespace

const KernelTable& active() { return *active_slot().load(std::memory_order_acquire); }

bool use_backend(Backend backend) {
  const KernelTable* t = table_for(backend);
  if (!t) return false;
  active_slot().store(t, std::memory_order_release);
  return true;
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
  }
  return "unknown";
}

double dot(std::span<const double> a, std::span<const double> b) {
  check_same_size(a.size(), b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  check_same_size(x.size(), y.size());
  active().axpy(alpha, x.data(), y.data(), x.size());
}

double sum(std::span<const double> x) { return active().sum(x.data(), x.size()); }

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return sum(x) / static_cast<double>(x.size());
}

void add_scalar(double c, std::span<double> x) { active().add_scalar(c, x.data(), x.size()); }

void scale(double c, std::span<double> x) { active().scale(c, x.data(), x.size()); }

}  // namespace ssvep::kernels
