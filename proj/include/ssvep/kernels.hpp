#pragma once

// Data-parallel inner loops shared by the signal model.
//
// Every kernel has a scalar reference implementation. Vector variants
// (AVX2+FMA on x86-64, NEON on AArch64) are selected once at runtime from
// the CPU feature set and must agree with the scalar path up to summation
// reordering. Set SSVEP_SIMD=scalar in the environment to force the
// reference path.

#include <cstddef>
#include <span>
#include <string_view>

namespace ssvep::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
  // x[i] += c
  void (*add_scalar)(double c, double* x, std::size_t n);
  // x[i] *= c
  void (*scale)(double c, double* x, std::size_t n);
  // out[i] = re[i]^2 + im[i]^2 for interleaved complex input (re, im, re, ...)
  void (*complex_abs2)(const double* interleaved, double* out, std::size_t n);
};

// Reference implementations. Always available.
const KernelTable& scalar_table();

// Table for a specific backend, or nullptr when not compiled in or not
// supported by the running CPU.
const KernelTable* table_for(Backend backend);

// The table chosen at startup (SSVEP_SIMD=scalar|avx2|neon overrides).
const KernelTable& active();
// Swaps the process-wide table, e.g. to compare backends. Returns false if
// the backend is unavailable here. Not meant to race with running kernels.
bool use_backend(Backend backend);

std::string_view backend_name(Backend backend);

// Thin span wrappers over the active table.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double sum(std::span<const double> x);
double mean(std::span<const double> x);
void add_scalar(double c, std::span<double> x);
void scale(double c, std::span<double> x);

}  // namespace ssvep::kernels
