#include "kernels_impl.hpp"

namespace ssvep::kernels::detail {

namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

void add_scalar_scalar(double c, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] += c;
}

void scale_scalar(double c, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= c;
}

void complex_abs2_scalar(const double* z, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double re = z[2 * i];
    const double im = z[2 * i + 1];
    out[i] = re * re + im * im;
  }
}

}  // namespace

const KernelTable kScalarTable{
    Backend::Scalar, dot_scalar,   axpy_scalar,        sum_scalar,
    add_scalar_scalar, scale_scalar, complex_abs2_scalar,
};

}  // namespace ssvep::kernels::detail
