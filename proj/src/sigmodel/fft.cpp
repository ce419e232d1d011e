#include "ssvep/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace ssvep::fft {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

template <class T>
using FftwBuffer = std::unique_ptr<T[], FftwFree>;

template <class T>
FftwBuffer<T> alloc(std::size_t n) {
  auto* p = static_cast<T*>(fftw_malloc(sizeof(T) * n));
  if (p == nullptr) throw std::bad_alloc();
  return FftwBuffer<T>(p);
}

struct PlanPair {
  fftw_plan forward{nullptr};
  fftw_plan inverse{nullptr};
};

// The FFTW planner is not thread-safe; execution of an existing plan on
// fresh fftw_malloc'd buffers is. Plans live for the whole process.
std::mutex g_plan_mutex;
std::map<std::size_t, PlanPair>& plan_cache() {
  static std::map<std::size_t, PlanPair> cache;
  return cache;
}

const PlanPair& plans_for(std::size_t nfft) {
  std::lock_guard<std::mutex> lock(g_plan_mutex);
  auto& cache = plan_cache();
  auto it = cache.find(nfft);
  if (it != cache.end()) return it->second;

  auto real = alloc<double>(nfft);
  auto cplx = alloc<fftw_complex>(nfft / 2 + 1);
  PlanPair pair;
  const int n = static_cast<int>(nfft);
  pair.forward = fftw_plan_dft_r2c_1d(n, real.get(), cplx.get(), FFTW_ESTIMATE);
  pair.inverse = fftw_plan_dft_c2r_1d(n, cplx.get(), real.get(), FFTW_ESTIMATE);
  if (pair.forward == nullptr || pair.inverse == nullptr) {
    throw std::runtime_error("fft: FFTW planning failed");
  }
  return cache.emplace(nfft, pair).first->second;
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<std::complex<double>> forward_real(std::span<const double> x, std::size_t nfft) {
  if (nfft < x.size() || nfft < 2) throw std::invalid_argument("fft: nfft shorter than input");
  const PlanPair& plans = plans_for(nfft);
  auto in = alloc<double>(nfft);
  auto out = alloc<fftw_complex>(nfft / 2 + 1);
  std::copy(x.begin(), x.end(), in.get());
  std::fill(in.get() + x.size(), in.get() + nfft, 0.0);
  fftw_execute_dft_r2c(plans.forward, in.get(), out.get());

  std::vector<std::complex<double>> result(nfft / 2 + 1);
  std::memcpy(static_cast<void*>(result.data()), out.get(), sizeof(fftw_complex) * result.size());
  return result;
}

std::vector<double> inverse_real(std::span<const std::complex<double>> half, std::size_t nfft) {
  if (half.size() != nfft / 2 + 1) throw std::invalid_argument("fft: half-spectrum size mismatch");
  const PlanPair& plans = plans_for(nfft);
  auto in = alloc<fftw_complex>(half.size());
  auto out = alloc<double>(nfft);
  std::memcpy(in.get(), half.data(), sizeof(fftw_complex) * half.size());
  // c2r destroys its input; the buffer is ours.
  fftw_execute_dft_c2r(plans.inverse, in.get(), out.get());
  return std::vector<double>(out.get(), out.get() + nfft);
}

}  // namespace ssvep::fft
