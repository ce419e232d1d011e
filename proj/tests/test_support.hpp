#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ssvep::testing {

inline std::vector<double> gaussian(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d(0.0, sd);
  std::vector<double> x(n);
  for (double& v : x) v = d(rng);
  return x;
}

inline std::vector<double> sinusoid(std::size_t n, double freq, double fs, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * static_cast<double>(i) / fs + phase);
  }
  return x;
}

// Biased autocovariance of the mean-removed signal, straight from the definition.
inline std::vector<double> brute_autocov(const std::vector<double>& x, std::size_t max_lag) {
  const auto n = x.size();
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  std::vector<double> r(max_lag + 1, 0.0);
  for (std::size_t k = 0; k <= max_lag && k < n; ++k) {
    long double acc = 0.0L;
    for (std::size_t t = k; t < n; ++t) acc += (x[t] - mean) * (x[t - k] - mean);
    r[k] = static_cast<double>(acc / n);
  }
  return r;
}

// Yule-Walker by dense LU in long double: R a = -r[1..p],
// sigma^2 = r0 + sum a_j r_j. Extended precision keeps the reference
// meaningful on badly conditioned systems.
inline std::pair<std::vector<double>, double> toeplitz_solve(const std::vector<double>& r, std::size_t p) {
  using Mat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  Mat R(p, p);
  Vec rhs(p);
  for (std::size_t i = 0; i < p; ++i) {
    for (std::size_t j = 0; j < p; ++j) R(i, j) = r[i > j ? i - j : j - i];
    rhs(i) = -r[i + 1];
  }
  const Vec a = R.fullPivLu().solve(rhs);
  long double var = r[0];
  for (std::size_t j = 0; j < p; ++j) var += a(j) * r[j + 1];
  std::vector<double> out(p);
  for (std::size_t j = 0; j < p; ++j) out[j] = static_cast<double>(a(j));
  return {out, static_cast<double>(var)};
}

// Autocovariance of a random stable AR process, via its impulse response.
// Poles are drawn inside radius 0.95 so the Toeplitz system is well posed.
inline std::vector<double> random_stationary_autocov(std::size_t p, std::size_t lags, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> radius(0.1, 0.95), angle(0.05, std::numbers::pi - 0.05);
  std::vector<double> poly{1.0};
  auto mul = [&poly](const std::vector<double>& f) {
    std::vector<double> out(poly.size() + f.size() - 1, 0.0);
    for (std::size_t i = 0; i < poly.size(); ++i)
      for (std::size_t j = 0; j < f.size(); ++j) out[i + j] += poly[i] * f[j];
    poly = out;
  };
  std::size_t order = 0;
  while (order + 2 <= p) {
    const double rr = radius(rng), th = angle(rng);
    mul({1.0, -2.0 * rr * std::cos(th), rr * rr});
    order += 2;
  }
  if (order < p) {
    mul({1.0, -(radius(rng) * 2.0 - 1.0)});
    ++order;
  }
  std::vector<double> h{1.0};
  for (std::size_t t = 1; t < 4000; ++t) {
    double v = 0.0;
    for (std::size_t j = 1; j < poly.size() && j <= t; ++j) v -= poly[j] * h[t - j];
    h.push_back(v);
  }
  std::vector<double> r(lags + 1, 0.0);
  for (std::size_t k = 0; k <= lags; ++k)
    for (std::size_t t = 0; t + k < h.size(); ++t) r[k] += h[t] * h[t + k];
  return r;
}

class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() / ("ssvep_test_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace ssvep::testing
