#include <Eigen/Dense>
#include <stdexcept>
#include <string>

#include "ssvep/errors.hpp"
#include "ssvep/kernels.hpp"
#include "ssvep/sigmodel.hpp"

namespace ssvep::sigmodel {

namespace {

void check_length(std::size_t n, const HarmonicBasis& basis) {
  if (n != basis.n_samples) {
    throw std::invalid_argument("projection: window has " + std::to_string(n) +
                                " samples, basis expects " + std::to_string(basis.n_samples));
  }
}

}  // namespace

std::vector<double> project_out(std::span<const double> s, const HarmonicBasis& basis) {
  check_length(s.size(), basis);
  const std::size_t m = basis.n_columns();

  Eigen::MatrixXd gram(m, m);
  Eigen::VectorXd rhs(m);
  for (std::size_t i = 0; i < m; ++i) {
    rhs(i) = kernels::dot(basis.column(i), s);
    for (std::size_t j = i; j < m; ++j) {
      const double g = kernels::dot(basis.column(i), basis.column(j));
      gram(i, j) = g;
      gram(j, i) = g;
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gram);
  qr.setThreshold(1e-10);
  if (qr.rank() < static_cast<Eigen::Index>(m)) {
    throw NumericalError("projection: X^T X is rank deficient (rank " + std::to_string(qr.rank()) +
                         " of " + std::to_string(m) + "); window too short for the basis");
  }
  const Eigen::VectorXd beta = qr.solve(rhs);

  std::vector<double> residual(s.begin(), s.end());
  for (std::size_t c = 0; c < m; ++c) kernels::axpy(-beta(c), basis.column(c), residual);
  return residual;
}

EegWindow project_out_ssvep(const EegWindow& window, const HarmonicBasis& basis) {
  window.validate();
  return EegWindow(project_out(window.samples, basis), window.fs, window.t0);
}

double ssvep_power(std::span<const double> s, const HarmonicBasis& basis, std::size_t harmonic) {
  if (harmonic < 1 || harmonic > basis.n_harmonics) {
    throw std::out_of_range("ssvep_power: harmonic " + std::to_string(harmonic) + " outside 1.." +
                            std::to_string(basis.n_harmonics));
  }
  check_length(s.size(), basis);
  const double a = kernels::dot(basis.column(2 * (harmonic - 1)), s);
  const double b = kernels::dot(basis.column(2 * (harmonic - 1) + 1), s);
  return a * a + b * b;
}

double ssvep_power(const EegWindow& window, const HarmonicBasis& basis, std::size_t harmonic) {
  return ssvep_power(window.view(), basis, harmonic);
}

}  // namespace ssvep::sigmodel
