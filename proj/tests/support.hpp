#pragma once

// Random instance generators shared by the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "thermoforge/numerics.hpp"
#include "thermoforge/thermal_model.hpp"

namespace thermoforge::testing {

inline Operator random_matrix(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Operator m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  }
  return m;
}

inline Operator random_hermitian(int n, std::mt19937_64& rng) {
  const Operator m = random_matrix(n, rng);
  return 0.5 * (m + m.adjoint());
}

inline Operator random_anti_hermitian(int n, std::mt19937_64& rng) {
  const Operator m = random_matrix(n, rng);
  return 0.5 * (m - m.adjoint());
}

/// Full-rank density matrix from a Ginibre sample.
inline Operator random_density(int n, std::mt19937_64& rng) {
  const Operator g = random_matrix(n, rng);
  Operator rho = g * g.adjoint();
  return rho / rho.trace().real();
}

inline Operator pure_state(const Eigen::VectorXcd& psi) { return psi * psi.adjoint() / psi.squaredNorm(); }

inline DiagonalState random_populations(int n, std::mt19937_64& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (auto& x : w) x = e(rng);
  return DiagonalState::normalized(std::move(w));
}

/// Integer-multiple energies so that resonances (multi-member blocks) occur.
inline Spectrum random_spectrum(int n, int max_level, std::mt19937_64& rng, double unit = 0.5) {
  std::uniform_int_distribution<int> lvl(0, max_level);
  std::vector<double> e(static_cast<std::size_t>(n));
  for (auto& x : e) x = unit * lvl(rng);
  return Spectrum::from_energies(e);
}

/// Taylor series with scaling and squaring; independent of the eigen route.
inline Operator expm_taylor(const Operator& a) {
  const double norm = a.norm();
  int squarings = 0;
  while (norm / std::pow(2.0, squarings) > 0.25) ++squarings;
  const Operator x = a / std::pow(2.0, squarings);
  Operator term = Operator::Identity(a.rows(), a.cols());
  Operator sum = term;
  for (int k = 1; k < 30; ++k) {
    term = term * x / static_cast<double>(k);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

/// Least-squares slope of log(err) against log(m).
inline double loglog_slope(const std::vector<double>& ms, const std::vector<double>& errs) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(ms.size());
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const double x = std::log(ms[i]);
    const double y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace thermoforge::testing
