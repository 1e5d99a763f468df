#include "thermoforge/numerics.hpp"

#include <cmath>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge {

Operator kron(const Operator& a, const Operator& b, std::size_t cap) {
  if (a.rows() < 1 || b.rows() < 1 || a.rows() != a.cols() || b.rows() != b.cols()) {
    throw ShapeError("kron: operands must be non-empty square matrices");
  }
  const auto da = static_cast<std::size_t>(a.rows());
  const auto db = static_cast<std::size_t>(b.rows());
  if (da * db > cap) {
    throw CapacityError("kron: joint dimension " + std::to_string(da * db) +
                        " exceeds cap " + std::to_string(cap));
  }
  const Eigen::Index n = a.rows() * b.rows();
  Operator out(n, n);
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

Operator partial_trace(const Operator& rho, Dims dims, Keep keep) {
  if (dims.first < 1 || dims.second < 1 || rho.rows() != rho.cols() ||
      rho.rows() != dims.total()) {
    throw ShapeError("partial_trace: operator dimension " + std::to_string(rho.rows()) +
                     " does not match " + std::to_string(dims.first) + "x" +
                     std::to_string(dims.second));
  }
  const int da = dims.first;
  const int db = dims.second;
  if (keep == Keep::First) {
    Operator out = Operator::Zero(da, da);
    for (int i = 0; i < da; ++i) {
      for (int j = 0; j < da; ++j) {
        Complex acc = 0.0;
        for (int k = 0; k < db; ++k) acc += rho(i * db + k, j * db + k);
        out(i, j) = acc;
      }
    }
    return out;
  }
  Operator out = Operator::Zero(db, db);
  for (int k = 0; k < da; ++k) out += rho.block(k * db, k * db, db, db);
  return out;
}

Operator expm_skew(const Operator& k, double tol) {
  if (k.rows() != k.cols()) throw ShapeError("expm_skew: operator must be square");
  if (!is_anti_hermitian(k, tol)) {
    throw DomainError("expm_skew: input is not anti-Hermitian (|k + k^dagger|_F = " +
                      std::to_string((k + k.adjoint()).norm()) + ")");
  }
  if (k.rows() == 0) return k;
  // k = -i·H with H = i·k Hermitian, so e^k = V e^{-iΛ} V†.
  const Operator h = Complex(0.0, 1.0) * k;
  const Operator h_sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> eig(h_sym);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  Eigen::VectorXcd phases(lambda.size());
  for (Eigen::Index i = 0; i < lambda.size(); ++i) phases(i) = std::polar(1.0, -lambda(i));
  const Operator& v = eig.eigenvectors();
  return v * phases.asDiagonal() * v.adjoint();
}

double distance(const Operator& a, const Operator& b, Metric metric) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("distance: operands have different shapes");
  }
  const Operator diff = a - b;
  if (metric == Metric::Frobenius) return diff.norm();
  if (!is_hermitian(a, 1e-9) || !is_hermitian(b, 1e-9)) {
    throw DomainError("distance: trace metric requires Hermitian operands");
  }
  return 0.5 * hermitian_eigenvalues(diff).cwiseAbs().sum();
}

Operator commutator(const Operator& a, const Operator& b) { return a * b - b * a; }

bool is_hermitian(const Operator& a, double tol) {
  return a.rows() == a.cols() && (a - a.adjoint()).norm() < tol;
}

bool is_anti_hermitian(const Operator& a, double tol) {
  return a.rows() == a.cols() && (a + a.adjoint()).norm() < tol;
}

double unitarity_defect(const Operator& u) {
  return (u.adjoint() * u - Operator::Identity(u.rows(), u.cols())).norm();
}

bool is_unitary(const Operator& u, double tol) {
  return u.rows() == u.cols() && unitarity_defect(u) < tol;
}

Eigen::VectorXd hermitian_eigenvalues(const Operator& a) {
  if (a.rows() == 0) return {};
  const Operator sym = 0.5 * (a + a.adjoint());
  Eigen::SelfAdjointEigenSolver<Operator> eig(sym, Eigen::EigenvaluesOnly);
  return eig.eigenvalues();
}

double real_inner(const Operator& a, const Operator& b) {
  return (a.conjugate().cwiseProduct(b)).sum().real();
}

double compensated_sum(std::span<const double> xs) {
  double sum = 0.0;
  double c = 0.0;
  for (double x : xs) {
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + c;
}

}  // namespace thermoforge
