#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <utility>

#include <Eigen/Dense>

namespace thermoforge {

using Complex = std::complex<double>;
using Operator = Eigen::MatrixXcd;
using Matrix2 = Eigen::Matrix2cd;

inline constexpr double kDefaultTol = 1e-10;
inline constexpr std::size_t kDefaultDimCap = 4096;

enum class Keep { First, Second };
enum class Metric { Frobenius, Trace };

/// Dimensions of a bipartite space, first factor outermost.
struct Dims {
  int first = 1;
  int second = 1;
  [[nodiscard]] int total() const { return first * second; }
};

/// a ⊗ b with the index of b varying fastest. Throws CapacityError when the
/// joint dimension would exceed `cap`.
Operator kron(const Operator& a, const Operator& b, std::size_t cap = kDefaultDimCap);

Operator partial_trace(const Operator& rho, Dims dims, Keep keep);

/// exp(k) for anti-Hermitian k, via the eigendecomposition of i·k.
Operator expm_skew(const Operator& k, double tol = kDefaultTol);

/// Frobenius norm of a−b, or the trace distance ½‖a−b‖₁ for Hermitian inputs.
double distance(const Operator& a, const Operator& b, Metric metric = Metric::Trace);

inline double trace_distance(const Operator& a, const Operator& b) {
  return distance(a, b, Metric::Trace);
}

Operator commutator(const Operator& a, const Operator& b);

bool is_hermitian(const Operator& a, double tol = 1e-12);
bool is_anti_hermitian(const Operator& a, double tol = kDefaultTol);
bool is_unitary(const Operator& u, double tol = kDefaultTol);

/// ‖U†U − I‖_F
double unitarity_defect(const Operator& u);

/// Eigenvalues of a Hermitian operator, ascending.
Eigen::VectorXd hermitian_eigenvalues(const Operator& a);

/// Real inner product Re tr(a†b) on operator space.
double real_inner(const Operator& a, const Operator& b);

/// Neumaier-compensated sum; the result does not depend on thread count.
double compensated_sum(std::span<const double> xs);

}  // namespace thermoforge
