#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "thermoforge/numerics.hpp"

namespace thermoforge {

/// Absolute tolerance for deciding that two energies are degenerate.
inline constexpr double kEnergyTol = 1e-9;

struct Level {
  double energy = 0.0;
  int deg = 0;  // distinguishes degenerate partners, 0..δ-1 within one energy
};

/// Diagonal Hamiltonian given as an ordered level list. List order is the basis
/// order of every matrix built on top of it. Energies are in units where β·E is
/// dimensionless.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(std::vector<Level> levels);

  /// Degeneracy labels are assigned in listed order.
  static Spectrum from_energies(std::span<const double> energies);

  [[nodiscard]] int dim() const { return static_cast<int>(levels_.size()); }
  [[nodiscard]] double energy(int i) const { return levels_.at(static_cast<std::size_t>(i)).energy; }
  [[nodiscard]] const std::vector<Level>& levels() const { return levels_; }
  [[nodiscard]] std::vector<double> energies() const;
  [[nodiscard]] Operator hamiltonian() const;

 private:
  std::vector<Level> levels_;
};

/// Joint spectrum of a ⊗ b (b fastest), labels reassigned in joint order.
Spectrum tensor(const Spectrum& a, const Spectrum& b);

/// Groups energies into degenerate clusters; returns one cluster id per entry,
/// ids ordered by ascending cluster energy.
std::vector<int> cluster_energies(std::span<const double> energies, double tol = kEnergyTol);

struct ThermalContext {
  double beta = 1.0;
};

/// Population vector, one entry per spectrum level.
class DiagonalState {
 public:
  DiagonalState() = default;
  /// Requires Σp = 1 within 1e-12; entries above -1e-14 are clamped to 0.
  explicit DiagonalState(std::vector<double> populations);
  static DiagonalState normalized(std::vector<double> weights);

  [[nodiscard]] int dim() const { return static_cast<int>(p_.size()); }
  [[nodiscard]] double operator[](int i) const { return p_[static_cast<std::size_t>(i)]; }
  [[nodiscard]] const std::vector<double>& populations() const { return p_; }
  [[nodiscard]] Operator to_operator() const;

 private:
  std::vector<double> p_;
};

DiagonalState gibbs_state(const Spectrum& spec, const ThermalContext& ctx = {});

struct JointIndex {
  int system = 0;
  int catalyst = 0;
  friend auto operator<=>(const JointIndex&, const JointIndex&) = default;
};

struct EnergyBlock {
  double energy = 0.0;
  std::vector<JointIndex> members;  // lexicographic (system, catalyst)
  [[nodiscard]] int size() const { return static_cast<int>(members.size()); }
};

/// Partition of the joint system⊗catalyst basis into degenerate total-energy
/// subspaces, ordered by ascending energy.
class EnergyBlocks {
 public:
  EnergyBlocks() = default;
  EnergyBlocks(Dims dims, std::vector<EnergyBlock> blocks);

  [[nodiscard]] Dims dims() const { return dims_; }
  [[nodiscard]] int joint_dim() const { return dims_.total(); }
  [[nodiscard]] const std::vector<EnergyBlock>& blocks() const { return blocks_; }
  [[nodiscard]] int flat(JointIndex j) const { return j.system * dims_.second + j.catalyst; }
  [[nodiscard]] JointIndex unflat(int k) const { return {k / dims_.second, k % dims_.second}; }
  [[nodiscard]] int block_of(int flat_index) const { return block_of_.at(static_cast<std::size_t>(flat_index)); }
  [[nodiscard]] bool same_block(int a, int b) const { return block_of(a) == block_of(b); }
  /// Σ d², the real dimension of the energy-preserving Lie algebra.
  [[nodiscard]] long algebra_dim() const;
  [[nodiscard]] std::vector<int> block_sizes() const;

 private:
  Dims dims_;
  std::vector<EnergyBlock> blocks_;
  std::vector<int> block_of_;
};

EnergyBlocks energy_blocks(const Spectrum& spec_s, const Spectrum& spec_c);

/// Diagonal of H_S ⊗ 1 + 1 ⊗ H_C.
Eigen::VectorXd joint_energies(const Spectrum& spec_s, const Spectrum& spec_c);

/// Haar-random d×d unitary from QR of a complex Gaussian matrix.
Operator haar_unitary(int d, std::mt19937_64& rng);

/// Block-diagonal unitary, one independent Haar block per energy block.
Operator random_energy_preserving_unitary(const EnergyBlocks& blocks, std::uint64_t seed);

/// First entry coupling two different blocks with modulus ≥ tol, if any.
std::optional<std::pair<int, int>> find_block_violation(const Operator& u, const EnergyBlocks& blocks,
                                                        double tol);

bool is_energy_preserving(const Operator& u, const EnergyBlocks& blocks, double tol);

}  // namespace thermoforge
