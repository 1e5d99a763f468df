#pragma once

#include <string_view>
#include <variant>
#include <vector>

#include "thermoforge/numerics.hpp"
#include "thermoforge/thermal_model.hpp"

namespace thermoforge {

/// Elementary anti-Hermitian generators on two joint basis states |a⟩, |b⟩:
///   h      = -i(|a⟩⟨b| + |b⟩⟨a|)
///   m      = |a⟩⟨b| - |b⟩⟨a|
///   p      = -i|a⟩⟨a|            (rank 1, b unused)
///   g_diag = i(|a⟩⟨a| + |b⟩⟨b|)
/// The commutator ½[h, m] = i(|a⟩⟨a| - |b⟩⟨b|) is available via f_operator().
enum class GeneratorKind { H, M, P, GDiag };

std::string_view to_string(GeneratorKind kind);
GeneratorKind generator_kind_from_string(std::string_view s);

struct ElementaryGenerator {
  GeneratorKind kind = GeneratorKind::P;
  double block_energy = 0.0;
  JointIndex first;
  JointIndex second;  // equals first for kind P

  friend bool operator==(const ElementaryGenerator& x, const ElementaryGenerator& y) {
    return x.kind == y.kind && x.first == y.first && x.second == y.second;
  }
};

/// Lexicographic on (first, second, kind); used as the canonical product order.
bool generator_less(const ElementaryGenerator& x, const ElementaryGenerator& y);

struct GeneratorLess {
  bool operator()(const ElementaryGenerator& x, const ElementaryGenerator& y) const {
    return generator_less(x, y);
  }
};

/// Dense anti-Hermitian matrix of the generator on the joint space.
Operator materialize(const ElementaryGenerator& gen, Dims dims);

/// 2×2 restriction of exp(t·K) to span{first, second} (1×1 for kind P,
/// returned in the (0,0) slot with (1,1) = 1).
Matrix2 local_exponential(GeneratorKind kind, double t);

/// ½[h, m] on the pair (a, b).
Operator f_operator(JointIndex a, JointIndex b, Dims dims);

/// Frobenius norm of the materialized generator.
double generator_norm(GeneratorKind kind);

/// Real-linear basis of the energy-preserving algebra: kinds H, M for every
/// in-block pair, plus P for every joint level when include_rank1 is set.
std::vector<ElementaryGenerator> enumerate_basis(const EnergyBlocks& blocks, bool include_rank1);

/// Rank-2-only generating set: H, M, GDiag for every in-block pair. Every block
/// must have at least two members (tensor a two-fold degenerate catalyst first).
std::vector<ElementaryGenerator> rank2_basis(const EnergyBlocks& blocks);

/// Real dimension of the Lie algebra generated by `gens`. Throws CapacityError
/// once the basis would exceed max_dim.
int lie_closure(const std::vector<Operator>& gens, int max_dim, double rank_tol = 1e-9);
int lie_closure(const std::vector<ElementaryGenerator>& gens, Dims dims, int max_dim,
                double rank_tol = 1e-9);

/// Spectrum with two zero-energy levels, the doubling catalyst that makes
/// every joint energy level at least two-fold degenerate.
Spectrum doubling_catalyst();

}  // namespace thermoforge
