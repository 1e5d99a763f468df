#pragma once

#include <map>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

#include "thermoforge/generators.hpp"
#include "thermoforge/numerics.hpp"
#include "thermoforge/thermal_model.hpp"

namespace thermoforge {

/// exp(t·K) for an elementary generator K.
struct GeneratorGate {
  ElementaryGenerator generator;
  double t = 0.0;
};

/// Explicit 2×2 unitary acting on the ordered pair (first, second).
struct TwoLevelGate {
  JointIndex first;
  JointIndex second;
  Matrix2 u = Matrix2::Identity();
};

using GateStep = std::variant<GeneratorGate, TwoLevelGate>;

enum class Method { Exact, Trotter, Bch, Handcrafted };

std::string_view to_string(Method m);
Method method_from_string(std::string_view s);

/// Ordered gate list; steps[0] acts first, so the represented unitary is
/// G_{n-1} ⋯ G_1 G_0.
struct GateSequence {
  std::vector<GateStep> steps;
  Method method = Method::Handcrafted;
  double error_bound = 0.0;
  bool error_bound_heuristic = false;
  std::optional<int> trotter_m;
};

/// Flattened view of one gate: u acts on rows/cols (a, b); single-index gates
/// have b == a and only u(0,0) is meaningful.
struct LocalGate {
  int a = 0;
  int b = 0;
  Matrix2 u = Matrix2::Identity();
  [[nodiscard]] bool single() const { return a == b; }
};

LocalGate local_gate(const GateStep& step, Dims dims);

/// Dense matrix of a single step on the joint space.
Operator materialize(const GateStep& step, Dims dims);

/// m ← G·m
void apply_left(Operator& m, const LocalGate& g);
/// rho ← G·rho·G†
void apply_conjugation(Operator& rho, const LocalGate& g);

/// Product of the steps, steps[0] rightmost. Throws ShapeError on an index
/// outside dims.
Operator reconstruct(const GateSequence& seq, Dims dims);

/// True when every index named by the step lies in one energy block.
bool is_elementary(const GateStep& step, const EnergyBlocks& blocks);

/// Per-block two-level elimination of an energy-preserving unitary. Blocks are
/// compiled concurrently.
GateSequence compile_exact(const Operator& u, const EnergyBlocks& blocks, double tol = 1e-9);

using CoefficientMap = std::map<ElementaryGenerator, double, GeneratorLess>;

/// First-order product formula for exp(t Σ r_j K_j) with m slices.
GateSequence compile_trotter(const CoefficientMap& coeffs, double t, int m);

/// Group-commutator synthesis of exp(t[K_j, K_k]) with m groups.
GateSequence compile_bch(const ElementaryGenerator& j, const ElementaryGenerator& k, double t, int m);

/// coeff · K for a single generator, or coeff · [K_1, K_2] for a pair.
/// Deeper nests are rejected by compile_nested.
struct LieTerm {
  double coeff = 0.0;
  std::vector<ElementaryGenerator> nest;
};

/// Outer product formula over linear terms (canonical order) followed by one
/// group commutator per commutator term in each of the m slices.
GateSequence compile_nested(const std::vector<LieTerm>& terms, double t, int m);

/// Dense value of Σ coeff·term.
Operator lie_terms_operator(const std::vector<LieTerm>& terms, Dims dims);

/// Principal logarithm K (anti-Hermitian, block-diagonal) with exp(K) = u.
Operator log_energy_preserving(const Operator& u, const EnergyBlocks& blocks);

/// Coordinates of an energy-preserving anti-Hermitian K in the full basis.
CoefficientMap decompose_full(const Operator& k, const EnergyBlocks& blocks);

/// K rewritten over rank-2 generators: h, m, g_diag linearly plus ½[h, m]
/// commutators replacing every rank-1 projector.
std::vector<LieTerm> decompose_rank2(const Operator& k, const EnergyBlocks& blocks);

/// Rewrites explicit two-level gates as exp(t·K) factors (kinds p and m).
GateSequence factor_to_generators(const GateSequence& seq);

struct AccuracySearch {
  GateSequence sequence;
  int m = 0;
  double error = 0.0;
  bool reached = false;
};

/// Doubles m from 1 until reconstruct(seq) is within `accuracy` of u in
/// Frobenius norm, or m exceeds m_max.
AccuracySearch compile_to_accuracy(const Operator& u, const EnergyBlocks& blocks, Method method,
                                   double accuracy, int m_max = 1 << 16);

namespace serial {
GateSequence compile_exact(const Operator& u, const EnergyBlocks& blocks, double tol = 1e-9);
}

}  // namespace thermoforge
