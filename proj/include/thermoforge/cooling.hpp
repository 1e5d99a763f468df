#pragma once

#include <utility>
#include <vector>

#include "thermoforge/compiler.hpp"
#include "thermoforge/thermal_model.hpp"

namespace thermoforge {

// Qutrit cooling with an exponentially degenerate Gibbs catalyst: catalyst
// levels nE (n = 0..D-1) with 2^n partners each, system energies (0, E, E)
// with e^{-βE} = 1/2, and commuting swaps
//   |0⟩_S|n, k + (x-1)2^{n-1}⟩_C  ↔  |x⟩_S|n-1, k⟩_C,   x ∈ {1, 2}.

inline constexpr int kCoolingMaxDiagonalD = 20;
inline constexpr int kCoolingMaxDenseD = 15;

/// (0, E, E) with E = ln 2 / β.
Spectrum cooling_system_spectrum(const ThermalContext& ctx = {});

/// The input state (0, 1/2, 1/2).
DiagonalState cooling_default_input();

/// Energies nE with 2^n degenerate partners, n = 0..d-1; dim 2^d - 1.
Spectrum build_cooling_catalyst(int d, const ThermalContext& ctx = {});

/// Flat catalyst index of |n, j⟩ with 1-based partner label j.
int cooling_catalyst_index(int n, int j);

/// Joint flat index pairs swapped by the cooling unitary.
std::vector<std::pair<int, int>> cooling_transpositions(int d);

/// 2(2^{d-1} - 1) commuting transpositions, tagged handcrafted.
GateSequence build_cooling_sequence(int d);

struct CoolingInstance {
  int d = 2;
  Spectrum system;
  Spectrum catalyst;
  GateSequence gates;
};

CoolingInstance make_cooling_instance(int d, const ThermalContext& ctx = {});

struct CoolingResult {
  DiagonalState final_state;
  std::vector<double> catalyst_marginal;
  /// Populations of |x⟩_S|D-1, j⟩_C, x = 1 then 2, j = 1..2^{D-1}.
  std::vector<double> invariant_populations;
  [[nodiscard]] double invariant_level_population() const { return invariant_populations.front(); }
};

/// Population-vector evaluation of the cooling sequence on p ⊗ τ_β(H_C).
CoolingResult run_cooling(int d, const DiagonalState& p = cooling_default_input());

/// Same result through dense density matrices (d ≤ kCoolingMaxDenseD and the
/// dense dimension cap).
CoolingResult run_cooling_dense(int d, const DiagonalState& p = cooling_default_input());

/// Closed-form final state (1 - 1/D, 1/(2D), 1/(2D)) for the default input.
std::vector<double> cooling_closed_form(int d);

namespace serial {
CoolingResult run_cooling(int d, const DiagonalState& p = cooling_default_input());
}

}  // namespace thermoforge
