#pragma once

#include <optional>
#include <span>
#include <vector>

#include "thermoforge/compiler.hpp"
#include "thermoforge/numerics.hpp"
#include "thermoforge/thermal_model.hpp"

namespace thermoforge {

inline constexpr double kStrictTol = 1e-10;

/// Energy-preserving unitary on system⊗bath together with the bath spectrum.
struct ChannelSpec {
  Spectrum bath;
  Operator unitary;
};

/// Tr_R[U (ρ ⊗ τ_β(H_R)) U†]
Operator apply_to(const Operator& rho, const Spectrum& system, const ChannelSpec& channel,
                  const ThermalContext& ctx = {});

/// Extremal two-level thermal map on populations (i, j); the lower-energy
/// level absorbs the upper one entirely.
DiagonalState beta_swap(const DiagonalState& p, const Spectrum& spec, int i, int j,
                        const ThermalContext& ctx = {});

enum class Subsystem { System, Catalyst };

/// Replaces the selected subsystem of a system⊗catalyst state by its Gibbs
/// state, removing all correlations with it.
Operator thermalize(const Operator& rho, const Spectrum& system, const Spectrum& catalyst, Subsystem which,
                    const ThermalContext& ctx = {});

struct CatalysisVerdict {
  bool strict = false;
  bool correlated = false;
  bool approximate = false;            // approximate_distance ≤ epsilon (or strict recovery)
  double epsilon = 0.0;
  double approximate_distance = 0.0;   // d(Tr_S σ_SC, μ_C)
  double catalyst_marginal_distance = 0.0;
  double product_defect = 0.0;         // d(σ_SC, σ_S ⊗ σ_C)
  double strict_defect = 0.0;          // d(σ_SC, σ_S ⊗ μ_C)
};

CatalysisVerdict classify_catalysis(const Operator& sigma_sc, const Operator& mu_c, Dims dims, double epsilon,
                                    double strict_tol = kStrictTol);

struct GcEtoResult {
  Operator sigma_s;
  Operator sigma_sc;  // raw joint state before any rethermalization
  CatalysisVerdict pre;
  std::optional<CatalysisVerdict> post;
};

/// Runs ρ ⊗ τ_β(H_C) through the gate sequence; optionally rethermalizes the
/// catalyst and classifies the result again.
GcEtoResult run_gc_eto(const Operator& rho_s, const Spectrum& system, const Spectrum& catalyst,
                       const GateSequence& seq, const ThermalContext& ctx = {}, bool rethermalize = true,
                       double epsilon = 0.0, double strict_tol = kStrictTol);

/// Convex combination Σ w_k ρ_k of channel outputs.
Operator mix(std::span<const Operator> outputs, std::span<const double> weights);

/// Largest modulus among off-diagonal entries.
double off_diagonal_mass(const Operator& rho);

/// Diagonal of a state, renormalized against rounding.
DiagonalState populations_of(const Operator& rho);

}  // namespace thermoforge
