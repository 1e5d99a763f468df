#pragma once

#include <utility>
#include <vector>

#include "thermoforge/thermal_model.hpp"

namespace thermoforge {

struct CurvePoint {
  double x = 0.0;  // cumulative Gibbs weight
  double y = 0.0;  // cumulative population
};

/// β-ordered Lorenz curve; vertices start at (0, 0) and end at (1, 1).
struct ThermoCurve {
  std::vector<CurvePoint> vertices;
  std::vector<int> order;  // level visited by each segment

  /// Piecewise-linear value at x ∈ [0, 1].
  [[nodiscard]] double operator()(double x) const;
};

ThermoCurve thermo_curve(const DiagonalState& p, const Spectrum& spec, const ThermalContext& ctx = {});

/// True iff curve(p) ≥ curve(q) − tol at every vertex abscissa of either curve.
bool thermo_majorizes(const DiagonalState& p, const DiagonalState& q, const Spectrum& spec,
                      const ThermalContext& ctx = {}, double tol = 1e-9);

/// Largest value of curve(q) − curve(p) over all vertex abscissae (≤ 0 when p ≽ q).
double dominance_gap(const DiagonalState& p, const DiagonalState& q, const Spectrum& spec,
                     const ThermalContext& ctx = {});

/// Highest system-ground population a thermal operation with bath spec_c can
/// produce from the incoherent state p (block-wise greedy permutation).
double max_ground_population_to(const DiagonalState& p, const Spectrum& spec_s, const Spectrum& spec_c,
                                const ThermalContext& ctx = {});

using LevelPair = std::pair<int, int>;

struct ReachResult {
  double best = 0.0;
  std::vector<LevelPair> sequence;
  long visited = 0;  // sequences evaluated, the empty one included
};

/// Exhaustive search over β-swap sequences of length ≤ depth. Among maximal
/// ground populations (within 1e-12) the shortest, then lexicographically
/// smallest, witness is returned. The first move is searched concurrently.
ReachResult eto_reach_search(const DiagonalState& p, const Spectrum& spec, const ThermalContext& ctx, int depth);

namespace serial {
ReachResult eto_reach_search(const DiagonalState& p, const Spectrum& spec, const ThermalContext& ctx, int depth);
}

}  // namespace thermoforge
