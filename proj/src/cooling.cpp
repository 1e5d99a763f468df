#include "thermoforge/cooling.hpp"

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "thermoforge/channels.hpp"
#include "thermoforge/errors.hpp"

namespace thermoforge {

namespace {

int catalyst_dim(int d) { return (1 << d) - 1; }

void check_diagonal_capacity(int d) {
  if (d > kCoolingMaxDiagonalD) {
    throw CapacityError("cooling: D = " + std::to_string(d) + " exceeds the diagonal-path limit " +
                        std::to_string(kCoolingMaxDiagonalD));
  }
}

void check_input(const DiagonalState& p) {
  if (p.dim() != 3) throw ShapeError("cooling: input must be a qutrit population vector");
}

std::vector<double> initial_joint(int d, const DiagonalState& p) {
  const Spectrum catalyst = build_cooling_catalyst(d);
  const DiagonalState gamma = gibbs_state(catalyst);
  const int c = catalyst.dim();
  std::vector<double> joint(static_cast<std::size_t>(3 * c));
  for (int s = 0; s < 3; ++s) {
    for (int k = 0; k < c; ++k) joint[static_cast<std::size_t>(s * c + k)] = p[s] * gamma[k];
  }
  return joint;
}

// Fixed-size chunks summed concurrently, then folded in order: the result is
// independent of the thread count.
constexpr long kChunk = 4096;

double chunked_sum(std::span<const double> xs, bool parallel) {
  const long n = static_cast<long>(xs.size());
  const long chunks = (n + kChunk - 1) / kChunk;
  std::vector<double> partial(static_cast<std::size_t>(chunks));
#pragma omp parallel for if (parallel && chunks > 1)
  for (long k = 0; k < chunks; ++k) {
    const long lo = k * kChunk;
    partial[static_cast<std::size_t>(k)] = compensated_sum(xs.subspan(static_cast<std::size_t>(lo),
                                                                      static_cast<std::size_t>(std::min(kChunk, n - lo))));
  }
  return compensated_sum(partial);
}

CoolingResult summarize(int d, const std::vector<double>& joint, bool parallel) {
  const int c = catalyst_dim(d);
  const std::span<const double> all(joint);
  std::vector<double> marginal(3, 0.0);
  for (int s = 0; s < 3; ++s) {
    marginal[static_cast<std::size_t>(s)] =
        chunked_sum(all.subspan(static_cast<std::size_t>(s) * static_cast<std::size_t>(c), static_cast<std::size_t>(c)), parallel);
  }
  CoolingResult r{DiagonalState(marginal), std::vector<double>(static_cast<std::size_t>(c)), {}};
#pragma omp parallel for if (parallel)
  for (int k = 0; k < c; ++k) {
    r.catalyst_marginal[static_cast<std::size_t>(k)] =
        joint[static_cast<std::size_t>(k)] + joint[static_cast<std::size_t>(c + k)] +
        joint[static_cast<std::size_t>(2 * c + k)];
  }
  const int top = d - 1;
  const int partners = 1 << top;
  r.invariant_populations.reserve(2 * static_cast<std::size_t>(partners));
  for (int x = 1; x <= 2; ++x) {
    for (int j = 1; j <= partners; ++j) {
      r.invariant_populations.push_back(joint[static_cast<std::size_t>(x * c + cooling_catalyst_index(top, j))]);
    }
  }
  return r;
}

CoolingResult run_diagonal(int d, const DiagonalState& p, bool parallel) {
  check_input(p);
  check_diagonal_capacity(d);
  if (d < 2) throw DomainError("cooling: D must be at least 2");
  std::vector<double> joint = initial_joint(d, p);
  const auto swaps = cooling_transpositions(d);
  const auto n = static_cast<long>(swaps.size());
  // The transpositions have pairwise disjoint supports.
#pragma omp parallel for if (parallel)
  for (long g = 0; g < n; ++g) {
    const auto [a, b] = swaps[static_cast<std::size_t>(g)];
    std::swap(joint[static_cast<std::size_t>(a)], joint[static_cast<std::size_t>(b)]);
  }
  return summarize(d, joint, parallel);
}

}  // namespace

Spectrum cooling_system_spectrum(const ThermalContext& ctx) {
  const double e = std::log(2.0) / ctx.beta;
  return Spectrum({{0.0, 0}, {e, 0}, {e, 1}});
}

DiagonalState cooling_default_input() { return DiagonalState({0.0, 0.5, 0.5}); }

Spectrum build_cooling_catalyst(int d, const ThermalContext& ctx) {
  if (d < 1) throw DomainError("cooling catalyst: D must be at least 1");
  check_diagonal_capacity(d);
  const double e = std::log(2.0) / ctx.beta;
  std::vector<Level> levels;
  levels.reserve(static_cast<std::size_t>(catalyst_dim(d)));
  for (int n = 0; n < d; ++n) {
    for (int g = 0; g < (1 << n); ++g) levels.push_back({n * e, g});
  }
  return Spectrum(std::move(levels));
}

int cooling_catalyst_index(int n, int j) { return (1 << n) - 1 + (j - 1); }

std::vector<std::pair<int, int>> cooling_transpositions(int d) {
  if (d < 2) throw DomainError("cooling sequence: D must be at least 2");
  check_diagonal_capacity(d);
  const int c = catalyst_dim(d);
  std::vector<std::pair<int, int>> swaps;
  swaps.reserve(2 * static_cast<std::size_t>((1 << (d - 1)) - 1));
  for (int n = 1; n < d; ++n) {
    const int half = 1 << (n - 1);
    for (int k = 1; k <= half; ++k) {
      for (int x = 1; x <= 2; ++x) {
        swaps.emplace_back(cooling_catalyst_index(n, k + (x - 1) * half), x * c + cooling_catalyst_index(n - 1, k));
      }
    }
  }
  return swaps;
}

GateSequence build_cooling_sequence(int d) {
  const int c = catalyst_dim(d);
  GateSequence seq;
  seq.method = Method::Handcrafted;
  Matrix2 swap;
  swap << 0.0, 1.0, 1.0, 0.0;
  for (const auto& [a, b] : cooling_transpositions(d)) {
    seq.steps.emplace_back(TwoLevelGate{{a / c, a % c}, {b / c, b % c}, swap});
  }
  return seq;
}

CoolingInstance make_cooling_instance(int d, const ThermalContext& ctx) {
  return {d, cooling_system_spectrum(ctx), build_cooling_catalyst(d, ctx), build_cooling_sequence(d)};
}

CoolingResult run_cooling(int d, const DiagonalState& p) { return run_diagonal(d, p, true); }

namespace serial {
CoolingResult run_cooling(int d, const DiagonalState& p) { return run_diagonal(d, p, false); }
}  // namespace serial

CoolingResult run_cooling_dense(int d, const DiagonalState& p) {
  check_input(p);
  if (d > kCoolingMaxDenseD) {
    throw CapacityError("cooling: D = " + std::to_string(d) + " exceeds the dense-path limit " +
                        std::to_string(kCoolingMaxDenseD));
  }
  const CoolingInstance inst = make_cooling_instance(d);
  const GcEtoResult run = run_gc_eto(p.to_operator(), inst.system, inst.catalyst, inst.gates, {}, false);
  const Eigen::VectorXcd diag = run.sigma_sc.diagonal();
  std::vector<double> joint(static_cast<std::size_t>(diag.size()));
  for (Eigen::Index i = 0; i < diag.size(); ++i) joint[static_cast<std::size_t>(i)] = diag(i).real();
  return summarize(d, joint, false);
}

std::vector<double> cooling_closed_form(int d) {
  const double inv = 1.0 / d;
  return {1.0 - inv, 0.5 * inv, 0.5 * inv};
}

}  // namespace thermoforge
