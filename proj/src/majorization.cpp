#include "thermoforge/majorization.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge {

double ThermoCurve::operator()(double x) const {
  if (vertices.empty()) return 0.0;
  if (x <= vertices.front().x) return vertices.front().y;
  for (std::size_t k = 1; k < vertices.size(); ++k) {
    const auto& lo = vertices[k - 1];
    const auto& hi = vertices[k];
    if (x <= hi.x) {
      const double span = hi.x - lo.x;
      return span > 0.0 ? lo.y + (hi.y - lo.y) * (x - lo.x) / span : hi.y;
    }
  }
  return vertices.back().y;
}

ThermoCurve thermo_curve(const DiagonalState& p, const Spectrum& spec, const ThermalContext& ctx) {
  if (p.dim() != spec.dim()) throw ShapeError("thermo_curve: state and spectrum dimensions differ");
  const DiagonalState gamma = gibbs_state(spec, ctx);
  std::vector<int> order(static_cast<std::size_t>(spec.dim()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return p[a] / gamma[a] > p[b] / gamma[b]; });
  ThermoCurve curve;
  curve.order = order;
  curve.vertices.reserve(order.size() + 1);
  curve.vertices.push_back({0.0, 0.0});
  double x = 0.0;
  double y = 0.0;
  for (int i : order) {
    x += gamma[i];
    y += p[i];
    curve.vertices.push_back({x, y});
  }
  return curve;
}

double dominance_gap(const DiagonalState& p, const DiagonalState& q, const Spectrum& spec,
                     const ThermalContext& ctx) {
  const ThermoCurve cp = thermo_curve(p, spec, ctx);
  const ThermoCurve cq = thermo_curve(q, spec, ctx);
  double gap = -1.0;
  for (const auto* c : {&cp, &cq}) {
    for (const auto& v : c->vertices) gap = std::max(gap, cq(v.x) - cp(v.x));
  }
  return gap;
}

bool thermo_majorizes(const DiagonalState& p, const DiagonalState& q, const Spectrum& spec,
                      const ThermalContext& ctx, double tol) {
  return dominance_gap(p, q, spec, ctx) <= tol;
}

double max_ground_population_to(const DiagonalState& p, const Spectrum& spec_s, const Spectrum& spec_c,
                                const ThermalContext& ctx) {
  if (p.dim() != spec_s.dim()) throw ShapeError("max_ground_population_to: state and spectrum dimensions differ");
  const DiagonalState gamma = gibbs_state(spec_c, ctx);
  const EnergyBlocks blocks = energy_blocks(spec_s, spec_c);
  std::vector<double> chosen;
  std::vector<double> pops;
  for (const auto& blk : blocks.blocks()) {
    pops.clear();
    std::size_t ground_slots = 0;
    for (const auto& m : blk.members) {
      pops.push_back(p[m.system] * gamma[m.catalyst]);
      if (m.system == 0) ++ground_slots;
    }
    if (ground_slots == 0) continue;
    std::partial_sort(pops.begin(), pops.begin() + static_cast<long>(ground_slots), pops.end(), std::greater<>());
    chosen.insert(chosen.end(), pops.begin(), pops.begin() + static_cast<long>(ground_slots));
  }
  return compensated_sum(chosen);
}

namespace {

constexpr double kTieTol = 1e-12;

struct SearchState {
  std::vector<LevelPair> pairs;     // reported, index order
  std::vector<LevelPair> oriented;  // lower-energy level first
  std::vector<double> weights;      // exp(-β ΔE) per pair
  int depth = 0;
};

bool improves(double value, const std::vector<LevelPair>& seq, const ReachResult& best) {
  if (value > best.best + kTieTol) return true;
  if (value < best.best - kTieTol) return false;
  if (seq.size() != best.sequence.size()) return seq.size() < best.sequence.size();
  return seq < best.sequence;
}

void merge(ReachResult& into, const ReachResult& other) {
  if (improves(other.best, other.sequence, into)) {
    into.best = other.best;
    into.sequence = other.sequence;
  }
  into.visited += other.visited;
}

void apply_swap(std::vector<double>& q, const SearchState& s, std::size_t k) {
  const auto [i, j] = s.oriented[k];
  const double w = s.weights[k];
  const double pi = q[static_cast<std::size_t>(i)];
  const double pj = q[static_cast<std::size_t>(j)];
  q[static_cast<std::size_t>(i)] = (1.0 - w) * pi + pj;
  q[static_cast<std::size_t>(j)] = w * pi;
}

void dfs(const std::vector<double>& q, std::vector<LevelPair>& seq, const SearchState& s, ReachResult& best) {
  ++best.visited;
  if (improves(q[0], seq, best)) {
    best.best = q[0];
    best.sequence = seq;
  }
  if (static_cast<int>(seq.size()) == s.depth) return;
  std::vector<double> next;
  for (std::size_t k = 0; k < s.pairs.size(); ++k) {
    next = q;
    apply_swap(next, s, k);
    seq.push_back(s.pairs[k]);
    dfs(next, seq, s, best);
    seq.pop_back();
  }
}

SearchState prepare(const DiagonalState& p, const Spectrum& spec, const ThermalContext& ctx, int depth) {
  if (p.dim() != spec.dim()) throw ShapeError("eto_reach_search: state and spectrum dimensions differ");
  if (depth < 0) throw DomainError("eto_reach_search: depth must be non-negative");
  if (depth > 8 && spec.dim() > 4) {
    throw CapacityError("eto_reach_search: depth " + std::to_string(depth) + " on dimension " +
                        std::to_string(spec.dim()) + " exceeds the exhaustive-search guard");
  }
  SearchState s;
  s.depth = depth;
  for (int i = 0; i < spec.dim(); ++i) {
    for (int j = i + 1; j < spec.dim(); ++j) {
      const bool flip = spec.energy(i) > spec.energy(j);
      const int lo = flip ? j : i;
      const int hi = flip ? i : j;
      s.pairs.emplace_back(i, j);
      s.oriented.emplace_back(lo, hi);
      s.weights.push_back(std::exp(-ctx.beta * (spec.energy(hi) - spec.energy(lo))));
    }
  }
  return s;
}

}  // namespace

namespace serial {

ReachResult eto_reach_search(const DiagonalState& p, const Spectrum& spec, const ThermalContext& ctx, int depth) {
  const SearchState s = prepare(p, spec, ctx, depth);
  ReachResult best;
  best.best = -1.0;
  std::vector<LevelPair> seq;
  dfs(p.populations(), seq, s, best);
  return best;
}

}  // namespace serial

ReachResult eto_reach_search(const DiagonalState& p, const Spectrum& spec, const ThermalContext& ctx, int depth) {
  const SearchState s = prepare(p, spec, ctx, depth);
  ReachResult root;
  root.best = p[0];
  root.visited = 1;
  if (depth == 0) return root;
  const auto n = static_cast<long>(s.pairs.size());
  std::vector<ReachResult> branches(s.pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < n; ++k) {
    auto q = p.populations();
    apply_swap(q, s, static_cast<std::size_t>(k));
    std::vector<LevelPair> seq{s.pairs[static_cast<std::size_t>(k)]};
    auto& b = branches[static_cast<std::size_t>(k)];
    b.best = -1.0;
    dfs(q, seq, s, b);
  }
  for (const auto& b : branches) merge(root, b);
  return root;
}

}  // namespace thermoforge
