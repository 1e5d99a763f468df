#include "thermoforge/compiler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge {

namespace {

constexpr double kSkipTol = 1e-14;

int flat_index(JointIndex j, Dims dims) { return j.system * dims.second + j.catalyst; }

void check_index(JointIndex j, Dims dims) {
  if (j.system < 0 || j.system >= dims.first || j.catalyst < 0 || j.catalyst >= dims.second) {
    throw ShapeError("gate index (" + std::to_string(j.system) + "," + std::to_string(j.catalyst) +
                     ") outside joint space " + std::to_string(dims.first) + "x" + std::to_string(dims.second));
  }
}

void require_energy_preserving(const Operator& u, const EnergyBlocks& blocks, double tol) {
  if (const auto bad = find_block_violation(u, blocks, tol)) {
    const auto [i, j] = *bad;
    const auto a = blocks.unflat(i);
    const auto b = blocks.unflat(j);
    throw DomainError("unitary is not energy-preserving: entry (" + std::to_string(i) + "," + std::to_string(j) +
                      ") couples joint levels (" + std::to_string(a.system) + "," + std::to_string(a.catalyst) +
                      ") and (" + std::to_string(b.system) + "," + std::to_string(b.catalyst) +
                      ") with modulus " + std::to_string(std::abs(u(i, j))));
  }
  if (unitarity_defect(u) >= tol) {
    throw DomainError("operator is not unitary (|U^dagger U - I|_F = " + std::to_string(unitarity_defect(u)) + ")");
  }
}

// Two-level elimination of one block, gates in acting order.
std::vector<GateStep> eliminate_block(const Operator& u, const EnergyBlocks& blocks, const EnergyBlock& blk) {
  const int d = blk.size();
  Operator v(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      v(r, c) = u(blocks.flat(blk.members[static_cast<std::size_t>(r)]),
                  blocks.flat(blk.members[static_cast<std::size_t>(c)]));
    }
  }
  std::vector<TwoLevelGate> eliminations;
  for (int c = 0; c + 1 < d; ++c) {
    for (int r = c + 1; r < d; ++r) {
      const Complex b = v(r, c);
      if (std::abs(b) < kSkipTol) {
        v(r, c) = 0.0;
        continue;
      }
      const Complex a = v(c, c);
      const double n = std::hypot(std::abs(a), std::abs(b));
      Matrix2 g;
      g << std::conj(a) / n, std::conj(b) / n, -b / n, a / n;
      const Eigen::RowVectorXcd row_c = v.row(c);
      const Eigen::RowVectorXcd row_r = v.row(r);
      v.row(c) = g(0, 0) * row_c + g(0, 1) * row_r;
      v.row(r) = g(1, 0) * row_c + g(1, 1) * row_r;
      v(r, c) = 0.0;
      eliminations.push_back({blk.members[static_cast<std::size_t>(c)], blk.members[static_cast<std::size_t>(r)],
                              g.adjoint()});
    }
  }
  // G_N ⋯ G_1 V = diag(phases), so V = G_1† ⋯ G_N† · diag(phases).
  std::vector<GateStep> steps;
  for (int k = 0; k < d; ++k) {
    const double phi = std::arg(v(k, k));
    if (std::abs(phi) > kSkipTol) {
      const auto& m = blk.members[static_cast<std::size_t>(k)];
      steps.emplace_back(GeneratorGate{{GeneratorKind::P, blk.energy, m, m}, -phi});
    }
  }
  for (auto it = eliminations.rbegin(); it != eliminations.rend(); ++it) steps.emplace_back(*it);
  return steps;
}

GateSequence assemble_exact(std::vector<std::vector<GateStep>>&& per_block) {
  GateSequence seq;
  seq.method = Method::Exact;
  for (auto& s : per_block) {
    seq.steps.insert(seq.steps.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  return seq;
}

void require_positive_m(int m) {
  if (m <= 0) throw DomainError("slice count m must be positive, got " + std::to_string(m));
}

}  // namespace

std::string_view to_string(Method m) {
  switch (m) {
    case Method::Exact: return "exact";
    case Method::Trotter: return "trotter";
    case Method::Bch: return "bch";
    case Method::Handcrafted: return "handcrafted";
  }
  return "?";
}

Method method_from_string(std::string_view s) {
  if (s == "exact") return Method::Exact;
  if (s == "trotter") return Method::Trotter;
  if (s == "bch") return Method::Bch;
  if (s == "handcrafted") return Method::Handcrafted;
  throw ParseError("unknown method '" + std::string(s) + "'");
}

LocalGate local_gate(const GateStep& step, Dims dims) {
  return std::visit(
      [&](const auto& g) -> LocalGate {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, GeneratorGate>) {
          check_index(g.generator.first, dims);
          check_index(g.generator.second, dims);
          const int a = flat_index(g.generator.first, dims);
          const int b = g.generator.kind == GeneratorKind::P ? a : flat_index(g.generator.second, dims);
          if (g.generator.kind != GeneratorKind::P && a == b) {
            throw DomainError("two-level generator names the same index twice");
          }
          return {a, b, local_exponential(g.generator.kind, g.t)};
        } else {
          check_index(g.first, dims);
          check_index(g.second, dims);
          const int a = flat_index(g.first, dims);
          const int b = flat_index(g.second, dims);
          if (a == b) throw DomainError("two-level gate names the same index twice");
          return {a, b, g.u};
        }
      },
      step);
}

void apply_left(Operator& m, const LocalGate& g) {
  if (g.single()) {
    m.row(g.a) *= g.u(0, 0);
    return;
  }
  const Eigen::RowVectorXcd ra = m.row(g.a);
  const Eigen::RowVectorXcd rb = m.row(g.b);
  m.row(g.a) = g.u(0, 0) * ra + g.u(0, 1) * rb;
  m.row(g.b) = g.u(1, 0) * ra + g.u(1, 1) * rb;
}

void apply_conjugation(Operator& rho, const LocalGate& g) {
  apply_left(rho, g);
  if (g.single()) {
    rho.col(g.a) *= std::conj(g.u(0, 0));
    return;
  }
  const Eigen::VectorXcd ca = rho.col(g.a);
  const Eigen::VectorXcd cb = rho.col(g.b);
  rho.col(g.a) = std::conj(g.u(0, 0)) * ca + std::conj(g.u(0, 1)) * cb;
  rho.col(g.b) = std::conj(g.u(1, 0)) * ca + std::conj(g.u(1, 1)) * cb;
}

Operator materialize(const GateStep& step, Dims dims) {
  Operator m = Operator::Identity(dims.total(), dims.total());
  apply_left(m, local_gate(step, dims));
  return m;
}

Operator reconstruct(const GateSequence& seq, Dims dims) {
  Operator u = Operator::Identity(dims.total(), dims.total());
  for (const auto& s : seq.steps) apply_left(u, local_gate(s, dims));
  return u;
}

bool is_elementary(const GateStep& step, const EnergyBlocks& blocks) {
  const LocalGate g = local_gate(step, blocks.dims());
  return blocks.same_block(g.a, g.b);
}

namespace serial {

GateSequence compile_exact(const Operator& u, const EnergyBlocks& blocks, double tol) {
  require_energy_preserving(u, blocks, tol);
  std::vector<std::vector<GateStep>> per_block;
  per_block.reserve(blocks.blocks().size());
  for (const auto& blk : blocks.blocks()) per_block.push_back(eliminate_block(u, blocks, blk));
  return assemble_exact(std::move(per_block));
}

}  // namespace serial

GateSequence compile_exact(const Operator& u, const EnergyBlocks& blocks, double tol) {
  require_energy_preserving(u, blocks, tol);
  const auto& blks = blocks.blocks();
  const auto n = static_cast<long>(blks.size());
  std::vector<std::vector<GateStep>> per_block(blks.size());
#pragma omp parallel for schedule(dynamic)
  for (long b = 0; b < n; ++b) {
    per_block[static_cast<std::size_t>(b)] = eliminate_block(u, blocks, blks[static_cast<std::size_t>(b)]);
  }
  return assemble_exact(std::move(per_block));
}

GateSequence compile_trotter(const CoefficientMap& coeffs, double t, int m) {
  require_positive_m(m);
  GateSequence seq;
  seq.method = Method::Trotter;
  seq.trotter_m = m;
  seq.error_bound_heuristic = true;
  if (t == 0.0 || coeffs.empty()) return seq;
  double weight = 0.0;
  for (const auto& [g, r] : coeffs) weight += std::abs(r) * generator_norm(g.kind);
  seq.error_bound = t * t * weight * weight / m;
  seq.steps.reserve(static_cast<std::size_t>(m) * coeffs.size());
  for (int slice = 0; slice < m; ++slice) {
    for (const auto& [g, r] : coeffs) {
      if (r != 0.0) seq.steps.emplace_back(GeneratorGate{g, t * r / m});
    }
  }
  return seq;
}

GateSequence compile_bch(const ElementaryGenerator& j, const ElementaryGenerator& k, double t, int m) {
  require_positive_m(m);
  GateSequence seq;
  seq.method = Method::Bch;
  seq.trotter_m = m;
  seq.error_bound_heuristic = true;
  if (t == 0.0 || j == k) return seq;
  // [K_k, K_j] = -[K_j, K_k] keeps the square root real.
  const auto& first = t > 0.0 ? j : k;
  const auto& second = t > 0.0 ? k : j;
  const double tau = std::abs(t);
  const double s = std::sqrt(tau / m);
  const double norms = generator_norm(j.kind) + generator_norm(k.kind);
  seq.error_bound = std::pow(tau, 1.5) * norms * norms * norms / std::sqrt(static_cast<double>(m));
  seq.steps.reserve(4 * static_cast<std::size_t>(m));
  // Acting order of e^{-sA} e^{-sB} e^{sA} e^{sB}.
  for (int g = 0; g < m; ++g) {
    seq.steps.emplace_back(GeneratorGate{second, s});
    seq.steps.emplace_back(GeneratorGate{first, s});
    seq.steps.emplace_back(GeneratorGate{second, -s});
    seq.steps.emplace_back(GeneratorGate{first, -s});
  }
  return seq;
}

GateSequence compile_nested(const std::vector<LieTerm>& terms, double t, int m) {
  require_positive_m(m);
  CoefficientMap linear;
  std::vector<const LieTerm*> commutators;
  for (const auto& term : terms) {
    if (term.nest.empty()) throw DomainError("compile_nested: empty term");
    if (term.nest.size() > 2) {
      throw DomainError("compile_nested: unsupported commutator depth " + std::to_string(term.nest.size() - 1) +
                        " (only depth <= 1 is supported)");
    }
    if (term.nest.size() == 1) {
      linear[term.nest.front()] += term.coeff;
    } else {
      commutators.push_back(&term);
    }
  }
  if (commutators.empty()) return compile_trotter(linear, t, m);

  GateSequence seq;
  seq.method = Method::Bch;
  seq.trotter_m = m;
  seq.error_bound_heuristic = true;
  const GateSequence linear_slice = compile_trotter(linear, t / m, 1);
  seq.error_bound = linear_slice.error_bound * m;
  std::vector<GateSequence> groups;
  groups.reserve(commutators.size());
  for (const auto* term : commutators) {
    groups.push_back(compile_bch(term->nest[0], term->nest[1], t * term->coeff / m, 1));
    seq.error_bound += groups.back().error_bound * m;
  }
  for (int slice = 0; slice < m; ++slice) {
    seq.steps.insert(seq.steps.end(), linear_slice.steps.begin(), linear_slice.steps.end());
    for (const auto& g : groups) seq.steps.insert(seq.steps.end(), g.steps.begin(), g.steps.end());
  }
  return seq;
}

Operator lie_terms_operator(const std::vector<LieTerm>& terms, Dims dims) {
  Operator k = Operator::Zero(dims.total(), dims.total());
  for (const auto& term : terms) {
    if (term.nest.size() == 1) {
      k += term.coeff * materialize(term.nest[0], dims);
    } else if (term.nest.size() == 2) {
      k += term.coeff * commutator(materialize(term.nest[0], dims), materialize(term.nest[1], dims));
    } else {
      throw DomainError("lie_terms_operator: unsupported commutator depth");
    }
  }
  return k;
}

Operator log_energy_preserving(const Operator& u, const EnergyBlocks& blocks) {
  require_energy_preserving(u, blocks, 1e-9);
  const int n = blocks.joint_dim();
  Operator k = Operator::Zero(n, n);
  for (const auto& blk : blocks.blocks()) {
    const int d = blk.size();
    Operator v(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        v(r, c) = u(blocks.flat(blk.members[static_cast<std::size_t>(r)]),
                    blocks.flat(blk.members[static_cast<std::size_t>(c)]));
      }
    }
    // Normal matrix: the Schur form is diagonal and the Schur vectors unitary.
    Eigen::ComplexSchur<Operator> schur(v);
    const Operator& q = schur.matrixU();
    Eigen::VectorXcd log_diag(d);
    for (int i = 0; i < d; ++i) log_diag(i) = Complex(0.0, std::arg(schur.matrixT()(i, i)));
    Operator lv = q * log_diag.asDiagonal() * q.adjoint();
    lv = 0.5 * (lv - lv.adjoint());
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) {
        k(blocks.flat(blk.members[static_cast<std::size_t>(r)]), blocks.flat(blk.members[static_cast<std::size_t>(c)])) =
            lv(r, c);
      }
    }
  }
  return k;
}

namespace {

// Coordinate of K along one basis generator: Re tr(G†K) / ‖G‖².
double coordinate(const Operator& k, const ElementaryGenerator& g, const EnergyBlocks& blocks) {
  const int a = blocks.flat(g.first);
  const int b = blocks.flat(g.second);
  switch (g.kind) {
    case GeneratorKind::H: return 0.5 * (Complex(0.0, 1.0) * (k(a, b) + k(b, a))).real();
    case GeneratorKind::M: return 0.5 * (k(a, b) - k(b, a)).real();
    case GeneratorKind::P: return -k(a, a).imag();
    case GeneratorKind::GDiag: return 0.5 * (k(a, a).imag() + k(b, b).imag());
  }
  return 0.0;
}

}  // namespace

CoefficientMap decompose_full(const Operator& k, const EnergyBlocks& blocks) {
  if (k.rows() != blocks.joint_dim()) throw ShapeError("decompose_full: dimension mismatch");
  CoefficientMap out;
  for (const auto& g : enumerate_basis(blocks, true)) {
    const double r = coordinate(k, g, blocks);
    if (std::abs(r) > 1e-15) out[g] = r;
  }
  return out;
}

std::vector<LieTerm> decompose_rank2(const Operator& k, const EnergyBlocks& blocks) {
  if (k.rows() != blocks.joint_dim()) throw ShapeError("decompose_rank2: dimension mismatch");
  std::vector<LieTerm> terms;
  for (const auto& blk : blocks.blocks()) {
    if (blk.size() < 2) {
      throw PreconditionError("decompose_rank2: energy block at E = " + std::to_string(blk.energy) +
                              " is non-degenerate; tensor a doubling catalyst first");
    }
  }
  for (const auto& g : enumerate_basis(blocks, false)) {
    const double r = coordinate(k, g, blocks);
    if (std::abs(r) > 1e-15) terms.push_back({r, {g}});
  }
  for (const auto& blk : blocks.blocks()) {
    const int d = blk.size();
    for (int i = 0; i < d; ++i) {
      const JointIndex a = blk.members[static_cast<std::size_t>(i)];
      const JointIndex b = blk.members[static_cast<std::size_t>((i + 1) % d)];
      const double r = coordinate(k, {GeneratorKind::P, blk.energy, a, a}, blocks);
      if (std::abs(r) <= 1e-15) continue;
      // p_a = -½(f + g_diag), f = ½[h, m] on the pair (a, b).
      terms.push_back({-0.5 * r, {{GeneratorKind::GDiag, blk.energy, a, b}}});
      terms.push_back({-0.25 * r, {{GeneratorKind::H, blk.energy, a, b}, {GeneratorKind::M, blk.energy, a, b}}});
    }
  }
  return terms;
}

GateSequence factor_to_generators(const GateSequence& seq) {
  GateSequence out = seq;
  out.steps.clear();
  auto push = [&](GeneratorKind kind, JointIndex a, JointIndex b, double t) {
    if (std::abs(t) > kSkipTol) out.steps.emplace_back(GeneratorGate{{kind, 0.0, a, b}, t});
  };
  for (const auto& step : seq.steps) {
    const auto* two = std::get_if<TwoLevelGate>(&step);
    if (two == nullptr) {
      out.steps.push_back(step);
      continue;
    }
    // W = diag(e^{iφa}, e^{iφb}) · R(θ) · diag(e^{iψa}, e^{iψb}), R(θ) = exp(θ m).
    const Matrix2& w = two->u;
    const double c = std::abs(w(0, 0));
    const double s = std::abs(w(0, 1));
    const double theta = std::atan2(s, c);
    double phi_a = 0.0, phi_b = 0.0, psi_a = 0.0, psi_b = 0.0;
    if (s < kSkipTol) {
      phi_a = std::arg(w(0, 0));
      phi_b = std::arg(w(1, 1));
    } else if (c < kSkipTol) {
      psi_b = std::arg(w(0, 1));
      phi_b = std::arg(-w(1, 0));
    } else {
      phi_a = std::arg(w(0, 0));
      psi_b = std::arg(w(0, 1)) - phi_a;
      phi_b = std::arg(-w(1, 0));
    }
    const JointIndex a = two->first;
    const JointIndex b = two->second;
    push(GeneratorKind::P, a, a, -psi_a);
    push(GeneratorKind::P, b, b, -psi_b);
    push(GeneratorKind::M, a, b, theta);
    push(GeneratorKind::P, a, a, -phi_a);
    push(GeneratorKind::P, b, b, -phi_b);
  }
  return out;
}

AccuracySearch compile_to_accuracy(const Operator& u, const EnergyBlocks& blocks, Method method, double accuracy,
                                   int m_max) {
  AccuracySearch result;
  const Dims dims = blocks.dims();
  if (method == Method::Exact || method == Method::Handcrafted) {
    result.sequence = compile_exact(u, blocks);
    result.error = (reconstruct(result.sequence, dims) - u).norm();
    result.reached = result.error < accuracy;
    return result;
  }
  const Operator k = log_energy_preserving(u, blocks);
  const CoefficientMap full = method == Method::Trotter ? decompose_full(k, blocks) : CoefficientMap{};
  const std::vector<LieTerm> rank2 = method == Method::Bch ? decompose_rank2(k, blocks) : std::vector<LieTerm>{};
  for (int m = 1; m <= m_max; m *= 2) {
    GateSequence seq = method == Method::Trotter ? compile_trotter(full, 1.0, m) : compile_nested(rank2, 1.0, m);
    const double err = (reconstruct(seq, dims) - u).norm();
    result.sequence = std::move(seq);
    result.m = m;
    result.error = err;
    if (err < accuracy) {
      result.reached = true;
      break;
    }
    if (m > m_max / 2) break;
  }
  return result;
}

}  // namespace thermoforge
