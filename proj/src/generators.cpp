#include "thermoforge/generators.hpp"

#include <cmath>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge {

namespace {

constexpr Complex kI{0.0, 1.0};

void for_each_pair(const EnergyBlock& blk, auto&& fn) {
  for (std::size_t a = 0; a < blk.members.size(); ++a) {
    for (std::size_t b = a + 1; b < blk.members.size(); ++b) fn(blk.members[a], blk.members[b]);
  }
}

}  // namespace

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::H: return "h";
    case GeneratorKind::M: return "m";
    case GeneratorKind::P: return "p";
    case GeneratorKind::GDiag: return "g_diag";
  }
  return "?";
}

GeneratorKind generator_kind_from_string(std::string_view s) {
  if (s == "h") return GeneratorKind::H;
  if (s == "m") return GeneratorKind::M;
  if (s == "p") return GeneratorKind::P;
  if (s == "g_diag") return GeneratorKind::GDiag;
  throw ParseError("unknown generator kind '" + std::string(s) + "'");
}

bool generator_less(const ElementaryGenerator& x, const ElementaryGenerator& y) {
  if (x.first != y.first) return x.first < y.first;
  if (x.second != y.second) return x.second < y.second;
  return static_cast<int>(x.kind) < static_cast<int>(y.kind);
}

Operator materialize(const ElementaryGenerator& gen, Dims dims) {
  const int n = dims.total();
  const int a = gen.first.system * dims.second + gen.first.catalyst;
  const int b = gen.second.system * dims.second + gen.second.catalyst;
  if (a < 0 || b < 0 || a >= n || b >= n) throw ShapeError("materialize: generator index out of range");
  Operator k = Operator::Zero(n, n);
  switch (gen.kind) {
    case GeneratorKind::H:
      k(a, b) += -kI;
      k(b, a) += -kI;
      break;
    case GeneratorKind::M:
      k(a, b) += 1.0;
      k(b, a) -= 1.0;
      break;
    case GeneratorKind::P:
      k(a, a) = -kI;
      break;
    case GeneratorKind::GDiag:
      k(a, a) += kI;
      k(b, b) += kI;
      break;
  }
  return k;
}

Matrix2 local_exponential(GeneratorKind kind, double t) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  Matrix2 u;
  switch (kind) {
    case GeneratorKind::H:  // cos t − i sin t σx
      u << c, -kI * s, -kI * s, c;
      break;
    case GeneratorKind::M:
      u << c, s, -s, c;
      break;
    case GeneratorKind::P:
      u << std::polar(1.0, -t), 0.0, 0.0, 1.0;
      break;
    case GeneratorKind::GDiag:
      u << std::polar(1.0, t), 0.0, 0.0, std::polar(1.0, t);
      break;
  }
  return u;
}

Operator f_operator(JointIndex a, JointIndex b, Dims dims) {
  const int n = dims.total();
  Operator f = Operator::Zero(n, n);
  f(a.system * dims.second + a.catalyst, a.system * dims.second + a.catalyst) += kI;
  f(b.system * dims.second + b.catalyst, b.system * dims.second + b.catalyst) -= kI;
  return f;
}

double generator_norm(GeneratorKind kind) { return kind == GeneratorKind::P ? 1.0 : std::sqrt(2.0); }

std::vector<ElementaryGenerator> enumerate_basis(const EnergyBlocks& blocks, bool include_rank1) {
  std::vector<ElementaryGenerator> out;
  for (const auto& blk : blocks.blocks()) {
    for_each_pair(blk, [&](JointIndex a, JointIndex b) {
      out.push_back({GeneratorKind::H, blk.energy, a, b});
      out.push_back({GeneratorKind::M, blk.energy, a, b});
    });
    if (include_rank1) {
      for (const auto& a : blk.members) out.push_back({GeneratorKind::P, blk.energy, a, a});
    }
  }
  return out;
}

std::vector<ElementaryGenerator> rank2_basis(const EnergyBlocks& blocks) {
  std::vector<ElementaryGenerator> out;
  for (const auto& blk : blocks.blocks()) {
    if (blk.size() < 2) {
      throw PreconditionError("rank2_basis: energy block at E = " + std::to_string(blk.energy) +
                              " is non-degenerate; tensor a doubling catalyst first");
    }
    for_each_pair(blk, [&](JointIndex a, JointIndex b) {
      out.push_back({GeneratorKind::H, blk.energy, a, b});
      out.push_back({GeneratorKind::M, blk.energy, a, b});
      out.push_back({GeneratorKind::GDiag, blk.energy, a, b});
    });
  }
  return out;
}

namespace {

// Orthonormal basis of a real subspace of operator space under Re tr(A†B).
class RealOperatorBasis {
 public:
  RealOperatorBasis(int max_dim, double rank_tol) : max_dim_(max_dim), tol_(rank_tol) {}

  bool try_add(const Operator& m) {
    Eigen::VectorXcd v = Eigen::Map<const Eigen::VectorXcd>(m.data(), m.size());
    const double n0 = v.norm();
    if (n0 < 1e-300) return false;
    v /= n0;
    // Two passes of Gram-Schmidt keep the basis orthonormal to rounding.
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& b : vecs_) v -= b.dot(v).real() * b;
    }
    const double n1 = v.norm();
    if (n1 < tol_) return false;
    v /= n1;
    if (static_cast<int>(vecs_.size()) >= max_dim_) {
      throw CapacityError("lie_closure: dimension exceeds max_dim = " + std::to_string(max_dim_));
    }
    mats_.emplace_back(Eigen::Map<const Operator>(v.data(), m.rows(), m.cols()));
    vecs_.push_back(std::move(v));
    return true;
  }

  [[nodiscard]] int size() const { return static_cast<int>(vecs_.size()); }
  [[nodiscard]] const Operator& operator[](int i) const { return mats_[static_cast<std::size_t>(i)]; }

 private:
  int max_dim_;
  double tol_;
  std::vector<Eigen::VectorXcd> vecs_;
  std::vector<Operator> mats_;
};

}  // namespace

int lie_closure(const std::vector<Operator>& gens, int max_dim, double rank_tol) {
  for (const auto& g : gens) {
    if (!is_anti_hermitian(g, kDefaultTol)) throw DomainError("lie_closure: generator is not anti-Hermitian");
  }
  RealOperatorBasis basis(max_dim, rank_tol);
  for (const auto& g : gens) basis.try_add(g);
  // Commute every new element with every earlier one until nothing new appears.
  for (int i = 1; i < basis.size(); ++i) {
    for (int j = 0; j < i; ++j) basis.try_add(commutator(basis[i], basis[j]));
  }
  return basis.size();
}

int lie_closure(const std::vector<ElementaryGenerator>& gens, Dims dims, int max_dim, double rank_tol) {
  std::vector<Operator> mats;
  mats.reserve(gens.size());
  for (const auto& g : gens) mats.push_back(materialize(g, dims));
  return lie_closure(mats, max_dim, rank_tol);
}

Spectrum doubling_catalyst() { return Spectrum({{0.0, 0}, {0.0, 1}}); }

}  // namespace thermoforge
