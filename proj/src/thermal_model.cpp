#include "thermoforge/thermal_model.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge {

std::vector<int> cluster_energies(std::span<const double> energies, double tol) {
  std::vector<std::size_t> order(energies.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return energies[a] < energies[b]; });
  std::vector<int> ids(energies.size(), -1);
  int current = -1;
  double anchor = 0.0;
  for (std::size_t k : order) {
    // Compare against the cluster's first member so near-ties cannot chain.
    if (current < 0 || std::abs(energies[k] - anchor) > tol) {
      ++current;
      anchor = energies[k];
    }
    ids[k] = current;
  }
  return ids;
}

Spectrum::Spectrum(std::vector<Level> levels) : levels_(std::move(levels)) {
  if (levels_.empty()) throw DomainError("Spectrum: at least one level is required");
  std::vector<double> e;
  e.reserve(levels_.size());
  for (const auto& l : levels_) {
    if (!std::isfinite(l.energy)) throw DomainError("Spectrum: non-finite energy");
    if (l.deg < 0) throw DomainError("Spectrum: negative degeneracy label");
    e.push_back(l.energy);
  }
  const auto ids = cluster_energies(e);
  std::map<int, std::vector<int>> labels;
  for (std::size_t i = 0; i < levels_.size(); ++i) labels[ids[i]].push_back(levels_[i].deg);
  for (auto& [id, ls] : labels) {
    std::sort(ls.begin(), ls.end());
    for (std::size_t k = 0; k < ls.size(); ++k) {
      if (ls[k] != static_cast<int>(k)) {
        throw DomainError("Spectrum: degeneracy labels of a level must be 0..delta-1 without gaps");
      }
    }
  }
}

Spectrum Spectrum::from_energies(std::span<const double> energies) {
  const auto ids = cluster_energies(energies);
  std::map<int, int> next;
  std::vector<Level> levels;
  levels.reserve(energies.size());
  for (std::size_t i = 0; i < energies.size(); ++i) levels.push_back({energies[i], next[ids[i]]++});
  return Spectrum(std::move(levels));
}

std::vector<double> Spectrum::energies() const {
  std::vector<double> e;
  e.reserve(levels_.size());
  for (const auto& l : levels_) e.push_back(l.energy);
  return e;
}

Operator Spectrum::hamiltonian() const {
  Operator h = Operator::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) h(i, i) = energy(i);
  return h;
}

Spectrum tensor(const Spectrum& a, const Spectrum& b) {
  std::vector<double> e;
  e.reserve(static_cast<std::size_t>(a.dim()) * static_cast<std::size_t>(b.dim()));
  for (const auto& la : a.levels()) {
    for (const auto& lb : b.levels()) e.push_back(la.energy + lb.energy);
  }
  return Spectrum::from_energies(e);
}

DiagonalState::DiagonalState(std::vector<double> populations) : p_(std::move(populations)) {
  for (double& x : p_) {
    if (!std::isfinite(x) || x < -1e-14) {
      throw DomainError("DiagonalState: populations must be finite and non-negative");
    }
    x = std::max(x, 0.0);
  }
  const double sum = compensated_sum(p_);
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "DiagonalState: populations sum to " << sum << ", not 1";
    throw DomainError(msg.str());
  }
}

DiagonalState DiagonalState::normalized(std::vector<double> weights) {
  const double sum = compensated_sum(weights);
  if (!(sum > 0.0)) throw DomainError("DiagonalState: weights must have positive sum");
  for (double& w : weights) w /= sum;
  return DiagonalState(std::move(weights));
}

Operator DiagonalState::to_operator() const {
  Operator rho = Operator::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) rho(i, i) = p_[static_cast<std::size_t>(i)];
  return rho;
}

DiagonalState gibbs_state(const Spectrum& spec, const ThermalContext& ctx) {
  if (!(ctx.beta > 0.0)) throw DomainError("ThermalContext: beta must be positive");
  const auto e = spec.energies();
  const double e0 = *std::min_element(e.begin(), e.end());
  std::vector<double> w(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) w[i] = std::exp(-ctx.beta * (e[i] - e0));
  return DiagonalState::normalized(std::move(w));
}

EnergyBlocks::EnergyBlocks(Dims dims, std::vector<EnergyBlock> blocks)
    : dims_(dims), blocks_(std::move(blocks)), block_of_(static_cast<std::size_t>(dims.total()), -1) {
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    for (const auto& m : blocks_[b].members) {
      if (m.system < 0 || m.system >= dims_.first || m.catalyst < 0 || m.catalyst >= dims_.second) {
        throw ShapeError("EnergyBlocks: member index out of range");
      }
      auto& slot = block_of_[static_cast<std::size_t>(flat(m))];
      if (slot != -1) throw DomainError("EnergyBlocks: joint index listed in two blocks");
      slot = static_cast<int>(b);
    }
  }
  if (std::find(block_of_.begin(), block_of_.end(), -1) != block_of_.end()) {
    throw DomainError("EnergyBlocks: blocks do not cover the joint index set");
  }
}

long EnergyBlocks::algebra_dim() const {
  long n = 0;
  for (const auto& b : blocks_) n += static_cast<long>(b.size()) * b.size();
  return n;
}

std::vector<int> EnergyBlocks::block_sizes() const {
  std::vector<int> s;
  s.reserve(blocks_.size());
  for (const auto& b : blocks_) s.push_back(b.size());
  return s;
}

Eigen::VectorXd joint_energies(const Spectrum& spec_s, const Spectrum& spec_c) {
  Eigen::VectorXd e(spec_s.dim() * spec_c.dim());
  for (int i = 0; i < spec_s.dim(); ++i) {
    for (int j = 0; j < spec_c.dim(); ++j) e(i * spec_c.dim() + j) = spec_s.energy(i) + spec_c.energy(j);
  }
  return e;
}

EnergyBlocks energy_blocks(const Spectrum& spec_s, const Spectrum& spec_c) {
  const Eigen::VectorXd e = joint_energies(spec_s, spec_c);
  const auto ids = cluster_energies(std::span<const double>(e.data(), static_cast<std::size_t>(e.size())));
  const int n_blocks = ids.empty() ? 0 : *std::max_element(ids.begin(), ids.end()) + 1;
  std::vector<EnergyBlock> blocks(static_cast<std::size_t>(n_blocks));
  const int dc = spec_c.dim();
  // Flat order is already lexicographic in (system, catalyst).
  for (int k = 0; k < static_cast<int>(ids.size()); ++k) {
    auto& blk = blocks[static_cast<std::size_t>(ids[static_cast<std::size_t>(k)])];
    if (blk.members.empty()) blk.energy = e(k);
    blk.members.push_back({k / dc, k % dc});
  }
  return EnergyBlocks({spec_s.dim(), spec_c.dim()}, std::move(blocks));
}

Operator haar_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Operator z(d, d);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) z(i, j) = Complex(normal(rng), normal(rng));
  }
  Eigen::HouseholderQR<Operator> qr(z);
  Operator q = qr.householderQ() * Operator::Identity(d, d);
  const Operator r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase ambiguity of QR so the distribution is Haar.
  for (int j = 0; j < d; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

Operator random_energy_preserving_unitary(const EnergyBlocks& blocks, std::uint64_t seed) {
  if (static_cast<std::size_t>(blocks.joint_dim()) > kDefaultDimCap) {
    throw CapacityError("random_energy_preserving_unitary: joint dimension exceeds dense cap");
  }
  std::mt19937_64 rng(seed);
  const int n = blocks.joint_dim();
  Operator u = Operator::Zero(n, n);
  for (const auto& blk : blocks.blocks()) {
    const Operator v = haar_unitary(blk.size(), rng);
    for (int a = 0; a < blk.size(); ++a) {
      for (int b = 0; b < blk.size(); ++b) {
        u(blocks.flat(blk.members[static_cast<std::size_t>(a)]),
          blocks.flat(blk.members[static_cast<std::size_t>(b)])) = v(a, b);
      }
    }
  }
  return u;
}

std::optional<std::pair<int, int>> find_block_violation(const Operator& u, const EnergyBlocks& blocks,
                                                        double tol) {
  if (u.rows() != blocks.joint_dim() || u.cols() != blocks.joint_dim()) {
    throw ShapeError("unitary dimension " + std::to_string(u.rows()) + " does not match joint dimension " +
                     std::to_string(blocks.joint_dim()));
  }
  for (int i = 0; i < u.rows(); ++i) {
    for (int j = 0; j < u.cols(); ++j) {
      if (!blocks.same_block(i, j) && std::abs(u(i, j)) >= tol) return std::make_pair(i, j);
    }
  }
  return std::nullopt;
}

bool is_energy_preserving(const Operator& u, const EnergyBlocks& blocks, double tol) {
  return !find_block_violation(u, blocks, tol) && unitarity_defect(u) < tol;
}

}  // namespace thermoforge
