#include "thermoforge/channels.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "thermoforge/errors.hpp"

namespace thermoforge {

Operator apply_to(const Operator& rho, const Spectrum& system, const ChannelSpec& channel,
                  const ThermalContext& ctx) {
  if (rho.rows() != system.dim() || rho.cols() != system.dim()) {
    throw ShapeError("apply_to: state dimension " + std::to_string(rho.rows()) + " does not match system dimension " +
                     std::to_string(system.dim()));
  }
  const EnergyBlocks blocks = energy_blocks(system, channel.bath);
  if (channel.unitary.rows() != blocks.joint_dim() || channel.unitary.cols() != blocks.joint_dim()) {
    throw ShapeError("apply_to: unitary dimension does not match system x bath");
  }
  if (!is_energy_preserving(channel.unitary, blocks, 1e-9)) {
    throw DomainError("apply_to: unitary is not energy-preserving");
  }
  const Operator joint = kron(rho, gibbs_state(channel.bath, ctx).to_operator());
  const Operator evolved = channel.unitary * joint * channel.unitary.adjoint();
  return partial_trace(evolved, {system.dim(), channel.bath.dim()}, Keep::First);
}

DiagonalState beta_swap(const DiagonalState& p, const Spectrum& spec, int i, int j, const ThermalContext& ctx) {
  if (p.dim() != spec.dim()) throw ShapeError("beta_swap: state and spectrum dimensions differ");
  if (i < 0 || j < 0 || i >= spec.dim() || j >= spec.dim() || i == j) {
    throw ShapeError("beta_swap: level pair (" + std::to_string(i) + "," + std::to_string(j) + ") out of range");
  }
  if (spec.energy(i) > spec.energy(j)) std::swap(i, j);
  const double w = std::exp(-ctx.beta * (spec.energy(j) - spec.energy(i)));
  auto q = p.populations();
  const double pi = q[static_cast<std::size_t>(i)];
  const double pj = q[static_cast<std::size_t>(j)];
  q[static_cast<std::size_t>(i)] = (1.0 - w) * pi + pj;
  q[static_cast<std::size_t>(j)] = w * pi;
  return DiagonalState(std::move(q));
}

Operator thermalize(const Operator& rho, const Spectrum& system, const Spectrum& catalyst, Subsystem which,
                    const ThermalContext& ctx) {
  const Dims dims{system.dim(), catalyst.dim()};
  if (rho.rows() != dims.total() || rho.cols() != dims.total()) {
    throw ShapeError("thermalize: state dimension does not match system x catalyst");
  }
  if (which == Subsystem::Catalyst) {
    return kron(partial_trace(rho, dims, Keep::First), gibbs_state(catalyst, ctx).to_operator(), SIZE_MAX);
  }
  return kron(gibbs_state(system, ctx).to_operator(), partial_trace(rho, dims, Keep::Second), SIZE_MAX);
}

CatalysisVerdict classify_catalysis(const Operator& sigma_sc, const Operator& mu_c, Dims dims, double epsilon,
                                    double strict_tol) {
  if (sigma_sc.rows() != dims.total() || mu_c.rows() != dims.second) {
    throw ShapeError("classify_catalysis: dimensions are inconsistent");
  }
  const Operator sigma_s = partial_trace(sigma_sc, dims, Keep::First);
  const Operator sigma_c = partial_trace(sigma_sc, dims, Keep::Second);
  CatalysisVerdict v;
  v.epsilon = epsilon;
  v.catalyst_marginal_distance = trace_distance(sigma_c, mu_c);
  v.approximate_distance = v.catalyst_marginal_distance;
  v.product_defect = trace_distance(sigma_sc, kron(sigma_s, sigma_c, SIZE_MAX));
  v.strict_defect = trace_distance(sigma_sc, kron(sigma_s, mu_c, SIZE_MAX));
  v.correlated = v.catalyst_marginal_distance < strict_tol;
  v.strict = v.correlated && v.strict_defect < strict_tol;
  v.approximate = v.correlated || v.approximate_distance <= epsilon;
  return v;
}

GcEtoResult run_gc_eto(const Operator& rho_s, const Spectrum& system, const Spectrum& catalyst,
                       const GateSequence& seq, const ThermalContext& ctx, bool rethermalize, double epsilon,
                       double strict_tol) {
  if (rho_s.rows() != system.dim() || rho_s.cols() != system.dim()) {
    throw ShapeError("run_gc_eto: state dimension does not match the system spectrum");
  }
  const EnergyBlocks blocks = energy_blocks(system, catalyst);
  std::vector<LocalGate> gates;
  gates.reserve(seq.steps.size());
  for (std::size_t k = 0; k < seq.steps.size(); ++k) {
    LocalGate g = local_gate(seq.steps[k], blocks.dims());
    if (!blocks.same_block(g.a, g.b)) {
      throw DomainError("run_gc_eto: step " + std::to_string(k) + " couples different energy blocks");
    }
    gates.push_back(g);
  }
  const Operator mu_c = gibbs_state(catalyst, ctx).to_operator();
  GcEtoResult out;
  out.sigma_sc = kron(rho_s, mu_c);
  for (const auto& g : gates) apply_conjugation(out.sigma_sc, g);
  const Dims dims = blocks.dims();
  out.sigma_s = partial_trace(out.sigma_sc, dims, Keep::First);
  out.pre = classify_catalysis(out.sigma_sc, mu_c, dims, epsilon, strict_tol);
  if (rethermalize) {
    const Operator rethermalized = thermalize(out.sigma_sc, system, catalyst, Subsystem::Catalyst, ctx);
    out.post = classify_catalysis(rethermalized, mu_c, dims, epsilon, strict_tol);
  }
  return out;
}

Operator mix(std::span<const Operator> outputs, std::span<const double> weights) {
  if (outputs.empty() || outputs.size() != weights.size()) {
    throw ShapeError("mix: need one weight per output");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw DomainError("mix: weights must be non-negative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("mix: weights must sum to 1");
  Operator out = Operator::Zero(outputs.front().rows(), outputs.front().cols());
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    if (outputs[k].rows() != out.rows()) throw ShapeError("mix: outputs have different dimensions");
    out += weights[k] * outputs[k];
  }
  return out;
}

double off_diagonal_mass(const Operator& rho) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < rho.rows(); ++i) {
    for (Eigen::Index j = 0; j < rho.cols(); ++j) {
      if (i != j) worst = std::max(worst, std::abs(rho(i, j)));
    }
  }
  return worst;
}

DiagonalState populations_of(const Operator& rho) {
  std::vector<double> p(static_cast<std::size_t>(rho.rows()));
  for (Eigen::Index i = 0; i < rho.rows(); ++i) p[static_cast<std::size_t>(i)] = std::max(rho(i, i).real(), 0.0);
  return DiagonalState::normalized(std::move(p));
}

}  // namespace thermoforge
