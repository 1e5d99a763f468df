#include "thermoforge/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <random>

#include "thermoforge/channels.hpp"
#include "thermoforge/compiler.hpp"
#include "thermoforge/cooling.hpp"
#include "thermoforge/errors.hpp"
#include "thermoforge/generators.hpp"
#include "thermoforge/majorization.hpp"

namespace thermoforge {

namespace {

using Rng = std::mt19937_64;

struct Sample {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool at_least = false;  // lower-bound check: pass iff value ≥ tolerance
};

using Samples = std::vector<Sample>;

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, Suite s, int trial) {
  return splitmix(seed ^ splitmix((static_cast<std::uint64_t>(s) << 32) + static_cast<std::uint64_t>(trial)));
}

int pick(Rng& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

Operator gaussian(int n, Rng& rng) {
  std::normal_distribution<double> g;
  Operator m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = Complex(g(rng), g(rng));
  return m;
}

Operator hermitian(int n, Rng& rng) {
  const Operator m = gaussian(n, rng);
  return 0.5 * (m + m.adjoint());
}

Operator anti_hermitian(int n, Rng& rng) {
  const Operator m = gaussian(n, rng);
  return 0.5 * (m - m.adjoint());
}

Operator density(int n, Rng& rng) {
  const Operator g = gaussian(n, rng);
  Operator r = g * g.adjoint();
  return r / r.trace().real();
}

DiagonalState populations(int n, Rng& rng) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(static_cast<std::size_t>(n));
  for (auto& x : w) x = e(rng);
  return DiagonalState::normalized(std::move(w));
}

Spectrum spectrum(int n, int max_level, Rng& rng) {
  std::vector<double> e(static_cast<std::size_t>(n));
  for (auto& x : e) x = 0.5 * pick(rng, 0, max_level);
  return Spectrum::from_energies(e);
}

/// Single system level and a catalyst whose levels carry random degeneracy;
/// block sizes equal those degeneracies.
EnergyBlocks degenerate_blocks(Rng& rng, int max_block, int max_joint) {
  std::vector<double> ec;
  const int levels = pick(rng, 1, 3);
  for (int l = 0; l < levels; ++l) {
    const int d = pick(rng, 1, max_block);
    for (int k = 0; k < d && static_cast<int>(ec.size()) < max_joint; ++k) ec.push_back(std::sqrt(2.0) * l);
  }
  const std::vector<double> es = {0.0};
  return energy_blocks(Spectrum::from_energies(es), Spectrum::from_energies(ec));
}

Operator diagonal_hamiltonian(const Spectrum& s, const Spectrum& c) {
  return joint_energies(s, c).cast<Complex>().asDiagonal();
}

int curve_shape_violations(const ThermoCurve& c) {
  int bad = 0;
  double prev = 1e300;
  for (std::size_t k = 1; k < c.vertices.size(); ++k) {
    const double dx = c.vertices[k].x - c.vertices[k - 1].x;
    const double dy = c.vertices[k].y - c.vertices[k - 1].y;
    if (dx <= 0.0 || dy < -1e-15) ++bad;
    const double slope = dy / dx;
    if (slope > prev + 1e-9) ++bad;
    prev = slope;
  }
  if (std::abs(c.vertices.back().x - 1.0) > 1e-12 || std::abs(c.vertices.back().y - 1.0) > 1e-12) ++bad;
  return bad;
}

Samples numerics_trial(Rng& rng) {
  Samples out;
  const Operator a = hermitian(pick(rng, 1, 4), rng);
  const Operator b = hermitian(pick(rng, 1, 4), rng);
  const Operator c = hermitian(pick(rng, 1, 3), rng);
  out.push_back({"kron_associativity", (kron(kron(a, b), c) - kron(a, kron(b, c))).norm(), 1e-12});
  const Dims ab{static_cast<int>(a.rows()), static_cast<int>(b.rows())};
  out.push_back({"partial_trace_of_product", (partial_trace(kron(a, b), ab, Keep::First) - b.trace() * a).norm(), 1e-12});

  const Operator k = anti_hermitian(pick(rng, 1, 6), rng);
  const Operator u = expm_skew(k);
  out.push_back({"expm_inverse", (u * expm_skew(-k) - Operator::Identity(k.rows(), k.cols())).norm(), 1e-10});
  out.push_back({"expm_unitarity", unitarity_defect(u), 1e-10});

  const int n = pick(rng, 2, 4);
  const Operator x = density(n, rng), y = density(n, rng), z = density(n, rng);
  out.push_back({"triangle_inequality_excess", trace_distance(x, z) - trace_distance(x, y) - trace_distance(y, z), 1e-10});
  return out;
}

Samples generators_trial(Rng& rng) {
  Samples out;
  const Spectrum s = spectrum(pick(rng, 2, 3), 2, rng);
  const Spectrum c = spectrum(pick(rng, 1, 2), 1, rng);
  const EnergyBlocks blocks = energy_blocks(s, c);
  const Operator h0 = diagonal_hamiltonian(s, c);
  const auto basis = enumerate_basis(blocks, true);

  double comm = 0.0, anti = 0.0;
  std::vector<Operator> mats;
  for (const auto& g : basis) {
    mats.push_back(materialize(g, blocks.dims()));
    comm = std::max(comm, commutator(mats.back(), h0).norm());
    anti = std::max(anti, (mats.back() + mats.back().adjoint()).norm());
  }
  out.push_back({"generator_commutes_with_h0", comm, 1e-12});
  out.push_back({"generator_anti_hermitian", anti, 1e-12});

  const auto n = static_cast<Eigen::Index>(mats.size());
  Eigen::MatrixXd gram(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) gram(i, j) = real_inner(mats[static_cast<std::size_t>(i)], mats[static_cast<std::size_t>(j)]);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
  lu.setThreshold(1e-9);
  out.push_back({"basis_rank_deficit", static_cast<double>(n - lu.rank()), 0.0});

  const Spectrum cd = tensor(c, doubling_catalyst());
  const EnergyBlocks doubled = energy_blocks(s, cd);
  const long want = doubled.algebra_dim();
  const int full = lie_closure(enumerate_basis(doubled, true), doubled.dims(), 4096);
  const int rank2 = lie_closure(rank2_basis(doubled), doubled.dims(), 4096);
  out.push_back({"closure_dimension_mismatch",
                 static_cast<double>(std::abs(full - want) + std::abs(rank2 - want)), 0.0});

  const auto& blk = doubled.blocks()[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(doubled.blocks().size()) - 1))];
  const JointIndex p = blk.members[0], q = blk.members[1];
  const Operator proj = materialize(ElementaryGenerator{GeneratorKind::P, blk.energy, p, p}, doubled.dims());
  const Operator gd = materialize(ElementaryGenerator{GeneratorKind::GDiag, blk.energy, p, q}, doubled.dims());
  out.push_back({"projector_from_rank2", (proj + 0.5 * (f_operator(p, q, doubled.dims()) + gd)).norm(), 1e-12});
  return out;
}

Samples compiler_trial(Rng& rng) {
  Samples out;
  const EnergyBlocks blocks = degenerate_blocks(rng, 6, 16);
  const Dims dims = blocks.dims();
  const Operator u = random_energy_preserving_unitary(blocks, rng());
  const GateSequence seq = compile_exact(u, blocks);
  out.push_back({"exact_roundtrip", (reconstruct(seq, dims) - u).norm(), 1e-8});

  long pairs = 0;
  for (int d : blocks.block_sizes()) pairs += d * (d - 1) / 2;
  long two_level = 0;
  int nonlocal = 0;
  for (const auto& step : seq.steps) {
    const LocalGate g = local_gate(step, dims);
    if (!g.single()) ++two_level;
    if (!is_energy_preserving(materialize(step, dims), blocks, 1e-10)) ++nonlocal;
  }
  out.push_back({"exact_gate_count_excess", static_cast<double>(std::max(0L, two_level - pairs)), 0.0});
  out.push_back({"gate_step_energy_violations", static_cast<double>(nonlocal), 0.0});

  const Dims pair{1, 2};
  const JointIndex a{0, 0}, b{0, 1};
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  CoefficientMap cm;
  cm[{GeneratorKind::H, 0.0, a, b}] = coef(rng);
  cm[{GeneratorKind::M, 0.0, a, b}] = coef(rng);
  cm[{GeneratorKind::P, 0.0, a, a}] = coef(rng);
  Operator k = Operator::Zero(2, 2);
  for (const auto& [g, r] : cm) k += r * materialize(g, pair);
  const Operator target = expm_skew(0.5 * k);
  int rises = 0;
  double prev = 1e300;
  for (int m = 8; m <= 128; m *= 2) {
    const double err = (reconstruct(compile_trotter(cm, 0.5, m), pair) - target).norm();
    if (err > 1.1 * prev) ++rises;
    prev = err;
  }
  out.push_back({"trotter_ladder_increases", static_cast<double>(rises), 0.0});

  const CoolingInstance inst = make_cooling_instance(3);
  const EnergyBlocks cb = energy_blocks(inst.system, inst.catalyst);
  const int cdim = inst.catalyst.dim();
  CoefficientMap commuting;
  for (const auto& [x, y] : cooling_transpositions(3)) {
    commuting[{GeneratorKind::M, 0.0, {x / cdim, x % cdim}, {y / cdim, y % cdim}}] = coef(rng);
  }
  Operator kc = Operator::Zero(cb.joint_dim(), cb.joint_dim());
  for (const auto& [g, r] : commuting) kc += r * materialize(g, cb.dims());
  out.push_back({"trotter_commuting_single_slice",
                 (reconstruct(compile_trotter(commuting, 1.0, 1), cb.dims()) - expm_skew(kc)).norm(), 1e-10});

  const ElementaryGenerator h{GeneratorKind::H, 0.0, a, b};
  out.push_back({"bch_same_pair_identity",
                 (reconstruct(compile_bch(h, h, coef(rng), pick(rng, 1, 16)), pair) - Operator::Identity(2, 2)).norm(),
                 0.0});
  return out;
}

Samples channels_trial(Rng& rng) {
  Samples out;
  const Spectrum s = spectrum(pick(rng, 2, 5), 3, rng);
  const Spectrum bath = spectrum(pick(rng, 1, 4), 3, rng);
  const ChannelSpec ch{bath, random_energy_preserving_unitary(energy_blocks(s, bath), rng())};
  const Operator rho = density(s.dim(), rng);
  const Operator o = apply_to(rho, s, ch);
  out.push_back({"to_trace_preservation", std::abs(o.trace().real() - 1.0), 1e-12});
  out.push_back({"to_negativity", -hermitian_eigenvalues(o).minCoeff(), 1e-10});
  const Operator gamma = gibbs_state(s).to_operator();
  out.push_back({"to_gibbs_fixed_point", trace_distance(apply_to(gamma, s, ch), gamma), 1e-10});

  const DiagonalState g = gibbs_state(s);
  const int i = pick(rng, 0, s.dim() - 1);
  const int j = (i + pick(rng, 1, s.dim() - 1)) % s.dim();
  const DiagonalState gs = beta_swap(g, s, i, j);
  double dev = 0.0;
  for (int k = 0; k < s.dim(); ++k) dev = std::max(dev, std::abs(gs[k] - g[k]));
  out.push_back({"beta_swap_gibbs_fixed_point", dev, 1e-12});

  const Spectrum ss = spectrum(pick(rng, 2, 3), 2, rng);
  const Spectrum cs = spectrum(pick(rng, 1, 4), 2, rng);
  const EnergyBlocks blocks = energy_blocks(ss, cs);
  const GateSequence seq = compile_exact(random_energy_preserving_unitary(blocks, rng()), blocks);
  const double eps = std::array<double, 3>{kStrictTol, 1e-3, 0.1}[static_cast<std::size_t>(pick(rng, 0, 2))];
  const GcEtoResult r = run_gc_eto(density(ss.dim(), rng), ss, cs, seq, {}, true, eps);
  int chain = 0;
  for (const auto& v : {r.pre, *r.post}) {
    if (v.strict && !v.correlated) ++chain;
    if (v.correlated && !v.approximate) ++chain;
  }
  out.push_back({"verdict_chain_violations", static_cast<double>(chain), 0.0});
  out.push_back({"rethermalized_not_strict", r.post->strict ? 0.0 : 1.0, 0.0});
  out.push_back({"rethermalized_marginal_distance", r.post->catalyst_marginal_distance, 1e-12});
  out.push_back({"rethermalized_product_defect", r.post->product_defect, 1e-12});
  return out;
}

Samples majorization_trial(Rng& rng) {
  Samples out;
  const Spectrum s = spectrum(pick(rng, 2, 5), 3, rng);
  const Spectrum bath = spectrum(pick(rng, 1, 8), 3, rng);
  const ChannelSpec ch{bath, random_energy_preserving_unitary(energy_blocks(s, bath), rng())};
  const DiagonalState p = populations(s.dim(), rng);
  const DiagonalState q = populations_of(apply_to(p.to_operator(), s, ch));
  out.push_back({"to_monotonicity_gap", dominance_gap(p, q, s), 1e-9});
  out.push_back({"curve_shape_violations", static_cast<double>(curve_shape_violations(thermo_curve(p, s)) +
                                                               curve_shape_violations(thermo_curve(q, s))),
                 0.0});

  const int i = pick(rng, 0, s.dim() - 1);
  const int j = (i + pick(rng, 1, s.dim() - 1)) % s.dim();
  const DiagonalState b = beta_swap(p, s, i, j);
  out.push_back({"beta_swap_monotonicity_gap", dominance_gap(p, b, s), 1e-9});

  const DiagonalState r = populations_of(apply_to(b.to_operator(), s, ch));
  const bool chain = thermo_majorizes(p, b, s) && thermo_majorizes(b, r, s);
  out.push_back({"transitivity_violations", chain && !thermo_majorizes(p, r, s) ? 1.0 : 0.0, 0.0});

  const Spectrum cs = cooling_system_spectrum();
  const Spectrum cc = build_cooling_catalyst(3);
  const DiagonalState in = cooling_default_input();
  const ChannelSpec cool{cc, random_energy_preserving_unitary(energy_blocks(cs, cc), rng())};
  out.push_back({"to_oracle_excess",
                 apply_to(in.to_operator(), cs, cool)(0, 0).real() - max_ground_population_to(in, cs, cc), 1e-9});
  return out;
}

double catalyst_distance(const std::vector<double>& marginal, const DiagonalState& mu) {
  double t = 0.0;
  for (int k = 0; k < mu.dim(); ++k) t += 0.5 * std::abs(marginal[static_cast<std::size_t>(k)] - mu[k]);
  return t;
}

Samples cooling_trial(Rng& rng) {
  Samples out;
  const int d = pick(rng, 2, 12);
  const CoolingResult r = run_cooling(d);
  const auto want = cooling_closed_form(d);
  double err = 0.0;
  for (int k = 0; k < 3; ++k) err = std::max(err, std::abs(r.final_state[k] - want[static_cast<std::size_t>(k)]));
  out.push_back({"q_prime_closed_form", err, 1e-12});
  double inv = 0.0;
  for (double x : r.invariant_populations) inv = std::max(inv, std::abs(x - 1.0 / (d * std::ldexp(1.0, d))));
  out.push_back({"invariant_level_population", inv, 1e-12});
  if (d <= 8) {
    const double oracle = max_ground_population_to(cooling_default_input(), cooling_system_spectrum(),
                                                   build_cooling_catalyst(d));
    out.push_back({"to_limit_check", std::abs(oracle - r.final_state[0]), 1e-12});
  }
  out.push_back({"catalyst_out_of_equilibrium", catalyst_distance(r.catalyst_marginal, gibbs_state(build_cooling_catalyst(d))),
                 1e-3, true});

  const DiagonalState p = populations(3, rng);
  const CoolingResult a = run_cooling(d, p);
  const CoolingResult b = serial::run_cooling(d, p);
  double split = 0.0;
  for (int k = 0; k < 3; ++k) split = std::max(split, std::abs(a.final_state[k] - b.final_state[k]));
  out.push_back({"parallel_serial_difference", split, 0.0});

  if (d <= 4) {
    const CoolingResult dense = run_cooling_dense(d, p);
    double dd = 0.0;
    for (int k = 0; k < 3; ++k) dd = std::max(dd, std::abs(dense.final_state[k] - a.final_state[k]));
    out.push_back({"dense_diagonal_agreement", dd, 1e-10});

    const CoolingInstance inst = make_cooling_instance(d);
    GateSequence shuffled = inst.gates;
    std::shuffle(shuffled.steps.begin(), shuffled.steps.end(), rng);
    const GcEtoResult x = run_gc_eto(p.to_operator(), inst.system, inst.catalyst, inst.gates, {}, false);
    const GcEtoResult y = run_gc_eto(p.to_operator(), inst.system, inst.catalyst, shuffled, {}, false);
    out.push_back({"gate_order_independence", (x.sigma_sc - y.sigma_sc).norm(), 1e-12});
  }
  return out;
}

Samples run_trial(Suite s, Rng& rng) {
  switch (s) {
    case Suite::Numerics: return numerics_trial(rng);
    case Suite::Generators: return generators_trial(rng);
    case Suite::Compiler: return compiler_trial(rng);
    case Suite::Channels: return channels_trial(rng);
    case Suite::Majorization: return majorization_trial(rng);
    case Suite::Cooling: return cooling_trial(rng);
    case Suite::All: break;
  }
  throw DomainError("run_trial: composite suite");
}

/// Folds samples into checks keeping first-seen order.
class Aggregator {
 public:
  void add(const std::string& prefix, const Sample& s) {
    const std::string name = prefix + "." + s.name;
    auto [it, fresh] = index_.try_emplace(name, checks_.size());
    if (fresh) {
      checks_.push_back({name, true, s.value, s.tolerance});
      at_least_.push_back(s.at_least);
    }
    CheckResult& c = checks_[it->second];
    const bool lower = at_least_[it->second];
    if (std::isnan(s.value)) {
      c.measured = s.value;
    } else if (!std::isnan(c.measured)) {
      c.measured = lower ? std::min(c.measured, s.value) : std::max(c.measured, s.value);
    }
    c.pass = !std::isnan(c.measured) && (lower ? c.measured >= c.tolerance : c.measured <= c.tolerance);
  }
  std::vector<CheckResult> take() { return std::move(checks_); }

 private:
  std::vector<CheckResult> checks_;
  std::vector<bool> at_least_;
  std::map<std::string, std::size_t> index_;
};

struct TrialOutcome {
  Samples samples;
  std::optional<std::string> error;
};

void run_suite(Suite s, const VerifyOptions& opts, Aggregator& agg, std::vector<std::string>& notes) {
  const std::string prefix(to_string(s));
  std::vector<TrialOutcome> outcomes(static_cast<std::size_t>(opts.trials));
#pragma omp parallel for schedule(dynamic)
  for (int t = 0; t < opts.trials; ++t) {
    Rng rng(trial_seed(opts.seed, s, t));
    TrialOutcome& o = outcomes[static_cast<std::size_t>(t)];
    try {
      o.samples = run_trial(s, rng);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  }
  int errors = 0;
  for (std::size_t t = 0; t < outcomes.size(); ++t) {
    for (const auto& sample : outcomes[t].samples) agg.add(prefix, sample);
    if (outcomes[t].error) {
      if (errors == 0) notes.push_back(prefix + " trial " + std::to_string(t) + " raised: " + *outcomes[t].error);
      ++errors;
    }
  }
  if (!outcomes.empty()) agg.add(prefix, {"trial_errors", static_cast<double>(errors), 0.0});
}

}  // namespace

std::string_view to_string(Suite s) {
  switch (s) {
    case Suite::Numerics: return "numerics";
    case Suite::Generators: return "generators";
    case Suite::Compiler: return "compiler";
    case Suite::Channels: return "channels";
    case Suite::Majorization: return "majorization";
    case Suite::Cooling: return "cooling";
    case Suite::All: return "all";
  }
  return "all";
}

Suite suite_from_string(std::string_view s) {
  for (Suite x : {Suite::Numerics, Suite::Generators, Suite::Compiler, Suite::Channels, Suite::Majorization,
                  Suite::Cooling, Suite::All}) {
    if (to_string(x) == s) return x;
  }
  throw ParseError("unknown suite '" + std::string(s) + "'");
}

bool VerifyReport::all_pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

VerifyReport run_verify(const VerifyOptions& opts) {
  if (opts.trials < 0) throw DomainError("verify: trial count must be non-negative");
  VerifyReport report;
  report.trials = opts.trials;
  Aggregator agg;
  std::vector<Suite> suites;
  if (opts.suite == Suite::All) {
    suites = {Suite::Numerics, Suite::Generators, Suite::Compiler, Suite::Channels, Suite::Majorization, Suite::Cooling};
  } else {
    suites = {opts.suite};
  }
  for (Suite s : suites) run_suite(s, opts, agg, report.notes);

  const bool majorization = opts.suite == Suite::Majorization || opts.suite == Suite::All;
  if (opts.inject_violation && majorization) {
    // (3/4, 1/8, 1/8) does not thermomajorize (0, 1/2, 1/2) on the qutrit spectrum.
    const double gap = dominance_gap(DiagonalState({0.75, 0.125, 0.125}), cooling_default_input(),
                                     cooling_system_spectrum());
    agg.add("majorization", {"injected_curve_violation", gap, 1e-9});
  }
  report.checks = agg.take();
  if (opts.trials == 0) report.notes.push_back("zero trials requested; randomized checks are vacuous");
  return report;
}

}  // namespace thermoforge
