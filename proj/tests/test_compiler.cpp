#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "support.hpp"
#include "thermoforge/compiler.hpp"
#include "thermoforge/cooling.hpp"
#include "thermoforge/errors.hpp"

using namespace thermoforge;
using thermoforge::testing::loglog_slope;

namespace {

const Dims kPair{1, 2};
const JointIndex kA{0, 0}, kB{0, 1};

ElementaryGenerator gen(GeneratorKind k, JointIndex a, JointIndex b) { return {k, 0.0, a, b}; }

EnergyBlocks blocks_with_sizes(std::mt19937_64& rng, int max_block) {
  // System levels 0..2 (unit 1) and a catalyst with random degeneracies at
  // energies spaced by an irrational step, so block size = degeneracy count.
  std::vector<double> ec;
  std::uniform_int_distribution<int> deg(1, max_block);
  const int levels = 1 + static_cast<int>(rng() % 3);
  for (int l = 0; l < levels; ++l) {
    const int d = deg(rng);
    for (int k = 0; k < d; ++k) ec.push_back(std::sqrt(2.0) * l);
  }
  const std::vector<double> es = {0.0};
  return energy_blocks(Spectrum::from_energies(es), Spectrum::from_energies(ec));
}

struct GateCounts {
  int two_level = 0;
  int single = 0;
};

GateCounts count(const GateSequence& seq, Dims dims) {
  GateCounts c;
  for (const auto& s : seq.steps) (local_gate(s, dims).single() ? c.single : c.two_level)++;
  return c;
}

}  // namespace

TEST_CASE("reconstruct of empty and single-step sequences") {
  GateSequence empty;
  CHECK((reconstruct(empty, {2, 3}) - Operator::Identity(6, 6)).norm() == 0.0);
  GateSequence one;
  one.steps.emplace_back(GeneratorGate{gen(GeneratorKind::H, kA, kB), 0.7});
  CHECK((reconstruct(one, kPair) - materialize(one.steps[0], kPair)).norm() == 0.0);
  CHECK((reconstruct(one, kPair) - expm_skew(0.7 * materialize(gen(GeneratorKind::H, kA, kB), kPair))).norm() <
        1e-12);
  GateSequence bad;
  bad.steps.emplace_back(GeneratorGate{gen(GeneratorKind::P, {0, 5}, {0, 5}), 0.1});
  CHECK_THROWS_AS(reconstruct(bad, kPair), ShapeError);
}

TEST_CASE("compile_exact identity and transposition") {
  const EnergyBlocks cool = energy_blocks(cooling_system_spectrum(), build_cooling_catalyst(2));
  const int n = cool.joint_dim();
  CHECK(compile_exact(Operator::Identity(n, n), cool).steps.empty());

  // |0,1> and |1,0> share the energy-E block.
  Operator swap = Operator::Identity(n, n);
  const int a = cool.flat({0, 1}), b = cool.flat({1, 0});
  swap.row(a).swap(swap.row(b));
  const GateSequence seq = compile_exact(swap, cool);
  CHECK(count(seq, cool.dims()).two_level == 1);
  CHECK((reconstruct(seq, cool.dims()) - swap).norm() < 1e-12);
}

TEST_CASE("compile_exact rejects non-energy-preserving input") {
  const EnergyBlocks cool = energy_blocks(cooling_system_spectrum(), build_cooling_catalyst(2));
  Operator cross = Operator::Identity(9, 9);
  cross.row(0).swap(cross.row(1));
  CHECK_THROWS_AS(compile_exact(cross, cool), DomainError);
  try {
    compile_exact(cross, cool);
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("(0,1)") != std::string::npos);
  }
}

TEST_CASE("compile_exact round trip and gate-count bound") {
  std::mt19937_64 rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const EnergyBlocks blocks = blocks_with_sizes(rng, 6);
    const Operator u = random_energy_preserving_unitary(blocks, 1000 + trial);
    const GateSequence seq = compile_exact(u, blocks);
    CHECK(seq.method == Method::Exact);
    CHECK((reconstruct(seq, blocks.dims()) - u).norm() < 1e-8);
    long pairs = 0, phases = 0;
    for (int d : blocks.block_sizes()) {
      pairs += d * (d - 1) / 2;
      phases += d;
    }
    const GateCounts c = count(seq, blocks.dims());
    CHECK(c.two_level <= pairs);
    CHECK(c.single <= phases);
    for (const auto& s : seq.steps) CHECK(is_elementary(s, blocks));
  }
}

TEST_CASE("compile_exact handles blocks up to eight members") {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 10; ++trial) {
    const EnergyBlocks blocks = blocks_with_sizes(rng, 8);
    const Operator u = random_energy_preserving_unitary(blocks, 77 + trial);
    CHECK((reconstruct(compile_exact(u, blocks), blocks.dims()) - u).norm() < 1e-8);
  }
}

TEST_CASE("parallel compile_exact equals the serial reference") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 20; ++trial) {
    const EnergyBlocks blocks = blocks_with_sizes(rng, 6);
    const Operator u = random_energy_preserving_unitary(blocks, 500 + trial);
    const GateSequence a = compile_exact(u, blocks);
    const GateSequence b = serial::compile_exact(u, blocks);
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t k = 0; k < a.steps.size(); ++k) {
      const LocalGate x = local_gate(a.steps[k], blocks.dims());
      const LocalGate y = local_gate(b.steps[k], blocks.dims());
      CHECK(x.a == y.a);
      CHECK(x.b == y.b);
      CHECK((x.u - y.u).norm() == 0.0);
    }
  }
}

TEST_CASE("every gate step is energy preserving and local") {
  std::mt19937_64 rng(73);
  const EnergyBlocks blocks = blocks_with_sizes(rng, 5);
  const Operator u = random_energy_preserving_unitary(blocks, 4);
  const GateSequence seq = compile_exact(u, blocks);
  const GateSequence fac = factor_to_generators(seq);
  for (const GateSequence* s : {&seq, &fac}) {
    for (const auto& step : s->steps) {
      const Operator g = materialize(step, blocks.dims());
      CHECK(is_energy_preserving(g, blocks, 1e-10));
      const LocalGate l = local_gate(step, blocks.dims());
      for (int i = 0; i < g.rows(); ++i) {
        if (i == l.a || i == l.b) continue;
        Eigen::VectorXcd e = Eigen::VectorXcd::Unit(g.rows(), i);
        CHECK((g.col(i) - e).norm() < 1e-12);
        CHECK((g.row(i).transpose() - e).norm() < 1e-12);
      }
    }
  }
}

TEST_CASE("factoring explicit gates into generator gates preserves the product") {
  std::mt19937_64 rng(79);
  for (int trial = 0; trial < 30; ++trial) {
    const EnergyBlocks blocks = blocks_with_sizes(rng, 4);
    const Operator u = random_energy_preserving_unitary(blocks, 900 + trial);
    const GateSequence fac = factor_to_generators(compile_exact(u, blocks));
    for (const auto& s : fac.steps) CHECK(std::holds_alternative<GeneratorGate>(s));
    CHECK((reconstruct(fac, blocks.dims()) - u).norm() < 1e-8);
  }
  // Degenerate 2x2 cases: diagonal, anti-diagonal.
  for (int variant = 0; variant < 2; ++variant) {
    Matrix2 w;
    if (variant == 0) {
      w << std::polar(1.0, 0.3), 0.0, 0.0, std::polar(1.0, -1.1);
    } else {
      w << 0.0, std::polar(1.0, 0.9), std::polar(1.0, 2.0), 0.0;
    }
    GateSequence seq;
    seq.steps.emplace_back(TwoLevelGate{kA, kB, w});
    CHECK((reconstruct(factor_to_generators(seq), kPair) - reconstruct(seq, kPair)).norm() < 1e-12);
  }
}

TEST_CASE("compile_trotter zero cases and guards") {
  CoefficientMap c;
  CHECK(compile_trotter(c, 1.0, 4).steps.empty());
  c[gen(GeneratorKind::H, kA, kB)] = 0.8;
  CHECK((reconstruct(compile_trotter(c, 0.0, 4), kPair) - Operator::Identity(2, 2)).norm() == 0.0);
  CHECK_THROWS_AS(compile_trotter(c, 1.0, 0), DomainError);
}

TEST_CASE("commuting generators are exact at a single slice") {
  const CoolingInstance inst = make_cooling_instance(3);
  const EnergyBlocks blocks = energy_blocks(inst.system, inst.catalyst);
  CoefficientMap c;
  const int cd = inst.catalyst.dim();
  for (const auto& [a, b] : cooling_transpositions(3)) {
    c[{GeneratorKind::M, 0.0, {a / cd, a % cd}, {b / cd, b % cd}}] = 0.37 + 0.01 * a;
  }
  Operator k = Operator::Zero(blocks.joint_dim(), blocks.joint_dim());
  for (const auto& [g, r] : c) k += r * materialize(g, blocks.dims());
  const double t = 1.3;
  const Operator target = expm_skew(t * k);
  CHECK((reconstruct(compile_trotter(c, t, 1), blocks.dims()) - target).norm() < 1e-10);
}

TEST_CASE("Trotter error decreases on a doubling ladder with slope -1") {
  CoefficientMap c;
  c[gen(GeneratorKind::H, kA, kB)] = 0.8;
  c[gen(GeneratorKind::M, kA, kB)] = 0.6;
  c[gen(GeneratorKind::P, kA, kA)] = 0.3;
  const double t = 0.5;
  Operator k = Operator::Zero(2, 2);
  for (const auto& [g, r] : c) k += r * materialize(g, kPair);
  const Operator target = expm_skew(t * k);
  std::vector<double> ms, errs;
  double prev = 1e300;
  for (int m = 8; m <= 128; m *= 2) {
    const GateSequence seq = compile_trotter(c, t, m);
    const double err = (reconstruct(seq, kPair) - target).norm();
    CHECK(err <= 1.1 * prev);
    CHECK(seq.error_bound_heuristic);
    CHECK(seq.trotter_m == m);
    prev = err;
    ms.push_back(m);
    errs.push_back(err);
  }
  CHECK(std::abs(loglog_slope(ms, errs) + 1.0) < 0.1);
}

TEST_CASE("compile_bch degenerate cases") {
  const auto h = gen(GeneratorKind::H, kA, kB);
  const auto g = gen(GeneratorKind::GDiag, kA, kB);
  CHECK(compile_bch(h, h, 1.0, 8).steps.empty());
  CHECK((reconstruct(compile_bch(h, h, 1.0, 8), kPair) - Operator::Identity(2, 2)).norm() == 0.0);
  CHECK(compile_bch(h, g, 0.0, 8).steps.empty());
  // h and g_diag commute: each group collapses.
  CHECK((reconstruct(compile_bch(h, g, 0.9, 5), kPair) - Operator::Identity(2, 2)).norm() < 1e-12);
}

TEST_CASE("compile_bch converges to the commutator exponential with slope -1/2") {
  const auto h = gen(GeneratorKind::H, kA, kB);
  const auto m = gen(GeneratorKind::M, kA, kB);
  const Operator comm = commutator(materialize(h, kPair), materialize(m, kPair));
  for (double t : {0.3, -0.3, 1.0}) {
    const Operator target = expm_skew(t * comm);
    std::vector<double> ms, errs;
    for (int n = 16; n <= 1024; n *= 4) {
      ms.push_back(n);
      errs.push_back((reconstruct(compile_bch(h, m, t, n), kPair) - target).norm());
    }
    CHECK(std::abs(loglog_slope(ms, errs) + 0.5) < 0.15);
    CHECK(errs.back() < errs.front());
  }
}

TEST_CASE("compile_nested degenerate nestings") {
  const auto h = gen(GeneratorKind::H, kA, kB);
  const auto m = gen(GeneratorKind::M, kA, kB);
  const std::vector<LieTerm> linear = {{0.8, {h}}, {0.6, {m}}};
  CoefficientMap c;
  c[h] = 0.8;
  c[m] = 0.6;
  CHECK((reconstruct(compile_nested(linear, 0.5, 16), kPair) - reconstruct(compile_trotter(c, 0.5, 16), kPair))
            .norm() == 0.0);

  const std::vector<LieTerm> pure = {{1.0, {h, m}}};
  CHECK((reconstruct(compile_nested(pure, 0.4, 32), kPair) - reconstruct(compile_bch(h, m, 0.4, 32), kPair))
            .norm() < 1e-13);

  const std::vector<LieTerm> deep = {{1.0, {h, m, h}}};
  CHECK_THROWS_AS(compile_nested(deep, 0.4, 4), DomainError);
}

TEST_CASE("compile_nested converges on a mixed term") {
  const auto h = gen(GeneratorKind::H, kA, kB);
  const auto m = gen(GeneratorKind::M, kA, kB);
  const std::vector<LieTerm> terms = {{0.7, {h}}, {0.4, {h, m}}};
  const double t = 0.15;
  const Operator target = expm_skew(t * lie_terms_operator(terms, kPair));
  double prev = 1e300;
  bool below = false;
  for (int n = 1; n <= (1 << 14); n *= 2) {
    const double err = (reconstruct(compile_nested(terms, t, n), kPair) - target).norm();
    CHECK(err <= prev * 1.1);
    prev = err;
    below = below || err < 1e-3;
  }
  CHECK(below);
}

TEST_CASE("logarithm and decompositions reproduce the generator") {
  std::mt19937_64 rng(83);
  for (int trial = 0; trial < 20; ++trial) {
    const EnergyBlocks blocks = blocks_with_sizes(rng, 4);
    const Operator u = random_energy_preserving_unitary(blocks, 300 + trial);
    const Operator k = log_energy_preserving(u, blocks);
    CHECK(is_anti_hermitian(k, 1e-10));
    CHECK((expm_skew(k) - u).norm() < 1e-9);

    Operator full = Operator::Zero(k.rows(), k.cols());
    for (const auto& [g, r] : decompose_full(k, blocks)) full += r * materialize(g, blocks.dims());
    CHECK((full - k).norm() < 1e-10);
  }
  const Spectrum s = cooling_system_spectrum();
  const Spectrum c = tensor(build_cooling_catalyst(2), doubling_catalyst());
  const EnergyBlocks blocks = energy_blocks(s, c);
  const Operator u = random_energy_preserving_unitary(blocks, 5);
  const Operator k = log_energy_preserving(u, blocks);
  CHECK((lie_terms_operator(decompose_rank2(k, blocks), blocks.dims()) - k).norm() < 1e-10);
  const EnergyBlocks plain = energy_blocks(s, build_cooling_catalyst(2));
  const Operator k0 = log_energy_preserving(random_energy_preserving_unitary(plain, 6), plain);
  CHECK_THROWS_AS(decompose_rank2(k0, plain), PreconditionError);
}

TEST_CASE("accuracy-driven search") {
  const Spectrum s = cooling_system_spectrum();
  const Spectrum c = tensor(build_cooling_catalyst(2), doubling_catalyst());
  const EnergyBlocks blocks = energy_blocks(s, c);
  const Operator u = random_energy_preserving_unitary(blocks, 17);

  const AccuracySearch ex = compile_to_accuracy(u, blocks, Method::Exact, 1e-8);
  CHECK(ex.reached);
  CHECK(ex.error < 1e-8);

  const AccuracySearch tr = compile_to_accuracy(u, blocks, Method::Trotter, 1e-2);
  CHECK(tr.reached);
  CHECK(tr.error < 1e-2);
  CHECK(tr.sequence.trotter_m == tr.m);
  CHECK((reconstruct(tr.sequence, blocks.dims()) - u).norm() == doctest::Approx(tr.error));

  const AccuracySearch capped = compile_to_accuracy(u, blocks, Method::Trotter, 1e-14, 4);
  CHECK_FALSE(capped.reached);
  CHECK(capped.m == 4);
}

TEST_CASE("method strings round-trip") {
  for (auto m : {Method::Exact, Method::Trotter, Method::Bch, Method::Handcrafted}) {
    CHECK(method_from_string(to_string(m)) == m);
  }
  CHECK_THROWS_AS(method_from_string("magic"), ParseError);
}
