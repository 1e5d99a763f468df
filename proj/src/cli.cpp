#include "thermoforge/cli.hpp"

#include <omp.h>

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <regex>
#include <sstream>

#include "CLI11.hpp"
#include "thermoforge/channels.hpp"
#include "thermoforge/compiler.hpp"
#include "thermoforge/cooling.hpp"
#include "thermoforge/errors.hpp"
#include "thermoforge/io.hpp"
#include "thermoforge/majorization.hpp"
#include "thermoforge/verify.hpp"

namespace thermoforge {

namespace {

using io::json;

constexpr std::uint64_t kDefaultSeed = 7;
constexpr double kCoherenceTol = 1e-10;

struct Report {
  explicit Report(std::string name = {}) : command(std::move(name)) {}

  std::string command;
  json inputs = json::object();
  json outputs = json::object();
  std::vector<CheckResult> checks;

  void check(std::string name, bool pass, double measured, double tolerance) {
    checks.push_back({std::move(name), pass, measured, tolerance});
  }
  /// Pass iff measured ≤ tolerance.
  void bound(std::string name, double measured, double tolerance) {
    check(std::move(name), measured <= tolerance, measured, tolerance);
  }
  [[nodiscard]] bool all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
  }
  [[nodiscard]] json to_json(double wall_time) const {
    json cs = json::array();
    for (const auto& c : checks) {
      cs.push_back({{"name", c.name}, {"pass", c.pass}, {"measured", c.measured}, {"tolerance", c.tolerance}});
    }
    return {{"command", command}, {"inputs", inputs}, {"outputs", outputs}, {"checks", cs}, {"wall_time", wall_time}};
  }
};

std::uint64_t default_seed() {
  const char* env = std::getenv("THERMOFORGE_SEED");
  if (env == nullptr || *env == '\0') return kDefaultSeed;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument(env);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("THERMOFORGE_SEED is not an unsigned integer: '") + env + "'");
  }
}

/// Diagonal populations of a state file; coherent inputs are refused.
DiagonalState incoherent_state(const std::string& path) {
  const io::StateInput s = io::state_from_json(io::read_json_file(path));
  if (const auto* d = std::get_if<DiagonalState>(&s)) return *d;
  const Operator& rho = std::get<Operator>(s);
  const double mass = off_diagonal_mass(rho);
  if (mass > kCoherenceTol) {
    std::ostringstream msg;
    msg << path << ": state has coherences (largest off-diagonal modulus " << mass
        << "); only incoherent states are accepted";
    throw CoherenceError(msg.str());
  }
  return populations_of(rho);
}

json populations_json(const DiagonalState& p) { return p.populations(); }

std::string csv_number(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

// ---------------------------------------------------------------- compile

struct CompileArgs {
  std::string system, catalyst, unitary, method = "exact", out;
  double accuracy = 1e-8;
  int m_max = 1 << 16;
};

void require_energy_preserving(const Operator& u, const EnergyBlocks& blocks) {
  if (u.rows() != blocks.joint_dim() || u.cols() != blocks.joint_dim()) {
    throw ShapeError("unitary is " + std::to_string(u.rows()) + "x" + std::to_string(u.cols()) +
                     " but the joint dimension is " + std::to_string(blocks.joint_dim()));
  }
  if (!is_unitary(u, 1e-9)) throw DomainError("unitary: |U^dagger U - I|_F = " + std::to_string(unitarity_defect(u)));
  if (const auto bad = find_block_violation(u, blocks, 1e-9)) {
    const auto [i, j] = *bad;
    const JointIndex a = blocks.unflat(i), b = blocks.unflat(j);
    std::ostringstream msg;
    msg << "unitary is not energy-preserving: entry (" << i << "," << j << ") = " << u(i, j) << " couples |"
        << a.system << "," << a.catalyst << "> (E = " << blocks.blocks()[static_cast<std::size_t>(blocks.block_of(i))].energy
        << ") with |" << b.system << "," << b.catalyst
        << "> (E = " << blocks.blocks()[static_cast<std::size_t>(blocks.block_of(j))].energy << ")";
    throw DomainError(msg.str());
  }
}

Report cmd_compile(const CompileArgs& a) {
  Report r{"compile"};
  r.inputs = {{"system", a.system}, {"catalyst", a.catalyst}, {"unitary", a.unitary},
              {"method", a.method}, {"accuracy", a.accuracy}, {"m_max", a.m_max}};
  const Spectrum s = io::spectrum_from_json(io::read_json_file(a.system));
  const Spectrum c = io::spectrum_from_json(io::read_json_file(a.catalyst));
  const Operator u = io::operator_from_json(io::read_json_file(a.unitary));
  const Method method = method_from_string(a.method);
  if (method == Method::Handcrafted) throw ParseError("compile: method must be exact, trotter or bch");
  if (!(a.accuracy > 0.0)) throw DomainError("compile: accuracy must be positive");
  if (a.m_max < 1) throw DomainError("compile: --m-max must be at least 1");
  const EnergyBlocks blocks = energy_blocks(s, c);
  require_energy_preserving(u, blocks);

  const AccuracySearch found = compile_to_accuracy(u, blocks, method, a.accuracy, a.m_max);
  const GateSequence& seq = found.sequence;
  long two_level = 0;
  for (const auto& step : seq.steps) two_level += local_gate(step, blocks.dims()).single() ? 0 : 1;

  r.outputs = {{"gate_count", seq.steps.size()},
               {"two_level_gates", two_level},
               {"reconstruction_error", found.error},
               {"error_bound", seq.error_bound},
               {"error_bound_heuristic", seq.error_bound_heuristic},
               {"accuracy_reached", found.reached},
               {"block_sizes", blocks.block_sizes()}};
  if (method != Method::Exact) r.outputs["m"] = found.m;
  if (a.out.empty()) {
    r.outputs["sequence"] = io::to_json(seq);
  } else {
    io::write_text_file(a.out, io::to_json(seq).dump(2) + "\n");
    r.outputs["sequence_file"] = a.out;
  }

  r.check("reconstruction_error", found.reached, found.error, a.accuracy);
  if (method == Method::Exact) {
    long pairs = 0;
    for (int d : blocks.block_sizes()) pairs += static_cast<long>(d) * (d - 1) / 2;
    r.bound("gate_count_bound", static_cast<double>(two_level), static_cast<double>(pairs));
  }
  return r;
}

// ------------------------------------------------------------------- cool

struct CoolArgs {
  std::optional<int> d;
  std::string sweep, csv, state;
};

struct CoolRow {
  int d = 0;
  CoolingResult result;
  double to_limit = 0.0;
};

std::pair<int, int> parse_sweep(const std::string& text) {
  static const std::regex re(R"(^\s*(\d+)\s*\.\.\s*(\d+)\s*$)");
  std::smatch m;
  if (!std::regex_match(text, m, re)) throw ParseError("--sweep expects a range a..b, got '" + text + "'");
  const int lo = std::stoi(m[1].str()), hi = std::stoi(m[2].str());
  if (lo > hi) throw DomainError("--sweep range is empty: " + text);
  return {lo, hi};
}

Report cmd_cool(const CoolArgs& a) {
  Report r{"cool"};
  if (!a.d && a.sweep.empty()) throw ParseError("cool: one of --D or --sweep is required");
  std::vector<int> ds;
  if (a.d) {
    ds.push_back(*a.d);
    r.inputs["D"] = *a.d;
  } else {
    const auto [lo, hi] = parse_sweep(a.sweep);
    for (int d = lo; d <= hi; ++d) ds.push_back(d);
    r.inputs["sweep"] = {lo, hi};
  }
  const bool exploratory = !a.state.empty();
  const DiagonalState p = exploratory ? incoherent_state(a.state) : cooling_default_input();
  if (p.dim() != 3) throw ShapeError("cool: the input state must have three levels");
  r.inputs["state"] = exploratory ? json(a.state) : json("default");
  if (!a.csv.empty()) r.inputs["csv"] = a.csv;

  for (int d : ds) {
    if (d > kCoolingMaxDiagonalD) {
      throw CapacityError("cool: D = " + std::to_string(d) + " exceeds the limit " + std::to_string(kCoolingMaxDiagonalD));
    }
    if (d < 2) throw DomainError("cool: D must be at least 2, got " + std::to_string(d));
  }

  std::vector<CoolRow> rows(ds.size());
  std::vector<std::exception_ptr> failures(ds.size());
  const Spectrum system = cooling_system_spectrum();
#pragma omp parallel for schedule(dynamic)
  for (long k = 0; k < static_cast<long>(ds.size()); ++k) {
    const auto i = static_cast<std::size_t>(k);
    try {
      rows[i].d = ds[i];
      rows[i].result = serial::run_cooling(ds[i], p);
      rows[i].to_limit = max_ground_population_to(p, system, build_cooling_catalyst(ds[i]));
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  json table = json::array();
  std::ostringstream csv;
  csv << "D,ground,excited1,excited2,invariant_level_population,to_limit,to_limit_check\n";
  for (const auto& row : rows) {
    const DiagonalState& q = row.result.final_state;
    const double gap = std::abs(row.to_limit - q[0]);
    const bool at_limit = gap <= 1e-12;
    json entry = {{"D", row.d},
                  {"ground", q[0]},
                  {"excited1", q[1]},
                  {"excited2", q[2]},
                  {"invariant_level_population", row.result.invariant_level_population()},
                  {"to_limit", row.to_limit},
                  {"to_limit_check", at_limit}};
    table.push_back(entry);
    csv << row.d << ',' << csv_number(q[0]) << ',' << csv_number(q[1]) << ',' << csv_number(q[2]) << ','
        << csv_number(row.result.invariant_level_population()) << ',' << csv_number(row.to_limit) << ','
        << (at_limit ? "true" : "false") << '\n';

    if (exploratory) continue;
    const std::string tag = a.d ? "" : "[D=" + std::to_string(row.d) + "]";
    const auto want = cooling_closed_form(row.d);
    double err = 0.0;
    for (int k = 0; k < 3; ++k) err = std::max(err, std::abs(q[k] - want[static_cast<std::size_t>(k)]));
    r.bound("q_prime_closed_form" + tag, err, 1e-12);
    double inv = 0.0;
    const double level = 1.0 / (row.d * std::ldexp(1.0, row.d));
    for (double x : row.result.invariant_populations) inv = std::max(inv, std::abs(x - level));
    r.bound("invariant_level_population" + tag, inv, 1e-12);
    r.bound("to_limit_check" + tag, gap, 1e-12);
  }
  if (a.d) {
    r.outputs = table[0];
  } else {
    r.outputs["sweep"] = table;
  }
  r.outputs["exploratory"] = exploratory;
  if (!a.csv.empty()) io::write_text_file(a.csv, csv.str());
  return r;
}

// ----------------------------------------------------------------- verify

struct VerifyArgs {
  std::string suite = "all";
  std::optional<std::uint64_t> seed;
  int trials = 100;
  bool inject = false;
};

Report cmd_verify(const VerifyArgs& a) {
  Report r{"verify"};
  VerifyOptions opts;
  opts.suite = suite_from_string(a.suite);
  opts.seed = a.seed ? *a.seed : default_seed();
  opts.trials = a.trials;
  opts.inject_violation = a.inject;
  r.inputs = {{"suite", a.suite}, {"seed", opts.seed}, {"trials", a.trials}, {"inject_violation", a.inject}};
  const VerifyReport v = run_verify(opts);
  r.checks = v.checks;
  r.outputs = {{"trials", v.trials}, {"notes", v.notes}, {"check_count", v.checks.size()}};
  return r;
}

// ------------------------------------------------------------------ curve

struct CurveArgs {
  std::string state, spectrum, compare, csv;
};

json curve_json(const ThermoCurve& c) {
  json v = json::array();
  for (const auto& pt : c.vertices) v.push_back({pt.x, pt.y});
  return {{"vertices", v}, {"order", c.order}};
}

double endpoint_error(const ThermoCurve& c) {
  return std::max(std::abs(c.vertices.back().x - 1.0), std::abs(c.vertices.back().y - 1.0));
}

Report cmd_curve(const CurveArgs& a) {
  Report r{"curve"};
  r.inputs = {{"state", a.state}, {"spectrum", a.spectrum}};
  if (!a.compare.empty()) r.inputs["compare"] = a.compare;
  if (!a.csv.empty()) r.inputs["csv"] = a.csv;
  const Spectrum spec = io::spectrum_from_json(io::read_json_file(a.spectrum));
  const DiagonalState p = incoherent_state(a.state);
  const ThermoCurve cp = thermo_curve(p, spec);
  r.outputs["curve"] = curve_json(cp);
  r.bound("curve_endpoint", endpoint_error(cp), 1e-12);

  std::ostringstream csv;
  csv << "curve,x,y\n";
  for (const auto& pt : cp.vertices) csv << "state," << csv_number(pt.x) << ',' << csv_number(pt.y) << '\n';

  if (!a.compare.empty()) {
    const DiagonalState q = incoherent_state(a.compare);
    const ThermoCurve cq = thermo_curve(q, spec);
    r.outputs["compare_curve"] = curve_json(cq);
    r.outputs["state_majorizes_compare"] = thermo_majorizes(p, q, spec);
    r.outputs["compare_majorizes_state"] = thermo_majorizes(q, p, spec);
    r.outputs["gap_state_over_compare"] = dominance_gap(p, q, spec);
    r.outputs["gap_compare_over_state"] = dominance_gap(q, p, spec);
    r.bound("compare_curve_endpoint", endpoint_error(cq), 1e-12);
    for (const auto& pt : cq.vertices) csv << "compare," << csv_number(pt.x) << ',' << csv_number(pt.y) << '\n';
  }
  if (!a.csv.empty()) io::write_text_file(a.csv, csv.str());
  return r;
}

// --------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string system, catalyst, state, gates;
  bool rethermalize = true;
  double epsilon = 0.0;
  double strict_tol = kStrictTol;
};

json verdict_json(const CatalysisVerdict& v) {
  return {{"strict", v.strict},
          {"correlated", v.correlated},
          {"approximate", v.approximate},
          {"epsilon", v.epsilon},
          {"approximate_distance", v.approximate_distance},
          {"catalyst_marginal_distance", v.catalyst_marginal_distance},
          {"product_defect", v.product_defect},
          {"strict_defect", v.strict_defect}};
}

int chain_violations(const CatalysisVerdict& v) {
  return (v.strict && !v.correlated ? 1 : 0) + (v.correlated && !v.approximate ? 1 : 0);
}

Report cmd_simulate(const SimulateArgs& a) {
  Report r{"simulate"};
  r.inputs = {{"system", a.system},     {"catalyst", a.catalyst}, {"state", a.state},          {"gates", a.gates},
              {"rethermalize", a.rethermalize}, {"epsilon", a.epsilon}, {"strict_tol", a.strict_tol}};
  if (a.epsilon < 0.0) throw DomainError("simulate: epsilon must be non-negative");
  const Spectrum s = io::spectrum_from_json(io::read_json_file(a.system));
  const Spectrum c = io::spectrum_from_json(io::read_json_file(a.catalyst));
  const Operator rho = io::state_operator(io::state_from_json(io::read_json_file(a.state)));
  const GateSequence seq = io::gate_sequence_from_json(io::read_json_file(a.gates));
  const GcEtoResult run = run_gc_eto(rho, s, c, seq, {}, a.rethermalize, a.epsilon, a.strict_tol);

  const Dims dims{s.dim(), c.dim()};
  r.outputs = {{"sigma_s", io::operator_to_json(run.sigma_s)},
               {"system_populations", populations_json(populations_of(run.sigma_s))},
               {"catalyst_marginal", io::operator_to_json(partial_trace(run.sigma_sc, dims, Keep::Second))},
               {"gate_count", seq.steps.size()},
               {"pre_verdict", verdict_json(run.pre)}};
  r.bound("trace_preservation", std::abs(run.sigma_s.trace().real() - 1.0), 1e-10);
  int chain = chain_violations(run.pre);
  if (run.post) {
    r.outputs["post_verdict"] = verdict_json(*run.post);
    chain += chain_violations(*run.post);
    r.check("post_strict", run.post->strict,
            std::max(run.post->catalyst_marginal_distance, run.post->strict_defect), a.strict_tol);
  }
  r.bound("verdict_chain", chain, 0.0);
  return r;
}

// ------------------------------------------------------------------ main

template <class F>
int guarded(F&& body, std::ostream& err) {
  try {
    return body();
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const json::exception& e) {
    err << "parse error: " << e.what() << '\n';
    return kExitParse;
  } catch (const CoherenceError& e) {
    err << "coherence guard: " << e.what() << '\n';
    return kExitCoherence;
  } catch (const CapacityError& e) {
    err << "capacity error: " << e.what() << '\n';
    return kExitCapacity;
  } catch (const DomainError& e) {
    err << "domain error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const PreconditionError& e) {
    err << "precondition error: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDomain;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"thermoforge: thermal-operation compiler and catalytic cooling toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  int jobs = 0;
  std::string report_path;
  app.add_option("--jobs", jobs, "Worker threads (0: one per processor)")->check(CLI::NonNegativeNumber);
  app.add_option("--report", report_path, "Also write the JSON report to this file");

  CompileArgs ca;
  auto* compile = app.add_subcommand("compile", "Compile an energy-preserving unitary into elementary gates");
  compile->add_option("--system", ca.system, "System spectrum JSON")->required();
  compile->add_option("--catalyst", ca.catalyst, "Catalyst spectrum JSON")->required();
  compile->add_option("--unitary", ca.unitary, "Joint unitary JSON")->required();
  compile->add_option("--method", ca.method, "exact, trotter or bch")->check(CLI::IsMember({"exact", "trotter", "bch"}));
  compile->add_option("--accuracy", ca.accuracy, "Target Frobenius reconstruction error");
  compile->add_option("--m-max", ca.m_max, "Largest slice count tried by the doubling search");
  compile->add_option("--out", ca.out, "Write the gate sequence here");

  CoolArgs co;
  auto* cool = app.add_subcommand("cool", "Run the catalytic qutrit cooling example");
  auto* d_opt = cool->add_option("--D", co.d, "Catalyst size parameter");
  cool->add_option("--sweep", co.sweep, "Range of D values, e.g. 2..12")->excludes(d_opt);
  cool->add_option("--csv", co.csv, "Write one CSV row per D");
  cool->add_option("--state", co.state, "Incoherent qutrit input state (default (0, 1/2, 1/2))");

  VerifyArgs va;
  auto* verify = app.add_subcommand("verify", "Run the randomized invariant suites");
  verify->add_option("--suite", va.suite, "numerics|generators|compiler|channels|majorization|cooling|all")
      ->check(CLI::IsMember({"numerics", "generators", "compiler", "channels", "majorization", "cooling", "all"}));
  verify->add_option("--seed", va.seed, "Base seed (default: THERMOFORGE_SEED or 7)");
  verify->add_option("--trials", va.trials, "Trials per suite")->check(CLI::NonNegativeNumber);
  verify->add_flag("--inject-violation", va.inject, "Add a known-false curve dominance check");

  CurveArgs cu;
  auto* curve = app.add_subcommand("curve", "Thermomajorization curve of an incoherent state");
  curve->add_option("--state", cu.state, "State JSON")->required();
  curve->add_option("--spectrum", cu.spectrum, "Spectrum JSON")->required();
  curve->add_option("--compare", cu.compare, "Second state; dominance is reported both ways");
  curve->add_option("--csv", cu.csv, "Write curve vertices as CSV");

  SimulateArgs sa;
  auto* simulate = app.add_subcommand("simulate", "Run a gate sequence on state (x) Gibbs catalyst");
  simulate->add_option("--system", sa.system, "System spectrum JSON")->required();
  simulate->add_option("--catalyst", sa.catalyst, "Catalyst spectrum JSON")->required();
  simulate->add_option("--state", sa.state, "System state JSON")->required();
  simulate->add_option("--gates", sa.gates, "Gate sequence JSON")->required();
  simulate->add_flag("--rethermalize,!--no-rethermalize", sa.rethermalize, "Rethermalize the catalyst (default on)");
  simulate->add_option("--epsilon", sa.epsilon, "Approximate-catalysis threshold");
  simulate->add_option("--strict-tol", sa.strict_tol, "Tolerance for exact catalyst recovery");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitParse;
  }
  if (jobs > 0) omp_set_num_threads(jobs);

  return guarded(
      [&]() -> int {
        const auto start = std::chrono::steady_clock::now();
        Report r;
        if (compile->parsed()) {
          r = cmd_compile(ca);
        } else if (cool->parsed()) {
          r = cmd_cool(co);
        } else if (verify->parsed()) {
          r = cmd_verify(va);
        } else if (curve->parsed()) {
          r = cmd_curve(cu);
        } else {
          r = cmd_simulate(sa);
        }
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const std::string text = r.to_json(wall).dump(2) + "\n";
        out << text;
        if (!report_path.empty()) io::write_text_file(report_path, text);
        for (const auto& c : r.checks) {
          if (!c.pass) err << "check failed: " << c.name << " (measured " << c.measured << ", tolerance " << c.tolerance << ")\n";
        }
        return r.all_pass() ? kExitOk : kExitCheckFailed;
      },
      err);
}

}  // namespace thermoforge
