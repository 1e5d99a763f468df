#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "support.hpp"
#include "thermoforge/cli.hpp"
#include "thermoforge/cooling.hpp"
#include "thermoforge/io.hpp"

using namespace thermoforge;
namespace fs = std::filesystem;
using io::json;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
  [[nodiscard]] json report() const { return json::parse(out); }
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "thermoforge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class TempDir {
 public:
  TempDir() : path_(fs::temp_directory_path() / ("thermoforge_cli_" + std::to_string(std::random_device{}()))) {
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string write(const std::string& name, const std::string& text) const {
    const fs::path p = path_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  [[nodiscard]] std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

const json* find_check(const json& report, const std::string& name) {
  for (const auto& c : report.at("checks")) {
    if (c.at("name") == name) return &c;
  }
  return nullptr;
}

json strip_wall_time(json r) {
  r.erase("wall_time");
  return r;
}

}  // namespace

TEST_CASE("cool --D 4 reports the closed form") {
  const Run r = cli({"cool", "--D", "4"});
  REQUIRE(r.code == kExitOk);
  const json rep = r.report();
  CHECK(rep.at("command") == "cool");
  CHECK(std::abs(rep.at("outputs").at("ground").get<double>() - 0.75) < 1e-12);
  CHECK(rep.at("outputs").at("to_limit_check").get<bool>());
  for (const char* name : {"q_prime_closed_form", "invariant_level_population", "to_limit_check"}) {
    const json* c = find_check(rep, name);
    REQUIRE(c != nullptr);
    CHECK(c->at("pass").get<bool>());
  }
}

TEST_CASE("cool --D 2 invariant level population") {
  const json rep = cli({"cool", "--D", "2"}).report();
  CHECK(std::abs(rep.at("outputs").at("ground").get<double>() - 0.5) < 1e-12);
  CHECK(std::abs(rep.at("outputs").at("invariant_level_population").get<double>() - 0.125) < 1e-12);
}

TEST_CASE("cool sweep writes one CSV row per D") {
  TempDir dir;
  const std::string csv = dir.file("out.csv");
  const Run r = cli({"cool", "--sweep", "2..6", "--csv", csv});
  CHECK(r.code == kExitOk);
  std::ifstream in(csv);
  std::string line;
  int rows = -1;  // header
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
  CHECK(r.report().at("outputs").at("sweep").size() == 5);
}

TEST_CASE("cool guards") {
  CHECK(cli({"cool", "--D", "21"}).code == kExitCapacity);
  CHECK(cli({"cool", "--D", "1"}).code == kExitDomain);
  CHECK(cli({"cool"}).code == kExitParse);
  CHECK(cli({"cool", "--sweep", "2-6"}).code == kExitParse);
  CHECK(cli({"cool", "--D", "3", "--sweep", "2..4"}).code == kExitParse);
  CHECK(cli({"cool", "--sweep", "2..25"}).code == kExitCapacity);
}

TEST_CASE("cool with an exploratory input") {
  TempDir dir;
  const std::string s = dir.write("p.json", R"({"populations": [0.2, 0.3, 0.5]})");
  const Run r = cli({"cool", "--D", "3", "--state", s});
  CHECK(r.code == kExitOk);
  CHECK(r.report().at("outputs").at("exploratory").get<bool>());
  const std::string coh = dir.write("c.json", R"({"re": [[0.5, 0.1, 0], [0.1, 0.5, 0], [0, 0, 0]]})");
  CHECK(cli({"cool", "--D", "3", "--state", coh}).code == kExitCoherence);
}

TEST_CASE("verify suites") {
  const Run all = cli({"verify", "--suite", "all", "--seed", "7", "--trials", "20"});
  CHECK(all.code == kExitOk);
  CHECK(all.report().at("checks").size() > 30);

  const Run bad = cli({"verify", "--suite", "majorization", "--trials", "3", "--inject-violation"});
  CHECK(bad.code == kExitCheckFailed);
  CHECK(bad.err.find("injected_curve_violation") != std::string::npos);
  const json bad_report = bad.report();
  const json* c = find_check(bad_report, "majorization.injected_curve_violation");
  REQUIRE(c != nullptr);
  CHECK_FALSE(c->at("pass").get<bool>());
  CHECK(c->at("measured").get<double>() > 0.1);

  const Run zero = cli({"verify", "--trials", "0"});
  CHECK(zero.code == kExitOk);
  CHECK(zero.report().at("outputs").at("trials") == 0);
  CHECK(zero.report().at("outputs").at("notes").size() == 1);

  CHECK(cli({"verify", "--suite", "nonsense"}).code == kExitParse);
}

TEST_CASE("verify is deterministic and honours THERMOFORGE_SEED") {
  const json a = strip_wall_time(cli({"verify", "--suite", "channels", "--seed", "11", "--trials", "8"}).report());
  const json b = strip_wall_time(cli({"verify", "--suite", "channels", "--seed", "11", "--trials", "8", "--jobs", "1"}).report());
  CHECK(a.dump() == b.dump());

  ::setenv("THERMOFORGE_SEED", "11", 1);
  const json c = strip_wall_time(cli({"verify", "--suite", "channels", "--trials", "8"}).report());
  ::setenv("THERMOFORGE_SEED", "not-a-number", 1);
  const Run d = cli({"verify", "--suite", "channels", "--trials", "1"});
  ::unsetenv("THERMOFORGE_SEED");
  CHECK(c.at("inputs").at("seed") == 11);
  CHECK(c.at("checks").dump() == a.at("checks").dump());
  CHECK(d.code == kExitParse);
}

TEST_CASE("curve command") {
  TempDir dir;
  const std::string spec = dir.write("s.json", R"({"energies": [0, 0.6931471805599453, 0.6931471805599453]})");
  const std::string p = dir.write("p.json", R"({"populations": [0, 0.5, 0.5]})");
  const std::string g = dir.write("g.json", R"({"populations": [1, 0, 0]})");
  const std::string gibbs = dir.write("gibbs.json", R"({"populations": [0.5, 0.25, 0.25]})");
  const std::string csv = dir.file("c.csv");

  const Run r = cli({"curve", "--state", p, "--spectrum", spec, "--compare", g, "--csv", csv});
  REQUIRE(r.code == kExitOk);
  const json out = r.report().at("outputs");
  CHECK(out.at("state_majorizes_compare").get<bool>());
  CHECK(out.at("compare_majorizes_state").get<bool>());
  CHECK(fs::exists(csv));

  const json gc = cli({"curve", "--state", gibbs, "--spectrum", spec}).report().at("outputs").at("curve");
  const auto& v = gc.at("vertices");
  for (const auto& pt : v) CHECK(std::abs(pt[0].get<double>() - pt[1].get<double>()) < 1e-12);

  const std::string coh = dir.write("coh.json", R"({"re": [[0.5, 0.2, 0], [0.2, 0.5, 0], [0, 0, 0]]})");
  CHECK(cli({"curve", "--state", coh, "--spectrum", spec}).code == kExitCoherence);
  const std::string dephased = dir.write("d.json", R"({"re": [[0.5, 0, 0], [0, 0.5, 0], [0, 0, 0]]})");
  CHECK(cli({"curve", "--state", dephased, "--spectrum", spec}).code == kExitOk);
  const std::string broken = dir.write("b.json", "{\"populations\": [0, 0.5,\n 0.5");
  const Run pe = cli({"curve", "--state", broken, "--spectrum", spec});
  CHECK(pe.code == kExitParse);
  CHECK(pe.err.find("line 2") != std::string::npos);
  CHECK(cli({"curve", "--state", dir.file("missing.json"), "--spectrum", spec}).code == kExitParse);
}

TEST_CASE("compile command") {
  TempDir dir;
  const Spectrum s = cooling_system_spectrum();
  const Spectrum c = build_cooling_catalyst(2);
  const std::string sys = dir.write("s.json", io::to_json(s).dump());
  const std::string cat = dir.write("c.json", io::to_json(c).dump());
  const std::string id = dir.write("id.json", io::operator_to_json(Operator::Identity(9, 9)).dump());

  const Run trivial = cli({"compile", "--system", sys, "--catalyst", cat, "--unitary", id, "--method", "exact"});
  REQUIRE(trivial.code == kExitOk);
  CHECK(trivial.report().at("outputs").at("gate_count") == 0);
  CHECK(trivial.report().at("outputs").at("reconstruction_error") == 0.0);

  const EnergyBlocks blocks = energy_blocks(s, c);
  const Operator u = random_energy_preserving_unitary(blocks, 99);
  const std::string uf = dir.write("u.json", io::operator_to_json(u).dump());
  const std::string seq = dir.file("seq.json");
  const Run ex = cli({"compile", "--system", sys, "--catalyst", cat, "--unitary", uf, "--out", seq});
  REQUIRE(ex.code == kExitOk);
  CHECK(ex.report().at("outputs").at("reconstruction_error").get<double>() < 1e-8);
  const GateSequence back = io::gate_sequence_from_json(io::read_json_file(seq));
  CHECK((reconstruct(back, blocks.dims()) - u).norm() < 1e-8);

  const Run tr = cli({"compile", "--system", sys, "--catalyst", cat, "--unitary", uf, "--method", "trotter",
                      "--accuracy", "1e-2"});
  CHECK(tr.code == kExitOk);
  CHECK(tr.report().at("outputs").contains("m"));

  const Run capped = cli({"compile", "--system", sys, "--catalyst", cat, "--unitary", uf, "--method", "trotter",
                          "--accuracy", "1e-9", "--m-max", "2"});
  CHECK(capped.code == kExitCheckFailed);

  Operator cross = Operator::Identity(9, 9);
  cross.row(0).swap(cross.row(1));
  const std::string xf = dir.write("x.json", io::operator_to_json(cross).dump());
  const Run bad = cli({"compile", "--system", sys, "--catalyst", cat, "--unitary", xf});
  CHECK(bad.code == kExitDomain);
  CHECK(bad.err.find("(0,1)") != std::string::npos);

  const std::string malformed = dir.write("m.json", "{\"re\": [[1, 0], [0, 1]");
  CHECK(cli({"compile", "--system", sys, "--catalyst", cat, "--unitary", malformed}).code == kExitParse);
  CHECK(cli({"compile", "--system", sys, "--catalyst", cat, "--unitary", id, "--method", "magic"}).code == kExitParse);
}

TEST_CASE("compile with the bch method on a doubled catalyst") {
  TempDir dir;
  const Spectrum s = cooling_system_spectrum();
  const Spectrum c = tensor(build_cooling_catalyst(2), doubling_catalyst());
  const EnergyBlocks blocks = energy_blocks(s, c);
  const Operator u = random_energy_preserving_unitary(blocks, 3);
  const Run r = cli({"compile", "--system", dir.write("s.json", io::to_json(s).dump()), "--catalyst",
                     dir.write("c.json", io::to_json(c).dump()), "--unitary",
                     dir.write("u.json", io::operator_to_json(u).dump()), "--method", "bch", "--accuracy", "0.05"});
  CHECK(r.code == kExitOk);
  CHECK(r.report().at("outputs").at("reconstruction_error").get<double>() < 0.05);
}

TEST_CASE("simulate command") {
  TempDir dir;
  const CoolingInstance inst = make_cooling_instance(2);
  const std::string sys = dir.write("s.json", io::to_json(inst.system).dump());
  const std::string cat = dir.write("c.json", io::to_json(inst.catalyst).dump());
  const std::string st = dir.write("p.json", R"({"populations": [0, 0.5, 0.5]})");
  const std::string gates = dir.write("g.json", io::to_json(inst.gates).dump());

  const Run r = cli({"simulate", "--system", sys, "--catalyst", cat, "--state", st, "--gates", gates});
  REQUIRE(r.code == kExitOk);
  const json out = r.report().at("outputs");
  CHECK(std::abs(out.at("system_populations")[0].get<double>() - 0.5) < 1e-12);
  CHECK_FALSE(out.at("pre_verdict").at("correlated").get<bool>());
  CHECK(out.at("post_verdict").at("strict").get<bool>());

  const Run raw = cli({"simulate", "--system", sys, "--catalyst", cat, "--state", st, "--gates", gates,
                       "--no-rethermalize"});
  CHECK(raw.code == kExitOk);
  CHECK_FALSE(raw.report().at("outputs").contains("post_verdict"));

  const std::string nonlocal =
      dir.write("n.json", R"({"method": "handcrafted", "steps": [{"kind": "h", "indices": [[0, 0], [1, 0]], "param": 0.3}]})");
  CHECK(cli({"simulate", "--system", sys, "--catalyst", cat, "--state", st, "--gates", nonlocal}).code == kExitDomain);
}

TEST_CASE("reports are byte-identical apart from wall time and can be written to a file") {
  TempDir dir;
  const std::string path = dir.file("report.json");
  const Run a = cli({"cool", "--sweep", "2..5", "--report", path});
  const Run b = cli({"cool", "--sweep", "2..5"});
  CHECK(strip_wall_time(a.report()).dump() == strip_wall_time(b.report()).dump());
  CHECK(strip_wall_time(io::read_json_file(path)).dump() == strip_wall_time(a.report()).dump());
}

TEST_CASE("help exits cleanly") {
  CHECK(cli({"--help"}).code == kExitOk);
  CHECK(cli({}).code == kExitParse);
}
