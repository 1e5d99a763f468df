#include "thermoforge/io.hpp"

#include <fstream>
#include <sstream>

#include "thermoforge/errors.hpp"

namespace thermoforge::io {

namespace {

std::string location(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

const json& require(const json& j, const char* key, const char* what) {
  if (!j.is_object() || !j.contains(key)) {
    throw ParseError(std::string(what) + ": missing field \"" + key + "\"");
  }
  return j.at(key);
}

double as_number(const json& j, const char* what) {
  if (!j.is_number()) throw ParseError(std::string(what) + ": expected a number");
  return j.get<double>();
}

Eigen::MatrixXd real_matrix(const json& j, const char* what) {
  if (!j.is_array() || j.empty()) throw ParseError(std::string(what) + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != rows) {
      throw ParseError(std::string(what) + ": matrix must be square");
    }
    for (Eigen::Index c = 0; c < rows; ++c) m(r, c) = as_number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

JointIndex joint_index(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number_integer() || !j[1].is_number_integer()) {
    throw ParseError("gate step: each index must be a [system, catalyst] integer pair");
  }
  return {j[0].get<int>(), j[1].get<int>()};
}

json joint_index_json(JointIndex j) { return json::array({j.system, j.catalyst}); }

}  // namespace

json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(origin + ": malformed JSON at " + location(text, e.byte));
  }
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json(buf.str(), path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

Spectrum spectrum_from_json(const json& j) {
  if (j.is_object() && j.contains("energies")) {
    const json& e = j.at("energies");
    if (!e.is_array() || e.empty()) throw ParseError("spectrum: \"energies\" must be a non-empty array");
    std::vector<double> energies;
    for (const auto& x : e) energies.push_back(as_number(x, "spectrum energy"));
    return Spectrum::from_energies(energies);
  }
  const json& levels = require(j, "levels", "spectrum");
  if (!levels.is_array() || levels.empty()) throw ParseError("spectrum: \"levels\" must be a non-empty array");
  std::vector<Level> out;
  for (const auto& l : levels) {
    const json& deg = require(l, "deg", "spectrum level");
    if (!deg.is_number_integer()) throw ParseError("spectrum level: \"deg\" must be an integer");
    out.push_back({as_number(require(l, "energy", "spectrum level"), "spectrum level energy"), deg.get<int>()});
  }
  return Spectrum(std::move(out));
}

json to_json(const Spectrum& spec) {
  json levels = json::array();
  for (const auto& l : spec.levels()) levels.push_back({{"energy", l.energy}, {"deg", l.deg}});
  return {{"levels", levels}};
}

Operator operator_from_json(const json& j) {
  const Eigen::MatrixXd re = real_matrix(require(j, "re", "matrix"), "matrix re");
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (j.contains("im")) {
    im = real_matrix(j.at("im"), "matrix im");
    if (im.rows() != re.rows()) throw ParseError("matrix: re and im parts differ in shape");
  }
  Operator m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

json operator_to_json(const Operator& m) {
  json re = json::array();
  json im = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json rr = json::array();
    json ii = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      rr.push_back(m(r, c).real());
      ii.push_back(m(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ii));
  }
  return {{"re", re}, {"im", im}};
}

StateInput state_from_json(const json& j) {
  if (j.is_object() && j.contains("populations")) {
    const json& p = j.at("populations");
    if (!p.is_array() || p.empty()) throw ParseError("state: \"populations\" must be a non-empty array");
    std::vector<double> pops;
    for (const auto& x : p) pops.push_back(as_number(x, "state population"));
    return DiagonalState(std::move(pops));
  }
  Operator rho = operator_from_json(j);
  if (!is_hermitian(rho, 1e-10)) throw DomainError("state: density matrix is not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0, 0.0)) > 1e-10) throw DomainError("state: density matrix trace is not 1");
  return rho;
}

Operator state_operator(const StateInput& s) {
  if (const auto* d = std::get_if<DiagonalState>(&s)) return d->to_operator();
  return std::get<Operator>(s);
}

json to_json(const GateSequence& seq) {
  json steps = json::array();
  for (const auto& step : seq.steps) {
    if (const auto* g = std::get_if<GeneratorGate>(&step)) {
      steps.push_back({{"kind", std::string(to_string(g->generator.kind))},
                       {"indices", json::array({joint_index_json(g->generator.first),
                                                joint_index_json(g->generator.second)})},
                       {"param", g->t},
                       {"block_energy", g->generator.block_energy}});
    } else {
      const auto& t = std::get<TwoLevelGate>(step);
      json u2 = json::array();
      for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) u2.push_back(json::array({t.u(r, c).real(), t.u(r, c).imag()}));
      }
      steps.push_back({{"kind", "givens"},
                       {"indices", json::array({joint_index_json(t.first), joint_index_json(t.second)})},
                       {"u2", u2}});
    }
  }
  json out = {{"method", std::string(to_string(seq.method))},
              {"error_bound", seq.error_bound},
              {"error_bound_heuristic", seq.error_bound_heuristic},
              {"steps", steps}};
  if (seq.trotter_m) out["trotter_m"] = *seq.trotter_m;
  return out;
}

GateSequence gate_sequence_from_json(const json& j) {
  GateSequence seq;
  seq.method = method_from_string(require(j, "method", "gate sequence").get<std::string>());
  if (j.contains("error_bound")) seq.error_bound = as_number(j.at("error_bound"), "error_bound");
  if (j.contains("error_bound_heuristic")) seq.error_bound_heuristic = j.at("error_bound_heuristic").get<bool>();
  if (j.contains("trotter_m")) seq.trotter_m = j.at("trotter_m").get<int>();
  const json& steps = require(j, "steps", "gate sequence");
  if (!steps.is_array()) throw ParseError("gate sequence: \"steps\" must be an array");
  for (const auto& s : steps) {
    const std::string kind = require(s, "kind", "gate step").get<std::string>();
    const json& idx = require(s, "indices", "gate step");
    if (!idx.is_array() || idx.empty() || idx.size() > 2) {
      throw ParseError("gate step: \"indices\" must hold one or two joint indices");
    }
    const JointIndex a = joint_index(idx[0]);
    const JointIndex b = idx.size() == 2 ? joint_index(idx[1]) : a;
    if (kind == "givens") {
      const json& u2 = require(s, "u2", "givens step");
      if (!u2.is_array() || u2.size() != 4) throw ParseError("givens step: \"u2\" must hold four [re, im] pairs");
      Matrix2 u;
      for (int k = 0; k < 4; ++k) {
        const json& z = u2[static_cast<std::size_t>(k)];
        if (!z.is_array() || z.size() != 2) throw ParseError("givens step: entries must be [re, im] pairs");
        u(k / 2, k % 2) = Complex(as_number(z[0], "u2"), as_number(z[1], "u2"));
      }
      seq.steps.emplace_back(TwoLevelGate{a, b, u});
    } else {
      const double e = s.contains("block_energy") ? as_number(s.at("block_energy"), "block_energy") : 0.0;
      seq.steps.emplace_back(
          GeneratorGate{{generator_kind_from_string(kind), e, a, b}, as_number(require(s, "param", "gate step"), "param")});
    }
  }
  return seq;
}

}  // namespace thermoforge::io
