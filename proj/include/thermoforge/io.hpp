#pragma once

#include <filesystem>
#include <string>
#include <variant>

#include "json.hpp"

#include "thermoforge/compiler.hpp"
#include "thermoforge/thermal_model.hpp"

namespace thermoforge::io {

using nlohmann::json;

/// Parses a JSON file; ParseError messages carry line and column.
json read_json_file(const std::filesystem::path& path);
json parse_json(const std::string& text, const std::string& origin = "<input>");
void write_text_file(const std::filesystem::path& path, const std::string& text);

// {"energies": [...]} or {"levels": [{"energy": e, "deg": g}, ...]}
Spectrum spectrum_from_json(const json& j);
json to_json(const Spectrum& spec);

// {"re": [[...]], "im": [[...]]}; "im" may be omitted for real matrices.
Operator operator_from_json(const json& j);
json operator_to_json(const Operator& m);

/// State file: {"populations": [...]} or a dense {"re", "im"} matrix.
using StateInput = std::variant<DiagonalState, Operator>;
StateInput state_from_json(const json& j);
Operator state_operator(const StateInput& s);

json to_json(const GateSequence& seq);
GateSequence gate_sequence_from_json(const json& j);

}  // namespace thermoforge::io
