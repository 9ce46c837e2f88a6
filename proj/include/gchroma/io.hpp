#pragma once

// JSON shapes:
//   block graphon   {"masses":[...], "P":[[...]]}
//   grid graphon    {"kind":"grid", "values":[[...]]}
//   decomposition   {"parts":[{"alpha":a, "weights":[...]}]}

#include <json.hpp>
#include <string>
#include <variant>

#include "gchroma/graphon.hpp"

namespace gchroma::io {

using json = nlohmann::json;

/// Rounds to 12 significant digits (the precision of every number we print).
double r12(double v);
json r12(const Vec& v);

/// Parses text, reporting syntax errors as "line L, column C: ...".
json parse_text(const std::string& text, const std::string& origin);
json read_json_file(const std::string& path);

json to_json(const BlockGraphon& W);
json to_json(const Decomposition& d);
json to_json(const GeneralGraphon& W);

BlockGraphon block_graphon_from_json(const json& j);
GeneralGraphon grid_graphon_from_json(const json& j);
Decomposition decomposition_from_json(const json& j);
/// Rows of a k x k matrix (used for --qmatrix).
std::vector<Vec> matrix_from_json(const json& j);

using AnyGraphon = std::variant<BlockGraphon, GeneralGraphon>;

/// A builtin name ("figure-block", "W_L", "W_R", "constant:p") or a JSON file path.
AnyGraphon load_graphon(const std::string& spec);

/// Block form of a graphon. Graphons without one (W_L) need `blocks` > 0 and
/// are replaced by their upper block approximation with that many blocks.
BlockGraphon require_block(const AnyGraphon& g, std::size_t blocks = 0);

}  // namespace gchroma::io
