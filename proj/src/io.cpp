#include "gchroma/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gchroma::io {

namespace {

Vec vec_field(const json& j, const char* key) {
  if (!j.contains(key)) throw std::invalid_argument(std::string("missing field '") + key + "'");
  const auto& a = j.at(key);
  if (!a.is_array()) throw std::invalid_argument(std::string("field '") + key + "' must be an array");
  Vec out;
  for (const auto& v : a) {
    if (!v.is_number()) throw std::invalid_argument(std::string("field '") + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* what) {
  for (const auto& [k, v] : j.items()) {
    bool ok = false;
    for (const char* key : keys) ok = ok || k == key;
    if (!ok) throw std::invalid_argument(std::string("unknown key '") + k + "' in " + what);
  }
}

}  // namespace

double r12(double v) {
  if (!std::isfinite(v)) return v;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

json r12(const Vec& v) {
  json a = json::array();
  for (double x : v) a.push_back(r12(x));
  return a;
}

json parse_text(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    std::ostringstream os;
    os << origin << ": line " << line << ", column " << col << ": " << e.what();
    throw std::invalid_argument(os.str());
  }
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_text(ss.str(), path);
}

json to_json(const BlockGraphon& W) {
  json P = json::array();
  for (const auto& r : W.P) P.push_back(r12(r));
  return {{"masses", r12(W.masses)}, {"P", P}};
}

json to_json(const Decomposition& d) {
  json parts = json::array();
  for (const auto& p : d.parts) parts.push_back({{"alpha", r12(p.alpha)}, {"weights", r12(p.measure.weights)}});
  return {{"parts", parts}};
}

json to_json(const GeneralGraphon& W) {
  if (W.grid_size() > 0) {
    json v = json::array();
    for (const auto& r : std::get<GeneralGraphon::Grid>(W.kind).values) v.push_back(r12(r));
    return {{"kind", "grid"}, {"values", v}};
  }
  if (auto b = W.as_block()) return to_json(*b);
  throw std::invalid_argument("graphon has no finite JSON form");
}

std::vector<Vec> matrix_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("matrix must be an array of rows");
  std::vector<Vec> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw std::invalid_argument("matrix rows must be arrays");
    Vec row;
    for (const auto& v : r) {
      if (!v.is_number()) throw std::invalid_argument("matrix entries must be numbers");
      row.push_back(v.get<double>());
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

BlockGraphon block_graphon_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("graphon must be a JSON object");
  reject_unknown(j, {"masses", "P"}, "block graphon");
  BlockGraphon W;
  W.masses = vec_field(j, "masses");
  if (!j.contains("P")) throw std::invalid_argument("missing field 'P'");
  W.P = matrix_from_json(j.at("P"));
  W.validate();
  return W;
}

GeneralGraphon grid_graphon_from_json(const json& j) {
  reject_unknown(j, {"kind", "values"}, "grid graphon");
  if (!j.contains("values")) throw std::invalid_argument("missing field 'values'");
  auto g = GeneralGraphon::grid(matrix_from_json(j.at("values")));
  g.validate();
  return g;
}

Decomposition decomposition_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("decomposition must be a JSON object");
  reject_unknown(j, {"parts"}, "decomposition");
  if (!j.contains("parts") || !j.at("parts").is_array()) throw std::invalid_argument("missing array 'parts'");
  Decomposition d;
  for (const auto& p : j.at("parts")) {
    if (!p.is_object()) throw std::invalid_argument("decomposition parts must be objects");
    reject_unknown(p, {"alpha", "weights"}, "decomposition part");
    if (!p.contains("alpha") || !p.at("alpha").is_number()) throw std::invalid_argument("part needs numeric 'alpha'");
    d.parts.push_back({p.at("alpha").get<double>(), {vec_field(p, "weights")}});
  }
  return d;
}

AnyGraphon load_graphon(const std::string& spec) {
  if (spec == "figure-block" || spec == "W_L" || spec == "W_R" || spec.rfind("constant:", 0) == 0) {
    return GeneralGraphon::from_name(spec);
  }
  const json j = read_json_file(spec);
  if (j.is_object() && j.contains("kind")) {
    if (j.at("kind") != "grid") throw std::invalid_argument("unknown graphon kind in '" + spec + "'");
    return grid_graphon_from_json(j);
  }
  return block_graphon_from_json(j);
}

BlockGraphon require_block(const AnyGraphon& g, std::size_t blocks) {
  if (const auto* b = std::get_if<BlockGraphon>(&g)) return *b;
  const auto& G = std::get<GeneralGraphon>(g);
  if (blocks > 0 && !G.as_block()) return block_upper(G, blocks);
  if (auto b = G.as_block()) return *b;
  throw std::invalid_argument("this graphon is not a block graphon; pass --blocks k to use its k-block upper approximation");
}

}  // namespace gchroma::io
