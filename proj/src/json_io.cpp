#include "stoptime/json_io.hpp"

#include <cmath>
#include <fstream>

#include "stoptime/errors.hpp"

namespace stoptime {

namespace {

using nlohmann::json;

int depth_from(const json& j) {
  if (!j.contains("depth") || !j["depth"].is_number_integer()) {
    throw UnsupportedError("payload needs an integer \"depth\" field");
  }
  int depth = j["depth"].get<int>();
  if (depth < 0 || depth > 16) {
    throw UnsupportedError("depth out of range [0, 16]: " + std::to_string(depth));
  }
  return depth;
}

json p_to_json(double p) {
  if (std::isinf(p)) return json("inf");
  return json(p);
}

double p_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
    throw UnsupportedError("unknown exponent string: " + j.get<std::string>());
  }
  if (!j.is_number()) throw UnsupportedError("exponent must be a number or \"inf\"");
  return j.get<double>();
}

}  // namespace

nlohmann::json coeff_to_json(const CoeffVector& x) {
  json entries = json::object();
  Truncation trunc = x.truncation();
  for (std::size_t i = 0; i < x.entries.size(); ++i) {
    if (x.entries[i] != 0.0) entries[trunc.node_at(i).to_string()] = x.entries[i];
  }
  return json{{"depth", x.depth}, {"entries", entries}};
}

CoeffVector coeff_from_json(const nlohmann::json& j) {
  CoeffVector x(depth_from(j));
  if (!j.contains("entries") || !j["entries"].is_object()) {
    throw UnsupportedError("coefficient vector needs an \"entries\" object");
  }
  for (const auto& [key, value] : j["entries"].items()) {
    Node t = Node::from_string(key);
    if (!x.truncation().contains(t)) {
      throw UnsupportedError("entry key outside the truncation: \"" + key + "\"");
    }
    if (!value.is_number()) throw UnsupportedError("entry values must be numbers");
    x.set(t, value.get<double>());
  }
  return x;
}

nlohmann::json base_norm_to_json(const BaseNorm& base) {
  if (base.is_lp()) return json{{"kind", "lp"}, {"p", p_to_json(base.p())}};
  return json{{"kind", "custom"}, {"name", base.name()}};
}

BaseNorm base_norm_from_json(const nlohmann::json& j) {
  if (!j.contains("kind")) throw UnsupportedError("base norm needs a \"kind\"");
  std::string kind = j["kind"].get<std::string>();
  if (kind == "lp") return BaseNorm::lp(p_from_json(j.at("p")));
  if (kind == "custom") {
    throw UnsupportedError("custom base norms are construction-time objects and cannot be parsed");
  }
  throw UnsupportedError("unknown base norm kind: " + kind);
}

nlohmann::json space_tag_to_json(const SpaceTag& tag) {
  switch (tag.family) {
    case SpaceTag::Family::S:
      return json{{"family", "S"}, {"base", base_norm_to_json(tag.base)}};
    case SpaceTag::Family::B:
      return json{{"family", "B"}, {"base", base_norm_to_json(tag.base)}};
    case SpaceTag::Family::D:
      return json{{"family", "D"}, {"base", base_norm_to_json(tag.base)}};
    case SpaceTag::Family::LpSum:
      return json{{"family", "lpsum"}, {"p", p_to_json(tag.sum_p)}, {"inner", space_tag_to_json(*tag.inner)}};
  }
  throw UnsupportedError("unknown space tag");
}

SpaceTag space_tag_from_json(const nlohmann::json& j) {
  std::string family = j.at("family").get<std::string>();
  if (family == "S") return SpaceTag::S(base_norm_from_json(j.at("base")));
  if (family == "B") return SpaceTag::B(base_norm_from_json(j.at("base")));
  if (family == "D") return SpaceTag::D(base_norm_from_json(j.at("base")));
  if (family == "lpsum") {
    return SpaceTag::lp_sum(p_from_json(j.at("p")), space_tag_from_json(j.at("inner")));
  }
  throw UnsupportedError("unknown space family: " + family);
}

nlohmann::json operator_to_json(const OperatorMatrix& m) {
  json rows = json::array();
  const std::size_t n = m.dim();
  for (std::size_t i = 0; i < n; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < n; ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"depth", m.depth}, {"space", space_tag_to_json(m.space)}, {"rows", rows}};
}

OperatorMatrix operator_from_json(const nlohmann::json& j) {
  OperatorMatrix m(depth_from(j), space_tag_from_json(j.at("space")));
  const auto& rows = j.at("rows");
  const std::size_t n = m.dim();
  if (!rows.is_array() || rows.size() != n) {
    throw UnsupportedError("operator needs " + std::to_string(n) + " rows");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!rows[i].is_array() || rows[i].size() != n) {
      throw UnsupportedError("operator row " + std::to_string(i) + " needs " + std::to_string(n) +
                             " entries");
    }
    for (std::size_t c = 0; c < n; ++c) {
      if (!rows[i][c].is_number()) throw UnsupportedError("operator entries must be numbers");
      m.at(i, c) = rows[i][c].get<double>();
    }
  }
  return m;
}

nlohmann::json coloring_to_json(const Coloring& c) {
  json entries = json::object();
  Truncation trunc = c.truncation();
  for (std::size_t i = 0; i < c.colors.size(); ++i) {
    entries[trunc.node_at(i).to_string()] = static_cast<int>(c.colors[i]);
  }
  return json{{"depth", c.depth}, {"entries", entries}};
}

Coloring coloring_from_json(const nlohmann::json& j) {
  Coloring c(depth_from(j));
  const auto& entries = j.at("entries");
  if (entries.size() != c.colors.size()) {
    throw UnsupportedError("coloring must assign every node of the truncation");
  }
  for (const auto& [key, value] : entries.items()) {
    Node t = Node::from_string(key);
    if (!c.truncation().contains(t)) throw UnsupportedError("coloring key outside the truncation");
    int color = value.get<int>();
    if (color != 1 && color != 2) throw UnsupportedError("colors must be 1 or 2");
    c.set(t, color);
  }
  return c;
}

nlohmann::json embedding_to_json(const SubtreeEmbedding& e) {
  json map = json::object();
  for (const Node& t : Truncation(e.source_depth).nodes()) {
    map[t.to_string()] = e.map(t).to_string();
  }
  return json{{"source_depth", e.source_depth}, {"map", map}};
}

SubtreeEmbedding embedding_from_json(const nlohmann::json& j) {
  SubtreeEmbedding e;
  e.source_depth = j.at("source_depth").get<int>();
  if (e.source_depth < 0 || e.source_depth > 16) throw UnsupportedError("source depth out of range");
  e.images.resize(Truncation(e.source_depth).node_count());
  const auto& map = j.at("map");
  if (map.size() != e.images.size()) throw UnsupportedError("embedding map must cover the source");
  for (const auto& [key, value] : map.items()) {
    Node t = Node::from_string(key);
    e.images[static_cast<std::size_t>(order_index(t) - 1)] = Node::from_string(value.get<std::string>());
  }
  return e;
}

nlohmann::json transcript_to_json(const GameTranscript& tr) {
  json turns = json::array();
  for (const GameTurn& turn : tr.turns) {
    json vs = json::array(), fs = json::array(), nodes = json::array();
    for (const auto& v : turn.adversary.primal_functionals) vs.push_back(coeff_to_json(v));
    for (const auto& f : turn.adversary.dual_vectors) fs.push_back(coeff_to_json(f));
    for (const Node& s : turn.response.nodes) nodes.push_back(s.to_string());
    turns.push_back(json{{"source", turn.source.to_string()},
                         {"eta", turn.adversary.eta},
                         {"primal_functionals", vs},
                         {"dual_vectors", fs},
                         {"nodes", nodes},
                         {"lambda", turn.response.lambda},
                         {"mu", turn.response.mu},
                         {"signs", turn.signs},
                         {"success", turn.success},
                         {"dist_primal", turn.dist_primal},
                         {"dist_dual", turn.dist_dual}});
  }
  return json{{"host_depth", tr.host_depth},
              {"play_depth", tr.play_depth},
              {"space", space_tag_to_json(tr.space)},
              {"turns", turns}};
}

GameTranscript transcript_from_json(const nlohmann::json& j) {
  GameTranscript tr;
  tr.host_depth = j.at("host_depth").get<int>();
  tr.play_depth = j.at("play_depth").get<int>();
  if (tr.host_depth < 0 || tr.host_depth > 16 || tr.play_depth < 0 || tr.play_depth > tr.host_depth) {
    throw UnsupportedError("transcript depths out of range");
  }
  tr.space = space_tag_from_json(j.at("space"));
  for (const auto& jt : j.at("turns")) {
    GameTurn turn;
    turn.source = Node::from_string(jt.at("source").get<std::string>());
    turn.adversary.eta = jt.at("eta").get<double>();
    for (const auto& v : jt.at("primal_functionals")) {
      turn.adversary.primal_functionals.push_back(coeff_from_json(v));
    }
    for (const auto& f : jt.at("dual_vectors")) turn.adversary.dual_vectors.push_back(coeff_from_json(f));
    for (const auto& s : jt.at("nodes")) turn.response.nodes.push_back(Node::from_string(s.get<std::string>()));
    turn.response.lambda = jt.at("lambda").get<std::vector<double>>();
    turn.response.mu = jt.at("mu").get<std::vector<double>>();
    turn.signs = jt.at("signs").get<std::vector<int>>();
    turn.success = jt.at("success").get<bool>();
    turn.dist_primal = jt.at("dist_primal").get<double>();
    turn.dist_dual = jt.at("dist_dual").get<double>();
    tr.turns.push_back(std::move(turn));
  }
  return tr;
}

nlohmann::json certificate_to_json(const FactorisationCertificate& cert) {
  json log = json::array();
  for (const auto& entry : cert.selection_log) {
    log.push_back(json{{"source", entry.source.to_string()},
                       {"chosen", entry.chosen.to_string()},
                       {"pick_target", entry.pick_target},
                       {"pick_achieved_max", entry.pick_achieved_max},
                       {"coupling_sum", entry.coupling_sum},
                       {"pick_met", entry.pick_met},
                       {"splice_target", entry.splice_target},
                       {"splice_achieved", entry.splice_achieved},
                       {"splice_met", entry.splice_met},
                       {"splice_exact", entry.splice_exact}});
  }
  return json{{"a", operator_to_json(cert.a)},
              {"b", operator_to_json(cert.b)},
              {"residual", cert.residual},
              {"residual_exact", cert.residual_exact},
              {"norm_product_bound", cert.norm_product_bound},
              {"norm_bound_exact", cert.norm_bound_exact},
              {"delta", cert.delta},
              {"delta_selected", cert.delta_selected},
              {"eta", cert.eta},
              {"eta0", cert.eta0},
              {"rho", cert.rho},
              {"rho_exact", cert.rho_exact},
              {"neumann_ok", cert.neumann_ok},
              {"neumann_violated", cert.neumann_violated},
              {"invertible", cert.invertible},
              {"output_depth", cert.output_depth},
              {"requested_output_depth", cert.requested_output_depth},
              {"truncation_exhausted", cert.truncation_exhausted},
              {"diagonal_signs", cert.diagonal_signs},
              {"embedding", embedding_to_json(cert.embedding)},
              {"selection_log", log}};
}

BaseNorm base_norm_from_cli(const std::string& text) {
  if (text.rfind("lp:", 0) != 0) {
    throw UnsupportedError("base must look like lp:1, lp:2, lp:inf; got: " + text);
  }
  std::string arg = text.substr(3);
  if (arg == "inf") return BaseNorm::lp(std::numeric_limits<double>::infinity());
  try {
    return BaseNorm::lp(std::stod(arg));
  } catch (const PreconditionError&) {
    throw;
  } catch (...) {
    throw UnsupportedError("could not parse exponent: " + arg);
  }
}

nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnsupportedError("cannot open file: " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UnsupportedError("malformed JSON in " + path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw UnsupportedError("cannot write file: " + path);
  out << j.dump(2) << "\n";
}

}  // namespace stoptime
