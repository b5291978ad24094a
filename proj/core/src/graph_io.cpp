#include "mdm/graph_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mdm/error.hpp"

namespace mdm {

ImitativeModel ModelFile::imitative_model() const {
  if (couplings.empty()) return ImitativeModel(model, std::vector<double>(model.graph().num_edges(), 0.0));
  return ImitativeModel(model, couplings);
}

ModelFile read_edge_list(std::istream& in, double x) {
  std::string line;
  int n = -1;
  std::vector<Edge> edges;
  std::vector<double> w;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    std::istringstream fs(first);
    if (n < 0) {
      if (!(fs >> n) || n < 0) throw InvalidInputError("edge list line " + std::to_string(line_no) + ": bad vertex count");
      continue;
    }
    int i = 0, j = 0;
    double weight = 1.0;
    if (!(fs >> i) || !(ls >> j)) throw InvalidInputError("edge list line " + std::to_string(line_no) + ": expected 'i j [w]'");
    if (ls >> weight) {
      std::string extra;
      if (ls >> extra) throw InvalidInputError("edge list line " + std::to_string(line_no) + ": trailing input");
    } else if (!ls.eof()) {
      throw InvalidInputError("edge list line " + std::to_string(line_no) + ": bad weight");
    }
    edges.push_back({std::min(i, j), std::max(i, j)});
    w.push_back(weight);
  }
  if (n < 0) throw InvalidInputError("edge list: missing vertex count");
  Graph g(n, std::move(edges));
  return {MDModel(std::move(g), std::move(w), std::vector<double>(static_cast<std::size_t>(n), x)), {}};
}

ModelFile parse_model_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("model json: ") + e.what());
  }
  if (!doc.is_object()) throw InvalidInputError("model json: top level must be an object");
  for (const auto& [key, _] : doc.items()) {
    if (key != "n" && key != "edges" && key != "x" && key != "j")
      throw InvalidInputError("model json: unknown key '" + key + "'");
  }
  try {
    const int n = doc.at("n").get<int>();
    if (n < 0) throw InvalidInputError("model json: n must be >= 0");
    std::vector<Edge> edges;
    std::vector<double> w;
    for (const auto& e : doc.value("edges", nlohmann::json::array())) {
      if (!e.is_array() || e.size() < 2 || e.size() > 3) throw InvalidInputError("model json: edges are [i, j] or [i, j, w]");
      const int i = e[0].get<int>(), j = e[1].get<int>();
      edges.push_back({std::min(i, j), std::max(i, j)});
      w.push_back(e.size() == 3 ? e[2].get<double>() : 1.0);
    }
    std::vector<double> x(static_cast<std::size_t>(n), 1.0);
    if (doc.contains("x")) {
      x = doc["x"].get<std::vector<double>>();
      if (x.size() != static_cast<std::size_t>(n)) throw InvalidInputError("model json: x must have n entries");
    }
    Graph g(n, std::move(edges));
    ModelFile out{MDModel(g, std::move(w), std::move(x)), {}};
    if (doc.contains("j")) {
      std::vector<double> j(g.num_edges(), 0.0);
      std::vector<bool> seen(g.num_edges(), false);
      for (const auto& c : doc["j"]) {
        if (!c.is_array() || c.size() != 3) throw InvalidInputError("model json: couplings are [i, j, J]");
        const auto idx = g.edge_index(c[0].get<int>(), c[1].get<int>());
        if (!idx) throw InvalidInputError("model json: coupling on a non-edge");
        if (seen[*idx]) throw InvalidInputError("model json: duplicate coupling");
        seen[*idx] = true;
        j[*idx] = c[2].get<double>();
      }
      for (bool s : seen)
        if (!s) throw InvalidInputError("model json: every edge needs a coupling");
      out.couplings = std::move(j);
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInputError(std::string("model json: ") + e.what());
  }
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInputError("cannot open model file '" + path + "'");
  if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0) {
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_model_json(ss.str());
  }
  return read_edge_list(in);
}

std::string to_json(const ModelFile& file) {
  const Graph& g = file.model.graph();
  nlohmann::json doc;
  doc["n"] = g.num_vertices();
  doc["edges"] = nlohmann::json::array();
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    doc["edges"].push_back({g.edge(e).u, g.edge(e).v, file.model.w(e)});
  const auto x = file.model.monomer_activities();
  doc["x"] = std::vector<double>(x.begin(), x.end());
  if (file.imitative()) {
    doc["j"] = nlohmann::json::array();
    for (std::size_t e = 0; e < g.num_edges(); ++e) doc["j"].push_back({g.edge(e).u, g.edge(e).v, file.couplings[e]});
  }
  return doc.dump();
}

}  // namespace mdm
