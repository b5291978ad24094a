#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mdm/graph.hpp"

namespace mdm {

/// A model read from disk. `couplings` is empty unless the file carried
/// imitation couplings, in which case it holds one value per edge.
struct ModelFile {
  MDModel model;
  std::vector<double> couplings;

  bool imitative() const noexcept { return !couplings.empty(); }
  ImitativeModel imitative_model() const;
};

/// Plain-text edge list: vertex count on the first line, then `i j [w]`
/// per line (w defaults to 1). Blank lines and `#` comments are skipped.
/// All monomer activities are set to `x`.
ModelFile read_edge_list(std::istream& in, double x = 1.0);

/// JSON document {n, edges: [[i,j,w]], x: [...], j: [[i,j,J]]}. `x` and
/// `j` are optional; when `j` is present it must cover every edge exactly once.
ModelFile parse_model_json(const std::string& text);

/// Dispatches on the extension: `.json` is parsed as JSON, anything else as
/// an edge list.
ModelFile load_model(const std::string& path);

std::string to_json(const ModelFile& file);

}  // namespace mdm
