#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "app.hpp"

namespace mdm::test {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

inline CliRun run_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  CliRun r;
  r.code = app::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

/// Scratch directory holding the graph and reference fixtures used by the
/// command matrix.
inline std::filesystem::path cli_fixtures() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "mdm_cli_fixtures";
  fs::create_directories(dir);
  std::ofstream(dir / "k4.json") << R"({"n":4,"edges":[[0,1],[0,2],[0,3],[1,2],[1,3],[2,3]]})";
  std::ofstream(dir / "k2_imitative.json") << R"({"n":2,"edges":[[0,1,1]],"j":[[0,1,0.6931471805599453]]})";
  std::ofstream(dir / "c5.txt") << "# five-cycle\n5\n0 1\n1 2\n2 3\n3 4\n4 0 0.5\n";
  if (!fs::exists(dir / "reference.json")) {
    std::ostringstream o, e;
    app::run({"meanfield", "critical", "--out", (dir / "reference.json").string()}, o, e);
  }
  return dir;
}

/// One invocation per subcommand and action, sized to finish in seconds.
inline std::vector<std::vector<std::string>> cli_matrix() {
  const std::string d = cli_fixtures().string() + "/";
  return {
      {"exact", "--graph", d + "k4.json", "--method", "both"},
      {"exact", "--graph", d + "k2_imitative.json", "--method", "both"},
      {"exact", "--graph", d + "c5.txt"},
      {"gaussian", "--graph", d + "k4.json", "--samples", "20000", "--vertex", "0"},
      {"zeros", "--graph", d + "c5.txt", "--vertex", "2"},
      {"zeros", "--random", "10", "--nmax", "8"},
      {"meanfield", "analyze", "--h", "0", "--J", "0.5"},
      {"meanfield", "gamma", "--jmin", "1.5", "--jmax", "3", "--steps", "4"},
      {"meanfield", "critical"},
      {"meanfield", "exponents", "--direction", "tangent", "--steps", "6"},
      {"fluct", "pmf", "--N", "50", "--h", "0.1", "--J", "0.3"},
      {"fluct", "clt", "--N", "2000"},
      {"fluct", "critical", "--Ns", "1e3,4e3", "--reference", d + "reference.json"},
      {"fluct", "lln", "--N", "2000", "--eps", "0.05"},
      {"fluct", "mixture", "--N", "5000", "--J", "3"},
      {"fluct", "laplace", "--N", "1000"},
      {"er", "density", "--K", "2000", "--r", "6"},
      {"er", "pressure", "--K", "2000", "--r", "4"},
      {"er", "oracle", "--N", "8", "--samples", "20"},
      {"er", "gap", "--K", "2000", "--x", "2"},
      {"er", "density", "--preset", "fig2", "--K", "2000"},
      {"rf", "solve", "--dist", "twopoint:1,2,0.5"},
      {"rf", "quadrature", "--N", "50", "--dist", "lognormal:0,0.5"},
      {"selfavg", "--Ns", "10,20", "--reps", "30"},
  };
}

}  // namespace mdm::test
