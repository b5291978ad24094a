#include "app.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdm/error.hpp"
#include "mdm/fluctuations.hpp"
#include "mdm/gaussian.hpp"
#include "mdm/graph_io.hpp"
#include "mdm/matching_polynomial.hpp"
#include "mdm/meanfield.hpp"
#include "mdm/partition.hpp"
#include "mdm/quenched.hpp"
#include "mdm/reference_values.hpp"
#include "mdm/rng.hpp"
#include "mdm/version.hpp"

namespace mdm::app {

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Type { integer, real, text, list };

struct Param {
  std::string name;
  Type type;
  json def;
  std::string help;
};

struct Command {
  std::string name;
  std::string help;
  std::vector<std::string> actions;  // empty: no positional action
  std::vector<Param> params;
};

const std::vector<Command>& commands() {
  static const std::vector<Command> table = {
      {"exact", "exact partition function of a graph file", {},
       {{"graph", Type::text, "", "model file (.json or edge list)"},
        {"method", Type::text, "hl", "enum | hl | both"},
        {"cap", Type::integer, kDefaultRecursionCap, "vertex cap for the exact routines"}}},
      {"gaussian", "Gaussian-representation estimates of Z and monomer probabilities", {},
       {{"graph", Type::text, "", "model file"},
        {"samples", Type::integer, 100000, "Monte Carlo samples"},
        {"vertex", Type::integer, -1, "vertex for the monomer probability (-1: none)"}}},
      {"zeros", "matching-polynomial zeros: imaginary-axis and interlacing certificates", {},
       {{"graph", Type::text, "", "model file (weights used, activities ignored)"},
        {"random", Type::integer, 0, "number of random weighted graphs"},
        {"nmax", Type::integer, 10, "largest random graph"},
        {"vertex", Type::integer, 0, "deleted vertex for interlacing"},
        {"tol", Type::real, 1e-8, "certification tolerance"}}},
      {"meanfield", "mean-field pressure, phase diagram and critical exponents",
       {"analyze", "gamma", "critical", "exponents"},
       {{"h", Type::real, 0.0, "monomer field"},
        {"J", Type::real, 0.0, "imitation coupling"},
        {"jmin", Type::real, 1.5, "first J of the coexistence sweep"},
        {"jmax", Type::real, 5.0, "last J of the coexistence sweep"},
        {"steps", Type::integer, 16, "sweep points / exponent offsets"},
        {"direction", Type::text, "all", "tangent | nontangent_j | fixed_j | all"}}},
      {"fluct", "exact finite-N monomer distribution on the complete graph",
       {"pmf", "clt", "critical", "lln", "mixture", "laplace"},
       {{"N", Type::integer, 1000, "system size"},
        {"h", Type::real, 0.0, "monomer field"},
        {"J", Type::real, 0.0, "imitation coupling"},
        {"Ns", Type::list, json::array({1e4, 1e5, 1e6}), "system sizes for the critical sweep"},
        {"eps", Type::real, 0.05, "LLN ball radius"},
        {"reference", Type::text, "", "reference-values file from `meanfield critical`"}}},
      {"er", "Erdos-Renyi cavity population dynamics and brute-force oracle",
       {"density", "pressure", "oracle", "gap"},
       {{"c", Type::real, 2.0, "mean degree"},
        {"x", Type::real, 1.0, "monomer activity"},
        {"r", Type::integer, 6, "population iterations"},
        {"K", Type::integer, 100000, "population size"},
        {"preset", Type::text, "", "fig2: c=2, r=6, K=10000 unless given"},
        {"N", Type::integer, 14, "oracle graph size"},
        {"samples", Type::integer, 500, "oracle graph samples"}}},
      {"rf", "random-field model: variational solution and quadrature partition function", {"solve", "quadrature"},
       {{"w", Type::real, 1.0, "dimer weight (edges carry w/N)"},
        {"dist", Type::text, "degenerate:1.0", "activity distribution"},
        {"N", Type::integer, 100, "system size for quadrature"}}},
      {"selfavg", "self-averaging experiment for the random-field pressure", {},
       {{"dist", Type::text, "lognormal:0.0,0.5", "activity distribution"},
        {"w", Type::real, 1.0, "dimer weight"},
        {"Ns", Type::list, json::array({50, 100, 200, 400}), "ascending system sizes"},
        {"reps", Type::integer, 30, "replicas per size"}}},
  };
  return table;
}

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw UsageError(what + ": '" + text + "' is not a number");
  return v;
}

json integral(double v, const std::string& what) {
  if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 9.0e15) throw UsageError(what + ": expected an integer");
  return static_cast<std::int64_t>(v);
}

json from_text(const Param& p, const std::string& text) {
  const std::string what = "--" + p.name;
  switch (p.type) {
    case Type::integer: return integral(parse_number(text, what), what);
    case Type::real: return parse_number(text, what);
    case Type::text: return text;
    case Type::list: {
      json arr = json::array();
      std::stringstream ss(text);
      std::string tok;
      while (std::getline(ss, tok, ',')) arr.push_back(parse_number(tok, what));
      if (arr.empty()) throw UsageError(what + ": empty list");
      return arr;
    }
  }
  return nullptr;
}

json from_config(const Param& p, const json& v, const std::string& where) {
  const std::string what = where + "." + p.name;
  switch (p.type) {
    case Type::integer:
      if (!v.is_number()) throw UsageError(what + ": expected an integer");
      return integral(v.get<double>(), what);
    case Type::real:
      if (!v.is_number()) throw UsageError(what + ": expected a number");
      return v.get<double>();
    case Type::text:
      if (!v.is_string()) throw UsageError(what + ": expected a string");
      return v;
    case Type::list: {
      if (!v.is_array() || v.empty()) throw UsageError(what + ": expected a non-empty array of numbers");
      json arr = json::array();
      for (const auto& e : v) {
        if (!e.is_number()) throw UsageError(what + ": expected a non-empty array of numbers");
        arr.push_back(e.get<double>());
      }
      return arr;
    }
  }
  return nullptr;
}

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<ojson>> rows;
};

struct Result {
  ojson scalars = ojson::object();
  std::optional<Table> table;
  std::optional<ojson> document;  // replaces the standard JSON layout
};

struct Context {
  json params;
  std::uint64_t seed = 0;
  int threads = 1;
  std::ostream* err = nullptr;
  std::set<std::string> given;  // parameters set explicitly (file or flag)
};

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string cell(const ojson& v) {
  if (v.is_number_float()) return fmt(v.get<double>());
  if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
  if (v.is_number_unsigned()) return std::to_string(v.get<std::uint64_t>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : " ") + cell(e);
    return s;
  }
  return v.dump();
}

ojson number(double v) {
  if (std::isfinite(v)) return v;
  return fmt(v);
}

ojson numbers(const std::vector<double>& v) {
  ojson a = ojson::array();
  for (double d : v) a.push_back(number(d));
  return a;
}

double p_real(const Context& c, const char* k) { return c.params.at(k).get<double>(); }
std::int64_t p_int(const Context& c, const char* k) { return c.params.at(k).get<std::int64_t>(); }
std::string p_text(const Context& c, const char* k) { return c.params.at(k).get<std::string>(); }
std::vector<double> p_list(const Context& c, const char* k) { return c.params.at(k).get<std::vector<double>>(); }

int to_int(std::int64_t v, const char* what) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
    throw InvalidInputError(std::string(what) + " is out of range");
  return static_cast<int>(v);
}

ModelFile require_model(const Context& c) {
  const std::string path = p_text(c, "graph");
  if (path.empty()) throw UsageError("--graph is required");
  return load_model(path);
}

// ---- exact ----------------------------------------------------------------

Result run_exact(const Context& c) {
  const ModelFile f = require_model(c);
  const std::string method = p_text(c, "method");
  if (method != "enum" && method != "hl" && method != "both") throw UsageError("--method must be enum, hl or both");
  const int cap = to_int(p_int(c, "cap"), "cap");
  const Graph& g = f.model.graph();
  Result r;
  r.scalars["n"] = g.num_vertices();
  r.scalars["edges"] = g.num_edges();
  r.scalars["imitative"] = f.imitative();
  double log_z = 0.0;
  if (f.imitative()) {
    const ImitativeModel im = f.imitative_model();
    if (method != "hl") r.scalars["log_z_enum"] = log_z = log_imitative_partition_enum(im, cap);
    if (method != "enum") r.scalars["log_z_hl"] = log_z = log_imitative_partition_hl(im, cap);
  } else {
    if (method != "hl") r.scalars["log_z_enum"] = log_z = log_partition_enum(f.model, cap);
    if (method != "enum") {
      HeilmannLieb hl(f.model, cap);
      r.scalars["log_z_hl"] = log_z = hl.log_partition();
      Table t{{"vertex", "monomer_probability"}, {}};
      for (Vertex v = 0; v < g.num_vertices(); ++v) t.rows.push_back({v, number(hl.monomer_probability(v))});
      r.table = std::move(t);
    }
    const PressureBounds b = pressure_bounds(f.model);
    r.scalars["bound_lower"] = number(b.lower);
    r.scalars["bound_upper"] = number(b.upper);
  }
  if (method == "both") {
    const double a = r.scalars["log_z_enum"].get<double>(), b = r.scalars["log_z_hl"].get<double>();
    r.scalars["relative_difference"] = number(std::abs(std::expm1(a - b)));
  }
  r.scalars["log_z"] = number(log_z);
  r.scalars["z"] = number(std::exp(log_z));
  return r;
}

// ---- gaussian -------------------------------------------------------------

Result run_gaussian(const Context& c) {
  const ModelFile f = require_model(c);
  McOptions opts;
  opts.samples = static_cast<std::uint64_t>(std::max<std::int64_t>(0, p_int(c, "samples")));
  opts.seed = c.seed;
  opts.threads = c.threads;
  Result r;
  const double log_z = log_gaussian_partition_exact(f.model);
  const McEstimate z = gaussian_partition_mc(f.model, opts);
  r.scalars["z_exact"] = number(std::exp(log_z));
  r.scalars["z_mc"] = number(z.estimate);
  r.scalars["z_mc_std_error"] = number(z.std_error);
  r.scalars["z_score"] = number(z.std_error > 0 ? (z.estimate - std::exp(log_z)) / z.std_error : 0.0);
  r.scalars["samples"] = z.samples;
  const auto v = p_int(c, "vertex");
  if (v >= 0) {
    const Vertex i = to_int(v, "vertex");
    const McEstimate m = monomer_prob_gaussian(f.model, i, opts);
    const double exact = monomer_probability(f.model, i);
    r.scalars["vertex"] = i;
    r.scalars["monomer_probability_exact"] = number(exact);
    r.scalars["monomer_probability_mc"] = number(m.estimate);
    r.scalars["monomer_probability_std_error"] = number(m.std_error);
  }
  return r;
}

// ---- zeros ----------------------------------------------------------------

Result run_zeros(const Context& c) {
  const double tol = p_real(c, "tol");
  const auto count = p_int(c, "random");
  const int nmax = to_int(p_int(c, "nmax"), "nmax");
  const auto vertex = p_int(c, "vertex");
  std::vector<std::pair<std::string, MDModel>> corpus;
  if (!p_text(c, "graph").empty()) corpus.emplace_back(p_text(c, "graph"), require_model(c).model);
  if (count > 0 && nmax < 2) throw UsageError("--nmax must be >= 2");
  for (std::int64_t k = 0; k < count; ++k) {
    Engine eng = make_engine(c.seed, static_cast<std::uint64_t>(k));
    const int n = 2 + static_cast<int>(uniform01(eng) * (nmax - 1));
    std::vector<Edge> edges;
    std::vector<double> w;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (uniform01(eng) < 0.5) {
          edges.push_back({i, j});
          w.push_back(2.0 * (1.0 - uniform01(eng)));
        }
    corpus.emplace_back("random-" + std::to_string(k),
                        MDModel(Graph(n, std::move(edges)), std::move(w), std::vector<double>(static_cast<std::size_t>(n), 1.0)));
  }
  if (corpus.empty()) throw UsageError("give --graph or --random");
  Result r;
  Table t{{"id", "n", "edges", "max_abs_real", "min_interlacing_gap", "imaginary_pass", "interlacing_weak",
           "interlacing_strict"},
          {}};
  bool all = true;
  for (const auto& [id, m] : corpus) {
    const Graph& g = m.graph();
    const ImaginaryReport im = certify_imaginary(g, m.dimer_weights(), tol);
    const Vertex i = static_cast<Vertex>(std::min<std::int64_t>(vertex, g.num_vertices() - 1));
    const InterlacingReport il = certify_interlacing(g, m.dimer_weights(), i, tol);
    all = all && im.pass && il.weak;
    t.rows.push_back({id, g.num_vertices(), g.num_edges(), number(im.max_abs_real), number(il.min_gap), im.pass, il.weak,
                      il.strict});
  }
  r.scalars["graphs"] = corpus.size();
  r.scalars["all_pass"] = all;
  r.table = std::move(t);
  return r;
}

// ---- meanfield ------------------------------------------------------------

Result run_meanfield(const Context& c, const std::string& action) {
  Result r;
  if (action == "analyze") {
    const PsiAnalysis a = analyze(p_real(c, "h"), p_real(c, "J"));
    r.scalars["h"] = a.h;
    r.scalars["J"] = a.J;
    r.scalars["classification"] = to_string(a.classification);
    r.scalars["roots"] = numbers(a.roots);
    Table t{{"m", "psi", "lambda2", "lambda4"}, {}};
    for (std::size_t k = 0; k < a.maximizers.size(); ++k)
      t.rows.push_back({number(a.maximizers[k]), number(a.values[k]), number(a.lambda2[k]), number(a.lambda4[k])});
    r.table = std::move(t);
  } else if (action == "gamma") {
    const double jmin = p_real(c, "jmin"), jmax = p_real(c, "jmax");
    const int steps = to_int(p_int(c, "steps"), "steps");
    if (steps < 1 || !(jmax >= jmin)) throw UsageError("need steps >= 1 and jmax >= jmin");
    Table t{{"J", "gamma", "m1", "m2", "rho1", "rho2"}, {}};
    for (int k = 0; k < steps; ++k) {
      const double J = steps == 1 ? jmin : jmin + (jmax - jmin) * k / (steps - 1);
      const CoexistencePoint p = coexistence(J);
      const MixtureWeights w = mixture_weights(p);
      t.rows.push_back({number(J), number(p.h), number(p.m1), number(p.m2), number(w.rho1), number(w.rho2)});
    }
    r.table = std::move(t);
  } else if (action == "critical") {
    const ReferenceValues ref = make_reference_values();
    r.document = ojson::parse(to_json(ref));
    for (const auto& [k, v] : r.document->items()) r.scalars[k] = v;
  } else {
    const std::string dir = p_text(c, "direction");
    std::vector<ExponentDirection> dirs;
    if (dir == "all") dirs = {ExponentDirection::tangent, ExponentDirection::nontangent_j, ExponentDirection::fixed_j};
    else dirs = {parse_direction(dir)};
    const int steps = to_int(p_int(c, "steps"), "steps");
    Table t{{"direction", "exponent", "expected", "residual", "flagged"}, {}};
    for (auto d : dirs) {
      const ExponentFit fit = critical_exponents(d, steps);
      if (d != ExponentDirection::fixed_j) r.scalars["gamma_slope"] = number(fit.gamma_slope);
      t.rows.push_back({to_string(d), number(fit.exponent), number(d == ExponentDirection::tangent ? 0.5 : 1.0 / 3.0),
                        number(fit.residual), fit.flagged});
      if (fit.flagged) *c.err << "mdm: warning: " << to_string(d) << " fit residual " << fmt(fit.residual) << " exceeds 0.05\n";
    }
    r.table = std::move(t);
  }
  return r;
}

// ---- fluct ----------------------------------------------------------------

std::int64_t size_param(double v) {
  if (!(v >= 1.0) || v != std::floor(v)) throw InvalidInputError("system sizes must be positive integers");
  return static_cast<std::int64_t>(v);
}

Result run_fluct(const Context& c, const std::string& action) {
  const std::int64_t N = p_int(c, "N");
  const double h = p_real(c, "h"), J = p_real(c, "J");
  Result r;
  if (action == "pmf") {
    const FiniteNPmf pmf = exact_pmf(N, h, J);
    const auto p = pmf.probabilities();
    r.scalars["log_z"] = number(pmf.log_z());
    r.scalars["pressure"] = number(pmf.log_z() / static_cast<double>(N));
    r.scalars["mean_density"] = number(pmf.mean_density());
    Table t{{"M", "density", "probability"}, {}};
    for (std::size_t k = 0; k < p.size(); ++k)
      t.rows.push_back({pmf.monomers(k), number(static_cast<double>(pmf.monomers(k)) / static_cast<double>(N)), number(p[k])});
    r.table = std::move(t);
  } else if (action == "clt") {
    const CltReport rep = clt_check(N, h, J);
    r.scalars["m_star"] = number(rep.m_star);
    r.scalars["sigma2"] = number(rep.sigma2);
    r.scalars["distance"] = number(rep.ks.distance);
    r.scalars["location"] = number(rep.ks.location);
    const FiniteNPmf pmf = exact_pmf(N, h, J);
    const auto p = pmf.probabilities();
    const double sd = std::sqrt(rep.sigma2), root_n = std::sqrt(static_cast<double>(N));
    Table t{{"x", "empirical_cdf", "limit_cdf"}, {}};
    double cdf = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      cdf += p[k];
      const double x = (static_cast<double>(pmf.monomers(k)) - static_cast<double>(N) * rep.m_star) / root_n;
      if (std::abs(x) <= 6.0 * sd) t.rows.push_back({number(x), number(cdf), number(0.5 * std::erfc(-x / sd / std::sqrt(2.0)))});
    }
    r.table = std::move(t);
  } else if (action == "critical") {
    const std::string path = p_text(c, "reference");
    if (path.empty())
      throw InvalidInputError("fluct critical needs --reference; generate the file with `mdm meanfield critical --out ref.json`");
    const ReferenceValues ref = load_reference_values(path);
    Table t{{"N", "quartic_distance", "gaussian_distance", "gaussian_variance"}, {}};
    double prev = std::numeric_limits<double>::infinity();
    bool decreasing = true;
    for (double v : p_list(c, "Ns")) {
      const CriticalScalingReport rep = critical_scaling_check(size_param(v), ref);
      decreasing = decreasing && rep.quartic.distance < prev;
      prev = rep.quartic.distance;
      t.rows.push_back({rep.N, number(rep.quartic.distance), number(rep.gaussian.distance), number(rep.gaussian_variance)});
    }
    r.scalars["h_c"] = number(ref.h_c);
    r.scalars["J_c"] = number(ref.J_c);
    r.scalars["quartic_decreasing"] = decreasing;
    r.table = std::move(t);
  } else if (action == "lln") {
    const LlnReport rep = lln_check(N, h, J, p_real(c, "eps"));
    r.scalars["classification"] = to_string(rep.classification);
    r.scalars["limit_points"] = numbers(rep.limit_points);
    r.scalars["outside_mass"] = number(rep.outside_mass);
    if (!rep.basin_mass.empty()) {
      r.scalars["basin_mass"] = numbers(rep.basin_mass);
      r.scalars["rho"] = numbers(rep.rho);
    }
  } else if (action == "mixture") {
    const CoexistencePoint p = coexistence(J);
    const MixtureWeights w = mixture_weights(p);
    r.scalars["J"] = number(J);
    r.scalars["gamma"] = number(p.h);
    r.scalars["m1"] = number(w.m1);
    r.scalars["m2"] = number(w.m2);
    r.scalars["rho1"] = number(w.rho1);
    r.scalars["rho2"] = number(w.rho2);
    r.scalars["ratio"] = number(w.rho1 / w.rho2);
  } else {
    const LaplaceCheck l = laplace_refinement_check(N, h);
    r.scalars["value"] = number(l.value);
    r.scalars["target"] = number(l.target);
    r.scalars["ratio"] = number(l.ratio);
  }
  return r;
}

// ---- er -------------------------------------------------------------------

Result run_er(const Context& c, const std::string& action) {
  double cc = p_real(c, "c");
  std::int64_t rr = p_int(c, "r"), K = p_int(c, "K");
  const std::string preset = p_text(c, "preset");
  if (preset == "fig2") {
    if (!c.given.count("c")) cc = 2.0;
    if (!c.given.count("r")) rr = 6;
    if (!c.given.count("K")) K = 10000;
  } else if (!preset.empty()) {
    throw UsageError("unknown preset '" + preset + "' (fig2)");
  }
  const ERParams params(cc, p_real(c, "x"));
  if (K < 0) throw InvalidInputError("K must be positive");
  PopulationOptions opts;
  opts.seed = c.seed;
  opts.threads = c.threads;
  Result r;
  r.scalars["c"] = number(params.c);
  r.scalars["x"] = number(params.x);
  if (action == "density") {
    const ErDensityReport rep = er_monomer_density(params, to_int(rr, "r"), static_cast<std::size_t>(K), opts);
    r.scalars["estimate"] = number(rep.estimate);
    r.scalars["std_error"] = number(rep.std_error);
    r.scalars["ladder_checked"] = rep.ladder_checked;
    r.scalars["ladder_ok"] = rep.ladder_ok;
    Table t{{"generation", "mean", "std_error"}, {}};
    for (const auto& gm : rep.generations) t.rows.push_back({gm.generation, number(gm.mean), number(gm.std_error)});
    r.table = std::move(t);
  } else if (action == "pressure") {
    const ErPressureReport rep = er_pressure(params, to_int(rr, "r"), static_cast<std::size_t>(K), opts);
    r.scalars["estimate"] = number(rep.estimate);
    r.scalars["std_error"] = number(rep.std_error);
    r.scalars["converged"] = rep.converged;
    r.scalars["last_gap"] = number(rep.last_gap);
    if (!rep.converged) *c.err << "mdm: warning: population not converged (even/odd gap " << fmt(rep.last_gap) << ")\n";
  } else if (action == "oracle") {
    const QuenchedOracle o = er_quenched_oracle(to_int(p_int(c, "N"), "N"), params, to_int(p_int(c, "samples"), "samples"), opts);
    r.scalars["N"] = p_int(c, "N");
    r.scalars["mean"] = number(o.mean);
    r.scalars["std_error"] = number(o.std_error);
    r.scalars["std_dev"] = number(o.std_dev);
    r.scalars["samples"] = o.samples;
  } else {
    const GapContraction gc = er_gap_contraction(params, static_cast<std::size_t>(K), opts);
    r.scalars["two_step_ratio"] = number(gc.two_step_ratio);
    r.scalars["two_step_error"] = number(gc.two_step_error);
    r.scalars["bound"] = number(gc.bound);
    r.scalars["within_bound"] = gc.within_bound;
  }
  return r;
}

// ---- rf / selfavg ---------------------------------------------------------

Result run_rf(const Context& c, const std::string& action) {
  const double w = p_real(c, "w");
  const ActivityDistribution dist = ActivityDistribution::parse(p_text(c, "dist"));
  const RfSolution s = rf_pressure_and_density(w, dist);
  Result r;
  r.scalars["distribution"] = dist.describe();
  r.scalars["xi"] = number(s.xi);
  r.scalars["pressure"] = number(s.pressure);
  r.scalars["density"] = number(s.density);
  if (action == "solve") {
    const double xi = s.xi;
    r.scalars["residual"] = number(xi - dist.expectation([&](double x) { return w / (xi + x); }));
  } else {
    const int N = to_int(p_int(c, "N"), "N");
    if (N < 1) throw InvalidInputError("N must be >= 1");
    Engine eng = make_engine(c.seed, static_cast<std::uint64_t>(N), 0);
    std::vector<double> x(static_cast<std::size_t>(N));
    for (double& v : x) v = dist.sample(eng);
    const double log_z = rf_partition_quadrature(w, x);
    r.scalars["N"] = N;
    r.scalars["log_z"] = number(log_z);
    r.scalars["finite_pressure"] = number(log_z / N);
    r.scalars["difference"] = number(log_z / N - s.pressure);
  }
  return r;
}

Result run_selfavg(const Context& c) {
  const ActivityDistribution dist = ActivityDistribution::parse(p_text(c, "dist"));
  const double w = p_real(c, "w");
  std::vector<int> Ns;
  for (double v : p_list(c, "Ns")) Ns.push_back(to_int(size_param(v), "N"));
  const auto rows = self_averaging_experiment(Ns, dist, w, to_int(p_int(c, "reps"), "reps"), c.seed, c.threads);
  Result r;
  bool decreasing = true;
  for (std::size_t k = 1; k < rows.size(); ++k) decreasing = decreasing && rows[k].std_dev < rows[k - 1].std_dev;
  r.scalars["distribution"] = dist.describe();
  r.scalars["limit_pressure"] = number(rf_pressure_and_density(w, dist).pressure);
  r.scalars["std_strictly_decreasing"] = decreasing;
  Table t{{"N", "mean", "std_dev"}, {}};
  for (const auto& row : rows) t.rows.push_back({row.N, number(row.mean), number(row.std_dev)});
  r.table = std::move(t);
  return r;
}

// ---- output ---------------------------------------------------------------

std::string render(const Result& r, const std::string& format, const ojson& meta) {
  if (format == "json") {
    ojson doc;
    if (r.document) {
      doc = *r.document;
      doc["meta"] = meta;
    } else {
      doc["meta"] = meta;
      doc["result"] = r.scalars;
      if (r.table) {
        doc["table"]["columns"] = r.table->columns;
        doc["table"]["rows"] = r.table->rows;
      }
    }
    return doc.dump(2) + "\n";
  }
  std::ostringstream os;
  os << "# mdm " << meta["version"].get<std::string>() << "\n";
  os << "# config_hash: " << meta["config_hash"].get<std::string>() << "\n";
  os << "# seed: " << meta["seed"].get<std::uint64_t>() << "\n";
  os << "# config: " << meta["config"].dump() << "\n";
  if (r.table) {
    for (const auto& [k, v] : r.scalars.items()) os << "# " << k << ": " << cell(v) << "\n";
    for (std::size_t i = 0; i < r.table->columns.size(); ++i) os << (i ? "," : "") << r.table->columns[i];
    os << "\n";
    for (const auto& row : r.table->rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell(row[i]);
      os << "\n";
    }
  } else {
    os << "key,value\n";
    for (const auto& [k, v] : r.scalars.items()) os << k << "," << cell(v) << "\n";
  }
  return os.str();
}

json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  json doc;
  try {
    doc = json::parse(ss.str());
  } catch (const json::exception& e) {
    throw UsageError("config file '" + path + "': " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  return doc;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monomer-dimer models: exact partition functions, mean-field theory and quenched solvers", "mdm"};
  app.set_help_flag("--help", "Print help and exit");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string seed_text, out_path, format, threads_text, config_path;
  bool strict = false;
  auto* seed_opt = app.add_option("--seed", seed_text, "64-bit seed (default 0)");
  auto* out_opt = app.add_option("--out", out_path, "output file (default: standard output)");
  auto* format_opt = app.add_option("--format", format, "csv | json (default: csv for tables, json otherwise)");
  auto* threads_opt = app.add_option("--threads", threads_text, "worker threads (default: hardware concurrency)");
  auto* strict_opt = app.add_flag("--strict-determinism", strict, "sequential execution");
  app.add_option("--config", config_path, "JSON config document; flags override its values");

  struct Bound {
    const Command* cmd;
    CLI::App* sub;
    std::string action;
    std::map<std::string, std::pair<std::string, CLI::Option*>> values;
  };
  std::vector<Bound> bound;
  bound.reserve(commands().size());
  for (const auto& cmd : commands()) {
    Bound b{&cmd, app.add_subcommand(cmd.name, cmd.help), {}, {}};
    b.sub->fallthrough();
    bound.push_back(std::move(b));
  }
  for (auto& b : bound) {
    if (!b.cmd->actions.empty()) {
      std::string names;
      for (const auto& a : b.cmd->actions) names += (names.empty() ? "" : " | ") + a;
      b.sub->add_option("action", b.action, names);
    }
    for (const auto& p : b.cmd->params) {
      auto& slot = b.values[p.name];
      slot.second = b.sub->add_option("--" + p.name, slot.first, p.help);
    }
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Bound* chosen = nullptr;
    for (auto& b : bound)
      if (b.sub->parsed()) chosen = &b;
    const Command& cmd = *chosen->cmd;

    json file = json::object();
    if (!config_path.empty()) file = read_config_file(config_path);
    const std::set<std::string> globals = {"seed", "out", "format", "threads", "strict_determinism"};
    for (const auto& [k, v] : file.items()) {
      if (globals.count(k)) continue;
      const auto it = std::find_if(commands().begin(), commands().end(), [&](const Command& c) { return c.name == k; });
      if (it == commands().end()) throw UsageError("config: unknown key '" + k + "'");
      if (!v.is_object()) throw UsageError("config: section '" + k + "' must be an object");
      for (const auto& [pk, pv] : v.items()) {
        if (pk == "action" && !it->actions.empty()) continue;
        if (std::none_of(it->params.begin(), it->params.end(), [&](const Param& p) { return p.name == pk; }))
          throw UsageError("config: unknown key '" + k + "." + pk + "'");
      }
    }
    const json section = file.contains(cmd.name) ? file[cmd.name] : json::object();

    Context ctx;
    ctx.err = &err;
    ctx.params = json::object();
    for (const auto& p : cmd.params) {
      json v = p.def;
      if (section.contains(p.name)) {
        v = from_config(p, section[p.name], cmd.name);
        ctx.given.insert(p.name);
      }
      const auto& slot = chosen->values.at(p.name);
      if (slot.second->count() > 0) {
        v = from_text(p, slot.first);
        ctx.given.insert(p.name);
      }
      ctx.params[p.name] = v;
    }
    std::string action = chosen->action;
    if (!cmd.actions.empty()) {
      if (action.empty() && section.contains("action")) {
        if (!section["action"].is_string()) throw UsageError("config: " + cmd.name + ".action must be a string");
        action = section["action"].get<std::string>();
      }
      if (std::find(cmd.actions.begin(), cmd.actions.end(), action) == cmd.actions.end()) {
        std::string names;
        for (const auto& a : cmd.actions) names += (names.empty() ? "" : " | ") + a;
        throw UsageError(cmd.name + ": action must be one of " + names);
      }
      ctx.params["action"] = action;
    }

    auto global = [&](const char* key, CLI::Option* opt, const std::string& text) -> std::optional<json> {
      if (opt->count() > 0) return json(text);
      if (file.contains(key)) return file[key];
      return std::nullopt;
    };
    if (auto v = global("seed", seed_opt, seed_text)) {
      if (v->is_string()) {
        const std::string s = v->get<std::string>();
        std::size_t used = 0;
        try {
          ctx.seed = std::stoull(s, &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != s.size() || s.front() == '-') throw UsageError("--seed: expected a non-negative integer");
      } else if (v->is_number_unsigned()) {
        ctx.seed = v->get<std::uint64_t>();
      } else {
        throw UsageError("config: seed must be a non-negative integer");
      }
    }
    if (auto v = global("format", format_opt, format)) {
      if (!v->is_string()) throw UsageError("config: format must be a string");
      format = v->get<std::string>();
      if (format != "csv" && format != "json") throw UsageError("--format must be csv or json");
    } else {
      format = "";
    }
    if (auto v = global("out", out_opt, out_path)) {
      if (!v->is_string()) throw UsageError("config: out must be a string");
      out_path = v->get<std::string>();
    }
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    if (auto v = global("threads", threads_opt, threads_text)) {
      const double t = v->is_string() ? parse_number(v->get<std::string>(), "--threads") : v->is_number() ? v->get<double>() : -1.0;
      if (!(t >= 1.0) || t != std::floor(t) || t > 1024) throw UsageError("--threads must be an integer in [1, 1024]");
      threads = static_cast<int>(t);
    }
    if (strict_opt->count() == 0 && file.contains("strict_determinism")) {
      if (!file["strict_determinism"].is_boolean()) throw UsageError("config: strict_determinism must be true or false");
      strict = file["strict_determinism"].get<bool>();
    }
    ctx.threads = strict ? 1 : threads;

    Result result;
    if (cmd.name == "exact") result = run_exact(ctx);
    else if (cmd.name == "gaussian") result = run_gaussian(ctx);
    else if (cmd.name == "zeros") result = run_zeros(ctx);
    else if (cmd.name == "meanfield") result = run_meanfield(ctx, action);
    else if (cmd.name == "fluct") result = run_fluct(ctx, action);
    else if (cmd.name == "er") result = run_er(ctx, action);
    else if (cmd.name == "rf") result = run_rf(ctx, action);
    else result = run_selfavg(ctx);

    if (format.empty()) format = result.table && !result.document ? "csv" : "json";
    if (result.document) format = "json";

    json resolved = ctx.params;
    resolved["command"] = cmd.name;
    resolved["seed"] = ctx.seed;
    const std::string canonical = resolved.dump();
    ojson meta;
    meta["config"] = ojson::parse(canonical);
    meta["config_hash"] = fnv1a_hex(canonical);
    meta["seed"] = ctx.seed;
    meta["version"] = kVersion;
    const std::string text = render(result, format, meta);
    if (out_path.empty() || out_path == "-") out << text;
    else write_file_atomic(out_path, text);
    return kExitOk;
  } catch (const UsageError& e) {
    err << "mdm: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InvalidInputError& e) {
    err << "mdm: error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SizeCapError& e) {
    err << "mdm: error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const NumericalError& e) {
    err << "mdm: error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::exception& e) {
    err << "mdm: error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace mdm::app
