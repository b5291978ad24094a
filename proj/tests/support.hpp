#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "mdm/graph.hpp"

namespace mdm::test {

/// G(n, p) with the given rng; edges listed in (i, j) lexicographic order.
inline Graph random_graph(int n, double p, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(p);
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (coin(rng)) edges.push_back({i, j});
  return Graph(n, std::move(edges));
}

inline MDModel random_model(int n, double p, std::mt19937_64& rng, double wmax = 2.0, double xlo = 0.1,
                            double xhi = 3.0) {
  Graph g = random_graph(n, p, rng);
  std::uniform_real_distribution<double> uw(0.0, wmax), ux(xlo, xhi);
  std::vector<double> w(g.num_edges()), x(static_cast<std::size_t>(n));
  for (auto& v : w) v = uw(rng);
  for (auto& v : x) v = ux(rng);
  return MDModel(std::move(g), std::move(w), std::move(x));
}

// Brute force over all edge subsets, keeping the hard-core ones. Independent
// of the library's matching enumerator; fine up to ~20 edges.
template <class Visit>
void each_edge_subset_matching(const Graph& g, Visit&& visit) {
  const std::size_t m = g.num_edges();
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << m); ++s) {
    std::vector<int> used(static_cast<std::size_t>(g.num_vertices()), 0);
    bool ok = true;
    for (std::size_t e = 0; e < m && ok; ++e) {
      if (!(s >> e & 1)) continue;
      const Edge& ed = g.edge(e);
      if (used[ed.u]++ || used[ed.v]++) ok = false;
    }
    if (ok) visit(s, used);
  }
}

inline double brute_z(const MDModel& model) {
  double z = 0.0;
  each_edge_subset_matching(model.graph(), [&](std::uint64_t s, const std::vector<int>& used) {
    double t = 1.0;
    for (std::size_t e = 0; e < model.graph().num_edges(); ++e)
      if (s >> e & 1) t *= model.w(e);
    for (int v = 0; v < model.num_vertices(); ++v)
      if (!used[v]) t *= model.x(v);
    z += t;
  });
  return z;
}

inline double brute_imitative_z(const ImitativeModel& im) {
  const MDModel& model = im.base();
  const Graph& g = model.graph();
  double z = 0.0;
  each_edge_subset_matching(g, [&](std::uint64_t s, const std::vector<int>& used) {
    double t = 1.0;
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      if (s >> e & 1) t *= model.w(e);
      if (used[g.edge(e).u] == used[g.edge(e).v]) t *= std::exp(im.coupling(e));
    }
    for (int v = 0; v < model.num_vertices(); ++v)
      if (!used[v]) t *= model.x(v);
    z += t;
  });
  return z;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace mdm::test
