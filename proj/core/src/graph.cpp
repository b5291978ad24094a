#include "mdm/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

#include "mdm/error.hpp"

namespace mdm {

std::uint64_t Graph::key(Vertex a, Vertex b) noexcept {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

Graph::Graph(int num_vertices, std::vector<Edge> edges) : n_(num_vertices) {
  if (num_vertices < 0) throw InvalidInputError("graph: negative vertex count");
  adjacency_.resize(static_cast<std::size_t>(n_));
  edges_.reserve(edges.size());
  for (Edge e : edges) {
    if (e.u < 0 || e.v < 0 || e.u >= n_ || e.v >= n_) {
      throw InvalidInputError("graph: edge {" + std::to_string(e.u) + "," + std::to_string(e.v) +
                              "} has a vertex outside [0, " + std::to_string(n_) + ")");
    }
    if (e.u == e.v) throw InvalidInputError("graph: self-loop at vertex " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
    const auto [it, inserted] = index_.emplace(key(e.u, e.v), edges_.size());
    if (!inserted) {
      throw InvalidInputError("graph: duplicate edge {" + std::to_string(e.u) + "," + std::to_string(e.v) + "}");
    }
    edges_.push_back(e);
    adjacency_[static_cast<std::size_t>(e.u)].push_back(e.v);
    adjacency_[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());
}

Graph Graph::empty(int n) { return Graph(n, {}); }

Graph Graph::complete(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  return Graph(n, std::move(edges));
}

Graph Graph::path(int n) {
  std::vector<Edge> edges;
  for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
  return Graph(n, std::move(edges));
}

Graph Graph::cycle(int n) {
  if (n < 3) throw InvalidInputError("graph: a cycle needs at least 3 vertices");
  std::vector<Edge> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  return Graph(n, std::move(edges));
}

Graph Graph::star(int leaves) {
  std::vector<Edge> edges;
  for (int i = 1; i <= leaves; ++i) edges.push_back({0, i});
  return Graph(leaves + 1, std::move(edges));
}

std::optional<std::size_t> Graph::edge_index(Vertex a, Vertex b) const {
  const auto it = index_.find(key(a, b));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<int> Graph::distances_from(Vertex root) const {
  if (root < 0 || root >= n_) throw InvalidInputError("graph: root vertex out of range");
  std::vector<int> dist(static_cast<std::size_t>(n_), -1);
  std::queue<Vertex> frontier;
  dist[static_cast<std::size_t>(root)] = 0;
  frontier.push(root);
  while (!frontier.empty()) {
    const Vertex v = frontier.front();
    frontier.pop();
    for (Vertex u : neighbors(v)) {
      if (dist[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        frontier.push(u);
      }
    }
  }
  return dist;
}

bool Graph::is_connected() const {
  if (n_ == 0) return true;
  const auto dist = distances_from(0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

bool Graph::is_tree() const {
  return n_ > 0 && is_connected() && edges_.size() == static_cast<std::size_t>(n_ - 1);
}

bool Matching::satisfies_hard_core(int n) const {
  std::vector<int> cover(static_cast<std::size_t>(std::max(n, 0)), 0);
  for (const Edge& e : dimers) {
    if (e.u < 0 || e.v < 0 || e.u >= n || e.v >= n || e.u == e.v) return false;
    if (++cover[static_cast<std::size_t>(e.u)] > 1) return false;
    if (++cover[static_cast<std::size_t>(e.v)] > 1) return false;
  }
  return true;
}

std::vector<bool> Matching::monomer_mask(int n) const {
  std::vector<bool> monomer(static_cast<std::size_t>(n), true);
  for (const Edge& e : dimers) {
    monomer[static_cast<std::size_t>(e.u)] = false;
    monomer[static_cast<std::size_t>(e.v)] = false;
  }
  return monomer;
}

MDModel::MDModel(Graph graph, std::vector<double> dimer_weights, std::vector<double> monomer_activities)
    : graph_(std::move(graph)), w_(std::move(dimer_weights)), x_(std::move(monomer_activities)) {
  if (w_.size() != graph_.num_edges()) {
    throw InvalidInputError("model: expected " + std::to_string(graph_.num_edges()) + " dimer weights, got " +
                            std::to_string(w_.size()));
  }
  if (x_.size() != static_cast<std::size_t>(graph_.num_vertices())) {
    throw InvalidInputError("model: expected " + std::to_string(graph_.num_vertices()) +
                            " monomer activities, got " + std::to_string(x_.size()));
  }
  for (double w : w_) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw InvalidInputError("model: dimer weights must be finite and >= 0");
  }
  for (double x : x_) {
    if (!(x > 0.0) || !std::isfinite(x)) throw InvalidInputError("model: monomer activities must be finite and > 0");
  }
}

MDModel MDModel::uniform(Graph graph, double w, double x) {
  const std::size_t m = graph.num_edges();
  const auto n = static_cast<std::size_t>(graph.num_vertices());
  return MDModel(std::move(graph), std::vector<double>(m, w), std::vector<double>(n, x));
}

MDModel MDModel::induced(std::span<const Vertex> keep) const {
  std::vector<int> relabel(static_cast<std::size_t>(graph_.num_vertices()), -1);
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const Vertex v = keep[k];
    if (v < 0 || v >= graph_.num_vertices() || relabel[static_cast<std::size_t>(v)] >= 0) {
      throw InvalidInputError("model: invalid or repeated vertex in induced subgraph");
    }
    relabel[static_cast<std::size_t>(v)] = static_cast<int>(k);
  }
  std::vector<Edge> edges;
  std::vector<double> w;
  for (std::size_t e = 0; e < graph_.num_edges(); ++e) {
    const Edge& ed = graph_.edge(e);
    const int a = relabel[static_cast<std::size_t>(ed.u)];
    const int b = relabel[static_cast<std::size_t>(ed.v)];
    if (a >= 0 && b >= 0) {
      edges.push_back({a, b});
      w.push_back(w_[e]);
    }
  }
  std::vector<double> x;
  x.reserve(keep.size());
  for (Vertex v : keep) x.push_back(x_[static_cast<std::size_t>(v)]);
  return MDModel(Graph(static_cast<int>(keep.size()), std::move(edges)), std::move(w), std::move(x));
}

MDModel MDModel::without_vertex(Vertex v) const {
  std::vector<Vertex> keep;
  for (Vertex u = 0; u < graph_.num_vertices(); ++u)
    if (u != v) keep.push_back(u);
  return induced(keep);
}

ImitativeModel::ImitativeModel(MDModel base, std::vector<double> couplings)
    : base_(std::move(base)), j_(std::move(couplings)) {
  if (j_.size() != base_.graph().num_edges()) {
    throw InvalidInputError("imitative model: expected one coupling per edge");
  }
  for (double j : j_) {
    if (!std::isfinite(j)) throw InvalidInputError("imitative model: couplings must be finite");
  }
}

}  // namespace mdm
