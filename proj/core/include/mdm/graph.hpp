#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace mdm {

using Vertex = int;

/// Undirected edge stored canonically with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Simple undirected graph. Edges keep their insertion order so that
/// per-edge data (weights, couplings) can be stored in parallel arrays.
class Graph {
 public:
  Graph() = default;
  Graph(int num_vertices, std::vector<Edge> edges);

  static Graph empty(int n);
  static Graph complete(int n);
  static Graph path(int n);
  static Graph cycle(int n);
  /// Center 0 joined to `leaves` vertices 1..leaves.
  static Graph star(int leaves);

  int num_vertices() const noexcept { return n_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }

  std::optional<std::size_t> edge_index(Vertex a, Vertex b) const;
  bool has_edge(Vertex a, Vertex b) const { return edge_index(a, b).has_value(); }

  const std::vector<Vertex>& neighbors(Vertex v) const { return adjacency_.at(static_cast<std::size_t>(v)); }
  int degree(Vertex v) const { return static_cast<int>(neighbors(v).size()); }

  bool is_connected() const;
  bool is_tree() const;

  /// Hop distances from `root`; unreachable vertices get -1.
  std::vector<int> distances_from(Vertex root) const;

 private:
  static std::uint64_t key(Vertex a, Vertex b) noexcept;

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adjacency_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

/// A set of pairwise non-incident edges. Uncovered vertices are monomers.
struct Matching {
  std::vector<Edge> dimers;

  std::size_t size() const noexcept { return dimers.size(); }
  /// True when no vertex is covered twice and every endpoint is in [0, n).
  bool satisfies_hard_core(int n) const;
  std::vector<bool> monomer_mask(int n) const;
};

/// Pure hard-core monomer-dimer model: dimer activity per edge (>= 0) and
/// monomer activity per vertex (> 0).
class MDModel {
 public:
  MDModel() = default;
  MDModel(Graph graph, std::vector<double> dimer_weights, std::vector<double> monomer_activities);

  static MDModel uniform(Graph graph, double w, double x);

  const Graph& graph() const noexcept { return graph_; }
  int num_vertices() const noexcept { return graph_.num_vertices(); }
  std::span<const double> dimer_weights() const noexcept { return w_; }
  std::span<const double> monomer_activities() const noexcept { return x_; }
  double w(std::size_t e) const { return w_.at(e); }
  double x(Vertex v) const { return x_.at(static_cast<std::size_t>(v)); }

  /// Induced model on `keep` (vertices relabelled 0..keep.size()-1 in order).
  MDModel induced(std::span<const Vertex> keep) const;
  MDModel without_vertex(Vertex v) const;

  MDModel with_activities(std::vector<double> x) const { return {graph_, w_, std::move(x)}; }

 private:
  Graph graph_;
  std::vector<double> w_;
  std::vector<double> x_;
};

/// Monomer-dimer model with an imitation coupling J_e (any sign) per edge,
/// rewarding edges whose endpoints are of the same kind.
class ImitativeModel {
 public:
  ImitativeModel() = default;
  ImitativeModel(MDModel base, std::vector<double> couplings);

  const MDModel& base() const noexcept { return base_; }
  const Graph& graph() const noexcept { return base_.graph(); }
  int num_vertices() const noexcept { return base_.num_vertices(); }
  std::span<const double> couplings() const noexcept { return j_; }
  double coupling(std::size_t e) const { return j_.at(e); }

 private:
  MDModel base_;
  std::vector<double> j_;
};

}  // namespace mdm
