#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mdm/graph.hpp"

namespace mdm {

inline constexpr int kDefaultEnumerationCap = 20;
inline constexpr int kDefaultRecursionCap = 24;
/// Vertex subsets are 32-bit masks; 2^30 subsets is the hard wall.
inline constexpr int kMaxRecursionCap = 30;

/// Calls visit(edge_indices) once for every matching of g, the empty one
/// included. Edge indices refer to g.edges().
void for_each_matching(const Graph& g, const std::function<void(std::span<const std::size_t>)>& visit,
                       int cap = kDefaultEnumerationCap);

std::vector<Matching> enumerate_matchings(const Graph& g, int cap = kDefaultEnumerationCap);

/// log Z by summing over every matching.
double log_partition_enum(const MDModel& model, int cap = kDefaultEnumerationCap);

/// log Z via the Heilmann-Lieb recursion
///   Z_G = x_i Z_{G-i} + sum_{j~i} w_ij Z_{G-i-j},
/// memoized on vertex subsets. Disconnected subsets factor into components.
double log_partition_hl(const MDModel& model, int cap = kDefaultRecursionCap);

/// Memoized recursion engine; reusable across queries on the same model.
class HeilmannLieb {
 public:
  explicit HeilmannLieb(const MDModel& model, int cap = kDefaultRecursionCap);

  /// log Z of the model induced on the vertices set in `mask`.
  double log_partition(std::uint32_t mask);
  double log_partition() { return log_partition(full_mask()); }

  /// <alpha_i> = x_i Z_{G-i} / Z_G.
  double monomer_probability(Vertex i);

  std::uint32_t full_mask() const noexcept {
    return n_ == 32 ? ~0u : static_cast<std::uint32_t>((std::uint64_t{1} << n_) - 1);
  }
  std::size_t memo_size() const noexcept { return memo_.size(); }

 private:
  std::uint32_t component_of(std::uint32_t mask) const;

  int n_ = 0;
  std::vector<double> log_x_;
  std::vector<double> log_w_;  // n*n, -inf where no (positive-weight) edge
  std::vector<std::uint32_t> adj_;
  std::unordered_map<std::uint32_t, double> memo_;
};

double monomer_probability(const MDModel& model, Vertex i, int cap = kDefaultRecursionCap);

struct PressureBounds {
  double lower = 0.0;  // no-dimer configuration only
  double upper = 0.0;  // hard-core constraint dropped
};

/// Bounds that bracket log Z for every model.
PressureBounds pressure_bounds(const MDModel& model);

/// log Z of the imitative model, by enumeration with the same-kind edge set
/// I(D) = {ij in E : i,j both monomers or both covered}.
double log_imitative_partition_enum(const ImitativeModel& model, int cap = kDefaultEnumerationCap);

/// log Z of the imitative model by the vertex-elimination recursion with
/// modified activities. Exponential (no memo: the activities depend on the
/// elimination history), validated against the enumeration.
double log_imitative_partition_hl(const ImitativeModel& model, int cap = kDefaultEnumerationCap);

struct BallBounds {
  double lower = 0.0;  // root monomer probability on the ball of radius 2r+1
  double upper = 0.0;  // ... on the ball of radius 2r
  double exact = 0.0;  // ... on the whole graph
  bool sandwiched = false;
};

/// Correlation-inequality sandwich for the root monomer probability. The
/// ball of radius 2r+1 around `root` must be a tree.
BallBounds ball_monomer_bounds(const MDModel& model, Vertex root, int radius, int cap = kDefaultRecursionCap);

/// Vertices within `radius` hops of root, in increasing label order.
std::vector<Vertex> ball_vertices(const Graph& g, Vertex root, int radius);

}  // namespace mdm
