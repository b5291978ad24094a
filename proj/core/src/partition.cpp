#include "mdm/partition.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "mdm/error.hpp"
#include "mdm/logspace.hpp"

namespace mdm {
namespace {

void check_cap(int n, int cap, const char* what) {
  if (cap > kMaxRecursionCap && std::string(what) == "recursion") {
    throw InvalidInputError("recursion cap cannot exceed " + std::to_string(kMaxRecursionCap));
  }
  if (n > cap) {
    throw SizeCapError(std::string(what) + ": graph has " + std::to_string(n) + " vertices, cap is " +
                       std::to_string(cap));
  }
}

struct MatchingWalker {
  const Graph& g;
  const std::function<void(std::span<const std::size_t>)>& visit;
  std::vector<bool> used;
  std::vector<std::size_t> chosen;

  // Lowest free vertex is either a monomer or paired with a higher free neighbour.
  void walk(Vertex from) {
    Vertex v = from;
    while (v < g.num_vertices() && used[static_cast<std::size_t>(v)]) ++v;
    if (v >= g.num_vertices()) {
      visit(chosen);
      return;
    }
    used[static_cast<std::size_t>(v)] = true;
    walk(v + 1);
    for (Vertex u : g.neighbors(v)) {
      if (u < v || used[static_cast<std::size_t>(u)]) continue;
      used[static_cast<std::size_t>(u)] = true;
      chosen.push_back(*g.edge_index(v, u));
      walk(v + 1);
      chosen.pop_back();
      used[static_cast<std::size_t>(u)] = false;
    }
    used[static_cast<std::size_t>(v)] = false;
  }
};

}  // namespace

void for_each_matching(const Graph& g, const std::function<void(std::span<const std::size_t>)>& visit, int cap) {
  check_cap(g.num_vertices(), cap, "enumeration");
  MatchingWalker walker{g, visit, std::vector<bool>(static_cast<std::size_t>(g.num_vertices()), false), {}};
  walker.walk(0);
}

std::vector<Matching> enumerate_matchings(const Graph& g, int cap) {
  std::vector<Matching> out;
  for_each_matching(
      g,
      [&](std::span<const std::size_t> edges) {
        Matching m;
        m.dimers.reserve(edges.size());
        for (std::size_t e : edges) m.dimers.push_back(g.edge(e));
        out.push_back(std::move(m));
      },
      cap);
  return out;
}

double log_partition_enum(const MDModel& model, int cap) {
  const Graph& g = model.graph();
  const int n = g.num_vertices();
  std::vector<double> log_w(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) log_w[e] = std::log(model.w(e));
  std::vector<double> log_x(static_cast<std::size_t>(n));
  double all_monomers = 0.0;
  for (Vertex v = 0; v < n; ++v) {
    log_x[static_cast<std::size_t>(v)] = std::log(model.x(v));
    all_monomers += log_x[static_cast<std::size_t>(v)];
  }
  LogSum total;
  for_each_matching(
      g,
      [&](std::span<const std::size_t> edges) {
        double term = all_monomers;
        for (std::size_t e : edges) {
          const Edge& ed = g.edge(e);
          term += log_w[e] - log_x[static_cast<std::size_t>(ed.u)] - log_x[static_cast<std::size_t>(ed.v)];
        }
        total.add(term);
      },
      cap);
  return total.value();
}

HeilmannLieb::HeilmannLieb(const MDModel& model, int cap) : n_(model.num_vertices()) {
  check_cap(n_, cap, "recursion");
  const auto n = static_cast<std::size_t>(n_);
  log_x_.resize(n);
  for (std::size_t v = 0; v < n; ++v) log_x_[v] = std::log(model.x(static_cast<Vertex>(v)));
  log_w_.assign(n * n, kNegInf);
  adj_.assign(n, 0u);
  const Graph& g = model.graph();
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (model.w(e) <= 0.0) continue;  // zero-weight edges behave as absent
    const auto [u, v] = g.edge(e);
    const double lw = std::log(model.w(e));
    log_w_[static_cast<std::size_t>(u) * n + static_cast<std::size_t>(v)] = lw;
    log_w_[static_cast<std::size_t>(v) * n + static_cast<std::size_t>(u)] = lw;
    adj_[static_cast<std::size_t>(u)] |= 1u << v;
    adj_[static_cast<std::size_t>(v)] |= 1u << u;
  }
}

std::uint32_t HeilmannLieb::component_of(std::uint32_t mask) const {
  std::uint32_t comp = mask & (~mask + 1);
  std::uint32_t frontier = comp;
  while (frontier) {
    std::uint32_t grow = 0;
    for (std::uint32_t f = frontier; f; f &= f - 1) grow |= adj_[static_cast<std::size_t>(std::countr_zero(f))];
    grow &= mask & ~comp;
    comp |= grow;
    frontier = grow;
  }
  return comp;
}

double HeilmannLieb::log_partition(std::uint32_t mask) {
  if (mask == 0) return 0.0;
  if (const auto it = memo_.find(mask); it != memo_.end()) return it->second;

  double result;
  const std::uint32_t comp = component_of(mask);
  if (comp != mask) {
    result = log_partition(comp) + log_partition(mask & ~comp);
  } else {
    // Pivot: lowest-index vertex of maximum degree inside the subset.
    int pivot = -1;
    int best_degree = -1;
    for (std::uint32_t m = mask; m; m &= m - 1) {
      const int v = std::countr_zero(m);
      const int d = std::popcount(adj_[static_cast<std::size_t>(v)] & mask);
      if (d > best_degree) {
        best_degree = d;
        pivot = v;
      }
    }
    const std::uint32_t rest = mask & ~(1u << pivot);
    LogSum sum;
    sum.add(log_x_[static_cast<std::size_t>(pivot)] + log_partition(rest));
    for (std::uint32_t nb = adj_[static_cast<std::size_t>(pivot)] & rest; nb; nb &= nb - 1) {
      const int j = std::countr_zero(nb);
      sum.add(log_w_[static_cast<std::size_t>(pivot) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)] +
              log_partition(rest & ~(1u << j)));
    }
    result = sum.value();
  }
  memo_.emplace(mask, result);
  return result;
}

double HeilmannLieb::monomer_probability(Vertex i) {
  if (i < 0 || i >= n_) throw InvalidInputError("monomer_probability: vertex out of range");
  const std::uint32_t all = full_mask();
  const double log_ratio = log_x_[static_cast<std::size_t>(i)] + log_partition(all & ~(1u << i)) - log_partition(all);
  return std::exp(log_ratio);
}

double log_partition_hl(const MDModel& model, int cap) {
  HeilmannLieb hl(model, cap);
  return hl.log_partition();
}

double monomer_probability(const MDModel& model, Vertex i, int cap) {
  HeilmannLieb hl(model, cap);
  return hl.monomer_probability(i);
}

PressureBounds pressure_bounds(const MDModel& model) {
  PressureBounds b;
  for (Vertex v = 0; v < model.num_vertices(); ++v) b.lower += std::log(model.x(v));
  b.upper = b.lower;
  const Graph& g = model.graph();
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edge(e);
    b.upper += std::log1p(model.w(e) / (model.x(ed.u) * model.x(ed.v)));
  }
  return b;
}

double log_imitative_partition_enum(const ImitativeModel& model, int cap) {
  const MDModel& base = model.base();
  const Graph& g = base.graph();
  const int n = g.num_vertices();
  LogSum total;
  std::vector<bool> covered(static_cast<std::size_t>(n));
  for_each_matching(
      g,
      [&](std::span<const std::size_t> edges) {
        std::fill(covered.begin(), covered.end(), false);
        double term = 0.0;
        for (std::size_t e : edges) {
          const Edge& ed = g.edge(e);
          covered[static_cast<std::size_t>(ed.u)] = true;
          covered[static_cast<std::size_t>(ed.v)] = true;
          term += std::log(base.w(e));
        }
        for (Vertex v = 0; v < n; ++v)
          if (!covered[static_cast<std::size_t>(v)]) term += std::log(base.x(v));
        for (std::size_t e = 0; e < g.num_edges(); ++e) {
          const Edge& ed = g.edge(e);
          if (covered[static_cast<std::size_t>(ed.u)] == covered[static_cast<std::size_t>(ed.v)])
            term += model.coupling(e);
        }
        total.add(term);
      },
      cap);
  return total.value();
}

namespace {

// State of the imitative elimination: log activities of the remaining
// vertices and pairs after absorbing the couplings to eliminated vertices.
struct ImitativeState {
  int n;
  std::vector<double> log_x;
  std::vector<double> log_w;  // n*n
  std::vector<double> j;      // n*n, zero off the edge set
};

double imitative_recurse(const ImitativeState& s, std::uint32_t mask) {
  if (mask == 0) return 0.0;
  const auto n = static_cast<std::size_t>(s.n);
  auto at = [n](int a, int b) { return static_cast<std::size_t>(a) * n + static_cast<std::size_t>(b); };

  int pivot = -1;
  int best = -1;
  for (std::uint32_t m = mask; m; m &= m - 1) {
    const int v = std::countr_zero(m);
    int d = 0;
    for (std::uint32_t r = mask; r; r &= r - 1) {
      const int u = std::countr_zero(r);
      if (u != v && s.log_w[at(v, u)] != kNegInf) ++d;
    }
    if (d > best) {
      best = d;
      pivot = v;
    }
  }
  const std::uint32_t rest = mask & ~(1u << pivot);
  LogSum sum;

  // Pivot is a monomer: remaining monomers k gain e^{J_ik}.
  {
    ImitativeState next = s;
    for (std::uint32_t r = rest; r; r &= r - 1) {
      const int k = std::countr_zero(r);
      next.log_x[static_cast<std::size_t>(k)] += s.j[at(pivot, k)];
    }
    sum.add(s.log_x[static_cast<std::size_t>(pivot)] + imitative_recurse(next, rest));
  }
  // Pivot paired with j: the edge (pivot, j) itself joins I(D); every later
  // dimer kk' gains e^{J_ik + J_ik' + J_jk + J_jk'}.
  for (std::uint32_t r = rest; r; r &= r - 1) {
    const int partner = std::countr_zero(r);
    const double lw = s.log_w[at(pivot, partner)];
    if (lw == kNegInf) continue;
    const std::uint32_t rest2 = rest & ~(1u << partner);
    ImitativeState next = s;
    for (std::uint32_t a = rest2; a; a &= a - 1) {
      const int k = std::countr_zero(a);
      const double shift_k = s.j[at(pivot, k)] + s.j[at(partner, k)];
      for (std::uint32_t b = rest2; b; b &= b - 1) {
        const int kk = std::countr_zero(b);
        if (kk == k) continue;
        // each ordered pair picks up the shift of its first endpoint
        next.log_w[at(k, kk)] += shift_k;
        next.log_w[at(kk, k)] += shift_k;
      }
    }
    sum.add(lw + s.j[at(pivot, partner)] + imitative_recurse(next, rest2));
  }
  return sum.value();
}

}  // namespace

double log_imitative_partition_hl(const ImitativeModel& model, int cap) {
  const MDModel& base = model.base();
  const int n = base.num_vertices();
  check_cap(n, std::min(cap, 31), "enumeration");
  const auto un = static_cast<std::size_t>(n);
  ImitativeState s{n, std::vector<double>(un), std::vector<double>(un * un, kNegInf), std::vector<double>(un * un, 0.0)};
  for (Vertex v = 0; v < n; ++v) s.log_x[static_cast<std::size_t>(v)] = std::log(base.x(v));
  const Graph& g = base.graph();
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [u, v] = g.edge(e);
    const auto iu = static_cast<std::size_t>(u), iv = static_cast<std::size_t>(v);
    const double lw = base.w(e) > 0.0 ? std::log(base.w(e)) : kNegInf;
    s.log_w[iu * un + iv] = s.log_w[iv * un + iu] = lw;
    s.j[iu * un + iv] = s.j[iv * un + iu] = model.coupling(e);
  }
  const std::uint32_t all = n == 32 ? ~0u : static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  return imitative_recurse(s, all);
}

std::vector<Vertex> ball_vertices(const Graph& g, Vertex root, int radius) {
  const auto dist = g.distances_from(root);
  std::vector<Vertex> out;
  for (Vertex v = 0; v < g.num_vertices(); ++v) {
    const int d = dist[static_cast<std::size_t>(v)];
    if (d >= 0 && d <= radius) out.push_back(v);
  }
  return out;
}

BallBounds ball_monomer_bounds(const MDModel& model, Vertex root, int radius, int cap) {
  if (radius < 0) throw InvalidInputError("ball_monomer_bounds: radius must be >= 0");
  const Graph& g = model.graph();
  const auto outer = ball_vertices(g, root, 2 * radius + 1);
  const MDModel outer_model = model.induced(outer);
  if (!outer_model.graph().is_tree()) {
    throw InvalidInputError("ball_monomer_bounds: the ball of radius " + std::to_string(2 * radius + 1) +
                            " around vertex " + std::to_string(root) + " is not a tree");
  }
  const auto inner = ball_vertices(g, root, 2 * radius);
  const MDModel inner_model = model.induced(inner);
  // root keeps the smallest label among vertices at distance 0, i.e. its rank
  auto rank_of = [root](const std::vector<Vertex>& vs) {
    return static_cast<Vertex>(std::lower_bound(vs.begin(), vs.end(), root) - vs.begin());
  };
  BallBounds b;
  b.lower = monomer_probability(outer_model, rank_of(outer), cap);
  b.upper = monomer_probability(inner_model, rank_of(inner), cap);
  b.exact = monomer_probability(model, root, cap);
  const double slack = 1e-12;
  b.sandwiched = b.lower <= b.exact + slack && b.exact <= b.upper + slack;
  return b;
}

}  // namespace mdm
