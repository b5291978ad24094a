#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "mdm/error.hpp"
#include "mdm/graph_io.hpp"
#include "mdm/partition.hpp"
#include "support.hpp"

namespace mdm {
namespace {

using test::brute_imitative_z;
using test::brute_z;
using test::random_model;

TEST(Graph, CanonicalEdges) {
  Graph g(3, {{2, 0}, {1, 2}});
  EXPECT_EQ(g.edge(0), (Edge{0, 2}));
  EXPECT_TRUE(g.has_edge(2, 1));
  EXPECT_FALSE(g.has_edge(0, 1));
  EXPECT_THROW(Graph(2, {{0, 0}}), InvalidInputError);
  EXPECT_THROW(Graph(2, {{0, 1}, {1, 0}}), InvalidInputError);
  EXPECT_THROW(Graph(2, {{0, 2}}), InvalidInputError);
}

TEST(Graph, ModelValidation) {
  EXPECT_THROW(MDModel::uniform(Graph::complete(2), -1.0, 1.0), InvalidInputError);
  EXPECT_THROW(MDModel::uniform(Graph::complete(2), 1.0, 0.0), InvalidInputError);
  EXPECT_THROW(MDModel(Graph::complete(2), {1.0, 2.0}, {1.0, 1.0}), InvalidInputError);
}

TEST(Enumerate, SmallCompleteGraphs) {
  EXPECT_EQ(enumerate_matchings(Graph::complete(2)).size(), 2u);
  EXPECT_EQ(enumerate_matchings(Graph::complete(3)).size(), 4u);
  EXPECT_EQ(enumerate_matchings(Graph::complete(4)).size(), 10u);
}

TEST(Enumerate, CountsMatchClosedForm) {
  // sum_D N! / ((N-2D)! D! 2^D)
  for (int n = 1; n <= 9; ++n) {
    double count = 0.0;
    for (int d = 0; 2 * d <= n; ++d)
      count += std::tgamma(n + 1.0) / (std::tgamma(n - 2.0 * d + 1) * std::tgamma(d + 1.0) * std::pow(2.0, d));
    EXPECT_EQ(static_cast<double>(enumerate_matchings(Graph::complete(n)).size()), std::round(count)) << n;
  }
}

TEST(Enumerate, HardCore) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 30; ++t) {
    Graph g = test::random_graph(8, 0.5, rng);
    std::set<std::vector<std::pair<int, int>>> seen;
    for (const auto& m : enumerate_matchings(g)) {
      EXPECT_TRUE(m.satisfies_hard_core(8));
      std::vector<std::pair<int, int>> key;
      for (const auto& e : m.dimers) {
        EXPECT_TRUE(g.has_edge(e.u, e.v));
        key.emplace_back(e.u, e.v);
      }
      std::sort(key.begin(), key.end());
      EXPECT_TRUE(seen.insert(key).second);
    }
  }
}

TEST(Enumerate, CapRefused) {
  EXPECT_THROW(enumerate_matchings(Graph::complete(21)), SizeCapError);
  EXPECT_THROW(log_partition_hl(MDModel::uniform(Graph::path(25), 1.0, 1.0)), SizeCapError);
  EXPECT_THROW(log_partition_hl(MDModel::uniform(Graph::path(31), 1.0, 1.0), 31), InvalidInputError);
}

TEST(Partition, SpecExamples) {
  EXPECT_NEAR(log_partition_enum(MDModel::uniform(Graph::complete(2), 1, 1)), std::log(2.0), 1e-15);
  EXPECT_NEAR(log_partition_enum(MDModel::uniform(Graph::complete(4), 1, 1)), std::log(10.0), 1e-14);
  EXPECT_NEAR(log_partition_hl(MDModel::uniform(Graph::complete(2), 1, 1)), std::log(2.0), 1e-15);
  EXPECT_NEAR(log_partition_hl(MDModel::uniform(Graph::complete(4), 1, 1)), std::log(10.0), 1e-14);
  EXPECT_NEAR(log_partition_hl(MDModel::uniform(Graph::empty(3), 1, 2)), 3 * std::log(2.0), 1e-14);
  EXPECT_EQ(log_partition_hl(MDModel::uniform(Graph::empty(0), 1, 1)), 0.0);
  EXPECT_EQ(log_partition_enum(MDModel::uniform(Graph::empty(0), 1, 1)), 0.0);
}

TEST(Partition, PathP3Symbolic) {
  const double x1 = 0.7, x2 = 1.9, x3 = 2.3, w12 = 0.4, w23 = 1.6;
  MDModel m(Graph::path(3), {w12, w23}, {x1, x2, x3});
  const double z = x1 * x2 * x3 + w12 * x3 + w23 * x1;
  EXPECT_NEAR(log_partition_enum(m), std::log(z), 1e-14);
  EXPECT_NEAR(log_partition_hl(m), std::log(z), 1e-14);
}

TEST(Partition, ZeroWeightEdgeIsAbsent) {
  MDModel with(Graph::path(3), {0.0, 1.0}, {1.0, 1.0, 1.0});
  MDModel without(Graph(3, {{1, 2}}), {1.0}, {1.0, 1.0, 1.0});
  EXPECT_NEAR(log_partition_hl(with), log_partition_hl(without), 1e-15);
  EXPECT_NEAR(log_partition_enum(with), std::log(2.0), 1e-15);
}

TEST(Partition, RandomAgainstBruteForce) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 60; ++t) {
    MDModel m = random_model(1 + t % 6, 0.6, rng);
    const double ref = std::log(brute_z(m));
    EXPECT_NEAR(log_partition_enum(m), ref, 1e-12 * std::max(1.0, std::abs(ref)));
    EXPECT_NEAR(log_partition_hl(m), ref, 1e-12 * std::max(1.0, std::abs(ref)));
  }
}

TEST(Partition, EnumEqualsHlOnRandomGraphs) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> un(1, 12);
  std::uniform_real_distribution<double> up(0.1, 0.9);
  for (int t = 0; t < 200; ++t) {
    MDModel m = random_model(un(rng), up(rng), rng);
    EXPECT_LT(std::abs(log_partition_hl(m) - log_partition_enum(m)), 1e-10);
  }
}

TEST(Partition, LargeActivitiesStayFinite) {
  MDModel m = MDModel::uniform(Graph::complete(10), 1e200, 1e250);
  const double v = log_partition_hl(m);
  EXPECT_TRUE(std::isfinite(v));
  EXPECT_NEAR(v, log_partition_enum(m), 1e-10 * std::abs(v));
  EXPECT_NEAR(v, 10 * std::log(1e250), 1e-9 * std::abs(v));
}

TEST(Partition, HlMemoAndInducedSubsets) {
  MDModel m = MDModel::uniform(Graph::cycle(6), 1.0, 1.0);
  HeilmannLieb hl(m);
  EXPECT_NEAR(hl.log_partition(), std::log(18.0), 1e-14);  // Lucas number L_6
  // Vertices {0,1,2} induce P3 with Z = 3.
  EXPECT_NEAR(hl.log_partition(0b000111u), std::log(3.0), 1e-14);
  EXPECT_GT(hl.memo_size(), 0u);
}

TEST(MonomerProbability, SpecExamples) {
  EXPECT_NEAR(monomer_probability(MDModel::uniform(Graph::complete(2), 1, 1), 0), 0.5, 1e-15);
  EXPECT_NEAR(monomer_probability(MDModel::uniform(Graph::complete(2), 1e-14, 1), 0), 1.0, 1e-13);
  EXPECT_NEAR(monomer_probability(MDModel::uniform(Graph::complete(2), 0.0, 1), 0), 1.0, 0.0);
  for (int i = 0; i < 3; ++i)
    EXPECT_NEAR(monomer_probability(MDModel::uniform(Graph::complete(3), 1, 1), i), 0.5, 1e-15);
}

TEST(MonomerProbability, LogDerivativeInActivity) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 20; ++t) {
    MDModel m = random_model(7, 0.5, rng);
    for (int i = 0; i < m.num_vertices(); ++i) {
      // <alpha_i> = d log Z / d h_i with x_i = e^{h_i}.
      const double step = 1e-5;
      auto at = [&](double dh) {
        std::vector<double> x(m.monomer_activities().begin(), m.monomer_activities().end());
        x[i] *= std::exp(dh);
        return log_partition_hl(m.with_activities(x));
      };
      const double fd = (at(step) - at(-step)) / (2 * step);
      EXPECT_NEAR(monomer_probability(m, i), fd, 1e-6);
    }
  }
}

TEST(MonomerProbability, CountIdentity) {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 20; ++t) {
    MDModel m = random_model(8, 0.5, rng);
    const double z = std::exp(log_partition_enum(m));
    double mean_dimers = 0.0;
    for_each_matching(m.graph(), [&](std::span<const std::size_t> es) {
      double wt = 1.0;
      std::vector<bool> covered(8, false);
      for (auto e : es) {
        wt *= m.w(e);
        covered[m.graph().edge(e).u] = covered[m.graph().edge(e).v] = true;
      }
      for (int v = 0; v < 8; ++v)
        if (!covered[v]) wt *= m.x(v);
      mean_dimers += es.size() * wt / z;
    });
    double sum_alpha = 0.0;
    for (int i = 0; i < 8; ++i) sum_alpha += monomer_probability(m, i);
    EXPECT_NEAR(sum_alpha + 2 * mean_dimers, 8.0, 1e-10);
  }
}

TEST(PressureBounds, SpecExamples) {
  auto b = pressure_bounds(MDModel::uniform(Graph::complete(2), 1, 1));
  EXPECT_NEAR(b.lower, 0.0, 1e-15);
  EXPECT_NEAR(b.upper, std::log(2.0), 1e-15);
  auto e = pressure_bounds(MDModel::uniform(Graph::empty(4), 1, 1.7));
  EXPECT_NEAR(e.lower, 4 * std::log(1.7), 1e-14);
  EXPECT_NEAR(e.upper, e.lower, 1e-14);
  auto k4 = pressure_bounds(MDModel::uniform(Graph::complete(4), 1, 1));
  EXPECT_NEAR(k4.upper, 6 * std::log(2.0), 1e-14);
}

TEST(PressureBounds, AlwaysBracket) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    MDModel m = random_model(1 + t % 10, 0.5, rng);
    auto b = pressure_bounds(m);
    const double z = log_partition_hl(m);
    EXPECT_LE(b.lower, z + 1e-12);
    EXPECT_GE(b.upper, z - 1e-12);
  }
}

TEST(Imitative, K2WithLogTwoCoupling) {
  // Both configurations put the edge in I(D): Z = e^J x^2 + w e^J = 4.
  ImitativeModel im(MDModel::uniform(Graph::complete(2), 1, 1), {std::log(2.0)});
  EXPECT_NEAR(log_imitative_partition_enum(im), std::log(4.0), 1e-15);
  EXPECT_NEAR(log_imitative_partition_hl(im), std::log(4.0), 1e-15);
  EXPECT_NEAR(std::log(brute_imitative_z(im)), std::log(4.0), 1e-15);
}

TEST(Imitative, SingleVertex) {
  ImitativeModel im(MDModel::uniform(Graph::empty(1), 1, std::exp(0.3)), {});
  EXPECT_NEAR(log_imitative_partition_enum(im), 0.3, 1e-15);
  EXPECT_NEAR(log_imitative_partition_hl(im), 0.3, 1e-15);
}

TEST(Imitative, ZeroCouplingReducesToPureModel) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 20; ++t) {
    MDModel m = random_model(8, 0.5, rng);
    ImitativeModel im(m, std::vector<double>(m.graph().num_edges(), 0.0));
    EXPECT_NEAR(log_imitative_partition_enum(im), log_partition_enum(m), 1e-12);
    EXPECT_NEAR(log_imitative_partition_hl(im), log_partition_hl(m), 1e-12);
  }
}

TEST(Imitative, RecursionMatchesOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uj(-1.5, 1.5);
  auto check = [&](const MDModel& m) {
    std::vector<double> j(m.graph().num_edges());
    for (auto& v : j) v = uj(rng);
    ImitativeModel im(m, j);
    const double e = log_imitative_partition_enum(im);
    EXPECT_NEAR(log_imitative_partition_hl(im), e, 1e-10 * std::max(1.0, std::abs(e)));
    if (m.graph().num_edges() <= 16) EXPECT_NEAR(e, std::log(brute_imitative_z(im)), 1e-10);
  };
  check(MDModel::uniform(Graph::complete(3), 1, 1));
  check(MDModel::uniform(Graph::star(3), 1, 1));
  for (int t = 0; t < 40; ++t) check(random_model(1 + t % 10, 0.5, rng));
}

TEST(BallBounds, PathCenter) {
  MDModel m = MDModel::uniform(Graph::path(5), 1, 1);
  auto b = ball_monomer_bounds(m, 2, 0);
  EXPECT_TRUE(b.sandwiched);
  EXPECT_LE(b.lower, b.exact);
  EXPECT_GE(b.upper, b.exact);
  // r = 0: upper from the isolated root, lower from P3 centred at the root.
  EXPECT_NEAR(b.upper, 1.0, 1e-15);
  EXPECT_NEAR(b.lower, 1.0 / 3.0, 1e-15);
  // P5: Z = 8, Z_{P5 - center} = Z_{P2}^2 = 4.
  EXPECT_NEAR(b.exact, 0.5, 1e-15);
}

TEST(BallBounds, WholeTreeIsExact) {
  MDModel m = MDModel::uniform(Graph::star(3), 1, 1);
  auto b = ball_monomer_bounds(m, 0, 5);
  EXPECT_NEAR(b.lower, b.exact, 1e-15);
  EXPECT_NEAR(b.upper, b.exact, 1e-15);
}

TEST(BallBounds, StarRootUpperIsOne) {
  auto b = ball_monomer_bounds(MDModel::uniform(Graph::star(4), 1, 1), 0, 0);
  EXPECT_NEAR(b.upper, 1.0, 1e-15);
  EXPECT_NEAR(b.exact, 0.2, 1e-15);
  EXPECT_TRUE(b.sandwiched);
}

TEST(BallBounds, NonTreeBallRefused) {
  EXPECT_THROW(ball_monomer_bounds(MDModel::uniform(Graph::cycle(4), 1, 1), 0, 1), InvalidInputError);
}

TEST(BallBounds, RandomTrees) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uw(0.1, 2.0), ux(0.2, 2.0);
  for (int t = 0; t < 50; ++t) {
    const int n = 4 + t % 12;
    std::vector<Edge> edges;
    for (int v = 1; v < n; ++v) edges.push_back({std::uniform_int_distribution<int>(0, v - 1)(rng), v});
    Graph g(n, edges);
    std::vector<double> w(g.num_edges()), x(n);
    for (auto& v : w) v = uw(rng);
    for (auto& v : x) v = ux(rng);
    MDModel m(g, w, x);
    for (int r = 0; r <= 2; ++r) {
      auto b = ball_monomer_bounds(m, t % n, r);
      EXPECT_TRUE(b.sandwiched) << t << " r=" << r;
    }
  }
}

TEST(GraphIo, EdgeListAndJson) {
  std::istringstream in("# triangle\n3\n0 1\n1 2 0.5\n\n0 2 2\n");
  ModelFile f = read_edge_list(in, 1.5);
  EXPECT_EQ(f.model.num_vertices(), 3);
  EXPECT_EQ(f.model.w(1), 0.5);
  EXPECT_EQ(f.model.x(2), 1.5);
  EXPECT_FALSE(f.imitative());

  ModelFile j = parse_model_json(R"({"n":2,"edges":[[0,1,1]],"j":[[0,1,0.6931471805599453]]})");
  ASSERT_TRUE(j.imitative());
  EXPECT_NEAR(log_imitative_partition_enum(j.imitative_model()), std::log(4.0), 1e-12);

  ModelFile back = parse_model_json(to_json(f));
  EXPECT_EQ(back.model.graph().edges(), f.model.graph().edges());
  EXPECT_EQ(back.model.w(2), 2.0);

  EXPECT_THROW(parse_model_json(R"({"n":2,"edges":[[0,1]],"colour":1})"), InvalidInputError);
  EXPECT_THROW(parse_model_json(R"({"n":3,"edges":[[0,1],[1,2]],"j":[[0,1,1]]})"), InvalidInputError);
  std::istringstream bad("2\n0 5\n");
  EXPECT_THROW(read_edge_list(bad), InvalidInputError);
}

}  // namespace
}  // namespace mdm
