#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "mdm/error.hpp"
#include "mdm/partition.hpp"
#include "mdm/quenched.hpp"

namespace mdm {
namespace {

const double kGolden = (std::sqrt(5.0) - 1) / 2;

TEST(GaussHermite, Moments) {
  const auto q = gauss_hermite(64);
  double m0 = 0, m2 = 0, m4 = 0;
  for (std::size_t k = 0; k < q.nodes.size(); ++k) {
    const double z = q.nodes[k];
    m0 += q.weights[k];
    m2 += q.weights[k] * z * z;
    m4 += q.weights[k] * z * z * z * z;
  }
  const double sp = std::sqrt(M_PI);
  EXPECT_NEAR(m0, sp, 1e-13);
  EXPECT_NEAR(m2, sp / 2, 1e-13);
  EXPECT_NEAR(m4, 3 * sp / 4, 1e-12);
}

TEST(Distribution, ParseAndExpectation) {
  auto d = ActivityDistribution::parse("degenerate:1.5");
  EXPECT_EQ(d.kind(), ActivityDistribution::Kind::degenerate);
  EXPECT_EQ(d.expectation([](double x) { return x; }), 1.5);

  auto t = ActivityDistribution::parse("twopoint:1,2,0.25");
  EXPECT_NEAR(t.expectation([](double x) { return x; }), 0.25 * 1 + 0.75 * 2, 1e-15);

  auto l = ActivityDistribution::parse("lognormal:0.2,0.5");
  EXPECT_NEAR(l.expectation([](double x) { return x; }), std::exp(0.2 + 0.125), 1e-12);
  EXPECT_NEAR(l.expectation([](double x) { return std::log(x); }), 0.2, 1e-12);

  auto e = ActivityDistribution::parse("empirical:1,2,3 6");
  EXPECT_NEAR(e.expectation([](double x) { return x; }), 3.0, 1e-15);

  const std::string path = ::testing::TempDir() + "mdm_empirical.csv";
  std::ofstream(path) << "0.5, 1.5\n";
  EXPECT_NEAR(ActivityDistribution::parse("empirical:@" + path).expectation([](double x) { return x; }), 1.0, 1e-15);

  EXPECT_THROW(ActivityDistribution::parse("gamma:1"), InvalidInputError);
  EXPECT_THROW(ActivityDistribution::parse("degenerate:-1"), InvalidInputError);
  EXPECT_THROW(ActivityDistribution::parse("twopoint:1,2,1.5"), InvalidInputError);
  EXPECT_THROW(ActivityDistribution::parse("empirical:1,x"), InvalidInputError);
}

TEST(Distribution, SamplingMatchesLaw) {
  auto l = ActivityDistribution::lognormal(0.0, 0.5);
  Engine eng = make_engine(1, 2);
  double s = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += std::log(l.sample(eng));
  EXPECT_NEAR(s / n, 0.0, 4 * 0.5 / std::sqrt(n));
}

TEST(Population, StepExamples) {
  const PopulationOptions o{7};
  Population p(2000, 1.0);
  auto zero_c = population_step(p, ERParams(0.0, 1.0), o);
  for (double v : zero_c.values) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(zero_c.generation, 1);

  auto step = population_step(p, ERParams(2.0, 1.0), o);
  for (double v : step.values) {
    const double k = 1 / v - 1;
    EXPECT_NEAR(k, std::round(k), 1e-9);
  }
  Population cur(5000, 1.0);
  for (int i = 0; i < 8; ++i) {
    cur = population_step(cur, ERParams(3.0, 0.7), o);
    for (double v : cur.values) {
      ASSERT_GE(v, 0.0);
      ASSERT_LE(v, 1.0);
    }
  }
  EXPECT_THROW(Population(999, 1.0), InvalidInputError);
}

TEST(Population, IndependentOfThreads) {
  Population p(20000, 1.0);
  auto a = population_step(p, ERParams(2, 1), PopulationOptions{3, 1, 1024});
  auto b = population_step(p, ERParams(2, 1), PopulationOptions{3, 4, 1024});
  EXPECT_EQ(a.values, b.values);
}

TEST(ErDensity, LadderAndLimits) {
  auto r = er_monomer_density(ERParams(2, 1), 6, 20000, PopulationOptions{1});
  ASSERT_TRUE(r.ladder_checked);
  EXPECT_TRUE(r.ladder_ok);
  ASSERT_EQ(r.generations.size(), 6u);
  // Odd depths sit below, even depths above.
  EXPECT_LT(r.generations[2].mean, r.generations[3].mean);
  EXPECT_GT(er_monomer_density(ERParams(2, 100), 6, 5000, PopulationOptions{1}).estimate, 0.999);
  EXPECT_NEAR(er_monomer_density(ERParams(1e-6, 1), 6, 5000, PopulationOptions{1}).estimate, 1.0, 1e-4);
}

TEST(ErDensity, GapContractsAboveThreshold) {
  auto gc = er_gap_contraction(ERParams(2, 2), 50000, PopulationOptions{2});
  EXPECT_NEAR(gc.bound, 0.25, 1e-15);
  EXPECT_LE(gc.two_step_ratio, gc.bound + 3 * gc.two_step_error);
  EXPECT_TRUE(gc.within_bound);
}

TEST(ErPressure, Limits) {
  for (double x : {0.5, 1.0, 3.0}) {
    auto r = er_pressure(ERParams(1e-8, x), 4, 2000, PopulationOptions{1});
    EXPECT_NEAR(r.estimate, std::log(x), 1e-6);
  }
  auto big = er_pressure(ERParams(2, 100), 6, 5000, PopulationOptions{1});
  EXPECT_NEAR(big.estimate - std::log(100.0), 0.0, 1e-3);
  EXPECT_THROW(er_pressure(ERParams(2, 1), 1, 2000, PopulationOptions{1}), InvalidInputError);
}

TEST(ErOracle, ZeroCouplingAndCap) {
  auto o = er_quenched_oracle(10, ERParams(0, 1.7), 20, PopulationOptions{1});
  EXPECT_NEAR(o.mean, std::log(1.7), 1e-15);
  EXPECT_EQ(o.std_dev, 0.0);
  EXPECT_THROW(er_quenched_oracle(17, ERParams(2, 1), 20, PopulationOptions{1}), SizeCapError);
}

TEST(ErOracle, SpreadShrinksWithN) {
  auto small = er_quenched_oracle(6, ERParams(2, 1), 400, PopulationOptions{4});
  auto large = er_quenched_oracle(14, ERParams(2, 1), 400, PopulationOptions{4});
  EXPECT_LT(large.std_dev, small.std_dev);
}

TEST(RandomField, DegenerateFixedPoint) {
  auto d = ActivityDistribution::degenerate(1.0);
  EXPECT_NEAR(rf_fixed_point(1.0, d), kGolden, 1e-10);
  for (double w : {0.1, 1.0, 7.0})
    for (double x : {0.3, 2.0}) {
      const double xi = rf_fixed_point(w, ActivityDistribution::degenerate(x));
      EXPECT_NEAR(xi, (-x + std::sqrt(x * x + 4 * w)) / 2, 1e-10);
    }
  EXPECT_NEAR(rf_pressure_and_density(1.0, d).density, kGolden * kGolden / 2, 1e-12);
  EXPECT_NEAR(rf_pressure_and_density(1.0, d).density, 0.190983, 1e-6);
}

TEST(RandomField, TwoPointAgainstBisection) {
  auto f = [](double xi) { return xi - 0.5 * (1 / (xi + 1) + 1 / (xi + 2)); };
  double a = 0, b = 1;
  for (int i = 0; i < 200; ++i) {
    const double m = (a + b) / 2;
    (f(m) < 0 ? a : b) = m;
  }
  const auto d = ActivityDistribution::two_point(1, 2, 0.5);
  const double xi = rf_fixed_point(1.0, d);
  EXPECT_NEAR(xi, (a + b) / 2, 1e-12);
  EXPECT_LT(std::abs(xi - d.expectation([&](double x) { return 1 / (xi + x); })), 1e-12);
}

TEST(RandomField, DensityIsLogDerivative) {
  for (auto spec : {"degenerate:1", "twopoint:0.5,3,0.3", "lognormal:0,0.5"}) {
    const auto d = ActivityDistribution::parse(spec);
    for (double w : {0.5, 1.0, 4.0}) {
      const double eps = 1e-5 * w;
      const double dp = (rf_pressure_and_density(w + eps, d).pressure - rf_pressure_and_density(w - eps, d).pressure) /
                        (2 * eps);
      const double dens = rf_pressure_and_density(w, d).density;
      EXPECT_NEAR(w * dp, dens, 1e-5 * dens) << spec << " w=" << w;
    }
  }
}

TEST(RandomField, SmallCouplingLimit) {
  const auto d = ActivityDistribution::lognormal(0.3, 0.4);
  auto s = rf_pressure_and_density(1e-10, d);
  EXPECT_NEAR(s.pressure, 0.3, 1e-4);
  EXPECT_NEAR(s.density, 0.0, 1e-9);
}

TEST(RfQuadrature, MatchesCompleteGraph) {
  EXPECT_NEAR(rf_partition_quadrature(2.0, std::vector<double>{1.0, 1.0}), std::log(2.0), 1e-10);
  std::mt19937_64 rng(51);
  std::uniform_real_distribution<double> ux(0.1, 3.0), uw(0.2, 3.0);
  for (int n = 1; n <= 12; ++n) {
    std::vector<double> x(n);
    for (auto& v : x) v = ux(rng);
    const double w = uw(rng);
    const Graph g = Graph::complete(n);
    const double ref = log_partition_hl(MDModel(g, std::vector<double>(g.num_edges(), w / n), x));
    EXPECT_NEAR(rf_partition_quadrature(w, x), ref, 1e-8 * std::max(1.0, std::abs(ref))) << n;
  }
}

TEST(SelfAveraging, DegenerateHasNoSpread) {
  const std::vector<int> Ns{20, 40};
  auto rows = self_averaging_experiment(Ns, ActivityDistribution::degenerate(1.3), 1.0, 30, 1);
  ASSERT_EQ(rows.size(), 2u);
  for (const auto& r : rows) EXPECT_EQ(r.std_dev, 0.0);
  EXPECT_THROW(self_averaging_experiment(Ns, ActivityDistribution::degenerate(1.3), 1.0, 29, 1),
               InvalidInputError);
}

}  // namespace
}  // namespace mdm
