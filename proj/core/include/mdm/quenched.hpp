#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mdm/rng.hpp"

namespace mdm {

/// Law of a strictly positive random monomer activity.
class ActivityDistribution {
 public:
  enum class Kind { degenerate, two_point, lognormal, empirical };

  static ActivityDistribution degenerate(double x);
  /// x1 with probability p, x2 otherwise.
  static ActivityDistribution two_point(double x1, double x2, double p);
  /// exp(mu + sigma Z), Z standard normal.
  static ActivityDistribution lognormal(double mu, double sigma);
  static ActivityDistribution empirical(std::vector<double> samples);
  /// `degenerate:1.0`, `twopoint:1.0,2.0,0.5`, `lognormal:0.0,0.5`,
  /// `empirical:@file.csv` (numbers separated by commas or whitespace).
  static ActivityDistribution parse(const std::string& spec);

  Kind kind() const noexcept { return kind_; }
  std::span<const double> params() const noexcept { return params_; }
  std::string describe() const;

  /// E[f(x)]: exact for degenerate/two-point/empirical, 64-node
  /// Gauss-Hermite in log x for lognormal.
  double expectation(const std::function<double(double)>& f) const;
  double sample(Engine& eng) const;

 private:
  Kind kind_ = Kind::degenerate;
  std::vector<double> params_;
};

/// Nodes and weights of the n-point Gauss-Hermite rule (weight e^{-z^2}).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussHermite gauss_hermite(int n);

struct ERParams {
  double c = 1.0;  // mean degree
  double x = 1.0;  // monomer activity

  ERParams() = default;
  ERParams(double c, double x);
};

inline constexpr std::size_t kMinPopulation = 1000;

struct Population {
  std::vector<double> values;
  int generation = 0;

  Population() = default;
  /// K copies of `init`; K >= 1000 and init in [0, 1].
  Population(std::size_t K, double init);
  bool even() const noexcept { return generation % 2 == 0; }
  double mean() const;
  double std_error() const;
};

struct PopulationOptions {
  std::uint64_t seed = 0;
  int threads = 1;
  std::size_t chunk_size = 8192;
};

/// One sweep of M <- x^2 / (x^2 + sum_{i <= Delta} M_i), Delta ~ Poisson(c),
/// M_i uniform draws from the previous generation. Chunk j of generation g
/// uses the stream (seed, g, j).
Population population_step(const Population& pop, const ERParams& params, const PopulationOptions& opts);

struct GenerationMean {
  int generation = 0;
  double mean = 0.0;
  double std_error = 0.0;
};

struct ErDensityReport {
  double estimate = 0.0;  // population mean after r steps from M = 1
  double std_error = 0.0;
  std::vector<GenerationMean> generations;  // 1..r
  /// E[M(3)] <= E[M(5)] <= E[M(6)] <= E[M(4)] within 3 combined standard
  /// errors; only evaluated when r >= 6.
  bool ladder_checked = false;
  bool ladder_ok = false;
};

ErDensityReport er_monomer_density(const ERParams& params, int r, std::size_t K, const PopulationOptions& opts);

struct GapContraction {
  std::vector<double> gaps;        // |E M(k+1) - E M(k)|, k = 0..
  std::vector<double> gap_errors;
  double two_step_ratio = 0.0;     // gaps[2] / gaps[0]
  double two_step_error = 0.0;
  double bound = 0.0;              // c^2 / x^4
  bool within_bound = false;       // ratio <= bound + 3 error
};

GapContraction er_gap_contraction(const ERParams& params, std::size_t K, const PopulationOptions& opts);

struct ErPressureReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double last_gap = 0.0;      // |E M(r) - E M(r-1)|
  double last_gap_error = 0.0;
  bool converged = false;     // last_gap < 3 last_gap_error
};

/// E[log(x / M)] - (c/2) E[log(1 + M1 M2 / x^2)] over the population after
/// r steps, with M, M1, M2 independent draws.
ErPressureReport er_pressure(const ERParams& params, int r, std::size_t K, const PopulationOptions& opts);

struct QuenchedOracle {
  double mean = 0.0;
  double std_error = 0.0;
  double std_dev = 0.0;  // per-graph spread
  int samples = 0;
};

inline constexpr int kErOracleCap = 16;

/// Average of (1/N) log Z over G(N, c/N) samples with unit dimer weights
/// and uniform activity x, each Z exact. Sample s uses the stream (seed, s).
QuenchedOracle er_quenched_oracle(int N, const ERParams& params, int samples, const PopulationOptions& opts);

/// Unique root in [0, w E[1/x]] of xi = E[w / (xi + x)].
double rf_fixed_point(double w, const ActivityDistribution& dist);

struct RfSolution {
  double xi = 0.0;
  double pressure = 0.0;  // -xi^2/(2w) + E[log(xi + x)]
  double density = 0.0;   // xi^2 / (2w)
};

RfSolution rf_pressure_and_density(double w, const ActivityDistribution& dist);

inline constexpr std::size_t kRfQuadratureCap = 10000;

/// log Z of K_N with dimer weights w/N and activities x, from the 1-d
/// representation sqrt(N/(2 pi w)) int e^{-N xi^2/(2w)} prod_i (xi + x_i) dxi.
double rf_partition_quadrature(double w, std::span<const double> x, double tol = 1e-11);

struct SelfAveragingRow {
  int N = 0;
  double mean = 0.0;
  double std_dev = 0.0;
};

/// p_N = (1/N) log Z per replica, activities i.i.d. from `dist`; replica r
/// at size N uses the stream (seed, N, r).
std::vector<SelfAveragingRow> self_averaging_experiment(std::span<const int> Ns, const ActivityDistribution& dist,
                                                        double w, int reps, std::uint64_t seed, int threads = 1);

}  // namespace mdm
