#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdm/meanfield.hpp"
#include "mdm/reference_values.hpp"

namespace mdm {

inline constexpr std::int64_t kMaxPmfSize = 10'000'000;

/// Distribution of the monomer number M_N of the mean-field model on K_N
/// (dimer weight 1/N, monomer activity e^h, imitation J/N per edge).
/// Support is M in {N mod 2, N mod 2 + 2, ..., N}.
struct FiniteNPmf {
  std::int64_t N = 0;
  std::vector<double> logw;  // unnormalized, indexed by k with M = N mod 2 + 2k

  std::size_t size() const noexcept { return logw.size(); }
  std::int64_t monomers(std::size_t k) const noexcept { return N % 2 + 2 * static_cast<std::int64_t>(k); }
  double log_z() const;
  std::vector<double> probabilities() const;
  /// E[M_N] / N.
  double mean_density() const;
};

/// log k! for k = 0..n, accumulated with compensated summation.
std::vector<double> log_factorials(std::int64_t n);

FiniteNPmf exact_pmf(std::int64_t N, double h, double J);

/// (1/N) log Z_N.
double finite_pressure(std::int64_t N, double h, double J);

struct LaplaceCheck {
  double value = 0.0;   // Z0_N exp(-N p0(h))
  double target = 0.0;  // 1 / sqrt(2 - g(h))
  double ratio = 0.0;
};

LaplaceCheck laplace_refinement_check(std::int64_t N, double h);

struct MixtureWeights {
  double m1 = 0.0, m2 = 0.0;
  double rho1 = 0.0, rho2 = 0.0;
};

/// rho_l proportional to (-lambda_l (2 - m_l))^{-1/2}; (h, J) must be a
/// coexistence point.
MixtureWeights mixture_weights(double h, double J);
MixtureWeights mixture_weights(const PsiAnalysis& a);
MixtureWeights mixture_weights(const CoexistencePoint& c);

struct LlnReport {
  PsiClass classification = PsiClass::unique;
  std::vector<double> limit_points;
  double outside_mass = 0.0;       // P(|M/N - m*| > eps), nearest limit point
  std::vector<double> basin_mass;  // coexistence only: masses split at the local minimizer
  std::vector<double> rho;         // coexistence only: predicted weights
};

LlnReport lln_check(std::int64_t N, double h, double J, double eps);

struct KsReport {
  double distance = 0.0;
  double location = 0.0;  // scaled atom where the sup is attained
};

struct CltReport {
  double m_star = 0.0;
  double sigma2 = 0.0;
  KsReport ks;
};

/// Kolmogorov distance between (M_N - N m*)/sqrt(N) and N(0, sigma^2);
/// sigma^2 = g'(h) at J = 0, else -1/lambda - 1/(2J).
CltReport clt_check(std::int64_t N, double h, double J);

/// Density proportional to exp(lambda x^4 / 24).
class QuarticLaw {
 public:
  explicit QuarticLaw(double lambda);

  double lambda() const noexcept { return lambda_; }
  /// C with C^{-1} = Gamma(1/4) / (2 a^{1/4}), a = -lambda/24.
  double normalization() const noexcept { return c_; }
  double density(double x) const;
  /// CDF by adaptive quadrature.
  double cdf(double x) const;

 private:
  double lambda_;
  double c_;
};

struct CriticalScalingReport {
  std::int64_t N = 0;
  KsReport quartic;   // (M_N - N m_c) / N^{3/4} against the quartic law
  KsReport gaussian;  // (M_N - N m_c) / N^{1/2} against a moment-matched Gaussian
  double gaussian_mean = 0.0;
  double gaussian_variance = 0.0;
};

CriticalScalingReport critical_scaling_check(std::int64_t N, const ReferenceValues& ref);

/// Scaled pressure pt_N(m) = -J m^2 + J/2 + p0_N(2 J m + h - J), with
/// p0_N(t) = (1/N) log Z0_N(t) from the exact J = 0 weights.
class ScaledPressure {
 public:
  ScaledPressure(std::int64_t N, double h, double J);
  double operator()(double m) const;
  double p0_n(double t) const;

 private:
  std::int64_t n_;
  double h_, J_;
  std::vector<double> base_;  // log weights at h = 0, J = 0
};

/// C_N exp(N pt_N(x / N^eta + u)) at each x, with C_N normalizing the
/// values to unit trapezoid mass over the given grid (grid must ascend).
std::vector<double> convolution_scaling_density(std::int64_t N, double h, double J, double eta, double u,
                                                std::span<const double> xs);

struct LimitLaw {
  enum class Kind { point_mass, two_point_mixture, gaussian, quartic } kind = Kind::point_mass;
  double m_star = 0.0;
  MixtureWeights mixture;
  double sigma2 = 0.0;
  double lambda_c = 0.0;
};

/// Fluctuation law of M_N at (h, J): Gaussian in the uniqueness region,
/// quartic at the critical point, two-point mixture (of the density) on the
/// coexistence curve.
LimitLaw limit_law(double h, double J);

}  // namespace mdm
