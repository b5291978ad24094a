#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "mdm/graph.hpp"

namespace mdm {

inline constexpr int kHafnianCap = 20;
inline constexpr int kImitativeGaussianCap = 12;
inline constexpr double kPsdTolerance = 1e-10;

/// Symmetric covariance matrix with off-diagonal entries w_ij.
class CovMatrix {
 public:
  CovMatrix() = default;
  /// Throws InvalidInputError when `w` is not square and symmetric.
  explicit CovMatrix(Eigen::MatrixXd w);

  int size() const noexcept { return static_cast<int>(w_.rows()); }
  const Eigen::MatrixXd& matrix() const noexcept { return w_; }
  double operator()(int i, int j) const { return w_(i, j); }

  double min_eigenvalue() const;
  bool is_psd(double tol = kPsdTolerance) const { return size() == 0 || min_eigenvalue() >= -tol; }

  /// Symmetric square root S (S S = W) with eigenvalues clipped at zero.
  /// Throws NumericalError if W is not PSD within tolerance.
  Eigen::MatrixXd sqrt() const;

 private:
  Eigen::MatrixXd w_;
};

/// W_ij = w_ij off the diagonal, W_ii = sum_j w_ij (diagonally dominant).
CovMatrix psd_diagonal(const Graph& g, std::span<const double> w);
CovMatrix psd_diagonal(const MDModel& model);

/// Same off-diagonal entries with an explicit diagonal.
CovMatrix covariance_with_diagonal(const Graph& g, std::span<const double> w, std::span<const double> diagonal);

/// Sum over pair partitions of A of prod W_ij (hafnian of W restricted to A).
double wick_pairing_sum(const CovMatrix& w, std::span<const int> subset);

/// Hafnians of W_A for every subset A of {0..n-1}, indexed by bitmask.
std::vector<double> all_subset_hafnians(const CovMatrix& w);

/// log of sum_A haf(W_A) prod_{i not in A} x_i; equals log Z of the model.
double log_gaussian_partition_exact(const MDModel& model);
double log_gaussian_partition_exact(const MDModel& model, const CovMatrix& w);

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;
};

struct McOptions {
  std::uint64_t samples = 100000;
  std::uint64_t seed = 0;
  int threads = 1;
  std::uint64_t chunk_size = 8192;
};

/// Sample mean of prod_i (xi_i + x_i) with xi ~ N(0, W).
McEstimate gaussian_partition_mc(const MDModel& model, const McOptions& opts);
McEstimate gaussian_partition_mc(const MDModel& model, const CovMatrix& w, const McOptions& opts);

/// Ratio estimator E[x_i prod_{k != i}(xi_k + x_k)] / E[prod_k (xi_k + x_k)]
/// on one shared sample set; standard error by the delta method.
McEstimate monomer_prob_gaussian(const MDModel& model, Vertex i, const McOptions& opts);

/// log of sum_A haf(W_A) prod_{i not in A} x_i prod_{ij in E, same side of A} e^{J_ij}.
double log_imitative_gaussian_enum(const ImitativeModel& model);

}  // namespace mdm
