#include "mdm/gaussian.hpp"

#include <bit>
#include <cmath>
#include <random>
#include <string>

#include "mdm/error.hpp"
#include "mdm/parallel.hpp"
#include "mdm/rng.hpp"

namespace mdm {

CovMatrix::CovMatrix(Eigen::MatrixXd w) : w_(std::move(w)) {
  if (w_.rows() != w_.cols()) throw InvalidInputError("covariance matrix must be square");
  for (Eigen::Index i = 0; i < w_.rows(); ++i)
    for (Eigen::Index j = 0; j < i; ++j)
      if (w_(i, j) != w_(j, i)) throw InvalidInputError("covariance matrix must be symmetric");
}

double CovMatrix::min_eigenvalue() const {
  if (size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w_, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Eigen::MatrixXd CovMatrix::sqrt() const {
  if (size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w_);
  Eigen::VectorXd lambda = es.eigenvalues();
  if (lambda.minCoeff() < -kPsdTolerance)
    throw NumericalError("covariance matrix is not positive semidefinite (min eigenvalue " +
                         std::to_string(lambda.minCoeff()) + ")");
  lambda = lambda.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
}

CovMatrix covariance_with_diagonal(const Graph& g, std::span<const double> w, std::span<const double> diagonal) {
  const int n = g.num_vertices();
  if (w.size() != g.num_edges()) throw InvalidInputError("one weight per edge required");
  if (diagonal.size() != static_cast<std::size_t>(n)) throw InvalidInputError("one diagonal entry per vertex required");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const auto [u, v] = g.edge(e);
    m(u, v) = m(v, u) = w[e];
  }
  for (int i = 0; i < n; ++i) m(i, i) = diagonal[static_cast<std::size_t>(i)];
  return CovMatrix(std::move(m));
}

CovMatrix psd_diagonal(const Graph& g, std::span<const double> w) {
  if (w.size() != g.num_edges()) throw InvalidInputError("one weight per edge required");
  std::vector<double> diag(static_cast<std::size_t>(g.num_vertices()), 0.0);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (w[e] < 0.0) throw InvalidInputError("dimer weights must be >= 0");
    diag[static_cast<std::size_t>(g.edge(e).u)] += w[e];
    diag[static_cast<std::size_t>(g.edge(e).v)] += w[e];
  }
  return covariance_with_diagonal(g, w, diag);
}

CovMatrix psd_diagonal(const MDModel& model) { return psd_diagonal(model.graph(), model.dimer_weights()); }

namespace {

// haf[mask]: the lowest element of mask pairs with every other element.
std::vector<double> subset_hafnians(const Eigen::MatrixXd& w, int n) {
  const std::size_t count = std::size_t{1} << n;
  std::vector<double> haf(count, 0.0);
  haf[0] = 1.0;
  for (std::size_t mask = 1; mask < count; ++mask) {
    if (std::popcount(mask) % 2 != 0) continue;
    const int lo = std::countr_zero(mask);
    const std::size_t rest = mask & (mask - 1);
    double s = 0.0;
    for (std::size_t r = rest; r; r &= r - 1) {
      const int j = std::countr_zero(r);
      const double wij = w(lo, j);
      if (wij != 0.0) s += wij * haf[rest & ~(std::size_t{1} << j)];
    }
    haf[mask] = s;
  }
  return haf;
}

}  // namespace

double wick_pairing_sum(const CovMatrix& w, std::span<const int> subset) {
  const int k = static_cast<int>(subset.size());
  if (k > kHafnianCap) throw SizeCapError("wick_pairing_sum: subset has " + std::to_string(k) + " elements, cap is " +
                                          std::to_string(kHafnianCap));
  if (k % 2 != 0) return 0.0;
  Eigen::MatrixXd sub(k, k);
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) {
      const int i = subset[static_cast<std::size_t>(a)], j = subset[static_cast<std::size_t>(b)];
      if (i < 0 || i >= w.size() || j < 0 || j >= w.size()) throw InvalidInputError("wick_pairing_sum: index out of range");
      if (a != b && i == j) throw InvalidInputError("wick_pairing_sum: repeated index");
      sub(a, b) = w(i, j);
    }
  }
  return subset_hafnians(sub, k).back();
}

std::vector<double> all_subset_hafnians(const CovMatrix& w) {
  if (w.size() > kHafnianCap)
    throw SizeCapError("hafnian table: n = " + std::to_string(w.size()) + " exceeds cap " + std::to_string(kHafnianCap));
  return subset_hafnians(w.matrix(), w.size());
}

double log_gaussian_partition_exact(const MDModel& model, const CovMatrix& w) {
  const int n = model.num_vertices();
  if (w.size() != n) throw InvalidInputError("covariance size does not match the model");
  const auto haf = all_subset_hafnians(w);
  const std::size_t full = (std::size_t{1} << n) - 1;
  // prod of x over the complement, built incrementally from the lowest bit
  std::vector<double> xprod(std::size_t{1} << n, 1.0);
  for (std::size_t mask = 1; mask <= full; ++mask) {
    const int lo = std::countr_zero(mask);
    xprod[mask] = xprod[mask & (mask - 1)] * model.x(lo);
  }
  double z = 0.0;
  for (std::size_t a = 0; a <= full; ++a)
    if (haf[a] != 0.0) z += haf[a] * xprod[full & ~a];
  return std::log(z);
}

double log_gaussian_partition_exact(const MDModel& model) {
  return log_gaussian_partition_exact(model, psd_diagonal(model));
}

namespace {

// Running mean and co-moments of a pair (a, b); merged in chunk order.
struct PairStats {
  double n = 0.0;
  double mean_a = 0.0, mean_b = 0.0;
  double m2_a = 0.0, m2_b = 0.0, c_ab = 0.0;

  void add(double a, double b) {
    n += 1.0;
    const double da = a - mean_a;
    mean_a += da / n;
    const double db = b - mean_b;
    mean_b += db / n;
    m2_a += da * (a - mean_a);
    m2_b += db * (b - mean_b);
    c_ab += da * (b - mean_b);
  }

  void merge(const PairStats& o) {
    if (o.n == 0.0) return;
    if (n == 0.0) {
      *this = o;
      return;
    }
    const double total = n + o.n;
    const double da = o.mean_a - mean_a, db = o.mean_b - mean_b;
    const double f = n * o.n / total;
    m2_a += o.m2_a + da * da * f;
    m2_b += o.m2_b + db * db * f;
    c_ab += o.c_ab + da * db * f;
    mean_a += da * o.n / total;
    mean_b += db * o.n / total;
    n = total;
  }
};

// Draws xi ~ N(0, W) and reports (prod_{k != i}(xi_k + x_k) x_i, prod_k(xi_k + x_k));
// with i < 0 the first component is unused.
PairStats sample_products(const MDModel& model, const Eigen::MatrixXd& root, int i, const McOptions& opts) {
  if (opts.samples < 2) throw InvalidInputError("Monte Carlo needs at least 2 samples");
  if (opts.chunk_size == 0) throw InvalidInputError("chunk size must be positive");
  const int n = model.num_vertices();
  const std::uint64_t chunks = (opts.samples + opts.chunk_size - 1) / opts.chunk_size;
  std::vector<PairStats> partial(chunks);
  const auto x = model.monomer_activities();
  parallel_chunks(chunks, opts.threads, [&](std::size_t c) {
    Engine eng = make_engine(opts.seed, c);
    std::normal_distribution<double> normal;
    Eigen::VectorXd z(n), xi(n);
    const std::uint64_t begin = c * opts.chunk_size;
    const std::uint64_t end = std::min(opts.samples, begin + opts.chunk_size);
    PairStats s;
    for (std::uint64_t k = begin; k < end; ++k) {
      for (int v = 0; v < n; ++v) z(v) = normal(eng);
      xi.noalias() = root * z;
      double prod = 1.0, prod_without = 1.0;
      for (int v = 0; v < n; ++v) {
        const double f = xi(v) + x[static_cast<std::size_t>(v)];
        prod *= f;
        prod_without *= v == i ? x[static_cast<std::size_t>(v)] : f;
      }
      s.add(prod_without, prod);
    }
    partial[c] = s;
  });
  PairStats total;
  for (const auto& p : partial) total.merge(p);
  return total;
}

}  // namespace

McEstimate gaussian_partition_mc(const MDModel& model, const CovMatrix& w, const McOptions& opts) {
  if (w.size() != model.num_vertices()) throw InvalidInputError("covariance size does not match the model");
  const PairStats s = sample_products(model, w.sqrt(), -1, opts);
  return {s.mean_b, std::sqrt(s.m2_b / (s.n - 1.0) / s.n), static_cast<std::uint64_t>(s.n)};
}

McEstimate gaussian_partition_mc(const MDModel& model, const McOptions& opts) {
  return gaussian_partition_mc(model, psd_diagonal(model), opts);
}

McEstimate monomer_prob_gaussian(const MDModel& model, Vertex i, const McOptions& opts) {
  if (i < 0 || i >= model.num_vertices()) throw InvalidInputError("monomer_prob_gaussian: vertex out of range");
  const PairStats s = sample_products(model, psd_diagonal(model).sqrt(), i, opts);
  const double ratio = s.mean_a / s.mean_b;
  const double var_a = s.m2_a / (s.n - 1.0), var_b = s.m2_b / (s.n - 1.0), cov = s.c_ab / (s.n - 1.0);
  const double var_ratio = (var_a - 2.0 * ratio * cov + ratio * ratio * var_b) / (s.mean_b * s.mean_b * s.n);
  return {ratio, std::sqrt(std::max(0.0, var_ratio)), static_cast<std::uint64_t>(s.n)};
}

double log_imitative_gaussian_enum(const ImitativeModel& model) {
  const MDModel& base = model.base();
  const int n = base.num_vertices();
  if (n > kImitativeGaussianCap)
    throw SizeCapError("imitative Gaussian sum: n = " + std::to_string(n) + " exceeds cap " +
                       std::to_string(kImitativeGaussianCap));
  const auto haf = all_subset_hafnians(psd_diagonal(base));
  const Graph& g = base.graph();
  const std::size_t full = (std::size_t{1} << n) - 1;
  double z = 0.0;
  for (std::size_t a = 0; a <= full; ++a) {
    if (haf[a] == 0.0) continue;
    double log_term = 0.0;
    for (int v = 0; v < n; ++v)
      if (!(a >> v & 1u)) log_term += std::log(base.x(v));
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      const auto [u, v] = g.edge(e);
      if ((a >> u & 1u) == (a >> v & 1u)) log_term += model.coupling(e);
    }
    z += haf[a] * std::exp(log_term);
  }
  return std::log(z);
}

}  // namespace mdm
