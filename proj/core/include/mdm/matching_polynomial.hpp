#pragma once

#include <complex>
#include <span>
#include <vector>

#include "mdm/graph.hpp"

namespace mdm {

inline constexpr int kPolynomialCap = 24;

/// Z_G(x) = sum_k c_k x^k for a uniform monomer activity x; c_k sums the
/// weights of matchings leaving k monomers.
struct MatchingPolynomial {
  std::vector<double> coeffs;  // c_0 .. c_N

  int degree() const noexcept { return static_cast<int>(coeffs.size()) - 1; }
  double operator()(double x) const;
  std::complex<double> operator()(std::complex<double> x) const;
};

MatchingPolynomial polynomial_coeffs(const Graph& g, std::span<const double> w, int cap = kPolynomialCap);

/// All roots of p (with multiplicity), sorted by imaginary then real part.
/// When p has the parity structure of a matching polynomial the roots are
/// found as i*y with y the eigenvalues of a symmetric tridiagonal matrix
/// whose characteristic polynomial is Q(y) = i^{-N} p(iy); otherwise (or if
/// Q turns out not to be real-rooted) from the companion matrix. Every root
/// must satisfy |p(r)| <= tol * sum_k |c_k| |r|^k or NumericalError is thrown.
std::vector<std::complex<double>> polynomial_roots(const MatchingPolynomial& p, double tol = 1e-9);

struct ImaginaryReport {
  double max_abs_real = 0.0;
  double max_abs_root = 0.0;
  bool pass = false;
};

/// Passes iff max |Re r| < tol * (1 + max |r|).
ImaginaryReport certify_imaginary(const MatchingPolynomial& p, double tol = 1e-8);
ImaginaryReport certify_imaginary(const Graph& g, std::span<const double> w, double tol = 1e-8);

struct InterlacingReport {
  std::vector<double> outer;  // sorted imaginary parts of the zeros of Z_G
  std::vector<double> inner;  // ... of Z_{G-i}
  double min_gap = 0.0;       // smallest a'_k - a_k or a_{k+1} - a'_k
  bool weak = false;          // all gaps >= -tol
  bool strict = false;        // all gaps > 1e-9
};

InterlacingReport certify_interlacing(const Graph& g, std::span<const double> w, Vertex i, double tol = 1e-8);

}  // namespace mdm
