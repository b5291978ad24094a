#include "mdm/matching_polynomial.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <unordered_map>

#include <Eigen/Dense>

#include "mdm/error.hpp"

namespace mdm {

double MatchingPolynomial::operator()(double x) const {
  double acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

std::complex<double> MatchingPolynomial::operator()(std::complex<double> x) const {
  std::complex<double> acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

namespace {

// Neumaier-compensated accumulator.
struct CompensatedSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double v) {
    const double t = sum + v;
    c += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

class PolynomialRecursion {
 public:
  PolynomialRecursion(const Graph& g, std::span<const double> w) : n_(g.num_vertices()) {
    const auto n = static_cast<std::size_t>(n_);
    w_.assign(n * n, 0.0);
    adj_.assign(n, 0u);
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
      if (w[e] <= 0.0) continue;
      const auto [u, v] = g.edge(e);
      w_[static_cast<std::size_t>(u) * n + static_cast<std::size_t>(v)] = w[e];
      w_[static_cast<std::size_t>(v) * n + static_cast<std::size_t>(u)] = w[e];
      adj_[static_cast<std::size_t>(u)] |= 1u << v;
      adj_[static_cast<std::size_t>(v)] |= 1u << u;
    }
  }

  const std::vector<double>& coeffs(std::uint32_t mask) {
    if (const auto it = memo_.find(mask); it != memo_.end()) return it->second;
    const int size = std::popcount(mask);
    std::vector<double> out(static_cast<std::size_t>(size) + 1, 0.0);
    if (mask == 0) {
      out[0] = 1.0;
      return memo_.emplace(mask, std::move(out)).first->second;
    }
    const std::uint32_t comp = component_of(mask);
    if (comp != mask) {
      const std::vector<double> a = coeffs(comp);
      const std::vector<double> b = coeffs(mask & ~comp);
      std::vector<CompensatedSum> acc(out.size());
      for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) acc[i + j].add(a[i] * b[j]);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = acc[k].value();
    } else {
      int pivot = -1, best = -1;
      for (std::uint32_t m = mask; m; m &= m - 1) {
        const int v = std::countr_zero(m);
        const int d = std::popcount(adj_[static_cast<std::size_t>(v)] & mask);
        if (d > best) {
          best = d;
          pivot = v;
        }
      }
      const std::uint32_t rest = mask & ~(1u << pivot);
      std::vector<CompensatedSum> acc(out.size());
      const std::vector<double> mono = coeffs(rest);
      for (std::size_t k = 0; k < mono.size(); ++k) acc[k + 1].add(mono[k]);
      for (std::uint32_t nb = adj_[static_cast<std::size_t>(pivot)] & rest; nb; nb &= nb - 1) {
        const int j = std::countr_zero(nb);
        const double wij = w_[static_cast<std::size_t>(pivot) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(j)];
        const std::vector<double>& sub = coeffs(rest & ~(1u << j));
        for (std::size_t k = 0; k < sub.size(); ++k) acc[k].add(wij * sub[k]);
      }
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = acc[k].value();
    }
    return memo_.emplace(mask, std::move(out)).first->second;
  }

 private:
  std::uint32_t component_of(std::uint32_t mask) const {
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

  int n_;
  std::vector<double> w_;
  std::vector<std::uint32_t> adj_;
  std::unordered_map<std::uint32_t, std::vector<double>> memo_;
};

using Poly = std::vector<double>;  // ascending coefficients

double scale_at(const Poly& p, double y) {
  double s = 0.0, pw = 1.0;
  for (double c : p) {
    s += std::abs(c) * pw;
    pw *= std::abs(y);
  }
  return s;
}

double eval(const Poly& p, double y) {
  double acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * y + *it;
  return acc;
}

// Real roots of a monic real polynomial whose roots are all real. Builds the
// Jacobi matrix from the Euclidean sequence of (q, q'/deg); a vanishing
// remainder signals a common factor with q', whose roots are found the same
// way. Returns false if some remainder has the wrong sign (q not real-rooted).
bool real_rooted_roots(Poly q, std::vector<double>& roots) {
  const int d = static_cast<int>(q.size()) - 1;
  if (d <= 0) return true;
  if (d == 1) {
    roots.push_back(-q[0]);
    return true;
  }
  Poly hi = q;
  Poly lo(static_cast<std::size_t>(d));
  for (int k = 1; k <= d; ++k) lo[static_cast<std::size_t>(k - 1)] = q[static_cast<std::size_t>(k)] * k / d;
  std::vector<double> alpha, beta;
  while (true) {
    const int k = static_cast<int>(hi.size()) - 1;  // deg hi; deg lo = k - 1
    const double a = (k >= 2 ? lo[static_cast<std::size_t>(k - 2)] : 0.0) - hi[static_cast<std::size_t>(k - 1)];
    alpha.push_back(a);
    if (k == 1) break;
    // r = (y - a) lo - hi, degree <= k - 2
    Poly r(static_cast<std::size_t>(k) + 1, 0.0);
    for (int j = 0; j < k; ++j) {
      r[static_cast<std::size_t>(j) + 1] += lo[static_cast<std::size_t>(j)];
      r[static_cast<std::size_t>(j)] -= a * lo[static_cast<std::size_t>(j)];
    }
    for (int j = 0; j <= k; ++j) r[static_cast<std::size_t>(j)] -= hi[static_cast<std::size_t>(j)];
    r.resize(static_cast<std::size_t>(k) - 1);
    const double b = r.back();
    double lo_scale = 0.0, hi_scale = 0.0, r_scale = 0.0;
    for (double c : lo) lo_scale = std::max(lo_scale, std::abs(c));
    for (double c : hi) hi_scale = std::max(hi_scale, std::abs(c));
    for (double c : r) r_scale = std::max(r_scale, std::abs(c));
    if (r_scale <= 1e-10 * (hi_scale + (1.0 + std::abs(a)) * lo_scale)) {
      // lo divides hi: the block so far carries the roots of hi/lo, lo is the
      // repeated part of q.
      if (!real_rooted_roots(lo, roots)) return false;
      break;
    }
    if (!(b > 0.0)) return false;
    beta.push_back(b);
    for (double& c : r) c /= b;
    hi = std::move(lo);
    lo = std::move(r);
  }
  const auto m = static_cast<Eigen::Index>(alpha.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) jac(i, i) = alpha[static_cast<std::size_t>(i)];
  for (Eigen::Index i = 0; i + 1 < m; ++i) jac(i, i + 1) = jac(i + 1, i) = std::sqrt(beta[static_cast<std::size_t>(i)]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac, Eigen::EigenvaluesOnly);
  for (Eigen::Index i = 0; i < m; ++i) roots.push_back(es.eigenvalues()(i));
  return true;
}

// Newton steps that are kept only while the residual shrinks.
template <class T, class Eval>
T polish(T r, Eval&& f_and_df) {
  auto [f, df] = f_and_df(r);
  for (int it = 0; it < 8 && std::abs(df) > 0.0; ++it) {
    const T next = r - f / df;
    const auto [fn, dfn] = f_and_df(next);
    if (!(std::abs(fn) < std::abs(f))) break;
    r = next;
    f = fn;
    df = dfn;
  }
  return r;
}

std::string root_diagnostics(const MatchingPolynomial& p, std::complex<double> r, double residual) {
  std::ostringstream os;
  os.precision(17);
  os << "polynomial_roots: root " << r.real() << (r.imag() < 0 ? "" : "+") << r.imag() << "i of degree-" << p.degree()
     << " polynomial has relative residual " << residual;
  return os.str();
}

}  // namespace

MatchingPolynomial polynomial_coeffs(const Graph& g, std::span<const double> w, int cap) {
  if (w.size() != g.num_edges()) throw InvalidInputError("one weight per edge required");
  for (double v : w)
    if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInputError("dimer weights must be finite and >= 0");
  const int n = g.num_vertices();
  if (n > std::min(cap, 30))
    throw SizeCapError("polynomial_coeffs: graph has " + std::to_string(n) + " vertices, cap is " + std::to_string(cap));
  PolynomialRecursion rec(g, w);
  const std::uint32_t all = n == 0 ? 0u : static_cast<std::uint32_t>((std::uint64_t{1} << n) - 1);
  return {rec.coeffs(all)};
}

std::vector<std::complex<double>> polynomial_roots(const MatchingPolynomial& p, double tol) {
  if (p.degree() < 1) throw InvalidInputError("polynomial_roots: degree must be >= 1");
  const double lead = p.coeffs.back();
  if (lead == 0.0) throw InvalidInputError("polynomial_roots: leading coefficient is zero");
  std::vector<std::complex<double>> roots;
  std::size_t zeros = 0;
  while (zeros < p.coeffs.size() && p.coeffs[zeros] == 0.0) ++zeros;
  for (std::size_t k = 0; k < zeros; ++k) roots.emplace_back(0.0, 0.0);
  Poly r(p.coeffs.begin() + static_cast<std::ptrdiff_t>(zeros), p.coeffs.end());
  for (double& c : r) c /= lead;
  const int d = static_cast<int>(r.size()) - 1;

  bool parity = true;
  for (int k = 0; k <= d; ++k)
    if ((d - k) % 2 != 0 && r[static_cast<std::size_t>(k)] != 0.0) parity = false;

  bool solved = false;
  if (d > 0 && parity) {
    // Q(y) = sum_k c_k (-1)^{(d-k)/2} y^k, real roots y give zeros i*y.
    Poly q(r.size());
    for (int k = 0; k <= d; ++k) q[static_cast<std::size_t>(k)] = ((d - k) / 2 % 2 == 0 ? 1.0 : -1.0) * r[static_cast<std::size_t>(k)];
    std::vector<double> ys;
    if (real_rooted_roots(q, ys) && static_cast<int>(ys.size()) == d) {
      Poly dq(q.size() - 1);
      for (std::size_t k = 1; k < q.size(); ++k) dq[k - 1] = q[k] * static_cast<double>(k);
      for (double y : ys) {
        const double yp = polish(y, [&](double t) { return std::pair{eval(q, t), eval(dq, t)}; });
        roots.emplace_back(0.0, yp);
      }
      solved = true;
    }
  }
  if (!solved && d > 0) {
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d, d);
    for (int i = 1; i < d; ++i) comp(i, i - 1) = 1.0;
    for (int i = 0; i < d; ++i) comp(i, d - 1) = -r[static_cast<std::size_t>(i)];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    if (es.info() != Eigen::Success) throw NumericalError("polynomial_roots: companion eigenvalue iteration did not converge");
    MatchingPolynomial monic{r};
    MatchingPolynomial dmonic;
    for (std::size_t k = 1; k < r.size(); ++k) dmonic.coeffs.push_back(r[k] * static_cast<double>(k));
    for (Eigen::Index i = 0; i < d; ++i) {
      const std::complex<double> z0 = es.eigenvalues()(i);
      roots.push_back(polish(z0, [&](std::complex<double> t) { return std::pair{monic(t), dmonic(t)}; }));
    }
  }

  for (const auto& z : roots) {
    const double scale = std::max(scale_at(p.coeffs, std::abs(z)), std::numeric_limits<double>::min());
    const double residual = std::abs(p(z)) / scale;
    if (!(residual <= tol)) throw NumericalError(root_diagnostics(p, z, residual));
  }
  std::sort(roots.begin(), roots.end(), [](const auto& a, const auto& b) {
    return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
  });
  return roots;
}

ImaginaryReport certify_imaginary(const MatchingPolynomial& p, double tol) {
  ImaginaryReport rep;
  for (const auto& z : polynomial_roots(p)) {
    rep.max_abs_real = std::max(rep.max_abs_real, std::abs(z.real()));
    rep.max_abs_root = std::max(rep.max_abs_root, std::abs(z));
  }
  rep.pass = rep.max_abs_real < tol * (1.0 + rep.max_abs_root);
  return rep;
}

ImaginaryReport certify_imaginary(const Graph& g, std::span<const double> w, double tol) {
  return certify_imaginary(polynomial_coeffs(g, w), tol);
}

InterlacingReport certify_interlacing(const Graph& g, std::span<const double> w, Vertex i, double tol) {
  if (i < 0 || i >= g.num_vertices()) throw InvalidInputError("certify_interlacing: vertex out of range");
  if (w.size() != g.num_edges()) throw InvalidInputError("one weight per edge required");
  const MDModel model(g, std::vector<double>(w.begin(), w.end()), std::vector<double>(static_cast<std::size_t>(g.num_vertices()), 1.0));
  const MDModel minus = model.without_vertex(i);
  InterlacingReport rep;
  for (const auto& z : polynomial_roots(polynomial_coeffs(g, w))) rep.outer.push_back(z.imag());
  if (minus.num_vertices() > 0)
    for (const auto& z : polynomial_roots(polynomial_coeffs(minus.graph(), minus.dimer_weights()))) rep.inner.push_back(z.imag());
  std::sort(rep.outer.begin(), rep.outer.end());
  std::sort(rep.inner.begin(), rep.inner.end());
  rep.min_gap = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rep.inner.size(); ++k) {
    rep.min_gap = std::min(rep.min_gap, rep.inner[k] - rep.outer[k]);
    rep.min_gap = std::min(rep.min_gap, rep.outer[k + 1] - rep.inner[k]);
  }
  rep.weak = rep.min_gap >= -tol;
  rep.strict = rep.min_gap > 1e-9;
  return rep;
}

}  // namespace mdm
