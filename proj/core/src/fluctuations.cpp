#include "mdm/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mdm/error.hpp"
#include "mdm/logspace.hpp"

namespace mdm {

double FiniteNPmf::log_z() const { return log_sum_exp(logw); }

std::vector<double> FiniteNPmf::probabilities() const {
  const double lz = log_z();
  std::vector<double> p(logw.size());
  for (std::size_t k = 0; k < logw.size(); ++k) p[k] = std::exp(logw[k] - lz);
  return p;
}

double FiniteNPmf::mean_density() const {
  const auto p = probabilities();
  double s = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) s += p[k] * static_cast<double>(monomers(k));
  return s / static_cast<double>(N);
}

std::vector<double> log_factorials(std::int64_t n) {
  std::vector<double> lf(static_cast<std::size_t>(n) + 1, 0.0);
  double sum = 0.0, comp = 0.0;
  for (std::int64_t k = 2; k <= n; ++k) {
    const double v = std::log(static_cast<double>(k));
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
    lf[static_cast<std::size_t>(k)] = sum + comp;
  }
  return lf;
}

FiniteNPmf exact_pmf(std::int64_t N, double h, double J) {
  if (N < 1) throw InvalidInputError("exact_pmf: N must be >= 1");
  if (N > kMaxPmfSize) throw SizeCapError("exact_pmf: N = " + std::to_string(N) + " exceeds cap " + std::to_string(kMaxPmfSize));
  if (!std::isfinite(h) || !std::isfinite(J)) throw InvalidInputError("exact_pmf: h and J must be finite");
  const auto lf = log_factorials(N);
  const double nd = static_cast<double>(N);
  const double log_n = std::log(nd), log_2 = std::numbers::ln2;
  FiniteNPmf pmf;
  pmf.N = N;
  pmf.logw.resize(static_cast<std::size_t>(N / 2) + 1);
  for (std::size_t k = 0; k < pmf.logw.size(); ++k) {
    const std::int64_t m = pmf.monomers(k);
    const std::int64_t d = (N - m) / 2;
    const double dd = static_cast<double>(d), md = static_cast<double>(m);
    double lw = lf[static_cast<std::size_t>(N)] - lf[static_cast<std::size_t>(m)] - lf[static_cast<std::size_t>(d)] -
                dd * (log_2 + log_n) + h * md;
    if (J != 0.0) {
      const double same = 0.5 * md * (md - 1.0) + 0.5 * (nd - md) * (nd - md - 1.0);
      lw += J / nd * same;
    }
    pmf.logw[k] = lw;
  }
  return pmf;
}

double finite_pressure(std::int64_t N, double h, double J) { return exact_pmf(N, h, J).log_z() / static_cast<double>(N); }

LaplaceCheck laplace_refinement_check(std::int64_t N, double h) {
  LaplaceCheck c;
  c.value = std::exp(exact_pmf(N, h, 0.0).log_z() - static_cast<double>(N) * p0(h));
  c.target = 1.0 / std::sqrt(2.0 - g(h));
  c.ratio = c.value / c.target;
  return c;
}

MixtureWeights mixture_weights(const PsiAnalysis& a) {
  if (a.classification != PsiClass::coexistence || a.maximizers.size() != 2)
    throw InvalidInputError("mixture_weights: (h, J) is not on the coexistence curve");
  MixtureWeights w;
  w.m1 = a.maximizers[0];
  w.m2 = a.maximizers[1];
  const double b1 = 1.0 / std::sqrt(-a.lambda2[0] * (2.0 - w.m1));
  const double b2 = 1.0 / std::sqrt(-a.lambda2[1] * (2.0 - w.m2));
  w.rho1 = b1 / (b1 + b2);
  w.rho2 = 1.0 - w.rho1;
  return w;
}

MixtureWeights mixture_weights(const CoexistencePoint& c) {
  MixtureWeights w;
  w.m1 = c.m1;
  w.m2 = c.m2;
  const double b1 = 1.0 / std::sqrt(-psi_d2(c.m1, c.h, c.J) * (2.0 - c.m1));
  const double b2 = 1.0 / std::sqrt(-psi_d2(c.m2, c.h, c.J) * (2.0 - c.m2));
  w.rho1 = b1 / (b1 + b2);
  w.rho2 = 1.0 - w.rho1;
  return w;
}

MixtureWeights mixture_weights(double h, double J) { return mixture_weights(analyze(h, J)); }

LlnReport lln_check(std::int64_t N, double h, double J, double eps) {
  const PsiAnalysis a = analyze(h, J);
  const FiniteNPmf pmf = exact_pmf(N, h, J);
  const auto p = pmf.probabilities();
  const double nd = static_cast<double>(N);
  LlnReport r;
  r.classification = a.classification;
  r.limit_points = a.maximizers;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double m = static_cast<double>(pmf.monomers(k)) / nd;
    double dist = std::numeric_limits<double>::infinity();
    for (double ms : a.maximizers) dist = std::min(dist, std::abs(m - ms));
    if (dist > eps) r.outside_mass += p[k];
  }
  if (a.classification == PsiClass::coexistence) {
    // basin boundary: the consistency root strictly between the maximizers
    double split = 0.5 * (a.maximizers[0] + a.maximizers[1]);
    for (double root : a.roots)
      if (root > a.maximizers[0] + 1e-9 && root < a.maximizers[1] - 1e-9) split = root;
    double low = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
      if (static_cast<double>(pmf.monomers(k)) / nd < split) low += p[k];
    r.basin_mass = {low, 1.0 - low};
    const MixtureWeights w = mixture_weights(a);
    r.rho = {w.rho1, w.rho2};
  }
  return r;
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

// Sup distance between a lattice distribution and a continuous CDF, checked
// on both sides of every jump.
template <class Cdf>
KsReport ks_distance(const FiniteNPmf& pmf, const std::vector<double>& p, double center, double scale, Cdf&& cdf) {
  KsReport r;
  double below = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double x = (static_cast<double>(pmf.monomers(k)) - center) / scale;
    const double f = cdf(x, k);
    const double above = below + p[k];
    const double d = std::max(std::abs(f - below), std::abs(above - f));
    if (d > r.distance) {
      r.distance = d;
      r.location = x;
    }
    below = above;
  }
  return r;
}

}  // namespace

CltReport clt_check(std::int64_t N, double h, double J) {
  const PsiAnalysis a = analyze(h, J);
  if (a.classification != PsiClass::unique) throw InvalidInputError("clt_check: (h, J) must lie in the uniqueness region");
  CltReport r;
  r.m_star = a.maximizers.front();
  r.sigma2 = J == 0.0 ? g_prime(h) : -1.0 / a.lambda2.front() - 1.0 / (2.0 * J);
  if (!(r.sigma2 > 0.0)) throw NumericalError("clt_check: non-positive limiting variance " + std::to_string(r.sigma2));
  const FiniteNPmf pmf = exact_pmf(N, h, J);
  const auto p = pmf.probabilities();
  const double nd = static_cast<double>(N);
  const double sigma = std::sqrt(r.sigma2);
  r.ks = ks_distance(pmf, p, nd * r.m_star, std::sqrt(nd), [&](double x, std::size_t) { return normal_cdf(x / sigma); });
  return r;
}

QuarticLaw::QuarticLaw(double lambda) : lambda_(lambda) {
  if (!(lambda < 0.0)) throw InvalidInputError("quartic law needs lambda < 0");
  const double a = -lambda / 24.0;
  c_ = 2.0 * std::pow(a, 0.25) / std::tgamma(0.25);
}

double QuarticLaw::density(double x) const { return c_ * std::exp(lambda_ * x * x * x * x / 24.0); }

double QuarticLaw::cdf(double x) const {
  using boost::math::quadrature::gauss_kronrod;
  const auto f = [this](double t) { return density(t); };
  double err = 0.0;
  if (x <= 0.0) return gauss_kronrod<double, 61>::integrate(f, -std::numeric_limits<double>::infinity(), x, 15, 1e-13, &err);
  return 1.0 - gauss_kronrod<double, 61>::integrate(f, x, std::numeric_limits<double>::infinity(), 15, 1e-13, &err);
}

CriticalScalingReport critical_scaling_check(std::int64_t N, const ReferenceValues& ref) {
  const FiniteNPmf pmf = exact_pmf(N, ref.h_c, ref.J_c);
  const auto p = pmf.probabilities();
  const double nd = static_cast<double>(N);
  const double center = nd * ref.m_c;
  CriticalScalingReport r;
  r.N = N;

  // Quartic CDF: tail integral up to the first atom, then 5-point
  // Gauss-Legendre between neighbouring atoms.
  const QuarticLaw law(ref.lambda_c);
  const double scale4 = std::pow(nd, 0.75);
  static constexpr double kNodes[5] = {0.0, -0.5384693101056831, 0.5384693101056831, -0.9061798459386640,
                                       0.9061798459386640};
  static constexpr double kWeights[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                         0.2369268850561891, 0.2369268850561891};
  double prev_x = 0.0, cdf_sum = 0.0, cdf_comp = 0.0;
  r.quartic = ks_distance(pmf, p, center, scale4, [&](double x, std::size_t k) {
    if (k == 0) {
      cdf_sum = law.cdf(x);
      cdf_comp = 0.0;
    } else {
      const double mid = 0.5 * (x + prev_x), half = 0.5 * (x - prev_x);
      double piece = 0.0;
      for (int i = 0; i < 5; ++i) piece += kWeights[i] * law.density(mid + half * kNodes[i]);
      piece *= half;
      const double t = cdf_sum + piece;
      cdf_comp += std::abs(cdf_sum) >= std::abs(piece) ? (cdf_sum - t) + piece : (piece - t) + cdf_sum;
      cdf_sum = t;
    }
    prev_x = x;
    return std::min(1.0, cdf_sum + cdf_comp);
  });

  // Negative control: the sqrt(N) scale with the pmf's own mean and variance.
  const double scale2 = std::sqrt(nd);
  double mean = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) mean += p[k] * (static_cast<double>(pmf.monomers(k)) - center) / scale2;
  double var = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    const double y = (static_cast<double>(pmf.monomers(k)) - center) / scale2 - mean;
    var += p[k] * y * y;
  }
  r.gaussian_mean = mean;
  r.gaussian_variance = var;
  const double sd = std::sqrt(var);
  r.gaussian = ks_distance(pmf, p, center, scale2, [&](double x, std::size_t) { return normal_cdf((x - mean) / sd); });
  return r;
}

LimitLaw limit_law(double h, double J) {
  const PsiAnalysis a = analyze(h, J);
  LimitLaw law;
  law.m_star = a.maximizers.front();
  switch (a.classification) {
    case PsiClass::coexistence:
      law.kind = LimitLaw::Kind::two_point_mixture;
      law.mixture = mixture_weights(a);
      break;
    case PsiClass::critical:
      law.kind = LimitLaw::Kind::quartic;
      law.lambda_c = a.lambda4.front();
      break;
    case PsiClass::unique:
      law.kind = LimitLaw::Kind::gaussian;
      law.sigma2 = J == 0.0 ? g_prime(h) : -1.0 / a.lambda2.front() - 1.0 / (2.0 * J);
      break;
  }
  return law;
}

ScaledPressure::ScaledPressure(std::int64_t N, double h, double J) : n_(N), h_(h), J_(J), base_(exact_pmf(N, 0.0, 0.0).logw) {}

double ScaledPressure::p0_n(double t) const {
  LogSum s;
  for (std::size_t k = 0; k < base_.size(); ++k)
    s.add(base_[k] + t * static_cast<double>(n_ % 2 + 2 * static_cast<std::int64_t>(k)));
  return s.value() / static_cast<double>(n_);
}

double ScaledPressure::operator()(double m) const { return -J_ * m * m + 0.5 * J_ + p0_n(2.0 * J_ * m + h_ - J_); }

std::vector<double> convolution_scaling_density(std::int64_t N, double h, double J, double eta, double u,
                                                std::span<const double> xs) {
  if (eta < 0.0 || eta > 1.0) throw InvalidInputError("eta must lie in [0, 1]");
  if (xs.empty()) return {};
  for (std::size_t i = 1; i < xs.size(); ++i)
    if (!(xs[i] > xs[i - 1])) throw InvalidInputError("convolution_scaling_density: grid must be ascending");
  const ScaledPressure pt(N, h, J);
  const double nd = static_cast<double>(N);
  const double scale = std::pow(nd, eta);
  std::vector<double> logd(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) logd[i] = nd * pt(xs[i] / scale + u);
  const double hi = *std::max_element(logd.begin(), logd.end());
  std::vector<double> d(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) d[i] = std::exp(logd[i] - hi);
  double mass = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) mass += 0.5 * (d[i] + d[i - 1]) * (xs[i] - xs[i - 1]);
  if (mass > 0.0)
    for (double& v : d) v /= mass;
  return d;
}

}  // namespace mdm
