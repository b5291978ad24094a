#include "mdm/meanfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mdm/error.hpp"

namespace mdm {

double g(double t) {
  if (t > 0.0) return 2.0 / (1.0 + std::sqrt(1.0 + 4.0 * std::exp(-2.0 * t)));
  const double s = std::exp(t);
  return 2.0 * s / (s + std::sqrt(s * s + 4.0));
}

double one_minus_g(double t) {
  if (t > 0.0) {
    const double u = std::exp(-2.0 * t);
    const double r = std::sqrt(1.0 + 4.0 * u);
    return 4.0 * u / ((1.0 + r) * (1.0 + r));
  }
  return 1.0 - g(t);
}

double g_prime(double t) {
  const double m = g(t);
  return 2.0 * m * one_minus_g(t) / (2.0 - m);
}

double g_second(double t) {
  const double m = g(t);
  const double phi1 = 2.0 * (m * m - 4.0 * m + 2.0) / ((2.0 - m) * (2.0 - m));
  return phi1 * g_prime(t);
}

double g_third(double t) {
  const double m = g(t);
  const double d1 = g_prime(t);
  const double phi1 = 2.0 * (m * m - 4.0 * m + 2.0) / ((2.0 - m) * (2.0 - m));
  const double phi2 = -8.0 / ((2.0 - m) * (2.0 - m) * (2.0 - m));
  return phi2 * d1 * d1 + phi1 * phi1 * d1;
}

double g_inverse(double m) {
  if (!(m > 0.0 && m < 1.0)) throw InvalidInputError("g_inverse: argument must lie in (0, 1)");
  return std::log(m) - 0.5 * std::log1p(-m);
}

double p0(double t) {
  const double q = one_minus_g(t);
  return -0.5 * q - 0.5 * std::log(q);
}

MeanFieldPoint::MeanFieldPoint(double h_, double J_) : h(h_), J(J_) {
  if (!std::isfinite(h_) || !std::isfinite(J_)) throw InvalidInputError("h and J must be finite");
  if (J_ < 0.0) throw InvalidInputError("J must be >= 0");
}

namespace {
double arg(double m, double h, double J) { return (2.0 * m - 1.0) * J + h; }
}  // namespace

double psi(double m, double h, double J) { return -J * m * m + 0.5 * J + p0(2.0 * J * m + h - J); }
double psi_d1(double m, double h, double J) { return 2.0 * J * (g(arg(m, h, J)) - m); }
double psi_d2(double m, double h, double J) { return -2.0 * J + 4.0 * J * J * g_prime(arg(m, h, J)); }
double psi_d3(double m, double h, double J) { return 8.0 * J * J * J * g_second(arg(m, h, J)); }
double psi_d4(double m, double h, double J) { return 16.0 * J * J * J * J * g_third(arg(m, h, J)); }

double entropy(double m) {
  if (m < 0.0 || m > 1.0) throw InvalidInputError("entropy: m must lie in [0, 1]");
  const double a = m > 0.0 ? -m * std::log(m) : 0.0;
  const double b = m < 1.0 ? -0.5 * (1.0 - m) * std::log1p(-m) : 0.0;
  return a + b - 0.5 * (1.0 - m);
}

double energy(double m, double h, double J) { return -J * m * m - (h - J) * m - 0.5 * J; }

double entropy_energy_pressure(double m, double h, double J) { return entropy(m) - energy(m, h, J); }

std::vector<double> consistency_solutions(double h, double J, const ConsistencyOptions& opts) {
  if (opts.grid < 2) throw InvalidInputError("consistency grid needs at least 2 points");
  auto f = [&](double m) { return m - g(arg(m, h, J)); };
  std::vector<double> roots;
  double prev_m = 0.0;
  double prev_f = f(0.0);
  for (int k = 1; k <= opts.grid; ++k) {
    const double m = static_cast<double>(k) / opts.grid;
    const double fm = f(m);
    if (fm == 0.0) {
      roots.push_back(m);
    } else if ((prev_f < 0.0 && fm > 0.0) || (prev_f > 0.0 && fm < 0.0)) {
      double lo = prev_m, hi = m, flo = prev_f;
      while (hi - lo > opts.tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fmid = f(mid);
        if (fmid == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fmid < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fmid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(0.5 * (lo + hi));
    }
    prev_m = m;
    prev_f = fm;
  }
  return roots;
}

std::string to_string(PsiClass c) {
  switch (c) {
    case PsiClass::unique: return "unique";
    case PsiClass::coexistence: return "coexistence";
    case PsiClass::critical: return "critical";
  }
  return "unknown";
}

PsiAnalysis analyze(double h, double J, const ConsistencyOptions& opts, double critical_tol) {
  const MeanFieldPoint point(h, J);
  PsiAnalysis out;
  out.h = point.h;
  out.J = point.J;
  out.roots = consistency_solutions(h, J, opts);
  std::vector<double> candidates;
  if (J == 0.0) {
    candidates.push_back(g(h));
  } else {
    // f = m - g(...) = -psi'/(2J): maxima are crossings of f from - to +.
    auto f = [&](double m) { return m - g(arg(m, h, J)); };
    const double step = 1e-7;
    for (double m : out.roots)
      if (f(std::max(0.0, m - step)) <= 0.0 && f(std::min(1.0, m + step)) >= 0.0) candidates.push_back(m);
    if (candidates.empty()) candidates = out.roots;
  }
  double best = -std::numeric_limits<double>::infinity();
  for (double m : candidates) best = std::max(best, psi(m, h, J));
  for (double m : candidates) {
    const double v = psi(m, h, J);
    if (best - v < 1e-11 + 1e-9 * std::abs(best)) {
      out.maximizers.push_back(m);
      out.values.push_back(v);
      out.lambda2.push_back(psi_d2(m, h, J));
      out.lambda4.push_back(psi_d4(m, h, J));
    }
  }
  if (out.maximizers.size() >= 2) {
    out.classification = PsiClass::coexistence;
  } else if (J > 0.0 && std::abs(out.lambda2.front()) < critical_tol) {
    out.classification = PsiClass::critical;
  }
  return out;
}

CriticalPoint critical_point(double tol) {
  // g'' > 0 below t*, < 0 above.
  double lo = -5.0, hi = 5.0;
  if (!(g_second(lo) > 0.0 && g_second(hi) < 0.0)) throw NumericalError("critical_point: g'' root not bracketed");
  while (true) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = g_second(mid);
    if (v == 0.0) {
      lo = hi = mid;
      break;
    }
    (v > 0.0 ? lo : hi) = mid;
  }
  CriticalPoint cp;
  cp.t_star = 0.5 * (lo + hi);
  cp.m_c = g(cp.t_star);
  cp.J_c = 1.0 / (2.0 * g_prime(cp.t_star));
  cp.h_c = cp.t_star - (2.0 * cp.m_c - 1.0) * cp.J_c;
  cp.lambda_c = psi_d4(cp.m_c, cp.h_c, cp.J_c);
  cp.psi_d2 = psi_d2(cp.m_c, cp.h_c, cp.J_c);
  cp.psi_d3 = psi_d3(cp.m_c, cp.h_c, cp.J_c);
  if (std::abs(cp.psi_d2) > tol || std::abs(cp.psi_d3) > tol)
    throw NumericalError("critical_point: psi'' or psi''' does not vanish at m_c within tolerance");
  if (!(cp.lambda_c < 0.0)) throw NumericalError("critical_point: psi'''' at m_c is not negative");
  return cp;
}

std::pair<double, double> spinodal_densities(double J) {
  const double disc = (4.0 * J + 1.0) * (4.0 * J + 1.0) - 32.0 * J;
  if (!(disc > 0.0)) throw InvalidInputError("no spinodal densities at or below the critical coupling");
  const double r = std::sqrt(disc);
  return {((4.0 * J + 1.0) - r) / (8.0 * J), ((4.0 * J + 1.0) + r) / (8.0 * J)};
}

namespace {

template <class F>
double bisect(F&& f, double lo, double hi, bool increasing) {
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = f(mid);
    if (v == 0.0) return mid;
    if ((v < 0.0) == increasing) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

// Along the consistency curve at fixed J, m = g(t) and h(t) = t - (2 g(t) - 1) J.
double h_of_t(double t, double J) { return t - (2.0 * g(t) - 1.0) * J; }

}  // namespace

CoexistencePoint coexistence(double J, double tol) {
  const CriticalPoint cp = critical_point();
  if (!(J > cp.J_c)) throw InvalidInputError("no coexistence below critical coupling");
  // spinodal arguments: g'(t) = 1/(2J) on either side of t*
  const double target = 1.0 / (2.0 * J);
  const double t_a = bisect([&](double t) { return g_prime(t) - target; }, cp.t_star - 60.0, cp.t_star, true);
  const double t_b = bisect([&](double t) { return g_prime(t) - target; }, cp.t_star, cp.t_star + 60.0, false);
  const double h_lo = h_of_t(t_b, J);
  const double h_hi = h_of_t(t_a, J);
  auto branches = [&](double h) {
    const double t1 = bisect([&](double t) { return h_of_t(t, J) - h; }, h - J - 1.0, t_a, true);
    const double t2 = bisect([&](double t) { return h_of_t(t, J) - h; }, t_b, h + J + 1.0, true);
    return std::pair{g(t1), g(t2)};
  };
  CoexistencePoint out;
  out.J = J;
  double lo = h_lo, hi = h_hi;
  for (int it = 0; it < 400; ++it) {
    const double h = 0.5 * (lo + hi);
    const auto [m1, m2] = branches(h);
    const double gap = psi(m2, h, J) - psi(m1, h, J);
    out = {J, h, m1, m2, gap};
    if (std::abs(gap) < tol || h <= lo || h >= hi) break;
    (gap < 0.0 ? lo : hi) = h;
  }
  if (!(std::abs(out.gap) < std::max(tol, 1e-11 + 1e-9 * std::abs(psi(out.m1, out.h, J)))))
    throw NumericalError("coexistence: bisection stalled before the psi gap met tolerance");
  return out;
}

double coexistence_h(double J, double tol) { return coexistence(J, tol).h; }

double coexistence_slope_at_critical() {
  const CriticalPoint cp = critical_point();
  auto slope = [&](double d) { return (coexistence_h(cp.J_c + d) - cp.h_c) / d; };
  // two Richardson levels on d = 4e-3, 2e-3, 1e-3
  const double s1 = slope(4e-3), s2 = slope(2e-3), s3 = slope(1e-3);
  const double r1 = 2.0 * s2 - s1, r2 = 2.0 * s3 - s2;
  return (4.0 * r2 - r1) / 3.0;
}

std::string to_string(ExponentDirection d) {
  switch (d) {
    case ExponentDirection::tangent: return "tangent";
    case ExponentDirection::nontangent_j: return "nontangent_j";
    case ExponentDirection::fixed_j: return "fixed_j";
  }
  return "unknown";
}

ExponentDirection parse_direction(const std::string& s) {
  if (s == "tangent") return ExponentDirection::tangent;
  if (s == "nontangent_j" || s == "nontangent") return ExponentDirection::nontangent_j;
  if (s == "fixed_j") return ExponentDirection::fixed_j;
  throw InvalidInputError("unknown direction '" + s + "' (tangent | nontangent_j | fixed_j)");
}

ExponentFit critical_exponents(ExponentDirection direction, int steps, double max_offset, double min_offset) {
  if (steps < 3) throw InvalidInputError("critical_exponents: need at least 3 offsets");
  if (!(max_offset > min_offset && min_offset > 0.0)) throw InvalidInputError("critical_exponents: bad offset range");
  const CriticalPoint cp = critical_point();
  ExponentFit fit;
  fit.direction = direction;
  if (direction != ExponentDirection::fixed_j) fit.gamma_slope = coexistence_slope_at_critical();
  std::vector<double> lx, ly;
  for (int k = 0; k < steps; ++k) {
    const double e = max_offset * std::pow(min_offset / max_offset, static_cast<double>(k) / (steps - 1));
    double h = cp.h_c, J = cp.J_c;
    switch (direction) {
      case ExponentDirection::tangent:
        J += e;
        h += fit.gamma_slope * e;
        break;
      case ExponentDirection::nontangent_j:
        J += e;
        h += (fit.gamma_slope + 1.0) * e;
        break;
      case ExponentDirection::fixed_j:
        h += e;
        break;
    }
    const PsiAnalysis a = analyze(h, J);
    // on the tangent line either branch may win; both scale the same way
    double m = a.maximizers.front();
    for (double cand : a.maximizers)
      if (std::abs(cand - cp.m_c) > std::abs(m - cp.m_c)) m = cand;
    fit.offsets.push_back(e);
    fit.densities.push_back(m);
    lx.push_back(std::log(e));
    ly.push_back(std::log(std::abs(m - cp.m_c)));
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  fit.exponent = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  fit.intercept = (sy - fit.exponent * sx) / n;
  for (std::size_t i = 0; i < lx.size(); ++i)
    fit.residual = std::max(fit.residual, std::abs(ly[i] - fit.intercept - fit.exponent * lx[i]));
  fit.flagged = fit.residual > 0.05;
  return fit;
}

}  // namespace mdm
