#pragma once

#include <string>
#include <vector>

namespace mdm {

/// g(t): the solution in (0,1) of e^{2t} = g^2 / (1 - g).
double g(double t);
/// 1 - g(t), accurate when g is close to 1.
double one_minus_g(double t);
double g_prime(double t);
double g_second(double t);
double g_third(double t);
/// Inverse of g on (0, 1).
double g_inverse(double m);

/// p0(t) = -(1 - g)/2 - log(1 - g)/2, the J = 0 pressure; p0' = g.
double p0(double t);

struct MeanFieldPoint {
  double h = 0.0;
  double J = 0.0;

  MeanFieldPoint() = default;
  /// Throws InvalidInputError for J < 0 or non-finite values.
  MeanFieldPoint(double h, double J);
};

/// psi(m) = -J m^2 + J/2 + p0(2 J m + h - J) and its m-derivatives.
double psi(double m, double h, double J);
double psi_d1(double m, double h, double J);
double psi_d2(double m, double h, double J);
double psi_d3(double m, double h, double J);
double psi_d4(double m, double h, double J);

/// s(m) = -m log m - ((1-m)/2) log(1-m) - (1-m)/2, with s(0) = -1/2, s(1) = 0.
double entropy(double m);
/// eps(m) = -J m^2 - (h - J) m - J/2.
double energy(double m, double h, double J);
/// s(m) - eps(m); extended by continuity to m in {0, 1}.
double entropy_energy_pressure(double m, double h, double J);

struct ConsistencyOptions {
  int grid = 10000;
  double tol = 1e-15;
};

/// All roots in (0,1) of f(m) = m - g((2m - 1) J + h), ascending.
std::vector<double> consistency_solutions(double h, double J, const ConsistencyOptions& opts = {});

enum class PsiClass { unique, coexistence, critical };
std::string to_string(PsiClass c);

struct PsiAnalysis {
  double h = 0.0, J = 0.0;
  std::vector<double> roots;       // every consistency root
  std::vector<double> maximizers;  // global maximizers, ascending
  std::vector<double> values;      // psi at each maximizer
  std::vector<double> lambda2;     // psi'' at each maximizer
  std::vector<double> lambda4;     // psi'''' at each maximizer
  PsiClass classification = PsiClass::unique;
};

/// Two maxima count as equal when |dpsi| < 1e-11 + 1e-9 |psi|; a single
/// maximizer with |psi''| < critical_tol is classified critical.
PsiAnalysis analyze(double h, double J, const ConsistencyOptions& opts = {}, double critical_tol = 1e-6);

struct CriticalPoint {
  double h_c = 0.0;
  double J_c = 0.0;
  double m_c = 0.0;
  double t_star = 0.0;
  double lambda_c = 0.0;  // psi''''(m_c)
  double psi_d2 = 0.0;    // residuals at m_c, certified below tolerance
  double psi_d3 = 0.0;
};

/// t* from bisection on the analytic g''; throws NumericalError if psi'' or
/// psi''' at m_c exceed tol.
CriticalPoint critical_point(double tol = 1e-8);

struct CoexistencePoint {
  double J = 0.0;
  double h = 0.0;   // gamma(J)
  double m1 = 0.0;  // low-density maximizer
  double m2 = 0.0;  // high-density maximizer
  double gap = 0.0; // psi(m2) - psi(m1)
};

/// gamma(J) by bisection in h on psi(m2) - psi(m1); requires J > J_c.
CoexistencePoint coexistence(double J, double tol = 1e-13);
double coexistence_h(double J, double tol = 1e-13);

/// The two spinodal densities (local extrema of h along the consistency
/// curve) for J > J_c: roots of 4 J m^2 - (4 J + 1) m + 2 = 0.
std::pair<double, double> spinodal_densities(double J);

enum class ExponentDirection { tangent, nontangent_j, fixed_j };
std::string to_string(ExponentDirection d);
ExponentDirection parse_direction(const std::string& s);

struct ExponentFit {
  ExponentDirection direction = ExponentDirection::tangent;
  double exponent = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // max |log residual| of the straight-line fit
  bool flagged = false;   // residual above 0.05
  double gamma_slope = 0.0;
  std::vector<double> offsets;
  std::vector<double> densities;
};

/// Fits the slope of log|m* - m_c| against log(offset) for offsets spaced
/// geometrically from 1e-2 down to 1e-5. Curves:
///   tangent:      J = J_c + e, h = h_c + gamma'(J_c) e
///   nontangent_j: J = J_c + e, h = h_c + (gamma'(J_c) + 1) e
///   fixed_j:      J = J_c,     h = h_c + e
ExponentFit critical_exponents(ExponentDirection direction, int steps = 16, double max_offset = 1e-2,
                               double min_offset = 1e-5);

/// gamma'(J_c) by Richardson extrapolation of (gamma(J_c + d) - h_c) / d.
double coexistence_slope_at_critical();

}  // namespace mdm
