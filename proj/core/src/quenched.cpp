#include "mdm/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mdm/error.hpp"
#include "mdm/graph.hpp"
#include "mdm/parallel.hpp"
#include "mdm/partition.hpp"

namespace mdm {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidInputError(std::string(what) + " must be finite and > 0");
}

std::vector<double> parse_numbers(const std::string& text, const std::string& what) {
  std::string s = text;
  std::replace(s.begin(), s.end(), ',', ' ');
  std::istringstream in(s);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) throw InvalidInputError(what + ": cannot parse '" + tok + "' as a number");
    out.push_back(v);
  }
  return out;
}

}  // namespace

ActivityDistribution ActivityDistribution::degenerate(double x) {
  require_positive(x, "degenerate activity");
  ActivityDistribution d;
  d.kind_ = Kind::degenerate;
  d.params_ = {x};
  return d;
}

ActivityDistribution ActivityDistribution::two_point(double x1, double x2, double p) {
  require_positive(x1, "two-point activity");
  require_positive(x2, "two-point activity");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidInputError("two-point probability must lie in [0, 1]");
  ActivityDistribution d;
  d.kind_ = Kind::two_point;
  d.params_ = {x1, x2, p};
  return d;
}

ActivityDistribution ActivityDistribution::lognormal(double mu, double sigma) {
  if (!std::isfinite(mu) || !(sigma >= 0.0) || !std::isfinite(sigma))
    throw InvalidInputError("lognormal needs finite mu and sigma >= 0");
  ActivityDistribution d;
  d.kind_ = Kind::lognormal;
  d.params_ = {mu, sigma};
  return d;
}

ActivityDistribution ActivityDistribution::empirical(std::vector<double> samples) {
  if (samples.empty()) throw InvalidInputError("empirical distribution needs at least one sample");
  for (double v : samples) require_positive(v, "empirical activity");
  ActivityDistribution d;
  d.kind_ = Kind::empirical;
  d.params_ = std::move(samples);
  return d;
}

ActivityDistribution ActivityDistribution::parse(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw InvalidInputError("distribution spec '" + spec + "' needs the form kind:params");
  const std::string kind = spec.substr(0, colon);
  const std::string rest = spec.substr(colon + 1);
  if (kind == "empirical") {
    if (rest.empty() || rest[0] != '@') return empirical(parse_numbers(rest, "empirical"));
    std::ifstream in(rest.substr(1));
    if (!in) throw InvalidInputError("cannot open empirical sample file '" + rest.substr(1) + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return empirical(parse_numbers(ss.str(), "empirical"));
  }
  const auto v = parse_numbers(rest, kind);
  if (kind == "degenerate" && v.size() == 1) return degenerate(v[0]);
  if (kind == "twopoint" && v.size() == 3) return two_point(v[0], v[1], v[2]);
  if (kind == "lognormal" && v.size() == 2) return lognormal(v[0], v[1]);
  throw InvalidInputError("bad distribution spec '" + spec +
                          "' (degenerate:x | twopoint:x1,x2,p | lognormal:mu,sigma | empirical:@file)");
}

std::string ActivityDistribution::describe() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind_) {
    case Kind::degenerate: os << "degenerate:" << params_[0]; break;
    case Kind::two_point: os << "twopoint:" << params_[0] << ',' << params_[1] << ',' << params_[2]; break;
    case Kind::lognormal: os << "lognormal:" << params_[0] << ',' << params_[1]; break;
    case Kind::empirical: os << "empirical:" << params_.size() << " samples"; break;
  }
  return os.str();
}

GaussHermite gauss_hermite(int n) {
  if (n < 1) throw InvalidInputError("gauss_hermite: n must be >= 1");
  // Golub-Welsch: Jacobi matrix of the Hermite recurrence
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) jac(k - 1, k) = jac(k, k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
  GaussHermite gh;
  for (int k = 0; k < n; ++k) {
    gh.nodes.push_back(es.eigenvalues()(k));
    const double v0 = es.eigenvectors()(0, k);
    gh.weights.push_back(std::sqrt(std::numbers::pi) * v0 * v0);
  }
  return gh;
}

double ActivityDistribution::expectation(const std::function<double(double)>& f) const {
  switch (kind_) {
    case Kind::degenerate: return f(params_[0]);
    case Kind::two_point: return params_[2] * f(params_[0]) + (1.0 - params_[2]) * f(params_[1]);
    case Kind::lognormal: {
      static const GaussHermite gh = gauss_hermite(64);
      double s = 0.0;
      for (std::size_t k = 0; k < gh.nodes.size(); ++k)
        s += gh.weights[k] * f(std::exp(params_[0] + params_[1] * std::numbers::sqrt2 * gh.nodes[k]));
      return s / std::sqrt(std::numbers::pi);
    }
    case Kind::empirical: {
      double s = 0.0;
      for (double v : params_) s += f(v);
      return s / static_cast<double>(params_.size());
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

double ActivityDistribution::sample(Engine& eng) const {
  switch (kind_) {
    case Kind::degenerate: return params_[0];
    case Kind::two_point: return uniform01(eng) < params_[2] ? params_[0] : params_[1];
    case Kind::lognormal: return std::exp(params_[0] + params_[1] * std::normal_distribution<double>()(eng));
    case Kind::empirical: {
      const auto k = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(params_.size()));
      return params_[std::min(k, params_.size() - 1)];
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

ERParams::ERParams(double c_, double x_) : c(c_), x(x_) {
  if (!(c_ >= 0.0) || !std::isfinite(c_)) throw InvalidInputError("mean degree c must be finite and >= 0");
  require_positive(x_, "monomer activity x");
}

Population::Population(std::size_t K, double init) : values(K, init) {
  if (K < kMinPopulation) throw InvalidInputError("population size must be >= " + std::to_string(kMinPopulation));
  if (!(init >= 0.0 && init <= 1.0)) throw InvalidInputError("population values must lie in [0, 1]");
}

double Population::mean() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double Population::std_error() const {
  const double m = mean();
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  const double n = static_cast<double>(values.size());
  return std::sqrt(ss / (n - 1.0) / n);
}

Population population_step(const Population& pop, const ERParams& params, const PopulationOptions& opts) {
  if (pop.values.empty()) throw InvalidInputError("empty population");
  if (opts.chunk_size == 0) throw InvalidInputError("chunk size must be positive");
  const std::size_t K = pop.values.size();
  const std::size_t chunks = (K + opts.chunk_size - 1) / opts.chunk_size;
  const double x2 = params.x * params.x;
  Population next;
  next.values.resize(K);
  next.generation = pop.generation + 1;
  parallel_chunks(chunks, opts.threads, [&](std::size_t c) {
    Engine eng = make_engine(opts.seed, static_cast<std::uint64_t>(pop.generation), c);
    const std::size_t end = std::min(K, (c + 1) * opts.chunk_size);
    for (std::size_t i = c * opts.chunk_size; i < end; ++i) {
      const int delta = poisson_inversion(eng, params.c);
      double s = 0.0;
      for (int d = 0; d < delta; ++d) {
        const auto j = static_cast<std::size_t>(uniform01(eng) * static_cast<double>(K));
        s += pop.values[std::min(j, K - 1)];
      }
      next.values[i] = x2 / (x2 + s);
    }
  });
  return next;
}

ErDensityReport er_monomer_density(const ERParams& params, int r, std::size_t K, const PopulationOptions& opts) {
  if (r < 1) throw InvalidInputError("number of iterations r must be >= 1");
  Population pop(K, 1.0);
  ErDensityReport rep;
  for (int k = 1; k <= r; ++k) {
    pop = population_step(pop, params, opts);
    rep.generations.push_back({k, pop.mean(), pop.std_error()});
  }
  rep.estimate = rep.generations.back().mean;
  rep.std_error = rep.generations.back().std_error;
  if (r >= 6) {
    rep.ladder_checked = true;
    auto le = [&](int a, int b) {
      const auto& ga = rep.generations[static_cast<std::size_t>(a - 1)];
      const auto& gb = rep.generations[static_cast<std::size_t>(b - 1)];
      return ga.mean <= gb.mean + 3.0 * std::hypot(ga.std_error, gb.std_error);
    };
    rep.ladder_ok = le(3, 5) && le(5, 6) && le(6, 4);
  }
  return rep;
}

GapContraction er_gap_contraction(const ERParams& params, std::size_t K, const PopulationOptions& opts) {
  GapContraction rep;
  rep.bound = params.c * params.c / std::pow(params.x, 4);
  Population pop(K, 1.0);
  double prev_mean = 1.0, prev_err = 0.0;
  for (int k = 0; k < 3; ++k) {
    pop = population_step(pop, params, opts);
    const double m = pop.mean(), e = pop.std_error();
    rep.gaps.push_back(std::abs(m - prev_mean));
    rep.gap_errors.push_back(std::hypot(e, prev_err));
    prev_mean = m;
    prev_err = e;
  }
  rep.two_step_ratio = rep.gaps[2] / rep.gaps[0];
  rep.two_step_error = rep.two_step_ratio * std::hypot(rep.gap_errors[2] / rep.gaps[2], rep.gap_errors[0] / rep.gaps[0]);
  rep.within_bound = rep.two_step_ratio <= rep.bound + 3.0 * rep.two_step_error;
  return rep;
}

ErPressureReport er_pressure(const ERParams& params, int r, std::size_t K, const PopulationOptions& opts) {
  if (r < 2) throw InvalidInputError("er_pressure needs r >= 2");
  Population pop(K, 1.0);
  double prev_mean = 0.0, prev_err = 0.0;
  for (int k = 1; k <= r; ++k) {
    prev_mean = pop.mean();
    prev_err = pop.std_error();
    pop = population_step(pop, params, opts);
  }
  ErPressureReport rep;
  rep.last_gap = std::abs(pop.mean() - prev_mean);
  rep.last_gap_error = std::hypot(pop.std_error(), prev_err);
  rep.converged = rep.last_gap <= 3.0 * rep.last_gap_error;

  // stream index r + 1 is past every population step
  const std::size_t chunks = (K + opts.chunk_size - 1) / opts.chunk_size;
  std::vector<double> sums(chunks), sq(chunks);
  const double x2 = params.x * params.x;
  parallel_chunks(chunks, opts.threads, [&](std::size_t c) {
    Engine eng = make_engine(opts.seed, static_cast<std::uint64_t>(r) + 1, c);
    const std::size_t end = std::min(K, (c + 1) * opts.chunk_size);
    double s = 0.0, s2 = 0.0;
    for (std::size_t i = c * opts.chunk_size; i < end; ++i) {
      const double m = pop.values[i];
      const double m1 = pop.values[std::min(K - 1, static_cast<std::size_t>(uniform01(eng) * static_cast<double>(K)))];
      const double m2 = pop.values[std::min(K - 1, static_cast<std::size_t>(uniform01(eng) * static_cast<double>(K)))];
      const double term = std::log(params.x / m) - 0.5 * params.c * std::log1p(m1 * m2 / x2);
      s += term;
      s2 += term * term;
    }
    sums[c] = s;
    sq[c] = s2;
  });
  double s = 0.0, s2 = 0.0;
  for (std::size_t c = 0; c < chunks; ++c) {
    s += sums[c];
    s2 += sq[c];
  }
  const double n = static_cast<double>(K);
  rep.estimate = s / n;
  rep.std_error = std::sqrt(std::max(0.0, (s2 - n * rep.estimate * rep.estimate) / (n - 1.0)) / n);
  return rep;
}

QuenchedOracle er_quenched_oracle(int N, const ERParams& params, int samples, const PopulationOptions& opts) {
  if (N < 1) throw InvalidInputError("oracle size N must be >= 1");
  if (N > kErOracleCap) throw SizeCapError("er_quenched_oracle: N = " + std::to_string(N) + " exceeds cap " + std::to_string(kErOracleCap));
  if (samples < 2) throw InvalidInputError("oracle needs at least 2 samples");
  const double p = params.c / N;
  if (p > 1.0) throw InvalidInputError("mean degree c must not exceed N");
  std::vector<double> pressures(static_cast<std::size_t>(samples));
  parallel_chunks(static_cast<std::size_t>(samples), opts.threads, [&](std::size_t s) {
    Engine eng = make_engine(opts.seed, s);
    std::vector<Edge> edges;
    for (int i = 0; i < N; ++i)
      for (int j = i + 1; j < N; ++j)
        if (uniform01(eng) < p) edges.push_back({i, j});
    const MDModel model = MDModel::uniform(Graph(N, std::move(edges)), 1.0, params.x);
    pressures[s] = log_partition_hl(model, kErOracleCap) / N;
  });
  QuenchedOracle out;
  out.samples = samples;
  double mean = 0.0, m2 = 0.0;
  for (int k = 0; k < samples; ++k) {
    const double v = pressures[static_cast<std::size_t>(k)];
    const double d = v - mean;
    mean += d / (k + 1);
    m2 += d * (v - mean);
  }
  out.mean = mean;
  out.std_dev = std::sqrt(m2 / (samples - 1));
  out.std_error = out.std_dev / std::sqrt(static_cast<double>(samples));
  return out;
}

double rf_fixed_point(double w, const ActivityDistribution& dist) {
  require_positive(w, "dimer weight w");
  const double inv_mean = dist.expectation([](double x) { return 1.0 / x; });
  if (!std::isfinite(inv_mean)) throw InvalidInputError("E[1/x] is not finite");
  auto residual = [&](double xi) { return xi - dist.expectation([&](double x) { return w / (xi + x); }); };
  double lo = 0.0, hi = w * inv_mean;
  for (int it = 0; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double r = residual(mid);
    if (r == 0.0) return mid;
    (r < 0.0 ? lo : hi) = mid;
  }
  const double a = std::abs(residual(lo)), b = std::abs(residual(hi));
  return a <= b ? lo : hi;
}

RfSolution rf_pressure_and_density(double w, const ActivityDistribution& dist) {
  RfSolution s;
  s.xi = rf_fixed_point(w, dist);
  s.density = s.xi * s.xi / (2.0 * w);
  const double xi = s.xi;
  s.pressure = -s.density + dist.expectation([xi](double x) { return std::log(xi + x); });
  return s;
}

double rf_partition_quadrature(double w, std::span<const double> x, double tol) {
  require_positive(w, "dimer weight w");
  const std::size_t N = x.size();
  if (N == 0) return 0.0;
  if (N > kRfQuadratureCap)
    throw SizeCapError("rf_partition_quadrature: N = " + std::to_string(N) + " exceeds cap " + std::to_string(kRfQuadratureCap));
  double inv_sum = 0.0;
  for (double v : x) {
    require_positive(v, "activity");
    inv_sum += 1.0 / v;
  }
  const double nd = static_cast<double>(N);
  // log |integrand| and its sign
  auto log_abs = [&](double xi, int& sign) {
    double s = -nd * xi * xi / (2.0 * w);
    sign = 1;
    for (double v : x) {
      const double f = xi + v;
      if (f < 0.0) sign = -sign;
      s += std::log(std::abs(f));
    }
    return s;
  };
  double lo = 0.0, hi = w * inv_sum / nd;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    double d = -nd * mid / w;
    for (double v : x) d += 1.0 / (mid + v);
    (d > 0.0 ? lo : hi) = mid;
  }
  const double peak = 0.5 * (lo + hi);
  int sign = 1;
  const double log_peak = log_abs(peak, sign);
  const double sd = std::sqrt(w / nd);
  const double radius = peak + 40.0 * sd;
  auto integrand = [&](double xi) {
    int s = 1;
    const double l = log_abs(xi, s);
    return s * std::exp(l - log_peak);
  };
  using boost::math::quadrature::gauss_kronrod;
  std::vector<double> cuts = {-radius, peak - 8.0 * sd, peak, peak + 8.0 * sd, radius};
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    double err = 0.0;
    total += gauss_kronrod<double, 61>::integrate(integrand, cuts[k], cuts[k + 1], 12, tol, &err);
  }
  if (!(total > 0.0) || !std::isfinite(total))
    throw NumericalError("rf_partition_quadrature: integral over the window is not positive");
  return 0.5 * std::log(nd / (2.0 * std::numbers::pi * w)) + log_peak + std::log(total);
}

std::vector<SelfAveragingRow> self_averaging_experiment(std::span<const int> Ns, const ActivityDistribution& dist,
                                                        double w, int reps, std::uint64_t seed, int threads) {
  if (reps < 30) throw InvalidInputError("self-averaging needs at least 30 replicas");
  for (std::size_t i = 0; i < Ns.size(); ++i) {
    if (Ns[i] < 1) throw InvalidInputError("system sizes must be >= 1");
    if (i > 0 && Ns[i] <= Ns[i - 1]) throw InvalidInputError("system sizes must be ascending");
  }
  std::vector<SelfAveragingRow> rows;
  for (int N : Ns) {
    std::vector<double> p(static_cast<std::size_t>(reps));
    parallel_chunks(static_cast<std::size_t>(reps), threads, [&](std::size_t r) {
      Engine eng = make_engine(seed, static_cast<std::uint64_t>(N), r);
      std::vector<double> x(static_cast<std::size_t>(N));
      for (double& v : x) v = dist.sample(eng);
      p[r] = rf_partition_quadrature(w, x) / N;
    });
    double mean = 0.0, m2 = 0.0;
    for (int k = 0; k < reps; ++k) {
      const double v = p[static_cast<std::size_t>(k)];
      const double d = v - mean;
      mean += d / (k + 1);
      m2 += d * (v - mean);
    }
    rows.push_back({N, mean, std::sqrt(m2 / (reps - 1))});
  }
  return rows;
}

}  // namespace mdm
