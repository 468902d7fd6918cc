#include "plbin/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

#include "plbin/error.hpp"

namespace plbin {

namespace {

// Upper tail of the standard normal.
double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

// Hazard phi(z) / Q(z). Past z = 35 erfc loses all relative precision, so the
// asymptotic Mills ratio series is used there.
double normal_hazard(double z) {
  if (z < 35.0) return normal_pdf(z) / normal_sf(z);
  const double z2 = z * z;
  const double mills = (1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2)) / z;
  return 1.0 / mills;
}

// z with Q(z) = p for p in (0, 1].
double normal_isf(double p) {
  const double arg = std::min(2.0 * p, std::nextafter(2.0, 0.0));
  return std::numbers::sqrt2 * boost::math::erfc_inv(arg);
}

} // namespace

void ParetoParams::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be a finite positive real");
  require(std::isfinite(x_m) && x_m > 0.0, "x_m must be a finite positive real");
}

double ParetoParams::quantile_from_tail(double u) const { return x_m * std::pow(u, -1.0 / alpha); }

double ParetoParams::cdf(double x) const {
  if (x <= x_m) return 0.0;
  return -std::expm1(-alpha * std::log(x / x_m));
}

std::string to_string(NoiseKind kind) {
  switch (kind) {
  case NoiseKind::none: return "none";
  case NoiseKind::additive: return "additive";
  case NoiseKind::multiplicative: return "multiplicative";
  }
  return "none";
}

NoiseKind parse_noise_kind(const std::string& text) {
  if (text == "none") return NoiseKind::none;
  if (text == "additive") return NoiseKind::additive;
  if (text == "multiplicative") return NoiseKind::multiplicative;
  throw ValidationError("unknown noise kind '" + text + "' (none|additive|multiplicative)");
}

void NoiseSpec::validate() const {
  require(std::isfinite(sigma) && sigma >= 0.0, "noise sigma must be a finite real >= 0");
}

void LognormalTailParams::validate() const {
  require(std::isfinite(mu), "lognormal mu must be finite");
  require(std::isfinite(sigma) && sigma > 0.0, "lognormal sigma must be a finite positive real");
  require(std::isfinite(x_m) && x_m > 0.0, "x_m must be a finite positive real");
}

double LognormalTailParams::survival(double x) const {
  return normal_sf((std::log(x) - mu) / sigma);
}

double LognormalTailParams::log_slope(double x) const {
  return normal_hazard((std::log(x) - mu) / sigma) / sigma;
}

std::vector<double> pareto_sample(const ParetoParams& params, std::size_t n, Rng& rng) {
  params.validate();
  require(n >= 1, "sample size must be at least 1");
  std::vector<double> out(n);
  for (auto& x : out) x = params.quantile_from_tail(rng.uniform_pos());
  return out;
}

std::vector<double> pareto_sample(const ParetoParams& params, std::size_t n, RngSeed seed) {
  Rng rng(seed);
  return pareto_sample(params, n, rng);
}

std::vector<double> apply_noise_untruncated(std::span<const double> xs, const NoiseSpec& spec,
                                            double x_m, Rng& rng) {
  spec.validate();
  require(std::isfinite(x_m) && x_m > 0.0, "x_m must be a finite positive real");
  std::vector<double> out(xs.begin(), xs.end());
  switch (spec.kind) {
  case NoiseKind::none:
    break;
  case NoiseKind::additive:
    for (auto& x : out) x += rng.normal(0.0, spec.sigma * x_m);
    break;
  case NoiseKind::multiplicative:
    for (auto& x : out) x *= std::exp(rng.normal(0.0, spec.sigma));
    break;
  }
  return out;
}

std::vector<double> apply_noise(std::span<const double> xs, const NoiseSpec& spec, double x_m,
                                Rng& rng) {
  require(!xs.empty(), "cannot apply noise to an empty sample");
  auto out = apply_noise_untruncated(xs, spec, x_m, rng);
  if (spec.kind == NoiseKind::none) return out;
  std::erase_if(out, [x_m](double v) { return !(v >= x_m); });
  return out;
}

std::vector<double> apply_noise(std::span<const double> xs, const NoiseSpec& spec, double x_m,
                                RngSeed seed) {
  Rng rng(seed);
  return apply_noise(xs, spec, x_m, rng);
}

namespace {

void check_discrete(double alpha, double lambda, double x_m, std::size_t n) {
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be a finite positive real");
  require(std::isfinite(lambda) && lambda > 1.0, "lambda must be a finite real > 1");
  require(std::isfinite(x_m) && x_m > 0.0, "x_m must be a finite positive real");
  require(n >= 1, "sample size must be at least 1");
}

} // namespace

BinnedSample discrete_powerlaw_sample(double alpha, double lambda, double x_m, std::size_t n,
                                      Rng& rng) {
  check_discrete(alpha, lambda, x_m, n);
  const double scale = -1.0 / (alpha * std::log(lambda));
  BinnedSample out(lambda, x_m);
  for (std::size_t i = 0; i < n; ++i) {
    out.add(static_cast<std::int64_t>(std::floor(std::log(rng.uniform_pos()) * scale)));
  }
  return out;
}

BinnedSample discrete_powerlaw_sample(double alpha, double lambda, double x_m, std::size_t n,
                                      RngSeed seed) {
  Rng rng(seed);
  return discrete_powerlaw_sample(alpha, lambda, x_m, n, rng);
}

BinnedSample discrete_powerlaw_counts(double alpha, double lambda, double x_m, std::size_t n,
                                      Rng& rng) {
  check_discrete(alpha, lambda, x_m, n);
  const double log_lambda = std::log(lambda);
  // Expected number of occupied bins ~ ln n / (alpha ln lambda); past n the
  // per-observation draw is cheaper.
  const double expected_bins = (std::log(static_cast<double>(n)) + 5.0) / (alpha * log_lambda);
  if (expected_bins > static_cast<double>(n)) {
    return discrete_powerlaw_sample(alpha, lambda, x_m, n, rng);
  }
  const double p_stop = -std::expm1(-alpha * log_lambda); // 1 - lambda^-alpha
  BinnedSample out(lambda, x_m);
  std::uint64_t remaining = n;
  for (std::int64_t k = 0; remaining > 0; ++k) {
    const std::uint64_t c = rng.binomial(remaining, p_stop);
    out.add(k, c);
    remaining -= c;
  }
  return out;
}

std::vector<double> lognormal_tail_sample(const LognormalTailParams& params, std::size_t n,
                                          Rng& rng) {
  params.validate();
  require(n >= 1, "sample size must be at least 1");
  const double tail_at_xm = params.survival(params.x_m);
  require(tail_at_xm > 0.0, "lognormal tail above x_m has no mass in double precision");
  std::vector<double> out(n);
  for (auto& x : out) {
    const double z = normal_isf(tail_at_xm * rng.uniform_pos());
    x = std::max(params.x_m, std::exp(params.mu + params.sigma * z));
  }
  return out;
}

std::vector<double> lognormal_tail_sample(const LognormalTailParams& params, std::size_t n,
                                          RngSeed seed) {
  Rng rng(seed);
  return lognormal_tail_sample(params, n, rng);
}

double solve_matching_mu(double sigma, double alpha, double x_m) {
  require(std::isfinite(sigma) && sigma > 0.0, "sigma must be a finite positive real");
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be a finite positive real");
  require(std::isfinite(x_m) && x_m > 0.0, "x_m must be a finite positive real");
  const double log_xm = std::log(x_m);
  // Residual is strictly decreasing in mu: a larger mu moves x_m deeper into
  // the body of the lognormal where the tail is flatter.
  auto residual = [&](double mu) { return normal_hazard((log_xm - mu) / sigma) / sigma - alpha; };

  double lo = log_xm;
  double hi = log_xm;
  double step = sigma;
  const double r0 = residual(log_xm);
  if (r0 == 0.0) return log_xm;
  bool bracketed = false;
  for (int i = 0; i < 200 && !bracketed; ++i) {
    if (r0 > 0.0) {
      lo = hi;
      hi = log_xm + step;
      bracketed = residual(hi) <= 0.0;
    } else {
      hi = lo;
      lo = log_xm - step;
      bracketed = residual(lo) >= 0.0;
    }
    step *= 2.0;
  }
  if (!bracketed) throw NoSolution("solve_matching_mu: could not bracket a root");

  while (hi - lo > 1e-13 * std::max(1.0, std::abs(lo) + std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (residual(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

} // namespace plbin
