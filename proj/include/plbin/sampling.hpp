#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "plbin/binning.hpp"
#include "plbin/rng.hpp"

namespace plbin {

struct ParetoParams {
  double alpha = 1.5;
  double x_m = 1.0;

  void validate() const;
  // x_m * u^(-1/alpha); u in (0, 1] is the upper tail probability.
  double quantile_from_tail(double u) const;
  double cdf(double x) const;
};

enum class NoiseKind { none, additive, multiplicative };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& text);

// sigma is the standard deviation of the additive error in units of x_m,
// or the log-scale standard deviation of the multiplicative factor.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::none;
  double sigma = 0.0;

  void validate() const;
};

// Lognormal(mu, sigma^2) conditioned on x >= x_m.
struct LognormalTailParams {
  double mu = 0.0;
  double sigma = 1.0;
  double x_m = 1.0;

  void validate() const;
  // P(X > x) for the untruncated lognormal.
  double survival(double x) const;
  // d ln S / d ln x at x, negated: x f(x) / S(x).
  double log_slope(double x) const;
};

std::vector<double> pareto_sample(const ParetoParams& params, std::size_t n, Rng& rng);
std::vector<double> pareto_sample(const ParetoParams& params, std::size_t n, RngSeed seed);

// Noise applied to every value, without the x_m filter.
std::vector<double> apply_noise_untruncated(std::span<const double> xs, const NoiseSpec& spec,
                                            double x_m, Rng& rng);

// Adds noise and drops every result below x_m; the output may be shorter
// than the input (or empty).
std::vector<double> apply_noise(std::span<const double> xs, const NoiseSpec& spec, double x_m,
                                Rng& rng);
std::vector<double> apply_noise(std::span<const double> xs, const NoiseSpec& spec, double x_m,
                                RngSeed seed);

// Draws n bin indices k = floor(ln U / (-alpha ln lambda)) one at a time.
BinnedSample discrete_powerlaw_sample(double alpha, double lambda, double x_m, std::size_t n,
                                      Rng& rng);
BinnedSample discrete_powerlaw_sample(double alpha, double lambda, double x_m, std::size_t n,
                                      RngSeed seed);

// Same distribution as discrete_powerlaw_sample, drawn bin by bin: since
// P(k | k >= j) is geometric with constant success probability, the count in
// bin j is Binomial(remaining, 1 - lambda^-alpha). Costs O(bins) instead of O(n).
BinnedSample discrete_powerlaw_counts(double alpha, double lambda, double x_m, std::size_t n,
                                      Rng& rng);

std::vector<double> lognormal_tail_sample(const LognormalTailParams& params, std::size_t n,
                                          Rng& rng);
std::vector<double> lognormal_tail_sample(const LognormalTailParams& params, std::size_t n,
                                          RngSeed seed);

// mu such that the lognormal tail has log-log slope -alpha at x_m. Throws
// NoSolution if no bracket is found.
double solve_matching_mu(double sigma, double alpha, double x_m);

} // namespace plbin
