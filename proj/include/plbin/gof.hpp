#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>

#include "plbin/binning.hpp"
#include "plbin/rng.hpp"
#include "plbin/sampling.hpp"

namespace plbin {

// Distribution of floor-binned power-law data: geometric in the bin index.
struct DiscretePowerLaw {
  double alpha = 1.5;
  double lambda = 2.0;
  double x_m = 1.0;

  void validate() const;
  double pmf(std::int64_t k) const;
  double cdf(std::int64_t k) const;
};

struct GofResult {
  double d_stat = 0.0;
  std::optional<double> p_value; // absent for the 19-sample quick test
  bool reject_at_005 = false;
  std::size_t n_bootstrap = 0;
  std::size_t degenerate_resamples = 0;
  double alpha_hat = 0.0;
  double lambda = 1.0;
};

// Number of bootstrap draws in the quick test: p < 0.05 iff the observed D
// exceeds all of them.
inline constexpr std::size_t kQuickBootstrap = 19;

double ks_binned(const BinnedSample& b, const DiscretePowerLaw& dpl);
double ks_continuous(const Sample& s, const ParetoParams& params);

// Parametric bootstrap: refit on every replicate drawn from the fitted null.
// p = (1 + #{D_b >= D_obs}) / (n_boot + 1). Replicate seeds derive from
// `seed` by replicate index, so results do not depend on `threads`.
GofResult bootstrap_pvalue(const BinnedSample& b, std::size_t n_boot, RngSeed seed,
                           unsigned threads = 1);
GofResult bootstrap_pvalue_continuous(const Sample& s, std::size_t n_boot, RngSeed seed,
                                      unsigned threads = 1);

GofResult quick_reject_19(const BinnedSample& b, RngSeed seed);
GofResult quick_reject_19_continuous(const Sample& s, RngSeed seed);

enum class GofMode { quick, full };

// Dispatches on lambda: the continuous Pareto path at lambda == 1, the
// binned path otherwise.
GofResult goodness_of_fit(const Sample& s, double lambda, GofMode mode, std::size_t n_boot,
                          RngSeed seed, unsigned threads = 1);

// Probability that n Pareto draws all fall below x_m * lambda^2, i.e. occupy
// fewer than three bins: (1 - lambda^(-2 alpha))^n.
double few_bin_probability(double alpha, double lambda, double x_m, std::size_t n);

struct LambdaLimit {
  double lambda = 1.0;
  bool capped = false; // true when the solution exceeds lambda_max
};

// Inverts few_bin_probability(lambda) = tol by bisection in log lambda.
LambdaLimit lambda_upper_limit(double alpha, double x_m, std::size_t n, double tol,
                               double lambda_max = 1e12);

} // namespace plbin
