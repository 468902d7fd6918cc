#include "plbin/gof.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "plbin/error.hpp"
#include "plbin/estimation.hpp"
#include "plbin/parallel.hpp"

namespace plbin {

namespace {

// A single bootstrap replicate giving up after this many collapsed draws
// means lambda is far too large for n.
constexpr std::size_t kMaxDegenerateAttempts = 64;

[[noreturn]] void too_coarse(double lambda, std::size_t n) {
  throw DegenerateBinning("lambda too large for n: bootstrap replicates at lambda = " +
                          std::to_string(lambda) + " with n = " + std::to_string(n) +
                          " mostly fall in a single bin");
}

struct BootstrapDraws {
  std::vector<double> d;
  std::size_t degenerate = 0;
};

BootstrapDraws draw_binned(const DiscretePowerLaw& null, std::size_t n, std::size_t n_boot,
                           RngSeed seed, unsigned threads) {
  BootstrapDraws out;
  out.d.resize(n_boot);
  std::vector<std::size_t> degenerate(n_boot, 0);
  parallel_for(n_boot, threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, 0, i));
    for (;;) {
      const BinnedSample rep = discrete_powerlaw_counts(null.alpha, null.lambda, null.x_m, n, rng);
      // One occupied bin carries no shape information; all-in-bin-0 also
      // leaves the estimator undefined.
      if (rep.occupied_bins() < 2) {
        if (++degenerate[i] >= kMaxDegenerateAttempts) too_coarse(null.lambda, n);
        continue;
      }
      const double refit = binned_alpha(rep.mean_index(), null.lambda);
      out.d[i] = ks_binned(rep, DiscretePowerLaw{refit, null.lambda, null.x_m});
      return;
    }
  });
  out.degenerate = std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
  if (out.degenerate > n_boot) too_coarse(null.lambda, n);
  return out;
}

BootstrapDraws draw_continuous(const ParetoParams& null, std::size_t n, std::size_t n_boot,
                               RngSeed seed, unsigned threads) {
  BootstrapDraws out;
  out.d.resize(n_boot);
  std::vector<std::size_t> degenerate(n_boot, 0);
  parallel_for(n_boot, threads, [&](std::size_t i) {
    Rng rng(derive_seed(seed, 0, i));
    for (;;) {
      Sample rep(pareto_sample(null, n, rng), null.x_m);
      try {
        const FitResult refit = mle_continuous(rep);
        out.d[i] = ks_continuous(rep, ParetoParams{refit.alpha_hat, null.x_m});
        return;
      } catch (const EstimatorUndefined&) {
        if (++degenerate[i] >= kMaxDegenerateAttempts) throw;
      }
    }
  });
  out.degenerate = std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
  return out;
}

GofResult summarize(double d_obs, const BootstrapDraws& draws, bool quick) {
  GofResult out;
  out.d_stat = d_obs;
  out.n_bootstrap = draws.d.size();
  out.degenerate_resamples = draws.degenerate;
  if (quick) {
    const double max_d = *std::max_element(draws.d.begin(), draws.d.end());
    out.reject_at_005 = d_obs > max_d;
  } else {
    const auto extreme = std::count_if(draws.d.begin(), draws.d.end(),
                                       [d_obs](double d) { return d >= d_obs; });
    const double p = static_cast<double>(extreme + 1) / static_cast<double>(draws.d.size() + 1);
    out.p_value = p;
    out.reject_at_005 = p < 0.05;
  }
  return out;
}

void check_n_boot(std::size_t n_boot) {
  require(n_boot >= kQuickBootstrap, "bootstrap size must be at least 19");
}

GofResult binned_test(const BinnedSample& b, std::size_t n_boot, RngSeed seed, unsigned threads,
                      bool quick) {
  const FitResult fit = mle_binned(b);
  const DiscretePowerLaw null{fit.alpha_hat, b.lambda(), b.x_m()};
  const double d_obs = ks_binned(b, null);
  const auto draws = draw_binned(null, static_cast<std::size_t>(b.total()), n_boot, seed, threads);
  GofResult out = summarize(d_obs, draws, quick);
  out.alpha_hat = fit.alpha_hat;
  out.lambda = b.lambda();
  return out;
}

GofResult continuous_test(const Sample& s, std::size_t n_boot, RngSeed seed, unsigned threads,
                          bool quick) {
  const FitResult fit = mle_continuous(s);
  const ParetoParams null{fit.alpha_hat, s.x_m()};
  const double d_obs = ks_continuous(s, null);
  const auto draws = draw_continuous(null, s.size(), n_boot, seed, threads);
  GofResult out = summarize(d_obs, draws, quick);
  out.alpha_hat = fit.alpha_hat;
  out.lambda = 1.0;
  return out;
}

} // namespace

void DiscretePowerLaw::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be a finite positive real");
  require(std::isfinite(lambda) && lambda > 1.0, "lambda must be a finite real > 1");
  require(std::isfinite(x_m) && x_m > 0.0, "x_m must be a finite positive real");
}

double DiscretePowerLaw::pmf(std::int64_t k) const {
  require(k >= 0, "bin index must be nonnegative");
  const double a = alpha * std::log(lambda);
  return -std::expm1(-a) * std::exp(-a * static_cast<double>(k));
}

double DiscretePowerLaw::cdf(std::int64_t k) const {
  require(k >= 0, "bin index must be nonnegative");
  return -std::expm1(-alpha * std::log(lambda) * static_cast<double>(k + 1));
}

double ks_binned(const BinnedSample& b, const DiscretePowerLaw& dpl) {
  dpl.validate();
  require(b.lambda() == dpl.lambda, "ks_binned: lambda of data and model differ");
  require(b.x_m() == dpl.x_m, "ks_binned: x_m of data and model differ");
  require(b.total() > 0, "ks_binned: empty sample");
  const double n = static_cast<double>(b.total());
  // Between occupied bins the empirical CDF is flat while the model CDF
  // rises, so only occupied bins and the last bin of each gap can attain
  // the maximum. Past the top occupied bin the gap 1 - cdf only shrinks.
  double d = 0.0;
  std::uint64_t cum = 0;
  std::int64_t prev = -1;
  for (const auto& [k, c] : b.counts()) {
    if (k - 1 > prev) d = std::max(d, std::abs(static_cast<double>(cum) / n - dpl.cdf(k - 1)));
    cum += c;
    d = std::max(d, std::abs(static_cast<double>(cum) / n - dpl.cdf(k)));
    prev = k;
  }
  return d;
}

double ks_continuous(const Sample& s, const ParetoParams& params) {
  params.validate();
  require(s.x_m() == params.x_m, "ks_continuous: x_m of data and model differ");
  std::vector<double> xs = s.values();
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = params.cdf(xs[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

GofResult bootstrap_pvalue(const BinnedSample& b, std::size_t n_boot, RngSeed seed,
                           unsigned threads) {
  check_n_boot(n_boot);
  return binned_test(b, n_boot, seed, threads, false);
}

GofResult bootstrap_pvalue_continuous(const Sample& s, std::size_t n_boot, RngSeed seed,
                                      unsigned threads) {
  check_n_boot(n_boot);
  return continuous_test(s, n_boot, seed, threads, false);
}

GofResult quick_reject_19(const BinnedSample& b, RngSeed seed) {
  return binned_test(b, kQuickBootstrap, seed, 1, true);
}

GofResult quick_reject_19_continuous(const Sample& s, RngSeed seed) {
  return continuous_test(s, kQuickBootstrap, seed, 1, true);
}

GofResult goodness_of_fit(const Sample& s, double lambda, GofMode mode, std::size_t n_boot,
                          RngSeed seed, unsigned threads) {
  require(std::isfinite(lambda) && lambda >= 1.0, "lambda must be a finite real >= 1");
  const bool quick = mode == GofMode::quick;
  const std::size_t draws = quick ? kQuickBootstrap : n_boot;
  check_n_boot(draws);
  if (lambda == 1.0) return continuous_test(s, draws, seed, threads, quick);
  return binned_test(bin_sample(s, lambda), draws, seed, threads, quick);
}

double few_bin_probability(double alpha, double lambda, double x_m, std::size_t n) {
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be a finite positive real");
  require(std::isfinite(lambda) && lambda >= 1.0, "lambda must be a finite real >= 1");
  require(std::isfinite(x_m) && x_m > 0.0, "x_m must be a finite positive real");
  require(n >= 1, "n must be at least 1");
  const double above = std::exp(-2.0 * alpha * std::log(lambda)); // P(x >= x_m lambda^2)
  if (above >= 1.0) return 0.0;
  return std::exp(static_cast<double>(n) * std::log1p(-above));
}

LambdaLimit lambda_upper_limit(double alpha, double x_m, std::size_t n, double tol,
                               double lambda_max) {
  require(std::isfinite(tol) && tol > 0.0 && tol < 1.0, "tolerance must lie in (0, 1)");
  require(std::isfinite(lambda_max) && lambda_max > 1.0, "lambda_max must be > 1");
  if (few_bin_probability(alpha, lambda_max, x_m, n) < tol) return LambdaLimit{lambda_max, true};
  double lo = 0.0;
  double hi = std::log(lambda_max);
  for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (few_bin_probability(alpha, std::exp(mid), x_m, n) < tol) lo = mid;
    else hi = mid;
  }
  return LambdaLimit{std::exp(0.5 * (lo + hi)), false};
}

} // namespace plbin
