#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "plbin/estimation.hpp"
#include "plbin/gof.hpp"
#include "plbin/rng.hpp"
#include "plbin/sampling.hpp"

namespace plbin {

// One Monte Carlo cell: a data-generating treatment (alpha, n, noise) fitted
// at every lambda of the grid. Each replicate draws one sample shared by all
// lambdas and methods, as in a paired design.
struct ExperimentConfig {
  double alpha = 1.5;
  std::size_t n = 500;
  std::size_t replicates = 1000;
  std::vector<double> lambda_grid{1.0, 2.0, 4.0};
  bool lambda_rule = false; // also fit at lambda_rule_of_n(n, alpha)
  NoiseSpec noise;
  bool gof = true;
  std::size_t n_boot = kQuickBootstrap; // 19 runs the quick test
  bool regression = true;
  RngSeed master_seed;
  std::uint64_t cell_index = 0; // seed stream of this cell
  unsigned threads = 0;

  void validate() const;
};

struct CellResult {
  std::string treatment; // none | additive | multiplicative | lognormal
  double sigma = 0.0;
  std::size_t n = 0;
  double alpha = 0.0;
  double lambda = 1.0;
  bool lambda_rule = false;
  FitMethod method = FitMethod::mle_continuous;
  std::size_t replicates = 0;
  std::size_t valid = 0;      // replicates with a defined estimate
  std::size_t degenerate = 0; // replicates where the estimator was undefined
  double mean_alpha = 0.0;
  double sd_alpha = 0.0;      // population sd over valid replicates
  double mse = 0.0;           // mean (alpha - alpha_hat)^2
  std::size_t gof_trials = 0;
  std::optional<double> rejection_rate;
  double median_range = 0.0;  // median over replicates of max x / x_m
  double frac_bins_ge4 = 0.0; // replicates whose data span >= 4 bins
  // Per replicate, in replicate order.
  std::vector<double> estimates;     // NaN when undefined
  std::vector<signed char> rejects;  // -1 when not tested; empty for regression
  std::vector<double> p_values;      // NaN for the quick test or when not tested

  double bias() const { return mean_alpha - alpha; }
  // All replicates degenerate: flagged rather than dropped.
  bool all_degenerate() const { return valid == 0; }
};

struct SweepResult {
  std::vector<CellResult> cells;
};

// Fits mle_continuous / mle_binned per lambda and optionally regression, and
// runs the goodness-of-fit test per lambda (quick test when n_boot == 19).
SweepResult run_bias_rejection(const ExperimentConfig& cfg);

// run_bias_rejection without the regression comparator.
SweepResult rejection_curve(const ExperimentConfig& cfg);

struct LambdaOptResult {
  double lambda_opt = 1.0;
  double median_range = 1.0;
  double log_ratio = 0.0; // log lambda_opt / log median_range
  SweepResult mse_curve;
};

// argmin over the lambda grid of the mean squared error of mle_binned.
LambdaOptResult lambda_opt_search(const ExperimentConfig& cfg);

// Rejection rate on truncated-lognormal samples whose log-log slope at x_m
// matches alpha, for every (sigma, lambda). Cell index i of sigma_list uses
// seed stream `first_cell + i`.
SweepResult sensitivity_curve(const std::vector<double>& sigma_list,
                              const std::vector<double>& lambda_grid, std::size_t n,
                              std::size_t replicates, RngSeed seed, double alpha = 1.5,
                              unsigned threads = 0, std::uint64_t first_cell = 0);

struct ToleranceOptions {
  double target = 0.10;
  double ci_halfwidth = 0.005;   // required binomial 95% CI half-width
  double window = 0.02;          // pool trials with |sigma - sigma_hat| <= window * sigma_hat
  double sigma_max = 1.0;
  std::size_t batch_min = 200;
  std::size_t batch_max = 3200;
  std::size_t max_trials = 400000;
  std::size_t n_boot = kQuickBootstrap; // 19 runs the quick test
  unsigned threads = 0;
};

struct ToleranceStep {
  double sigma = 0.0;
  double rejection = 0.0;
  std::size_t trials = 0;
};

struct ToleranceResult {
  double sigma_hat = 0.0;
  double mean_alpha_hat = 0.0;
  double rejection = 0.0;       // pooled rate in the window around sigma_hat
  double ci_halfwidth = 0.0;
  std::size_t pooled_trials = 0;
  bool converged = false;
  std::vector<ToleranceStep> trace;
};

// Stochastic binary search for the noise level at which the test (quick by
// default) rejects at the target rate. Throws NoSolution if the rate stays below the
// target at sigma_max.
ToleranceResult tolerance_search(double alpha, double lambda, std::size_t n, NoiseKind noise_kind,
                                 RngSeed seed, const ToleranceOptions& opts = {});

// n^(1/(3 alpha)): places the expected maximum near the fourth bin edge.
double lambda_rule_of_n(std::size_t n, double alpha);

} // namespace plbin
