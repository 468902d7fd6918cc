#pragma once

#include <cstddef>
#include <string>

#include "plbin/binning.hpp"

namespace plbin {

enum class FitMethod { mle_binned, mle_continuous, regression };

std::string to_string(FitMethod method);

struct FitResult {
  double alpha_hat = 0.0;
  double std_err = 0.0;
  double lambda = 1.0; // 1 encodes unbinned data
  std::size_t n = 0;
  FitMethod method = FitMethod::mle_continuous;
};

// alpha = log_lambda(1 + 1 / mean_index). Throws EstimatorUndefined when
// mean_index == 0.
double binned_alpha(double mean_index, double lambda);

FitResult mle_binned(const BinnedSample& b);

// Pareto (Hill) estimator 1 / mean(ln(x / x_m)).
FitResult mle_continuous(const Sample& s);

// Inverse observed Fisher information of the binned MLE. At lambda == 1 the
// analytic limit alpha^2 / n is returned.
double mle_variance(double alpha_hat, double lambda, std::size_t n);

// OLS of ln q_i on ln(x_i / x_m) with tail quantile q_i = (n - i + 1) / n for
// ascending rank i; alpha = -slope.
FitResult regression_estimate(const Sample& s);

// mle_continuous for lambda == 1, mle_binned of the binned sample otherwise.
FitResult fit_mle(const Sample& s, double lambda);

} // namespace plbin
