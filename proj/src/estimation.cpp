#include "plbin/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "plbin/error.hpp"

namespace plbin {

std::string to_string(FitMethod method) {
  switch (method) {
  case FitMethod::mle_binned: return "mle_binned";
  case FitMethod::mle_continuous: return "mle_continuous";
  case FitMethod::regression: return "regression";
  }
  return "mle_binned";
}

double binned_alpha(double mean_index, double lambda) {
  require(std::isfinite(lambda) && lambda > 1.0, "lambda must be a finite real > 1");
  if (!(mean_index > 0.0)) {
    throw EstimatorUndefined("binned MLE undefined: every observation lies in bin 0");
  }
  return std::log1p(1.0 / mean_index) / std::log(lambda);
}

FitResult mle_binned(const BinnedSample& b) {
  FitResult out;
  out.alpha_hat = binned_alpha(b.mean_index(), b.lambda());
  out.lambda = b.lambda();
  out.n = static_cast<std::size_t>(b.total());
  out.std_err = std::sqrt(mle_variance(out.alpha_hat, out.lambda, out.n));
  out.method = FitMethod::mle_binned;
  return out;
}

FitResult mle_continuous(const Sample& s) {
  double sum = 0.0;
  for (double x : s.values()) sum += std::log(x / s.x_m());
  const double mean_log = sum / static_cast<double>(s.size());
  if (!(mean_log > 0.0)) {
    throw EstimatorUndefined("Pareto MLE undefined: every observation equals x_m");
  }
  FitResult out;
  out.alpha_hat = 1.0 / mean_log;
  out.lambda = 1.0;
  out.n = s.size();
  out.std_err = out.alpha_hat / std::sqrt(static_cast<double>(out.n));
  out.method = FitMethod::mle_continuous;
  return out;
}

double mle_variance(double alpha_hat, double lambda, std::size_t n) {
  require(std::isfinite(alpha_hat) && alpha_hat > 0.0, "alpha_hat must be a finite positive real");
  require(std::isfinite(lambda) && lambda >= 1.0, "lambda must be a finite real >= 1");
  require(n >= 1, "n must be at least 1");
  const double nn = static_cast<double>(n);
  if (lambda == 1.0) return alpha_hat * alpha_hat / nn;
  const double log_lambda = std::log(lambda);
  const double a = alpha_hat * log_lambda;        // ln lambda^alpha
  const double excess = std::expm1(a);            // lambda^alpha - 1
  return excess * excess / (nn * std::exp(a) * log_lambda * log_lambda);
}

FitResult regression_estimate(const Sample& s) {
  const std::size_t n = s.size();
  require(n >= 3, "regression needs at least 3 observations");
  std::vector<double> xs = s.values();
  std::sort(xs.begin(), xs.end());
  require(xs.front() < xs.back(), "regression needs at least two distinct values");

  const double nn = static_cast<double>(n);
  double mean_u = 0.0, mean_v = 0.0;
  std::vector<double> u(n), v(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = std::log(xs[i] / s.x_m());
    v[i] = std::log(static_cast<double>(n - i) / nn); // q = (n - rank + 1) / n, rank = i + 1
    mean_u += u[i];
    mean_v += v[i];
  }
  mean_u /= nn;
  mean_v /= nn;
  // Log value on log quantile; the fitted slope is -1/alpha.
  double svv = 0.0, suv = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    svv += (v[i] - mean_v) * (v[i] - mean_v);
    suv += (u[i] - mean_u) * (v[i] - mean_v);
  }
  const double slope = suv / svv;
  const double intercept = mean_u - slope * mean_v;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = u[i] - intercept - slope * v[i];
    sse += e * e;
  }

  FitResult out;
  out.alpha_hat = -1.0 / slope;
  out.std_err = std::sqrt(sse / (nn - 2.0) / svv) / (slope * slope);
  out.lambda = 1.0;
  out.n = n;
  out.method = FitMethod::regression;
  if (!(out.alpha_hat > 0.0) || !std::isfinite(out.alpha_hat)) {
    throw EstimatorUndefined("regression slope is not negative");
  }
  return out;
}

FitResult fit_mle(const Sample& s, double lambda) {
  if (lambda == 1.0) return mle_continuous(s);
  return mle_binned(bin_sample(s, lambda));
}

} // namespace plbin
