#include "plbin/binning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "plbin/error.hpp"

namespace plbin {

namespace {

void check_lambda(double lambda) {
  require(std::isfinite(lambda) && lambda > 1.0, "lambda must be a finite real > 1");
}

void check_xm(double x_m) {
  require(std::isfinite(x_m) && x_m > 0.0, "x_m must be a finite positive real");
}

// Lower edge of bin k, shifted down by the edge tolerance.
double snapped(double edge) { return edge * (1.0 - kEdgeRelTol); }

} // namespace

Sample::Sample(std::vector<double> values, double x_m) : values_(std::move(values)), x_m_(x_m) {
  check_xm(x_m_);
  require(!values_.empty(), "sample is empty");
  for (double v : values_) {
    require(std::isfinite(v) && v >= x_m_, "sample value below x_m or not finite");
  }
}

Sample Sample::above_threshold(std::span<const double> values, double x_m) {
  check_xm(x_m);
  std::vector<double> kept;
  kept.reserve(values.size());
  for (double v : values) {
    if (std::isfinite(v) && v >= x_m) kept.push_back(v);
  }
  require(!kept.empty(), "no values at or above x_m");
  return Sample(std::move(kept), x_m);
}

double Sample::max() const { return *std::max_element(values_.begin(), values_.end()); }

BinnedSample::BinnedSample(double lambda, double x_m) : lambda_(lambda), x_m_(x_m) {
  check_lambda(lambda);
  check_xm(x_m);
}

void BinnedSample::add(std::int64_t k, std::uint64_t count) {
  require(k >= 0, "bin index must be nonnegative");
  if (count == 0) return;
  counts_[k] += count;
  total_ += count;
  index_sum_ += static_cast<double>(k) * static_cast<double>(count);
}

std::uint64_t BinnedSample::count(std::int64_t k) const {
  const auto it = counts_.find(k);
  return it == counts_.end() ? 0 : it->second;
}

double BinnedSample::mean_index() const {
  require(total_ > 0, "binned sample is empty");
  return index_sum_ / static_cast<double>(total_);
}

std::int64_t BinnedSample::max_index() const {
  require(total_ > 0, "binned sample is empty");
  return counts_.rbegin()->first;
}

std::int64_t bin_index(double x, double x_m, double lambda) {
  check_lambda(lambda);
  check_xm(x_m);
  require(std::isfinite(x), "value is not finite");
  require(x >= snapped(x_m), "value below x_m cannot be binned");
  const double log_lambda = std::log(lambda);
  auto k = static_cast<std::int64_t>(std::floor(std::log(x / x_m) / log_lambda));
  k = std::max<std::int64_t>(k, 0);
  auto edge = [&](std::int64_t j) { return x_m * std::pow(lambda, static_cast<double>(j)); };
  while (k > 0 && x < snapped(edge(k))) --k;
  while (x >= snapped(edge(k + 1))) ++k;
  return k;
}

LogBinner::LogBinner(double lambda, double x_m)
    : lambda_(lambda), x_m_(x_m), log_lambda_(std::log(lambda)) {
  check_lambda(lambda);
  check_xm(x_m);
}

double LogBinner::edge(std::int64_t k) {
  // Small tables are cached; very fine lambdas fall back to direct powers.
  constexpr std::int64_t kMaxCached = 1 << 16;
  if (k >= kMaxCached) return x_m_ * std::pow(lambda_, static_cast<double>(k));
  while (static_cast<std::int64_t>(edges_.size()) <= k) {
    edges_.push_back(x_m_ * std::pow(lambda_, static_cast<double>(edges_.size())));
  }
  return edges_[static_cast<std::size_t>(k)];
}

std::int64_t LogBinner::index(double x) {
  require(std::isfinite(x), "value is not finite");
  return index(x, std::log(x / x_m_));
}

std::int64_t LogBinner::index(double x, double log_ratio) {
  require(x >= snapped(x_m_), "value below x_m cannot be binned");
  auto k = static_cast<std::int64_t>(std::floor(log_ratio / log_lambda_));
  k = std::max<std::int64_t>(k, 0);
  while (k > 0 && x < snapped(edge(k))) --k;
  while (x >= snapped(edge(k + 1))) ++k;
  return k;
}

BinnedSample bin_values(std::span<const double> values, double x_m, double lambda) {
  LogBinner binner(lambda, x_m);
  BinnedSample out(lambda, x_m);
  for (double v : values) out.add(binner.index(v));
  return out;
}

BinnedSample bin_sample(const Sample& s, double lambda) {
  return bin_values(s.values(), s.x_m(), lambda);
}

RangeStats range_stats(const Sample& s, double lambda) {
  RangeStats out;
  const double max = s.max();
  out.r = max / s.x_m();
  out.n_bins = bin_index(max, s.x_m(), lambda) + 1;
  return out;
}

} // namespace plbin
