#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace plbin {

// Relative slack applied at bin edges. A value within this fraction below
// x_m * lambda^k is assigned to bin k, so decimal inputs that land on an
// edge (Richter magnitudes at lambda = 10^0.1) bin to the edge they denote.
inline constexpr double kEdgeRelTol = 1e-12;

// Raw positive observations above a declared threshold x_m.
class Sample {
public:
  // Throws ValidationError unless values is nonempty and every value >= x_m > 0.
  Sample(std::vector<double> values, double x_m);

  // Keeps only values >= x_m (closed lower bound); throws if none remain.
  static Sample above_threshold(std::span<const double> values, double x_m);

  const std::vector<double>& values() const { return values_; }
  double x_m() const { return x_m_; }
  std::size_t size() const { return values_.size(); }
  double max() const;

private:
  std::vector<double> values_;
  double x_m_;
};

// Floor-binned data: counts per bin index k, where bin k is
// [x_m * lambda^k, x_m * lambda^(k+1)).
class BinnedSample {
public:
  BinnedSample(double lambda, double x_m);

  void add(std::int64_t k, std::uint64_t count = 1);

  double lambda() const { return lambda_; }
  double x_m() const { return x_m_; }
  const std::map<std::int64_t, std::uint64_t>& counts() const { return counts_; }
  std::uint64_t count(std::int64_t k) const;

  std::uint64_t total() const { return total_; }
  // Sum over observations of their bin index.
  double index_sum() const { return index_sum_; }
  double mean_index() const;
  std::int64_t max_index() const;
  std::size_t occupied_bins() const { return counts_.size(); }

private:
  double lambda_;
  double x_m_;
  std::map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  double index_sum_ = 0.0;
};

// Bin index k with x_m * lambda^k <= x < x_m * lambda^(k+1), up to kEdgeRelTol.
// The floating log only proposes k; the edge products decide.
std::int64_t bin_index(double x, double x_m, double lambda);

// Bulk binning with a cached table of bin edges. Agrees with bin_index.
class LogBinner {
public:
  LogBinner(double lambda, double x_m);

  std::int64_t index(double x);
  // Same as index(x) given a precomputed ln(x / x_m).
  std::int64_t index(double x, double log_ratio);
  double edge(std::int64_t k);

  double lambda() const { return lambda_; }
  double x_m() const { return x_m_; }

private:
  double lambda_;
  double x_m_;
  double log_lambda_;
  std::vector<double> edges_;
};

BinnedSample bin_sample(const Sample& s, double lambda);
BinnedSample bin_values(std::span<const double> values, double x_m, double lambda);

struct RangeStats {
  double r = 1.0;            // max x_i / x_m
  std::int64_t n_bins = 1;   // floor(log_lambda r) + 1
};

RangeStats range_stats(const Sample& s, double lambda);

} // namespace plbin
