#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "plbin/binning.hpp"
#include "plbin/gof.hpp"
#include "plbin/rng.hpp"

namespace plbin {

enum class DatasetName { earthquakes, wealth, wildfires, custom };
enum class Transform { identity, richter_pow10 };

std::string to_string(DatasetName name);
DatasetName parse_dataset_name(const std::string& text);
std::string to_string(Transform t);

// Fixed thresholds of the three reference datasets, in natural units.
inline constexpr double kEarthquakeXm = 3162.2776601683795; // 10^3.5
inline constexpr double kWealthXm = 1e9;                    // dollars
inline constexpr double kWildfireXm = 6324.0;               // acres

struct DatasetSpec {
  DatasetName name = DatasetName::custom;
  std::filesystem::path path;
  Transform transform = Transform::identity;
  double x_m = 1.0;
  // Raw values are multiplied by this before thresholding (wealth files
  // come in dollars or millions depending on the version).
  double unit_multiplier = 1.0;

  void validate() const;
};

// Defaults for a named dataset: transform and x_m per dataset.
DatasetSpec named_dataset(DatasetName name, std::filesystem::path path);

struct LoadReport {
  std::size_t lines = 0;
  std::size_t blank = 0;
  std::size_t non_numeric = 0;
  std::size_t non_positive = 0;
  std::size_t valid = 0;    // positive numeric records
  std::size_t retained = 0; // valid records >= x_m after transform
};

struct LoadedDataset {
  Sample sample;
  LoadReport report;
  std::vector<double> raw; // valid records before transform and threshold
};

// One numeric value per line; blank, non-numeric and nonpositive lines are
// counted and skipped. Throws IoError if unreadable, ValidationError if
// nothing remains above x_m.
LoadedDataset load_dataset(const DatasetSpec& spec);

double richter_to_natural(double magnitude);

struct ChiSquareResult {
  double statistic = 0.0;
  std::size_t dof = 1;
  double p_value = 1.0;
  // table[a][b]: a = category is a multiple of 0.5, b = count exceeds the
  // count of the category 0.1 below.
  std::array<std::array<std::size_t, 2>, 2> table{};
  std::size_t categories = 0;
};

// Pearson chi-square (1 dof) for association between magnitudes on
// multiples of 0.5 and counts higher than the preceding 0.1 category.
// Categories run over the full 0.1 grid between min and max magnitude;
// the lowest has no predecessor and is excluded.
ChiSquareResult round_magnitude_chisq(std::span<const double> magnitudes);

// Upper tail probability of a chi-square variable with one degree of freedom.
double chisq1_sf(double statistic);

struct AnalysisOptions {
  std::size_t n_boot = 999;
  RngSeed seed;
  unsigned threads = 0;
};

// Fits and tests the dataset at every lambda; returns the JSON report
// {dataset, x_m, n, load, fits: [...], regression, chisq (earthquakes)}.
nlohmann::json analyze_dataset(const DatasetSpec& spec, const std::vector<double>& lambda_list,
                               const AnalysisOptions& opts);

// Empirical tail CDF rows "x,tail_probability" for plotting.
std::string tail_cdf_csv(const Sample& s);

// Synthetic stand-ins with the shape of each reference dataset, for tests
// that must run without the curated files. Returns the written path.
std::filesystem::path write_synthetic_dataset(DatasetName name, const std::filesystem::path& path,
                                              RngSeed seed);

} // namespace plbin
