#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "plbin/experiments.hpp"

namespace plbin {

enum class ExperimentKind { bias_rejection, lambda_opt, rejection_curve, sensitivity, tolerance };

std::string to_string(ExperimentKind kind);

// Declarative sweep read from a key = value file. Lists are comma separated;
// lambda grids also accept geom(lo, hi, count). See docs/config.md.
struct SweepSpec {
  std::string name = "sweep";
  ExperimentKind kind = ExperimentKind::bias_rejection;
  std::vector<double> alphas{1.5};
  std::vector<std::size_t> n_list{500};
  std::size_t replicates = 1000;
  std::vector<double> lambda_grid{1.0, 2.0, 4.0};
  bool lambda_rule = false;
  std::vector<NoiseKind> noise_kinds{NoiseKind::none};
  std::vector<double> sigmas{0.0};
  std::vector<double> lognormal_sigmas{1.0};
  bool gof = true;
  std::size_t n_boot = kQuickBootstrap;
  bool regression = true;
  RngSeed seed{12345};
  unsigned threads = 0;
  ToleranceOptions tolerance;

  void validate() const;
};

// Throws ValidationError listing every problem with its line number.
SweepSpec parse_sweep_spec(std::istream& in, const std::string& source = "<config>");
SweepSpec load_sweep_spec(const std::filesystem::path& path);

// Built-in configurations: fig2, fig3, fig3-full, fig4, fig5, fig6.
std::vector<std::string> preset_names();
std::string preset_text(const std::string& name);

struct SweepRunOptions {
  std::filesystem::path csv_path;
  std::filesystem::path manifest_path; // empty: <csv>.manifest.json
  std::filesystem::path replicates_csv; // optional per-replicate rows; ignored for tolerance
  bool resume = false;
  unsigned threads_override = 0;       // nonzero replaces spec.threads
};

// Runs every cell, appending its rows to the CSV as soon as the cell
// finishes. With resume, cells already present in the CSV are skipped.
// Returns the manifest that is also written to disk.
nlohmann::json run_sweep(const SweepSpec& spec, const SweepRunOptions& opts);

// CSV header for bias/rejection-style sweeps and for tolerance sweeps.
std::string sweep_csv_header();
std::string tolerance_csv_header();
std::string replicate_csv_header();

} // namespace plbin
