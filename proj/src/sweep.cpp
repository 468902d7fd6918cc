#include "plbin/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "plbin/error.hpp"
#include "plbin/parallel.hpp"
#include "plbin/version.hpp"

namespace plbin {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

double parse_double(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

std::uint64_t parse_uint(const std::string& s) {
  if (s.empty() || s.front() == '-') throw std::invalid_argument("not a nonnegative integer");
  std::size_t pos = 0;
  // Accept scientific notation for counts ("1e5") when it is integral.
  if (s.find_first_of(".eE") != std::string::npos) {
    const double v = parse_double(s);
    if (v < 0 || v != std::floor(v) || v > 1e18) throw std::invalid_argument("not an integer");
    return static_cast<std::uint64_t>(v);
  }
  const auto v = std::stoull(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "1") return true;
  if (s == "false" || s == "no" || s == "0") return false;
  throw std::invalid_argument("expected true or false");
}

std::vector<double> parse_grid(const std::string& s) {
  if (s.rfind("geom(", 0) == 0 && s.back() == ')') {
    const auto parts = split_list(s.substr(5, s.size() - 6));
    if (parts.size() != 3) throw std::invalid_argument("geom(lo, hi, count) takes three arguments");
    const double lo = parse_double(parts[0]);
    const double hi = parse_double(parts[1]);
    const auto count = parse_uint(parts[2]);
    if (!(lo >= 1.0) || !(hi > lo) || count < 2) {
      throw std::invalid_argument("geom needs 1 <= lo < hi and count >= 2");
    }
    std::vector<double> out(count);
    for (std::uint64_t i = 0; i < count; ++i) {
      out[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1));
    }
    out.back() = hi;
    return out;
  }
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item));
  return out;
}

ExperimentKind parse_kind(const std::string& s) {
  if (s == "bias_rejection") return ExperimentKind::bias_rejection;
  if (s == "lambda_opt") return ExperimentKind::lambda_opt;
  if (s == "rejection_curve") return ExperimentKind::rejection_curve;
  if (s == "sensitivity") return ExperimentKind::sensitivity;
  if (s == "tolerance") return ExperimentKind::tolerance;
  throw std::invalid_argument(
      "unknown experiment (bias_rejection|lambda_opt|rejection_curve|sensitivity|tolerance)");
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

} // namespace

std::string to_string(ExperimentKind kind) {
  switch (kind) {
  case ExperimentKind::bias_rejection: return "bias_rejection";
  case ExperimentKind::lambda_opt: return "lambda_opt";
  case ExperimentKind::rejection_curve: return "rejection_curve";
  case ExperimentKind::sensitivity: return "sensitivity";
  case ExperimentKind::tolerance: return "tolerance";
  }
  return "bias_rejection";
}

void SweepSpec::validate() const {
  require(!alphas.empty(), "alpha list is empty");
  for (double a : alphas) require(std::isfinite(a) && a > 0.0, "alpha must be positive");
  require(!n_list.empty(), "n list is empty");
  for (auto n : n_list) require(n >= 2, "n must be at least 2");
  require(replicates >= 1, "replicates must be at least 1");
  require(!lambda_grid.empty(), "lambda grid is empty");
  require(std::is_sorted(lambda_grid.begin(), lambda_grid.end()), "lambda grid must be sorted");
  for (double l : lambda_grid) require(std::isfinite(l) && l >= 1.0, "lambda values must be >= 1");
  require(!noise_kinds.empty(), "noise list is empty");
  require(!sigmas.empty(), "sigma list is empty");
  for (double s : sigmas) require(std::isfinite(s) && s >= 0.0, "sigma values must be >= 0");
  require(n_boot >= kQuickBootstrap, "n_boot must be at least 19");
  if (kind == ExperimentKind::sensitivity) {
    require(!lognormal_sigmas.empty(), "lognormal_sigma list is empty");
    for (double s : lognormal_sigmas) require(s > 0.0, "lognormal sigma must be positive");
  }
  if (kind == ExperimentKind::tolerance) {
    for (auto k : noise_kinds) require(k != NoiseKind::none, "tolerance needs additive or multiplicative noise");
  }
}

SweepSpec parse_sweep_spec(std::istream& in, const std::string& source) {
  SweepSpec spec;
  std::vector<std::string> problems;
  std::set<std::string> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = source + ":" + std::to_string(line_no) + ": ";
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back(where + "expected 'key = value'");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      problems.push_back(where + "duplicate key '" + key + "'");
      continue;
    }
    if (value.empty()) {
      problems.push_back(where + "empty value for '" + key + "'");
      continue;
    }
    try {
      if (key == "name") spec.name = value;
      else if (key == "experiment") spec.kind = parse_kind(value);
      else if (key == "alpha") {
        spec.alphas.clear();
        for (const auto& v : split_list(value)) spec.alphas.push_back(parse_double(v));
      } else if (key == "n") {
        spec.n_list.clear();
        for (const auto& v : split_list(value)) spec.n_list.push_back(parse_uint(v));
      } else if (key == "replicates") spec.replicates = parse_uint(value);
      else if (key == "lambda") spec.lambda_grid = parse_grid(value);
      else if (key == "lambda_rule") spec.lambda_rule = parse_bool(value);
      else if (key == "noise") {
        spec.noise_kinds.clear();
        for (const auto& v : split_list(value)) spec.noise_kinds.push_back(parse_noise_kind(v));
      } else if (key == "sigma") spec.sigmas = parse_grid(value);
      else if (key == "lognormal_sigma") spec.lognormal_sigmas = parse_grid(value);
      else if (key == "gof") {
        if (value == "none") spec.gof = false;
        else if (value == "quick") {
          spec.gof = true;
          spec.n_boot = kQuickBootstrap;
        } else if (value == "full") spec.gof = true;
        else throw std::invalid_argument("expected none, quick or full");
      } else if (key == "n_boot") spec.n_boot = parse_uint(value);
      else if (key == "regression") spec.regression = parse_bool(value);
      else if (key == "seed") spec.seed = RngSeed{parse_uint(value)};
      else if (key == "threads") spec.threads = static_cast<unsigned>(parse_uint(value));
      else if (key == "tolerance_target") spec.tolerance.target = parse_double(value);
      else if (key == "tolerance_ci") spec.tolerance.ci_halfwidth = parse_double(value);
      else if (key == "tolerance_window") spec.tolerance.window = parse_double(value);
      else if (key == "tolerance_sigma_max") spec.tolerance.sigma_max = parse_double(value);
      else if (key == "tolerance_batch_min") spec.tolerance.batch_min = parse_uint(value);
      else if (key == "tolerance_batch_max") spec.tolerance.batch_max = parse_uint(value);
      else if (key == "tolerance_max_trials") spec.tolerance.max_trials = parse_uint(value);
      else problems.push_back(where + "unknown key '" + key + "'");
    } catch (const std::exception& e) {
      problems.push_back(where + "bad value for '" + key + "': " + e.what());
    }
  }
  if (problems.empty()) {
    try {
      spec.validate();
    } catch (const ValidationError& e) {
      problems.push_back(source + ": " + e.what());
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid sweep configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  return spec;
}

SweepSpec load_sweep_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path.string());
  return parse_sweep_spec(in, path.string());
}

std::vector<std::string> preset_names() {
  return {"fig2", "fig3", "fig3-full", "fig4", "fig5", "fig6"};
}

std::string preset_text(const std::string& name) {
  if (name == "fig2") {
    return R"(# Estimator bias and rejection rates on n = 500 samples.
name = fig2
experiment = bias_rejection
alpha = 1.5
n = 500
replicates = 1000
lambda = 1, 2, 4
noise = none, additive, multiplicative
sigma = 0.2
gof = full
n_boot = 999
regression = true
seed = 12345
)";
  }
  if (name == "fig3" || name == "fig3-full") {
    const bool full = name == "fig3-full";
    return std::string("# Accuracy/precision tradeoff and rejection rate versus lambda.\n") +
           "name = " + name + "\n" +
           "experiment = lambda_opt\n"
           "alpha = 1.5\n" +
           (full ? "n = 1000000\nreplicates = 200\n" : "n = 100000\nreplicates = 100\n") +
           "lambda = geom(1.25, 3000, 31)\n"
           "noise = additive, multiplicative\n"
           "sigma = 0.1, 0.2\n"
           "gof = quick\n"
           "regression = false\n"
           "seed = 12345\n";
  }
  if (name == "fig4") {
    return R"(# Sensitivity on truncated lognormal tails matched to slope 1.5 at x_m.
name = fig4
experiment = sensitivity
alpha = 1.5
n = 500
replicates = 500
lambda = 1, 1.3, 1.6, 2, 2.5, 3, 4, 6
lognormal_sigma = 0.5, 1, 2
gof = quick
seed = 12345
)";
  }
  if (name == "fig5") {
    return R"(# Bias and rejection versus noise level and sample size.
name = fig5
experiment = bias_rejection
alpha = 1.5
n = 100, 500, 1000, 10000
replicates = 200
lambda = 1, 2, 4
lambda_rule = true
noise = additive, multiplicative
sigma = 0, 0.05, 0.1, 0.2, 0.3, 0.5
gof = quick
regression = false
seed = 12345
)";
  }
  if (name == "fig6") {
    return R"(# Noise tolerance: sigma at which the quick test rejects 10% of the time.
name = fig6
experiment = tolerance
alpha = 1, 1.5, 2
n = 500
lambda = 1, 1.5, 2
lambda_rule = true
noise = additive, multiplicative
seed = 12345
)";
  }
  throw ValidationError("unknown preset '" + name + "'");
}

std::string sweep_csv_header() {
  return "cell,experiment,treatment,sigma,n,alpha,lambda,lambda_rule,method,replicates,valid,"
         "degenerate,mean_alpha,sd_alpha,bias,mse,gof_trials,rejection_rate,median_range,"
         "frac_bins_ge4";
}

std::string tolerance_csv_header() {
  return "cell,experiment,treatment,alpha,n,lambda,lambda_rule,sigma_hat,mean_alpha,rejection,"
         "ci_halfwidth,pooled_trials,converged";
}

std::string replicate_csv_header() {
  return "cell,lambda,lambda_rule,method,replicate,alpha_hat,reject,p_value";
}

namespace {

struct Cell {
  std::string id;
  std::uint64_t index = 0;
  double alpha = 1.5;
  std::size_t n = 500;
  NoiseSpec noise;
  double lognormal_sigma = 0.0;
  double lambda = 1.0; // tolerance cells
  bool lambda_rule = false;
};

std::vector<Cell> expand(const SweepSpec& spec) {
  std::vector<Cell> cells;
  auto push = [&](Cell c) {
    c.index = cells.size();
    cells.push_back(std::move(c));
  };
  if (spec.kind == ExperimentKind::sensitivity) {
    for (double a : spec.alphas) {
      for (auto n : spec.n_list) {
        for (double s : spec.lognormal_sigmas) {
          Cell c;
          c.alpha = a;
          c.n = n;
          c.lognormal_sigma = s;
          c.id = "lognormal/sigma=" + fmt(s) + "/n=" + std::to_string(n) + "/alpha=" + fmt(a);
          push(c);
        }
      }
    }
    return cells;
  }
  if (spec.kind == ExperimentKind::tolerance) {
    for (double a : spec.alphas) {
      for (auto n : spec.n_list) {
        std::vector<std::pair<double, bool>> lambdas;
        const double rule = lambda_rule_of_n(n, a);
        for (double l : spec.lambda_grid) {
          if (l <= rule) lambdas.emplace_back(l, false);
        }
        if (spec.lambda_rule) lambdas.emplace_back(rule, true);
        for (auto kind : spec.noise_kinds) {
          for (const auto& [l, is_rule] : lambdas) {
            Cell c;
            c.alpha = a;
            c.n = n;
            c.noise = NoiseSpec{kind, 0.0};
            c.lambda = l;
            c.lambda_rule = is_rule;
            c.id = to_string(kind) + "/lambda=" + (is_rule ? std::string("rule") : fmt(l)) +
                   "/n=" + std::to_string(n) + "/alpha=" + fmt(a);
            push(c);
          }
        }
      }
    }
    return cells;
  }
  for (double a : spec.alphas) {
    for (auto n : spec.n_list) {
      for (auto kind : spec.noise_kinds) {
        const std::vector<double> sigmas =
            kind == NoiseKind::none ? std::vector<double>{0.0} : spec.sigmas;
        for (double s : sigmas) {
          Cell c;
          c.alpha = a;
          c.n = n;
          c.noise = NoiseSpec{kind, s};
          c.id = to_string(kind) + "/sigma=" + fmt(s) + "/n=" + std::to_string(n) +
                 "/alpha=" + fmt(a);
          push(c);
        }
      }
    }
  }
  return cells;
}

std::string cell_row(const std::string& cell, const std::string& experiment, const CellResult& c) {
  std::ostringstream os;
  os << cell << ',' << experiment << ',' << c.treatment << ',' << fmt(c.sigma) << ',' << c.n
     << ',' << fmt(c.alpha) << ',' << fmt(c.lambda) << ',' << (c.lambda_rule ? 1 : 0) << ','
     << to_string(c.method) << ',' << c.replicates << ',' << c.valid << ',' << c.degenerate << ','
     << fmt(c.mean_alpha) << ',' << fmt(c.sd_alpha) << ',' << fmt(c.valid ? c.bias() : NAN) << ','
     << fmt(c.mse) << ',' << c.gof_trials << ','
     << (c.rejection_rate ? fmt(*c.rejection_rate) : std::string()) << ','
     << fmt(c.median_range) << ',' << fmt(c.frac_bins_ge4);
  return os.str();
}

void write_replicates(std::ostream& out, const std::string& cell, const CellResult& c) {
  for (std::size_t r = 0; r < c.estimates.size(); ++r) {
    const signed char reject = r < c.rejects.size() ? c.rejects[r] : -1;
    const double p = r < c.p_values.size() ? c.p_values[r] : NAN;
    out << cell << ',' << fmt(c.lambda) << ',' << (c.lambda_rule ? 1 : 0) << ',' << to_string(c.method)
        << ',' << r << ',' << fmt(c.estimates[r]) << ','
        << (reject < 0 ? std::string() : std::to_string(reject)) << ','
        << (std::isnan(p) ? std::string() : fmt(p)) << '\n';
  }
}

std::string tolerance_row(const Cell& cell, const ToleranceResult& r) {
  std::ostringstream os;
  os << cell.id << ",tolerance," << to_string(cell.noise.kind) << ',' << fmt(cell.alpha) << ','
     << cell.n << ',' << fmt(cell.lambda) << ',' << (cell.lambda_rule ? 1 : 0) << ','
     << fmt(r.sigma_hat) << ',' << fmt(r.mean_alpha_hat) << ',' << fmt(r.rejection) << ','
     << fmt(r.ci_halfwidth) << ',' << r.pooled_trials << ',' << (r.converged ? 1 : 0);
  return os.str();
}

// Rows of a previous (possibly interrupted) run. An unterminated final line
// is a partial write and is discarded, as is any cell with fewer rows than
// it should have.
std::vector<std::string> read_existing(const std::filesystem::path& path, const std::string& header,
                                       const std::map<std::string, std::size_t>& expected,
                                       std::set<std::string>& done) {
  std::vector<std::string> rows;
  std::ifstream in(path, std::ios::binary);
  if (!in) return rows;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (content.empty()) return rows;
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    const auto nl = content.find('\n', start);
    if (nl == std::string::npos) break;
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  if (lines.empty() || lines.front() != header) {
    throw ValidationError("cannot resume: " + path.string() + " has a different header");
  }
  std::map<std::string, std::size_t> counts;
  for (std::size_t i = 1; i < lines.size(); ++i) ++counts[lines[i].substr(0, lines[i].find(','))];
  for (const auto& [id, count] : counts) {
    const auto it = expected.find(id);
    if (it != expected.end() && it->second == count) done.insert(id);
  }
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (done.count(lines[i].substr(0, lines[i].find(',')))) rows.push_back(lines[i]);
  }
  return rows;
}

// Replicate rows of cells that a resumed run keeps; rows of other cells and
// an unterminated final line are dropped.
std::vector<std::string> read_kept_replicates(const std::filesystem::path& path,
                                              const std::set<std::string>& done) {
  std::vector<std::string> rows;
  std::ifstream in(path, std::ios::binary);
  if (!in) return rows;
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t start = 0;
  bool first = true;
  while (start < content.size()) {
    const auto nl = content.find('\n', start);
    if (nl == std::string::npos) break;
    std::string line = content.substr(start, nl - start);
    start = nl + 1;
    if (first) {
      first = false;
      if (line != replicate_csv_header()) {
        throw ValidationError("cannot resume: " + path.string() + " has a different header");
      }
      continue;
    }
    if (done.count(line.substr(0, line.find(',')))) rows.push_back(std::move(line));
  }
  return rows;
}

nlohmann::json lambda_opt_summary(const std::string& id, const std::vector<CellResult>& cells) {
  const CellResult* best = nullptr;
  for (const auto& c : cells) {
    if (c.valid == 0 || c.lambda_rule || c.method == FitMethod::regression) continue;
    if (best == nullptr || c.mse < best->mse) best = &c;
  }
  nlohmann::json j;
  j["cell"] = id;
  if (best == nullptr) {
    j["lambda_opt"] = nullptr;
    return j;
  }
  j["lambda_opt"] = best->lambda;
  j["mse"] = best->mse;
  j["median_range"] = best->median_range;
  j["log_ratio"] = best->median_range > 1.0 ? std::log(best->lambda) / std::log(best->median_range)
                                            : 0.0;
  return j;
}

} // namespace

nlohmann::json run_sweep(const SweepSpec& spec, const SweepRunOptions& opts) {
  spec.validate();
  require(!opts.csv_path.empty(), "sweep needs an output CSV path");
  const unsigned threads = resolve_threads(opts.threads_override ? opts.threads_override : spec.threads);
  const bool tolerance = spec.kind == ExperimentKind::tolerance;
  const std::string header = tolerance ? tolerance_csv_header() : sweep_csv_header();
  const auto cells = expand(spec);

  std::set<std::string> done;
  std::vector<std::string> kept;
  if (opts.resume) {
    std::map<std::string, std::size_t> expected;
    for (const auto& cell : cells) {
      std::size_t rows = 1;
      if (!tolerance) {
        rows = spec.lambda_grid.size();
        if (spec.kind != ExperimentKind::sensitivity) {
          rows += spec.lambda_rule ? 1 : 0;
          rows += spec.regression && spec.kind == ExperimentKind::bias_rejection ? 1 : 0;
        }
      }
      expected[cell.id] = rows;
    }
    kept = read_existing(opts.csv_path, header, expected, done);
  }

  const bool per_replicate = !opts.replicates_csv.empty() && !tolerance;
  std::vector<std::string> kept_replicates;
  if (per_replicate && opts.resume) kept_replicates = read_kept_replicates(opts.replicates_csv, done);

  std::ofstream out(opts.csv_path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + opts.csv_path.string());
  out << header << '\n';
  for (const auto& r : kept) out << r << '\n';
  out.flush();

  std::ofstream rep_out;
  if (per_replicate) {
    rep_out.open(opts.replicates_csv, std::ios::binary | std::ios::trunc);
    if (!rep_out) throw IoError("cannot write " + opts.replicates_csv.string());
    rep_out << replicate_csv_header() << '\n';
    for (const auto& r : kept_replicates) rep_out << r << '\n';
    rep_out.flush();
  }

  nlohmann::json manifest;
  manifest["name"] = spec.name;
  manifest["experiment"] = to_string(spec.kind);
  manifest["master_seed"] = spec.seed.value;
  manifest["version"] = kVersion;
  manifest["threads"] = threads;
  manifest["csv"] = opts.csv_path.string();
  if (per_replicate) manifest["replicates_csv"] = opts.replicates_csv.string();
  manifest["cells"] = nlohmann::json::array();
  manifest["summaries"] = nlohmann::json::array();

  const auto t0 = std::chrono::steady_clock::now();
  for (const auto& cell : cells) {
    nlohmann::json entry{{"cell", cell.id}, {"index", cell.index}};
    if (done.count(cell.id)) {
      entry["resumed"] = true;
      manifest["cells"].push_back(entry);
      continue;
    }
    const auto c0 = std::chrono::steady_clock::now();
    if (tolerance) {
      ToleranceOptions topts = spec.tolerance;
      topts.threads = threads;
      topts.n_boot = spec.n_boot;
      nlohmann::json summary{{"cell", cell.id}};
      try {
        const auto r = tolerance_search(cell.alpha, cell.lambda, cell.n, cell.noise.kind,
                                        derive_seed(spec.seed, 1000 + cell.index, 0), topts);
        out << tolerance_row(cell, r) << '\n';
        nlohmann::json trace = nlohmann::json::array();
        for (const auto& s : r.trace) {
          trace.push_back({{"sigma", s.sigma}, {"rejection", s.rejection}, {"trials", s.trials}});
        }
        summary["trace"] = trace;
      } catch (const NoSolution& e) {
        summary["error"] = e.what();
      }
      manifest["summaries"].push_back(summary);
    } else {
      SweepResult result;
      if (spec.kind == ExperimentKind::sensitivity) {
        result = sensitivity_curve({cell.lognormal_sigma}, spec.lambda_grid, cell.n,
                                   spec.replicates, spec.seed, cell.alpha, threads, cell.index);
      } else {
        ExperimentConfig cfg;
        cfg.alpha = cell.alpha;
        cfg.n = cell.n;
        cfg.replicates = spec.replicates;
        cfg.lambda_grid = spec.lambda_grid;
        cfg.lambda_rule = spec.lambda_rule;
        cfg.noise = cell.noise;
        cfg.gof = spec.gof;
        cfg.n_boot = spec.n_boot;
        cfg.regression = spec.regression && spec.kind == ExperimentKind::bias_rejection;
        cfg.master_seed = spec.seed;
        cfg.cell_index = cell.index;
        cfg.threads = threads;
        if (spec.kind == ExperimentKind::rejection_curve) result = rejection_curve(cfg);
        else result = run_bias_rejection(cfg);
      }
      // Replicate rows go first so a complete summary implies complete replicates.
      if (per_replicate) {
        for (const auto& c : result.cells) write_replicates(rep_out, cell.id, c);
        rep_out.flush();
        if (!rep_out) throw IoError("error writing " + opts.replicates_csv.string());
      }
      for (const auto& c : result.cells) out << cell_row(cell.id, to_string(spec.kind), c) << '\n';
      if (spec.kind == ExperimentKind::lambda_opt) {
        manifest["summaries"].push_back(lambda_opt_summary(cell.id, result.cells));
      }
    }
    out.flush();
    entry["seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - c0).count();
    manifest["cells"].push_back(entry);
  }
  manifest["total_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!out) throw IoError("error writing " + opts.csv_path.string());
  out.close();

  const auto manifest_path = opts.manifest_path.empty()
                                 ? std::filesystem::path(opts.csv_path.string() + ".manifest.json")
                                 : opts.manifest_path;
  std::ofstream mf(manifest_path);
  if (!mf) throw IoError("cannot write " + manifest_path.string());
  mf << manifest.dump(2) << '\n';
  return manifest;
}

} // namespace plbin
