#include "plbin/cli.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "plbin/datasets.hpp"
#include "plbin/error.hpp"
#include "plbin/estimation.hpp"
#include "plbin/experiments.hpp"
#include "plbin/gof.hpp"
#include "plbin/parallel.hpp"
#include "plbin/sweep.hpp"
#include "plbin/version.hpp"

namespace plbin {

namespace {

using nlohmann::json;

enum class Format { json, csv, human };

std::string scalar_text(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

std::string csv_cell(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

void emit_rows(const std::vector<json>& rows, std::ostream& out) {
  std::vector<std::string> keys;
  for (const auto& r : rows) {
    for (const auto& [k, v] : r.items()) {
      if (v.is_structured()) continue;
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
  }
  for (std::size_t i = 0; i < keys.size(); ++i) out << (i ? "," : "") << keys[i];
  out << '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < keys.size(); ++i) {
      out << (i ? "," : "");
      if (r.contains(keys[i])) out << csv_cell(scalar_text(r[keys[i]]));
    }
    out << '\n';
  }
}

void emit(const json& j, Format format, std::ostream& out) {
  switch (format) {
  case Format::json: out << j.dump(2) << '\n'; return;
  case Format::csv:
    if (j.contains("fits")) {
      std::vector<json> rows;
      for (const auto& f : j["fits"]) {
        json row = f;
        row["dataset"] = j["dataset"];
        row["x_m"] = j["x_m"];
        row["n"] = j["n"];
        row["seed"] = j["seed"];
        rows.push_back(row);
      }
      emit_rows(rows, out);
    } else {
      emit_rows({j}, out);
    }
    return;
  case Format::human:
    for (const auto& [k, v] : j.items()) {
      if (k == "fits") {
        out << "fits:\n";
        for (const auto& f : v) {
          out << "  lambda=" << scalar_text(f.value("lambda", json()));
          for (const auto& [fk, fv] : f.items()) {
            if (fk != "lambda") out << "  " << fk << '=' << scalar_text(fv);
          }
          out << '\n';
        }
      } else if (v.is_structured()) {
        out << k << ": " << v.dump() << '\n';
      } else {
        out << k << ": " << scalar_text(v) << '\n';
      }
    }
    return;
  }
}

struct Common {
  std::string format = "json";
  unsigned threads = 0;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--format", c.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "human"}))
      ->capture_default_str();
  sub->add_option("--threads", c.threads,
                  "Worker threads (0: PLBIN_THREADS or hardware concurrency)");
}

Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "human") return Format::human;
  return Format::json;
}

RngSeed pick_seed(const std::optional<std::uint64_t>& seed) {
  return seed ? RngSeed{*seed} : fresh_seed();
}

Transform parse_transform(const std::string& s) {
  if (s == "identity") return Transform::identity;
  if (s == "richter_pow10") return Transform::richter_pow10;
  throw ValidationError("unknown transform '" + s + "'");
}

std::vector<double> default_lambdas(DatasetName name) {
  if (name == DatasetName::earthquakes) return {1.0, std::pow(10.0, 0.1), 10.0};
  return {1.0, 2.0, 4.0};
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Power-law exponent inference with logarithmic binning", "plbin"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // fit
  Common fit_c;
  std::string fit_file, fit_method = "mle", fit_transform = "identity";
  double fit_xm = 0.0, fit_lambda = 1.0;
  auto* fit = app.add_subcommand("fit", "Estimate the exponent of a sample");
  fit->add_option("file", fit_file, "One value per line")->required();
  fit->add_option("--xm", fit_xm, "Lower threshold x_m")->required();
  fit->add_option("--lambda", fit_lambda, "Bin ratio (1: unbinned)")->capture_default_str();
  fit->add_option("--method", fit_method, "mle or regression")
      ->check(CLI::IsMember({"mle", "regression"}))
      ->capture_default_str();
  fit->add_option("--transform", fit_transform, "identity or richter_pow10")
      ->check(CLI::IsMember({"identity", "richter_pow10"}))
      ->capture_default_str();
  add_common(fit, fit_c);

  // gof
  Common gof_c;
  std::string gof_file, gof_transform = "identity";
  double gof_xm = 0.0, gof_lambda = 1.0;
  std::size_t gof_boot = 999;
  bool gof_quick = false;
  std::optional<std::uint64_t> gof_seed;
  auto* gof = app.add_subcommand("gof", "Bootstrap Kolmogorov-Smirnov goodness of fit");
  gof->add_option("file", gof_file, "One value per line")->required();
  gof->add_option("--xm", gof_xm, "Lower threshold x_m")->required();
  gof->add_option("--lambda", gof_lambda, "Bin ratio (1: unbinned)")->capture_default_str();
  gof->add_option("--boot", gof_boot, "Bootstrap replicates")->capture_default_str();
  gof->add_flag("--quick", gof_quick, "19-replicate test: reject iff D exceeds all of them");
  gof->add_option("--seed", gof_seed, "Master seed (default: fresh, printed)");
  gof->add_option("--transform", gof_transform, "identity or richter_pow10")
      ->check(CLI::IsMember({"identity", "richter_pow10"}))
      ->capture_default_str();
  add_common(gof, gof_c);

  // simulate
  Common sim_c;
  std::string sim_config, sim_preset, sim_out, sim_manifest, sim_rep_out;
  bool sim_resume = false, sim_print = false;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "Run a simulation sweep from a config file");
  auto* cfg_opt = sim->add_option("--config", sim_config, "Sweep config file");
  auto* preset_opt = sim->add_option("--preset", sim_preset, "Built-in config")
                         ->check(CLI::IsMember(preset_names()));
  cfg_opt->excludes(preset_opt);
  sim->add_option("--out", sim_out, "Result CSV path (required unless --print-preset)");
  sim->add_option("--replicates-out", sim_rep_out, "Optional per-replicate CSV path");
  sim->add_option("--manifest", sim_manifest, "Manifest path (default: <out>.manifest.json)");
  sim->add_option("--seed", sim_seed, "Override the config's master seed");
  sim->add_flag("--resume", sim_resume, "Skip cells already complete in the CSV");
  sim->add_flag("--print-preset", sim_print, "Print the preset text and exit");
  add_common(sim, sim_c);

  // tolerance
  Common tol_c;
  double tol_alpha = 1.5, tol_lambda = 1.0;
  bool tol_rule = false;
  std::size_t tol_n = 500;
  std::string tol_noise = "additive";
  std::optional<std::uint64_t> tol_seed;
  ToleranceOptions tol_opts;
  auto* tol = app.add_subcommand("tolerance", "Noise level at which the test rejects 10% of samples");
  tol->add_option("--alpha", tol_alpha)->capture_default_str();
  tol->add_option("--lambda", tol_lambda)->capture_default_str();
  tol->add_flag("--lambda-rule", tol_rule, "Use lambda = n^(1/(3 alpha))");
  tol->add_option("--n", tol_n)->capture_default_str();
  tol->add_option("--noise", tol_noise)
      ->check(CLI::IsMember({"additive", "multiplicative"}))
      ->capture_default_str();
  tol->add_option("--target", tol_opts.target)->capture_default_str();
  tol->add_option("--ci", tol_opts.ci_halfwidth, "95% CI half-width")->capture_default_str();
  tol->add_option("--sigma-max", tol_opts.sigma_max)->capture_default_str();
  tol->add_option("--max-trials", tol_opts.max_trials)->capture_default_str();
  tol->add_option("--boot", tol_opts.n_boot, "Bootstrap replicates (19: quick test)")->capture_default_str();
  tol->add_option("--seed", tol_seed, "Master seed (default: fresh, printed)");
  add_common(tol, tol_c);

  // dataset
  Common ds_c;
  std::string ds_name = "custom", ds_file, ds_transform, ds_tail;
  std::optional<double> ds_xm;
  double ds_unit = 1.0;
  std::vector<double> ds_lambdas;
  std::size_t ds_boot = 999;
  std::optional<std::uint64_t> ds_seed;
  auto* ds = app.add_subcommand("dataset", "Analyze an empirical dataset across bin ratios");
  ds->add_option("file", ds_file, "One value per line")->required();
  ds->add_option("--name", ds_name, "earthquakes, wealth, wildfires or custom")
      ->check(CLI::IsMember({"earthquakes", "wealth", "wildfires", "custom"}))
      ->capture_default_str();
  ds->add_option("--xm", ds_xm, "Threshold (required for custom; fixed for named datasets)");
  ds->add_option("--transform", ds_transform, "identity or richter_pow10")
      ->check(CLI::IsMember({"identity", "richter_pow10"}));
  ds->add_option("--unit-multiplier", ds_unit, "Scale applied to raw values")
      ->capture_default_str();
  ds->add_option("--lambda", ds_lambdas, "Bin ratios (default per dataset)")->delimiter(',');
  ds->add_option("--boot", ds_boot)->capture_default_str();
  ds->add_option("--seed", ds_seed, "Master seed (default: fresh, printed)");
  ds->add_option("--tail-csv", ds_tail, "Also write the empirical tail CDF here");
  add_common(ds, ds_c);

  // lambda-limit
  Common ll_c;
  double ll_alpha = 1.5, ll_tol = 0.005, ll_xm = 1.0, ll_max = 1e12;
  std::size_t ll_n = 0;
  auto* ll = app.add_subcommand("lambda-limit", "Largest lambda with few-bin probability <= tol");
  ll->add_option("--alpha", ll_alpha)->required();
  ll->add_option("--n", ll_n)->required();
  ll->add_option("--tol", ll_tol)->required();
  ll->add_option("--xm", ll_xm)->capture_default_str();
  ll->add_option("--lambda-max", ll_max)->capture_default_str();
  add_common(ll, ll_c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*fit) {
      DatasetSpec spec;
      spec.path = fit_file;
      spec.x_m = fit_xm;
      spec.transform = parse_transform(fit_transform);
      const auto data = load_dataset(spec);
      FitResult r;
      if (fit_method == "regression") {
        require(fit_lambda == 1.0, "regression is only defined on unbinned data (--lambda 1)");
        r = regression_estimate(data.sample);
      } else {
        r = fit_mle(data.sample, fit_lambda);
      }
      emit(json{{"command", "fit"},
                {"input", fit_file},
                {"x_m", fit_xm},
                {"n", r.n},
                {"lambda", r.lambda},
                {"method", to_string(r.method)},
                {"alpha_hat", r.alpha_hat},
                {"std_err", r.std_err}},
           parse_format(fit_c.format), out);
    } else if (*gof) {
      DatasetSpec spec;
      spec.path = gof_file;
      spec.x_m = gof_xm;
      spec.transform = parse_transform(gof_transform);
      const auto data = load_dataset(spec);
      const RngSeed seed = pick_seed(gof_seed);
      const auto r = goodness_of_fit(data.sample, gof_lambda, gof_quick ? GofMode::quick : GofMode::full,
                                     gof_quick ? kQuickBootstrap : gof_boot, seed,
                                     resolve_threads(gof_c.threads));
      emit(json{{"command", "gof"},
                {"input", gof_file},
                {"x_m", gof_xm},
                {"n", data.sample.size()},
                {"lambda", r.lambda},
                {"alpha_hat", r.alpha_hat},
                {"D", r.d_stat},
                {"p", r.p_value ? json(*r.p_value) : json(nullptr)},
                {"reject_at_005", r.reject_at_005},
                {"quick", gof_quick},
                {"n_boot", r.n_bootstrap},
                {"degenerate_resamples", r.degenerate_resamples},
                {"seed", seed.value}},
           parse_format(gof_c.format), out);
    } else if (*sim) {
      if (sim_print) {
        require(!sim_preset.empty(), "--print-preset needs --preset");
        out << preset_text(sim_preset);
        return kExitOk;
      }
      require(!sim_config.empty() || !sim_preset.empty(), "give --config or --preset");
      require(!sim_out.empty(), "--out is required");
      SweepSpec spec;
      if (!sim_preset.empty()) {
        std::istringstream in(preset_text(sim_preset));
        spec = parse_sweep_spec(in, "preset:" + sim_preset);
      } else {
        spec = load_sweep_spec(sim_config);
      }
      if (sim_seed) spec.seed = RngSeed{*sim_seed};
      SweepRunOptions opts;
      opts.csv_path = sim_out;
      opts.replicates_csv = sim_rep_out;
      opts.manifest_path = sim_manifest;
      opts.resume = sim_resume;
      opts.threads_override = sim_c.threads;
      json manifest = run_sweep(spec, opts);
      manifest["command"] = "simulate";
      manifest["seed"] = spec.seed.value;
      if (parse_format(sim_c.format) == Format::csv) {
        std::ifstream in(sim_out);
        out << in.rdbuf();
      } else {
        emit(manifest, parse_format(sim_c.format), out);
      }
    } else if (*tol) {
      const RngSeed seed = pick_seed(tol_seed);
      const double lambda = tol_rule ? lambda_rule_of_n(tol_n, tol_alpha) : tol_lambda;
      tol_opts.threads = resolve_threads(tol_c.threads);
      const auto r =
          tolerance_search(tol_alpha, lambda, tol_n, parse_noise_kind(tol_noise), seed, tol_opts);
      json trace = json::array();
      for (const auto& s : r.trace) {
        trace.push_back({{"sigma", s.sigma}, {"rejection", s.rejection}, {"trials", s.trials}});
      }
      emit(json{{"command", "tolerance"},
                {"alpha", tol_alpha},
                {"lambda", lambda},
                {"lambda_rule", tol_rule},
                {"n", tol_n},
                {"noise", tol_noise},
                {"sigma_hat", r.sigma_hat},
                {"mean_alpha_hat", r.mean_alpha_hat},
                {"rejection", r.rejection},
                {"ci_halfwidth", r.ci_halfwidth},
                {"pooled_trials", r.pooled_trials},
                {"converged", r.converged},
                {"seed", seed.value},
                {"trace", trace}},
           parse_format(tol_c.format), out);
    } else if (*ds) {
      const DatasetName name = parse_dataset_name(ds_name);
      DatasetSpec spec = named_dataset(name, ds_file);
      if (name == DatasetName::custom) {
        require(ds_xm.has_value(), "--xm is required for custom datasets");
        spec.x_m = *ds_xm;
      } else if (ds_xm) {
        require(std::fabs(*ds_xm - spec.x_m) <= 1e-9 * spec.x_m,
                "the threshold of a named dataset is fixed at " + std::to_string(spec.x_m));
      }
      if (!ds_transform.empty()) spec.transform = parse_transform(ds_transform);
      spec.unit_multiplier = ds_unit;
      AnalysisOptions opts;
      opts.n_boot = ds_boot;
      opts.seed = pick_seed(ds_seed);
      opts.threads = resolve_threads(ds_c.threads);
      const auto lambdas = ds_lambdas.empty() ? default_lambdas(name) : ds_lambdas;
      json report = analyze_dataset(spec, lambdas, opts);
      report["command"] = "dataset";
      if (!ds_tail.empty()) {
        std::ofstream tail(ds_tail);
        if (!tail) throw IoError("cannot write " + ds_tail);
        tail << tail_cdf_csv(load_dataset(spec).sample);
        report["tail_csv"] = ds_tail;
      }
      emit(report, parse_format(ds_c.format), out);
    } else if (*ll) {
      const auto r = lambda_upper_limit(ll_alpha, ll_xm, ll_n, ll_tol, ll_max);
      if (r.capped) {
        throw NoSolution("few-bin probability stays below tol up to lambda_max = " +
                         std::to_string(ll_max) + "; no finite limit in range");
      }
      emit(json{{"command", "lambda-limit"},
                {"alpha", ll_alpha},
                {"n", ll_n},
                {"tol", ll_tol},
                {"x_m", ll_xm},
                {"lambda", r.lambda},
                {"few_bin_probability", few_bin_probability(ll_alpha, r.lambda, ll_xm, ll_n)}},
           parse_format(ll_c.format), out);
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ComputationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitComputation;
  }
  return kExitOk;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"plbin"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace plbin
