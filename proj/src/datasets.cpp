#include "plbin/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "plbin/error.hpp"
#include "plbin/estimation.hpp"
#include "plbin/sampling.hpp"

namespace plbin {

std::string to_string(DatasetName name) {
  switch (name) {
  case DatasetName::earthquakes: return "earthquakes";
  case DatasetName::wealth: return "wealth";
  case DatasetName::wildfires: return "wildfires";
  case DatasetName::custom: return "custom";
  }
  return "custom";
}

DatasetName parse_dataset_name(const std::string& text) {
  if (text == "earthquakes") return DatasetName::earthquakes;
  if (text == "wealth") return DatasetName::wealth;
  if (text == "wildfires") return DatasetName::wildfires;
  if (text == "custom") return DatasetName::custom;
  throw ValidationError("unknown dataset '" + text + "' (earthquakes|wealth|wildfires|custom)");
}

std::string to_string(Transform t) {
  return t == Transform::richter_pow10 ? "richter_pow10" : "identity";
}

void DatasetSpec::validate() const {
  require(std::isfinite(x_m) && x_m > 0.0, "x_m must be a positive finite real");
  require(std::isfinite(unit_multiplier) && unit_multiplier > 0.0,
          "unit multiplier must be a positive finite real");
  require(!path.empty(), "dataset path is empty");
}

DatasetSpec named_dataset(DatasetName name, std::filesystem::path path) {
  DatasetSpec spec;
  spec.name = name;
  spec.path = std::move(path);
  switch (name) {
  case DatasetName::earthquakes:
    spec.transform = Transform::richter_pow10;
    spec.x_m = kEarthquakeXm;
    break;
  case DatasetName::wealth: spec.x_m = kWealthXm; break;
  case DatasetName::wildfires: spec.x_m = kWildfireXm; break;
  case DatasetName::custom: break;
  }
  return spec;
}

double richter_to_natural(double magnitude) { return std::pow(10.0, magnitude); }

LoadedDataset load_dataset(const DatasetSpec& spec) {
  spec.validate();
  std::ifstream in(spec.path);
  if (!in) throw IoError("cannot read dataset file " + spec.path.string());
  LoadReport report;
  std::vector<double> raw;
  std::vector<double> kept;
  std::string line;
  while (std::getline(in, line)) {
    ++report.lines;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) {
      ++report.blank;
      continue;
    }
    std::string extra;
    char* end = nullptr;
    const double v = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size() || (ls >> extra) || !std::isfinite(v)) {
      ++report.non_numeric;
      continue;
    }
    // Richter magnitudes are logarithms; "positive" refers to the record.
    if (!(v > 0.0)) {
      ++report.non_positive;
      continue;
    }
    ++report.valid;
    raw.push_back(v);
    const double x = (spec.transform == Transform::richter_pow10 ? richter_to_natural(v) : v) *
                     spec.unit_multiplier;
    if (x >= spec.x_m) kept.push_back(x);
  }
  if (in.bad()) throw IoError("error reading " + spec.path.string());
  report.retained = kept.size();
  if (kept.empty()) {
    throw ValidationError("no observations at or above x_m = " + std::to_string(spec.x_m) +
                          " in " + spec.path.string());
  }
  return LoadedDataset{Sample(std::move(kept), spec.x_m), report, std::move(raw)};
}

double chisq1_sf(double statistic) {
  if (!(statistic > 0.0)) return 1.0;
  return std::erfc(std::sqrt(statistic / 2.0));
}

ChiSquareResult round_magnitude_chisq(std::span<const double> magnitudes) {
  require(!magnitudes.empty(), "no magnitudes");
  std::map<long long, std::size_t> counts;
  for (double m : magnitudes) {
    require(std::isfinite(m), "magnitudes must be finite");
    const double tenths = m * 10.0;
    const auto t = std::llround(tenths);
    require(std::fabs(tenths - static_cast<double>(t)) < 1e-6,
            "magnitude " + std::to_string(m) + " is not on the 0.1 grid");
    ++counts[t];
  }
  const long long lo = counts.begin()->first;
  const long long hi = counts.rbegin()->first;
  auto count_at = [&](long long t) {
    const auto it = counts.find(t);
    return it == counts.end() ? std::size_t{0} : it->second;
  };
  auto is_half = [](long long t) { return ((t % 5) + 5) % 5 == 0; };
  std::size_t halves = 0;
  for (long long t = lo; t <= hi; ++t) halves += is_half(t) ? 1 : 0;
  require(halves >= 2, "magnitudes must span at least two multiples of 0.5");

  ChiSquareResult r;
  for (long long t = lo + 1; t <= hi; ++t) {
    const int a = is_half(t) ? 0 : 1;
    const int b = count_at(t) > count_at(t - 1) ? 0 : 1;
    ++r.table[a][b];
    ++r.categories;
  }
  const double n = static_cast<double>(r.categories);
  const double a = static_cast<double>(r.table[0][0]);
  const double b = static_cast<double>(r.table[0][1]);
  const double c = static_cast<double>(r.table[1][0]);
  const double d = static_cast<double>(r.table[1][1]);
  const double denom = (a + b) * (c + d) * (a + c) * (b + d);
  r.statistic = denom > 0.0 ? n * (a * d - b * c) * (a * d - b * c) / denom : 0.0;
  r.p_value = chisq1_sf(r.statistic);
  return r;
}

namespace {

nlohmann::json gof_json(const FitResult& fit, const GofResult& g, std::size_t bins) {
  return {{"lambda", fit.lambda},
          {"method", to_string(fit.method)},
          {"alpha_hat", fit.alpha_hat},
          {"std_err", fit.std_err},
          {"D", g.d_stat},
          {"p", g.p_value ? nlohmann::json(*g.p_value) : nlohmann::json(nullptr)},
          {"n_boot", g.n_bootstrap},
          {"degenerate_resamples", g.degenerate_resamples},
          {"bins", bins}};
}

// Magnitudes at or above completeness, on the 0.1 grid.
std::vector<double> magnitudes_for_chisq(const DatasetSpec& spec, const LoadedDataset& d) {
  std::vector<double> out;
  if (spec.transform == Transform::richter_pow10) {
    for (double m : d.raw) {
      if (richter_to_natural(m) * spec.unit_multiplier >= spec.x_m) out.push_back(m);
    }
  } else {
    for (double x : d.sample.values()) out.push_back(std::round(std::log10(x) * 10.0) / 10.0);
  }
  return out;
}

} // namespace

nlohmann::json analyze_dataset(const DatasetSpec& spec, const std::vector<double>& lambda_list,
                               const AnalysisOptions& opts) {
  require(!lambda_list.empty(), "lambda list is empty");
  for (double l : lambda_list) require(std::isfinite(l) && l >= 1.0, "lambda values must be >= 1");
  require(opts.n_boot >= kQuickBootstrap, "n_boot must be at least 19");
  const auto data = load_dataset(spec);
  const Sample& s = data.sample;

  nlohmann::json report;
  report["dataset"] = to_string(spec.name);
  report["path"] = spec.path.string();
  report["transform"] = to_string(spec.transform);
  report["unit_multiplier"] = spec.unit_multiplier;
  report["x_m"] = spec.x_m;
  report["n"] = s.size();
  report["seed"] = opts.seed.value;
  report["load"] = {{"lines", data.report.lines},
                    {"blank", data.report.blank},
                    {"non_numeric", data.report.non_numeric},
                    {"non_positive", data.report.non_positive},
                    {"valid", data.report.valid},
                    {"retained", data.report.retained}};
  report["fits"] = nlohmann::json::array();
  for (std::size_t j = 0; j < lambda_list.size(); ++j) {
    const double lambda = lambda_list[j];
    const RngSeed seed = derive_seed(opts.seed, 2, j);
    if (lambda == 1.0) {
      const auto fit = mle_continuous(s);
      const auto g = bootstrap_pvalue_continuous(s, opts.n_boot, seed, opts.threads);
      report["fits"].push_back(gof_json(fit, g, 0));
    } else {
      const auto b = bin_sample(s, lambda);
      try {
        const auto fit = mle_binned(b);
        const auto g = bootstrap_pvalue(b, opts.n_boot, seed, opts.threads);
        report["fits"].push_back(gof_json(fit, g, b.occupied_bins()));
      } catch (const ComputationError& e) {
        report["fits"].push_back({{"lambda", lambda}, {"error", e.what()}});
      }
    }
  }
  try {
    const auto reg = regression_estimate(s);
    report["regression"] = {{"alpha_hat", reg.alpha_hat}, {"std_err", reg.std_err}};
  } catch (const ComputationError& e) {
    report["regression"] = {{"error", e.what()}};
  }
  if (spec.name == DatasetName::earthquakes) {
    const auto mags = magnitudes_for_chisq(spec, data);
    try {
      const auto chi = round_magnitude_chisq(mags);
      report["chisq"] = {{"statistic", chi.statistic},
                         {"dof", chi.dof},
                         {"p_value", chi.p_value},
                         {"categories", chi.categories},
                         {"table", {{chi.table[0][0], chi.table[0][1]},
                                    {chi.table[1][0], chi.table[1][1]}}}};
    } catch (const ValidationError& e) {
      report["chisq"] = {{"error", e.what()}};
    }
  }
  return report;
}

std::string tail_cdf_csv(const Sample& s) {
  std::vector<double> xs = s.values();
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  std::string out = "x,tail_probability\n";
  char buf[96];
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0 && xs[i] == xs[i - 1]) continue;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", xs[i], static_cast<double>(xs.size() - i) / n);
    out += buf;
  }
  return out;
}

std::filesystem::path write_synthetic_dataset(DatasetName name, const std::filesystem::path& path,
                                              RngSeed seed) {
  Rng rng(seed);
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[64];
  switch (name) {
  case DatasetName::earthquakes: {
    // Gutenberg-Richter magnitudes from 0.5 with a soft completeness cutoff,
    // quantized to 0.1, and some records coarsened to 0.5.
    const ParetoParams gr{0.8, std::pow(10.0, 0.5)};
    std::size_t written = 0;
    while (written < 17450) {
      const double m = std::log10(gr.quantile_from_tail(rng.uniform_pos()));
      if (m > 7.8) continue;
      const double detect = 1.0 / (1.0 + std::exp(-(m - 2.4) * 4.0));
      if (rng.uniform_pos() > detect) continue;
      double q = std::floor(m * 10.0 + 1e-9) / 10.0;
      if (rng.uniform_pos() < 0.08) q = std::floor(m * 2.0 + 1e-9) / 2.0;
      std::snprintf(buf, sizeof buf, "%.1f\n", q);
      out << buf;
      ++written;
    }
    break;
  }
  case DatasetName::wealth: {
    // Net worth in dollars: a Pareto tail above one billion rounded to 100
    // million, and a rounded band below it.
    const ParetoParams tail{1.2, 1e9};
    for (int i = 0; i < 261; ++i) {
      const double x = std::floor(tail.quantile_from_tail(rng.uniform_pos()) / 1e8) * 1e8;
      std::snprintf(buf, sizeof buf, "%.0f\n", std::max(x, 1e9));
      out << buf;
    }
    for (int i = 0; i < 138; ++i) {
      const double x = 6e8 + std::floor(rng.uniform_pos() * 80.0) * 5e6;
      std::snprintf(buf, sizeof buf, "%.0f\n", x);
      out << buf;
    }
    break;
  }
  case DatasetName::wildfires: {
    // Lognormal areas in acres, mostly between 0.1 and 1000.
    for (int i = 0; i < 203784; ++i) {
      const double x = std::exp(rng.normal(2.3, 2.0));
      std::snprintf(buf, sizeof buf, "%.6g\n", x);
      out << buf;
    }
    break;
  }
  case DatasetName::custom: {
    const auto xs = pareto_sample(ParetoParams{1.5, 1.0}, 1000, rng);
    for (double x : xs) {
      std::snprintf(buf, sizeof buf, "%.17g\n", x);
      out << buf;
    }
    break;
  }
  }
  if (!out) throw IoError("error writing " + path.string());
  return path;
}

} // namespace plbin
