#include "plbin/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "plbin/error.hpp"
#include "plbin/parallel.hpp"

namespace plbin {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Seed streams inside one replicate.
constexpr std::uint64_t kDataStream = 0;
constexpr std::uint64_t kGofStream = 1;

struct LambdaSpec {
  double lambda;
  bool rule;
};

struct ReplicateRecord {
  std::vector<double> alpha;        // per lambda; NaN when undefined
  std::vector<signed char> reject;  // per lambda; -1 when not tested
  std::vector<double> p_value;      // per lambda; NaN for the quick test
  std::vector<char> four_bins;      // per lambda
  double regression = kNaN;
  double range = kNaN;
};

using SampleGenerator = std::function<std::vector<double>(Rng&)>;

struct CellPlan {
  std::string treatment;
  double sigma = 0.0;
  double alpha = 1.5;
  double x_m = 1.0;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::vector<LambdaSpec> lambdas;
  bool gof = true;
  std::size_t n_boot = kQuickBootstrap;
  bool regression = false;
  RngSeed master;
  std::uint64_t cell_index = 0;
  unsigned threads = 0;
};

struct TestOutcome {
  signed char reject = -1;
  double p = kNaN;
};

TestOutcome test_once(const Sample& s, const BinnedSample* binned, std::size_t n_boot,
                      RngSeed seed) {
  try {
    GofResult r;
    if (binned == nullptr) {
      r = n_boot == kQuickBootstrap ? quick_reject_19_continuous(s, seed)
                                    : bootstrap_pvalue_continuous(s, n_boot, seed);
    } else {
      r = n_boot == kQuickBootstrap ? quick_reject_19(*binned, seed)
                                    : bootstrap_pvalue(*binned, n_boot, seed);
    }
    return {static_cast<signed char>(r.reject_at_005 ? 1 : 0), r.p_value.value_or(kNaN)};
  } catch (const ComputationError&) {
    return {};
  }
}

ReplicateRecord evaluate(const std::vector<double>& values, const CellPlan& plan, RngSeed seed) {
  const std::size_t m = plan.lambdas.size();
  ReplicateRecord rec;
  rec.alpha.assign(m, kNaN);
  rec.reject.assign(m, -1);
  rec.p_value.assign(m, kNaN);
  rec.four_bins.assign(m, 0);
  if (values.empty()) return rec;

  const Sample s(values, plan.x_m);
  rec.range = s.max() / plan.x_m;
  std::vector<double> log_ratio(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) log_ratio[i] = std::log(values[i] / plan.x_m);

  for (std::size_t j = 0; j < m; ++j) {
    const double lambda = plan.lambdas[j].lambda;
    const RngSeed gof_seed = derive_seed(seed, kGofStream, j);
    if (lambda == 1.0) {
      try {
        rec.alpha[j] = mle_continuous(s).alpha_hat;
      } catch (const EstimatorUndefined&) {
        continue;
      }
      rec.four_bins[j] = 1;
      if (plan.gof) {
        const auto t = test_once(s, nullptr, plan.n_boot, gof_seed);
        rec.reject[j] = t.reject;
        rec.p_value[j] = t.p;
      }
      continue;
    }
    LogBinner binner(lambda, plan.x_m);
    BinnedSample b(lambda, plan.x_m);
    for (std::size_t i = 0; i < values.size(); ++i) b.add(binner.index(values[i], log_ratio[i]));
    rec.four_bins[j] = b.max_index() >= 3 ? 1 : 0;
    if (b.index_sum() == 0.0) continue;
    rec.alpha[j] = binned_alpha(b.mean_index(), lambda);
    if (plan.gof) {
      const auto t = test_once(s, &b, plan.n_boot, gof_seed);
      rec.reject[j] = t.reject;
      rec.p_value[j] = t.p;
    }
  }
  if (plan.regression) {
    try {
      rec.regression = regression_estimate(s).alpha_hat;
    } catch (const Error&) {
    }
  }
  return rec;
}

double median(std::vector<double> v) {
  std::erase_if(v, [](double x) { return std::isnan(x); });
  if (v.empty()) return kNaN;
  std::sort(v.begin(), v.end());
  const std::size_t h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

CellResult aggregate(const CellPlan& plan, const std::vector<double>& alphas,
                     const std::vector<signed char>* rejects, const std::vector<char>* four_bins,
                     double median_range) {
  CellResult c;
  c.treatment = plan.treatment;
  c.sigma = plan.sigma;
  c.n = plan.n;
  c.alpha = plan.alpha;
  c.replicates = alphas.size();
  c.median_range = median_range;
  c.estimates = alphas;
  double sum = 0.0;
  for (double a : alphas) {
    if (std::isnan(a)) continue;
    ++c.valid;
    sum += a;
  }
  c.degenerate = c.replicates - c.valid;
  if (c.valid > 0) {
    c.mean_alpha = sum / static_cast<double>(c.valid);
    double ss = 0.0, se = 0.0;
    for (double a : alphas) {
      if (std::isnan(a)) continue;
      ss += (a - c.mean_alpha) * (a - c.mean_alpha);
      se += (a - plan.alpha) * (a - plan.alpha);
    }
    c.sd_alpha = std::sqrt(ss / static_cast<double>(c.valid));
    c.mse = se / static_cast<double>(c.valid);
  } else {
    c.mean_alpha = kNaN;
    c.sd_alpha = kNaN;
    c.mse = kNaN;
  }
  if (rejects != nullptr) {
    std::size_t tested = 0, rejected = 0;
    for (signed char r : *rejects) {
      if (r < 0) continue;
      ++tested;
      rejected += static_cast<std::size_t>(r);
    }
    c.gof_trials = tested;
    if (tested > 0) c.rejection_rate = static_cast<double>(rejected) / static_cast<double>(tested);
  }
  if (four_bins != nullptr && !four_bins->empty()) {
    const auto hits = std::count(four_bins->begin(), four_bins->end(), 1);
    c.frac_bins_ge4 = static_cast<double>(hits) / static_cast<double>(four_bins->size());
  }
  return c;
}

SweepResult run_plan(const CellPlan& plan, const SampleGenerator& generate) {
  std::vector<ReplicateRecord> records(plan.replicates);
  parallel_for(plan.replicates, plan.threads, [&](std::size_t r) {
    const RngSeed rep_seed = derive_seed(plan.master, plan.cell_index, r);
    Rng rng(derive_seed(rep_seed, kDataStream, 0));
    records[r] = evaluate(generate(rng), plan, rep_seed);
  });

  std::vector<double> ranges(plan.replicates);
  for (std::size_t r = 0; r < plan.replicates; ++r) ranges[r] = records[r].range;
  const double med_range = median(ranges);

  SweepResult out;
  for (std::size_t j = 0; j < plan.lambdas.size(); ++j) {
    std::vector<double> alphas(plan.replicates);
    std::vector<signed char> rejects(plan.replicates);
    std::vector<char> four(plan.replicates);
    std::vector<double> p(plan.replicates);
    for (std::size_t r = 0; r < plan.replicates; ++r) {
      alphas[r] = records[r].alpha[j];
      rejects[r] = records[r].reject[j];
      four[r] = records[r].four_bins[j];
      p[r] = records[r].p_value[j];
    }
    CellResult c = aggregate(plan, alphas, plan.gof ? &rejects : nullptr, &four, med_range);
    c.rejects = std::move(rejects);
    c.p_values = std::move(p);
    c.lambda = plan.lambdas[j].lambda;
    c.lambda_rule = plan.lambdas[j].rule;
    c.method = c.lambda == 1.0 ? FitMethod::mle_continuous : FitMethod::mle_binned;
    out.cells.push_back(std::move(c));
  }
  if (plan.regression) {
    std::vector<double> alphas(plan.replicates);
    for (std::size_t r = 0; r < plan.replicates; ++r) alphas[r] = records[r].regression;
    CellResult c = aggregate(plan, alphas, nullptr, nullptr, med_range);
    c.lambda = 1.0;
    c.method = FitMethod::regression;
    out.cells.push_back(std::move(c));
  }
  return out;
}

CellPlan plan_from(const ExperimentConfig& cfg) {
  cfg.validate();
  CellPlan plan;
  plan.treatment = to_string(cfg.noise.kind);
  plan.sigma = cfg.noise.sigma;
  plan.alpha = cfg.alpha;
  plan.n = cfg.n;
  plan.replicates = cfg.replicates;
  for (double l : cfg.lambda_grid) plan.lambdas.push_back({l, false});
  if (cfg.lambda_rule) plan.lambdas.push_back({lambda_rule_of_n(cfg.n, cfg.alpha), true});
  plan.gof = cfg.gof;
  plan.n_boot = cfg.n_boot;
  plan.regression = cfg.regression;
  plan.master = cfg.master_seed;
  plan.cell_index = cfg.cell_index;
  plan.threads = cfg.threads;
  return plan;
}

SampleGenerator noisy_pareto(double alpha, std::size_t n, NoiseSpec noise) {
  return [=](Rng& rng) {
    const ParetoParams params{alpha, 1.0};
    const auto clean = pareto_sample(params, n, rng);
    return apply_noise(clean, noise, params.x_m, rng);
  };
}

} // namespace

void ExperimentConfig::validate() const {
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be a finite positive real");
  require(n >= 2, "n must be at least 2");
  require(replicates >= 1, "replicates must be at least 1");
  require(!lambda_grid.empty(), "lambda grid is empty");
  require(std::is_sorted(lambda_grid.begin(), lambda_grid.end()), "lambda grid must be sorted");
  for (double l : lambda_grid) {
    require(std::isfinite(l) && l >= 1.0, "lambda grid values must be finite reals >= 1");
  }
  noise.validate();
  require(n_boot >= kQuickBootstrap, "bootstrap size must be at least 19");
}

SweepResult run_bias_rejection(const ExperimentConfig& cfg) {
  const CellPlan plan = plan_from(cfg);
  return run_plan(plan, noisy_pareto(cfg.alpha, cfg.n, cfg.noise));
}

SweepResult rejection_curve(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.regression = false;
  c.gof = true;
  return run_bias_rejection(c);
}

LambdaOptResult lambda_opt_search(const ExperimentConfig& cfg) {
  ExperimentConfig c = cfg;
  c.regression = false;
  LambdaOptResult out;
  out.mse_curve = run_bias_rejection(c);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& cell : out.mse_curve.cells) {
    if (cell.valid == 0 || cell.lambda_rule) continue;
    if (cell.mse < best) {
      best = cell.mse;
      out.lambda_opt = cell.lambda;
    }
  }
  require(std::isfinite(best), "lambda_opt_search: no lambda produced a defined estimate");
  out.median_range = out.mse_curve.cells.front().median_range;
  out.log_ratio = out.median_range > 1.0 ? std::log(out.lambda_opt) / std::log(out.median_range)
                                         : kNaN;
  return out;
}

SweepResult sensitivity_curve(const std::vector<double>& sigma_list,
                              const std::vector<double>& lambda_grid, std::size_t n,
                              std::size_t replicates, RngSeed seed, double alpha,
                              unsigned threads, std::uint64_t first_cell) {
  require(!sigma_list.empty(), "sensitivity: sigma list is empty");
  ExperimentConfig probe;
  probe.alpha = alpha;
  probe.n = n;
  probe.replicates = replicates;
  probe.lambda_grid = lambda_grid;
  probe.validate();

  SweepResult out;
  for (std::size_t i = 0; i < sigma_list.size(); ++i) {
    const double sigma = sigma_list[i];
    const LognormalTailParams params{solve_matching_mu(sigma, alpha, 1.0), sigma, 1.0};
    CellPlan plan = plan_from(probe);
    plan.treatment = "lognormal";
    plan.sigma = sigma;
    plan.regression = false;
    plan.master = seed;
    plan.cell_index = first_cell + i;
    plan.threads = threads;
    auto cells = run_plan(plan, [params, n](Rng& rng) {
      return lognormal_tail_sample(params, n, rng);
    });
    for (auto& c : cells.cells) out.cells.push_back(std::move(c));
  }
  return out;
}

double lambda_rule_of_n(std::size_t n, double alpha) {
  require(n >= 2, "n must be at least 2");
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be a finite positive real");
  return std::pow(static_cast<double>(n), 1.0 / (3.0 * alpha));
}

namespace {

struct TrialOutcome {
  signed char reject = -1;
  double alpha = kNaN;
};

TrialOutcome tolerance_trial(double alpha, double lambda, std::size_t n, NoiseSpec noise,
                             std::size_t n_boot, RngSeed seed) {
  Rng rng(derive_seed(seed, kDataStream, 0));
  const ParetoParams params{alpha, 1.0};
  const auto values = apply_noise(pareto_sample(params, n, rng), noise, 1.0, rng);
  TrialOutcome out;
  if (values.size() < 2) return out;
  const Sample s(values, 1.0);
  const RngSeed gof_seed = derive_seed(seed, kGofStream, 0);
  try {
    GofResult r;
    if (lambda == 1.0) {
      r = n_boot == kQuickBootstrap ? quick_reject_19_continuous(s, gof_seed)
                                    : bootstrap_pvalue_continuous(s, n_boot, gof_seed);
    } else {
      const BinnedSample b = bin_sample(s, lambda);
      r = n_boot == kQuickBootstrap ? quick_reject_19(b, gof_seed) : bootstrap_pvalue(b, n_boot, gof_seed);
    }
    out.reject = r.reject_at_005 ? 1 : 0;
    out.alpha = r.alpha_hat;
  } catch (const ComputationError&) {
  }
  return out;
}

struct Batch {
  double sigma;
  std::size_t trials = 0;
  std::size_t rejections = 0;
  double alpha_sum = 0.0;
  std::size_t alpha_count = 0;
};

Batch run_batch(double alpha, double lambda, std::size_t n, NoiseKind kind, double sigma,
                std::size_t size, std::size_t n_boot, RngSeed seed, unsigned threads) {
  std::vector<TrialOutcome> outcomes(size);
  parallel_for(size, threads, [&](std::size_t t) {
    outcomes[t] = tolerance_trial(alpha, lambda, n, NoiseSpec{kind, sigma}, n_boot, derive_seed(seed, 0, t));
  });
  Batch b{sigma};
  for (const auto& o : outcomes) {
    if (o.reject < 0) continue;
    ++b.trials;
    b.rejections += static_cast<std::size_t>(o.reject);
    if (!std::isnan(o.alpha)) {
      b.alpha_sum += o.alpha;
      ++b.alpha_count;
    }
  }
  return b;
}

} // namespace

ToleranceResult tolerance_search(double alpha, double lambda, std::size_t n, NoiseKind noise_kind,
                                 RngSeed seed, const ToleranceOptions& opts) {
  require(std::isfinite(alpha) && alpha > 0.0, "alpha must be a finite positive real");
  require(n >= 2, "n must be at least 2");
  require(noise_kind != NoiseKind::none, "tolerance search needs a noise kind");
  require(std::isfinite(lambda) && lambda >= 1.0, "lambda must be a finite real >= 1");
  require(lambda <= lambda_rule_of_n(n, alpha) * (1.0 + 1e-12),
          "lambda must not exceed n^(1/(3 alpha))");
  require(opts.target > 0.0 && opts.target < 1.0, "target rejection rate must lie in (0, 1)");
  require(opts.ci_halfwidth > 0.0 && opts.window > 0.0 && opts.sigma_max > 0.0,
          "tolerance options must be positive");
  require(opts.batch_min >= 1 && opts.batch_max >= opts.batch_min, "invalid batch sizes");
  require(opts.n_boot >= kQuickBootstrap, "bootstrap size must be at least 19");

  constexpr double z95 = 1.959963984540054;
  std::vector<Batch> batches;
  std::uint64_t step = 0;
  auto run = [&](double sigma, std::size_t size) {
    batches.push_back(run_batch(alpha, lambda, n, noise_kind, sigma, size, opts.n_boot,
                                derive_seed(seed, 7, step++), opts.threads));
  };

  ToleranceResult out;
  auto record = [&](const Batch& b) {
    const double rate =
        b.trials > 0 ? static_cast<double>(b.rejections) / static_cast<double>(b.trials) : kNaN;
    out.trace.push_back({b.sigma, rate, b.trials});
  };

  run(opts.sigma_max, opts.batch_min);
  record(batches.back());
  {
    const Batch& top = batches.back();
    const double p = static_cast<double>(top.rejections) / static_cast<double>(std::max<std::size_t>(top.trials, 1));
    const double hw = z95 * std::sqrt(std::max(p * (1.0 - p), 1e-12) /
                                      static_cast<double>(std::max<std::size_t>(top.trials, 1)));
    if (p + hw < opts.target) {
      throw NoSolution("tolerance search: rejection rate stays below target at sigma_max = " +
                       std::to_string(opts.sigma_max));
    }
  }

  double lo = 0.0;
  double hi = opts.sigma_max;
  double sigma = 0.5 * (lo + hi);
  std::size_t batch = opts.batch_min;
  std::size_t total = batches.back().trials;

  for (;;) {
    run(sigma, batch);
    record(batches.back());
    total += batches.back().trials;

    std::size_t trials = 0, rejections = 0, alpha_count = 0;
    double alpha_sum = 0.0;
    for (const auto& b : batches) {
      if (std::abs(b.sigma - sigma) > opts.window * sigma) continue;
      trials += b.trials;
      rejections += b.rejections;
      alpha_sum += b.alpha_sum;
      alpha_count += b.alpha_count;
    }
    const double p = trials > 0 ? static_cast<double>(rejections) / static_cast<double>(trials) : 0.0;
    const double hw = trials > 0 ? z95 * std::sqrt(p * (1.0 - p) / static_cast<double>(trials)) : 1.0;

    out.sigma_hat = sigma;
    out.rejection = p;
    out.ci_halfwidth = hw;
    out.pooled_trials = trials;
    out.mean_alpha_hat = alpha_count > 0 ? alpha_sum / static_cast<double>(alpha_count) : kNaN;

    if (p - hw > opts.target) {
      hi = sigma;
      sigma = 0.5 * (lo + hi);
    } else if (p + hw < opts.target) {
      lo = sigma;
      sigma = 0.5 * (lo + hi);
    } else if (hw <= opts.ci_halfwidth) {
      out.converged = true;
      return out;
    } else {
      batch = std::min(batch * 2, opts.batch_max);
    }
    if (total >= opts.max_trials) return out;
  }
}

} // namespace plbin
