#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "plbin/binning.hpp"
#include "plbin/error.hpp"
#include "plbin/gof.hpp"
#include "plbin/sampling.hpp"

using namespace plbin;
using Catch::Approx;

namespace {

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

TEST_CASE("unit uniform maps to the threshold") {
  CHECK(ParetoParams{1.5, 2.0}.quantile_from_tail(1.0) == 2.0);
  CHECK(ParetoParams{0.3, 7.0}.quantile_from_tail(1.0) == 7.0);
}

TEST_CASE("invalid parameters are rejected before sampling") {
  CHECK_THROWS_AS(pareto_sample(ParetoParams{0.0, 1.0}, 10, RngSeed{1}), ValidationError);
  CHECK_THROWS_AS(pareto_sample(ParetoParams{1.5, -1.0}, 10, RngSeed{1}), ValidationError);
  CHECK_THROWS_AS(pareto_sample(ParetoParams{1.5, 1.0}, 0, RngSeed{1}), ValidationError);
  CHECK_THROWS_AS(discrete_powerlaw_sample(1.5, 1.0, 1.0, 10, RngSeed{1}), ValidationError);
  CHECK_THROWS_AS(NoiseSpec({NoiseKind::additive, -0.1}).validate(), ValidationError);
}

TEST_CASE("Pareto tail fraction and log mean") {
  const std::size_t n = 100000;
  const auto xs = pareto_sample(ParetoParams{1.5, 1.0}, n, RngSeed{21});
  for (double x : xs) REQUIRE(x >= 1.0);
  const double frac = std::count_if(xs.begin(), xs.end(), [](double x) { return x > 4.0; }) /
                      static_cast<double>(n);
  const double p = std::pow(4.0, -1.5);
  CHECK(std::fabs(frac - p) < 3.0 * std::sqrt(p * (1 - p) / n));
  std::vector<double> logs;
  for (double x : xs) logs.push_back(std::log(x));
  CHECK(std::fabs(mean(logs) - 1.0 / 1.5) < 3.0 * (1.0 / 1.5) / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("Pareto CDF of the sample is uniform", "[property]") {
  const ParetoParams params{2.3, 0.7};
  const auto xs = pareto_sample(params, 20000, RngSeed{22});
  std::vector<double> u;
  for (double x : xs) u.push_back(1.0 - std::pow(x / params.x_m, -params.alpha));
  CHECK(oracle::ks_uniform_pvalue(u) > 0.01);
}

TEST_CASE("samples are reproducible from the seed", "[property]") {
  const auto a = pareto_sample(ParetoParams{1.5, 1.0}, 1000, RngSeed{23});
  const auto b = pareto_sample(ParetoParams{1.5, 1.0}, 1000, RngSeed{23});
  const auto c = pareto_sample(ParetoParams{1.5, 1.0}, 1000, RngSeed{24});
  CHECK(a == b);
  CHECK(a != c);
  CHECK(derive_seed(RngSeed{5}, 0, 1).value != derive_seed(RngSeed{5}, 1, 0).value);
  CHECK(derive_seed(RngSeed{5}, 2, 3).value == derive_seed(RngSeed{5}, 2, 3).value);
}

TEST_CASE("noise") {
  const auto xs = pareto_sample(ParetoParams{1.5, 1.0}, 50000, RngSeed{25});
  SECTION("none is the identity") {
    CHECK(apply_noise(xs, NoiseSpec{NoiseKind::none, 0.0}, 1.0, RngSeed{1}) == xs);
  }
  SECTION("additive drops values below the threshold") {
    const auto ys = apply_noise(xs, NoiseSpec{NoiseKind::additive, 0.2}, 1.0, RngSeed{2});
    CHECK(ys.size() < xs.size());
    for (double y : ys) REQUIRE(y >= 1.0);
  }
  SECTION("additive noise has standard deviation sigma x_m") {
    Rng rng(RngSeed{3});
    const std::vector<double> ones(50000, 5.0);
    const auto ys = apply_noise_untruncated(ones, NoiseSpec{NoiseKind::additive, 0.2}, 2.0, rng);
    double ss = 0.0;
    for (double y : ys) ss += (y - 5.0) * (y - 5.0);
    CHECK(std::sqrt(ss / ys.size()) == Approx(0.4).epsilon(0.02));
  }
  SECTION("multiplicative log ratio is centered") {
    Rng rng(RngSeed{4});
    const double sigma = 0.2;
    const auto ys = apply_noise_untruncated(xs, NoiseSpec{NoiseKind::multiplicative, sigma}, 1.0, rng);
    std::vector<double> r;
    for (std::size_t i = 0; i < xs.size(); ++i) r.push_back(std::log(ys[i] / xs[i]));
    CHECK(std::fabs(mean(r)) < 3.0 * sigma / std::sqrt(static_cast<double>(r.size())));
    const auto kept = apply_noise(xs, NoiseSpec{NoiseKind::multiplicative, sigma}, 1.0, RngSeed{4});
    for (double y : kept) REQUIRE(y >= 1.0);
  }
  SECTION("empty input is rejected") {
    CHECK_THROWS_AS(apply_noise(std::vector<double>{}, NoiseSpec{NoiseKind::additive, 0.1}, 1.0,
                                RngSeed{1}),
                    ValidationError);
  }
}

TEST_CASE("discrete power law sampler") {
  const std::size_t n = 100000;
  SECTION("ratio 2, exponent 1: half the mass in bin 0") {
    const auto b = discrete_powerlaw_sample(1.0, 2.0, 1.0, n, RngSeed{31});
    CHECK(b.total() == n);
    const double f0 = b.count(0) / static_cast<double>(n);
    CHECK(std::fabs(f0 - 0.5) < 3.0 * std::sqrt(0.25 / n));
    double freq_sum = 0.0;
    for (const auto& [k, c] : b.counts()) freq_sum += c / static_cast<double>(n);
    CHECK(freq_sum == Approx(1.0).epsilon(1e-12));
  }
  SECTION("mean index matches the geometric mean") {
    const double alpha = 1.5, lambda = 4.0;
    const auto b = discrete_powerlaw_sample(alpha, lambda, 1.0, n, RngSeed{32});
    const double q = std::pow(lambda, -alpha);
    const double closed = q / (1.0 - q);
    long double brute = 0.0L;
    for (int k = 1; k < 400; ++k) brute += k * (oracle::geometric_partial_sum(alpha, lambda, k) -
                                               oracle::geometric_partial_sum(alpha, lambda, k - 1));
    CHECK(closed == Approx(static_cast<double>(brute)).epsilon(1e-12));
    CHECK(closed == Approx(0.142857).epsilon(1e-5));
    const double se = std::sqrt(q) / (1.0 - q) / std::sqrt(static_cast<double>(n));
    CHECK(std::fabs(b.mean_index() - closed) < 3.0 * se);
  }
}

TEST_CASE("bin-by-bin sampler matches the per-item sampler", "[property]") {
  const std::size_t n = 100000;
  for (auto [alpha, lambda] : {std::pair{1.5, 2.0}, std::pair{0.8, 1.3}, std::pair{2.5, 10.0}}) {
    Rng rng(RngSeed{33});
    const auto a = discrete_powerlaw_counts(alpha, lambda, 1.0, n, rng);
    const auto b = bin_values(pareto_sample(ParetoParams{alpha, 1.0}, n, RngSeed{34}), 1.0, lambda);
    CHECK(a.total() == n);
    // Two-sample homogeneity chi-square, pooling sparse tail bins.
    const auto kmax = std::max(a.max_index(), b.max_index());
    double stat = 0.0, oa = 0.0, ob = 0.0;
    int cells = 0;
    for (std::int64_t k = 0; k <= kmax; ++k) {
      oa += a.count(k);
      ob += b.count(k);
      if ((oa + ob) / 2.0 >= 10.0 || k == kmax) {
        const double e = (oa + ob) / 2.0;
        stat += (oa - e) * (oa - e) / e + (ob - e) * (ob - e) / e;
        ++cells;
        oa = ob = 0.0;
      }
    }
    INFO("alpha " << alpha << " lambda " << lambda);
    CHECK(oracle::chisq_sf(stat, cells - 1) > 0.01);
  }
}

TEST_CASE("lognormal tail sampler") {
  SECTION("negligible threshold recovers the untruncated lognormal") {
    const LognormalTailParams p{0.4, 0.7, 1e-12};
    const auto xs = lognormal_tail_sample(p, 50000, RngSeed{41});
    std::vector<double> logs;
    for (double x : xs) logs.push_back(std::log(x));
    CHECK(std::fabs(mean(logs) - 0.4) < 3.0 * 0.7 / std::sqrt(50000.0));
  }
  SECTION("outputs respect the threshold") {
    const LognormalTailParams p{-3.0, 1.0, 1.0};
    for (double x : lognormal_tail_sample(p, 20000, RngSeed{42})) REQUIRE(x >= 1.0);
  }
  SECTION("matched tail bends downward") {
    const double mu = solve_matching_mu(1.0, 1.5, 1.0);
    const auto xs = lognormal_tail_sample(LognormalTailParams{mu, 1.0, 1.0}, 100000, RngSeed{43});
    const double frac = std::count_if(xs.begin(), xs.end(), [](double x) { return x > std::exp(1.0); }) /
                        static_cast<double>(xs.size());
    // Slope -1.5 at x_m would give exp(-1.5) at ln x = 1.
    CHECK(std::log(frac) < -1.5 - 0.1);
  }
}

TEST_CASE("matching mu") {
  SECTION("residual of the defining equation") {
    for (double sigma : {0.3, 1.0, 2.0}) {
      for (double alpha : {0.5, 1.5, 3.0}) {
        for (double x_m : {0.01, 1.0, 1000.0}) {
          const double mu = solve_matching_mu(sigma, alpha, x_m);
          CHECK(std::fabs(LognormalTailParams{mu, sigma, x_m}.log_slope(x_m) - alpha) < 1e-8);
        }
      }
    }
  }
  SECTION("finite-difference slope of the survival function") {
    const double mu = solve_matching_mu(1.0, 1.5, 1.0);
    const double h = 1e-5;
    const double slope = (std::log(oracle::lognormal_survival(std::exp(h), mu, 1.0)) -
                          std::log(oracle::lognormal_survival(std::exp(-h), mu, 1.0))) /
                         (2.0 * h);
    CHECK(std::fabs(slope + 1.5) < 1e-6);
  }
  SECTION("continuous in sigma") {
    double prev = solve_matching_mu(0.2, 1.5, 1.0);
    for (double sigma = 0.25; sigma <= 3.0; sigma += 0.05) {
      const double mu = solve_matching_mu(sigma, 1.5, 1.0);
      CHECK(std::fabs(mu - prev) < 0.5);
      prev = mu;
    }
  }
  SECTION("invalid input") {
    CHECK_THROWS_AS(solve_matching_mu(0.0, 1.5, 1.0), ValidationError);
    CHECK_THROWS_AS(solve_matching_mu(1.0, -1.5, 1.0), ValidationError);
  }
}
