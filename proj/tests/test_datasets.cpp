#include <catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "oracles.hpp"
#include "plbin/datasets.hpp"
#include "plbin/error.hpp"

using namespace plbin;
using Catch::Approx;

namespace {

std::vector<double> spiky_magnitudes() {
  // Decreasing counts from 3.0 to 5.0 with a bump at every multiple of 0.5.
  std::vector<double> m;
  for (int t = 30; t <= 50; ++t) {
    int count = 200 - 8 * (t - 30);
    if (t % 5 == 0) count += 40;
    for (int i = 0; i < count; ++i) m.push_back(t / 10.0);
  }
  return m;
}

} // namespace

TEST_CASE("named thresholds") {
  CHECK(named_dataset(DatasetName::earthquakes, "q").x_m == Approx(std::pow(10.0, 3.5)).epsilon(1e-15));
  CHECK(named_dataset(DatasetName::earthquakes, "q").transform == Transform::richter_pow10);
  CHECK(named_dataset(DatasetName::wealth, "w").x_m == 1e9);
  CHECK(named_dataset(DatasetName::wildfires, "f").x_m == 6324.0);
  CHECK(parse_dataset_name("wealth") == DatasetName::wealth);
  CHECK_THROWS_AS(parse_dataset_name("stocks"), ValidationError);
}

TEST_CASE("Richter round trip", "[property]") {
  for (int t = 5; t <= 78; ++t) {
    const double m = t / 10.0;
    CHECK(std::fabs(std::log10(richter_to_natural(m)) - m) < 1e-9);
  }
}

TEST_CASE("loader counts and filters records") {
  const auto dir = oracle::scratch_dir("load");
  {
    std::ofstream out(dir / "d.txt");
    out << "5\n\n  7.5  \nabc\n-3\n0\n2\n1e1\n3 4\n2.5\n";
  }
  DatasetSpec spec;
  spec.path = dir / "d.txt";
  spec.x_m = 2.5;
  const auto d = load_dataset(spec);
  CHECK(d.report.lines == 10);
  CHECK(d.report.blank == 1);
  CHECK(d.report.non_numeric == 2);
  CHECK(d.report.non_positive == 2);
  CHECK(d.report.valid == 5);
  CHECK(d.report.retained == 4); // 5, 7.5, 10, and 2.5 at the closed lower bound
  CHECK(d.sample.size() == 4);

  spec.unit_multiplier = 1e6;
  spec.x_m = 5e6;
  CHECK(load_dataset(spec).report.retained == 3);

  spec.x_m = 1e12;
  CHECK_THROWS_AS(load_dataset(spec), ValidationError);
  spec.path = dir / "missing.txt";
  CHECK_THROWS_AS(load_dataset(spec), IoError);
}

TEST_CASE("chi-square on decreasing counts") {
  std::vector<double> m;
  for (int t = 30; t <= 50; ++t) {
    for (int i = 0; i < 300 - 10 * (t - 30); ++i) m.push_back(t / 10.0);
  }
  const auto r = round_magnitude_chisq(m);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);
  CHECK(r.table[0][0] == 0);
  CHECK(r.table[1][0] == 0);
}

TEST_CASE("chi-square on spikes at multiples of one half") {
  const auto r = round_magnitude_chisq(spiky_magnitudes());
  // 20 categories with a predecessor; 3.5, 4.0, 4.5 and 5.0 rise, nothing else does.
  CHECK(r.categories == 20);
  CHECK(r.table[0][0] == 4);
  CHECK(r.table[0][1] == 0);
  CHECK(r.table[1][0] == 0);
  CHECK(r.table[1][1] == 16);
  CHECK(r.statistic == Approx(20.0 * 64.0 * 64.0 / (4.0 * 16.0 * 4.0 * 16.0)));
  CHECK(r.p_value == Approx(std::erfc(std::sqrt(10.0))).epsilon(1e-12));
  CHECK(r.p_value < 0.001);
  CHECK(r.dof == 1);
  CHECK(r.table[0][0] + r.table[0][1] + r.table[1][0] + r.table[1][1] == r.categories);
  CHECK(chisq1_sf(r.statistic) == Approx(oracle::chisq_sf(r.statistic, 1)).epsilon(1e-10));
}

TEST_CASE("chi-square input checks") {
  CHECK_THROWS_AS(round_magnitude_chisq(std::vector<double>{3.1, 3.2, 3.3, 3.4}), ValidationError);
  CHECK_THROWS_AS(round_magnitude_chisq(std::vector<double>{3.0, 3.55, 4.0}), ValidationError);
  CHECK_THROWS_AS(round_magnitude_chisq(std::vector<double>{}), ValidationError);
}

TEST_CASE("synthetic stand-ins load with their fixed thresholds") {
  const auto dir = oracle::scratch_dir("synthetic");
  for (auto name : {DatasetName::earthquakes, DatasetName::wealth, DatasetName::wildfires}) {
    const auto path = write_synthetic_dataset(name, dir / (to_string(name) + ".txt"), RngSeed{5});
    const auto d = load_dataset(named_dataset(name, path));
    INFO(to_string(name));
    CHECK(d.report.retained > 20);
    CHECK(d.report.retained == d.sample.size());
    // Byte-identical regeneration.
    const auto again = write_synthetic_dataset(name, dir / "again.txt", RngSeed{5});
    std::ifstream a(path), b(again);
    CHECK(std::string(std::istreambuf_iterator<char>(a), {}) ==
          std::string(std::istreambuf_iterator<char>(b), {}));
  }
  const auto wealth = load_dataset(named_dataset(DatasetName::wealth, dir / "wealth.txt"));
  CHECK(wealth.report.valid == 399);
  CHECK(wealth.report.retained == 261);
}

TEST_CASE("converted magnitudes bin losslessly at ratio 10^0.1", "[property]") {
  const auto dir = oracle::scratch_dir("lossless");
  const auto path = write_synthetic_dataset(DatasetName::earthquakes, dir / "q.txt", RngSeed{6});
  const auto spec = named_dataset(DatasetName::earthquakes, path);
  const auto d = load_dataset(spec);
  const double lambda = std::pow(10.0, 0.1);
  std::size_t checked = 0;
  for (double m : d.raw) {
    const double x = richter_to_natural(m);
    if (x < spec.x_m) continue;
    const auto k = bin_index(x, spec.x_m, lambda);
    REQUIRE(k == std::llround((m - 3.5) * 10.0));
    REQUIRE(bin_index(std::nextafter(x, 0.0), spec.x_m, lambda) == k);
    REQUIRE(bin_index(std::nextafter(x, 1e300), spec.x_m, lambda) == k);
    ++checked;
  }
  CHECK(checked == d.report.retained);
}

TEST_CASE("dataset analysis report") {
  const auto dir = oracle::scratch_dir("analysis");
  const auto path = write_synthetic_dataset(DatasetName::earthquakes, dir / "q.txt", RngSeed{7});
  AnalysisOptions opts;
  opts.n_boot = 99;
  opts.seed = RngSeed{3};
  opts.threads = 1;
  const auto spec = named_dataset(DatasetName::earthquakes, path);
  const auto report = analyze_dataset(spec, {1.0, std::pow(10.0, 0.1), 10.0}, opts);
  CHECK(report["dataset"] == "earthquakes");
  CHECK(report["n"].get<std::size_t>() == report["load"]["retained"].get<std::size_t>());
  REQUIRE(report["fits"].size() == 3);
  CHECK(report["fits"][0]["method"] == "mle_continuous");
  CHECK(report["fits"][1]["method"] == "mle_binned");
  for (const auto& f : report["fits"]) {
    CHECK(f["p"].get<double>() > 0.0);
    CHECK(f["n_boot"] == 99);
  }
  CHECK(report["regression"].contains("alpha_hat"));
  REQUIRE(report.contains("chisq"));
  CHECK(report["chisq"]["dof"] == 1);
  opts.threads = 3;
  CHECK(analyze_dataset(spec, {1.0, std::pow(10.0, 0.1), 10.0}, opts) == report);
}

TEST_CASE("tail CDF export") {
  const auto csv = tail_cdf_csv(Sample({1.0, 2.0, 2.0, 4.0}, 1.0));
  CHECK(csv == "x,tail_probability\n1,1\n2,0.75\n4,0.25\n");
}
