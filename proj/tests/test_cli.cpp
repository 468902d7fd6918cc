#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "plbin/cli.hpp"
#include "plbin/datasets.hpp"
#include "plbin/gof.hpp"
#include "plbin/parallel.hpp"

using namespace plbin;
using Catch::Approx;
using nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

} // namespace

TEST_CASE("fit") {
  const auto dir = oracle::scratch_dir("cli_fit");
  const auto e3 = write(dir / "e.txt", "2.718281828459045\n2.718281828459045\n2.718281828459045\n");
  auto r = run({"fit", e3.string(), "--xm", "1", "--lambda", "1"});
  REQUIRE(r.code == kExitOk);
  const auto j = json::parse(r.out);
  CHECK(j["alpha_hat"].get<double>() == Approx(1.0).epsilon(1e-12));
  CHECK(j["method"] == "mle_continuous");
  CHECK(j["n"] == 3);

  CHECK(run({"fit", write(dir / "empty.txt", "").string(), "--xm", "1"}).code == kExitValidation);
  CHECK(run({"fit", (dir / "missing.txt").string(), "--xm", "1"}).code == kExitIo);
  CHECK(run({"fit", e3.string(), "--xm", "1", "--lambda", "10"}).code == kExitComputation);
  CHECK(run({"fit", e3.string()}).code == kExitValidation); // --xm is mandatory
  CHECK(run({"fit", e3.string(), "--xm", "1", "--method", "regression"}).code == kExitValidation);
}

TEST_CASE("output formats") {
  const auto dir = oracle::scratch_dir("cli_fmt");
  const auto f = write(dir / "x.txt", "1\n2\n4\n8\n3\n");
  const auto csv = run({"fit", f.string(), "--xm", "1", "--lambda", "2", "--format", "csv"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out.rfind("alpha_hat,", 0) == 0);
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 2);
  const auto human = run({"fit", f.string(), "--xm", "1", "--format", "human"});
  CHECK(human.out.find("alpha_hat: ") != std::string::npos);
}

TEST_CASE("JSON output round-trips", "[property]") {
  const auto dir = oracle::scratch_dir("cli_json");
  const auto f = write(dir / "x.txt", "1\n2.5\n4\n8\n3\n11\n1.2\n");
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"fit", f.string(), "--xm", "1", "--lambda", "2"},
           {"gof", f.string(), "--xm", "1", "--lambda", "2", "--boot", "99", "--seed", "4"},
           {"lambda-limit", "--alpha", "1.5", "--n", "1000", "--tol", "0.05"}}) {
    const auto r = run(args);
    REQUIRE(r.code == 0);
    const auto j = json::parse(r.out);
    CHECK(j.dump(2) + "\n" == r.out);
    CHECK(json::parse(j.dump()) == j);
  }
}

TEST_CASE("gof prints the seed it used") {
  const auto dir = oracle::scratch_dir("cli_gof");
  std::string text;
  for (int i = 1; i <= 200; ++i) text += std::to_string(std::pow(i / 200.0, -1.0 / 1.5)) + "\n";
  const auto f = write(dir / "p.txt", text);
  const auto fresh = run({"gof", f.string(), "--xm", "1", "--boot", "99"});
  REQUIRE(fresh.code == 0);
  const auto j = json::parse(fresh.out);
  REQUIRE(j.contains("seed"));
  const auto seed = std::to_string(j["seed"].get<std::uint64_t>());
  const auto again = run({"gof", f.string(), "--xm", "1", "--boot", "99", "--seed", seed});
  CHECK(again.out == fresh.out);
  const auto threaded =
      run({"gof", f.string(), "--xm", "1", "--boot", "99", "--seed", seed, "--threads", "3"});
  CHECK(threaded.out == fresh.out);
  const auto quick = json::parse(run({"gof", f.string(), "--xm", "1", "--quick", "--seed", "1"}).out);
  CHECK(quick["p"].is_null());
  CHECK(quick["n_boot"] == 19);
  CHECK(run({"gof", f.string(), "--xm", "1", "--boot", "5"}).code == kExitValidation);
}

TEST_CASE("gof reports lambda too large for n") {
  const auto dir = oracle::scratch_dir("cli_degenerate");
  const auto f = write(dir / "d.txt", "1.5\n");
  const auto r = run({"gof", f.string(), "--xm", "1", "--lambda", "1.2", "--boot", "999", "--seed", "3"});
  CHECK(r.code == kExitComputation);
  CHECK(r.err.find("too large") != std::string::npos);
}

TEST_CASE("lambda-limit") {
  const auto r = run({"lambda-limit", "--alpha", "1.5", "--n", "1000000", "--tol", "0.005"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["lambda"].get<double>() == Approx(57.36).margin(0.01));
  CHECK(j["few_bin_probability"].get<double>() == Approx(0.005).margin(1e-8));
  CHECK(few_bin_probability(1.5, j["lambda"].get<double>(), 1.0, 1000000) == Approx(0.005).margin(1e-8));
  CHECK(run({"lambda-limit", "--alpha", "1.5", "--n", "1000", "--tol", "0"}).code == kExitValidation);
  CHECK(run({"lambda-limit", "--alpha", "1.5", "--n", "10", "--tol", "0.999999", "--lambda-max", "100"})
            .code == kExitComputation);
}

TEST_CASE("simulate") {
  const auto dir = oracle::scratch_dir("cli_sim");
  const auto cfg = write(dir / "s.conf",
                         "experiment = bias_rejection\nn = 100\nreplicates = 10\nlambda = 1, 2\n"
                         "noise = additive\nsigma = 0.1\nseed = 8\n");
  const auto out = dir / "s.csv";
  auto r = run({"simulate", "--config", cfg.string(), "--out", out.string(), "--threads", "2"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["seed"] == 8);
  CHECK(std::filesystem::exists(out));
  const auto bad = write(dir / "bad.conf", "lambda =\nn = 100\n");
  r = run({"simulate", "--config", bad.string(), "--out", (dir / "bad.csv").string()});
  CHECK(r.code == kExitValidation);
  CHECK(r.err.find("bad.conf:1:") != std::string::npos);
  r = run({"simulate", "--preset", "fig2", "--print-preset"});
  CHECK(r.code == 0);
  CHECK(r.out.find("replicates = 1000") != std::string::npos);
  CHECK(run({"simulate", "--preset", "fig2"}).code == kExitValidation);
  CHECK(run({"simulate", "--config", (dir / "none.conf").string(), "--out", "x"}).code == kExitIo);
}

TEST_CASE("tolerance and dataset subcommands") {
  const auto dir = oracle::scratch_dir("cli_misc");
  auto r = run({"tolerance", "--alpha", "1.5", "--lambda", "1", "--n", "200", "--target", "0.5",
                "--ci", "0.05", "--seed", "2", "--threads", "1"});
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["seed"] == 2);
  CHECK(run({"tolerance", "--lambda", "9", "--n", "500"}).code == kExitValidation);
  CHECK(run({"tolerance", "--boot", "18", "--seed", "1"}).code == kExitValidation);
  r = run({"tolerance", "--alpha", "1.5", "--lambda", "2", "--n", "200", "--target", "0.5",
           "--ci", "0.05", "--boot", "39", "--seed", "2"});
  CHECK(r.code == 0);

  const auto w = write_synthetic_dataset(DatasetName::wealth, dir / "w.txt", RngSeed{1});
  r = run({"dataset", w.string(), "--name", "wealth", "--boot", "99", "--seed", "1", "--tail-csv",
           (dir / "tail.csv").string()});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["n"] == 261);
  CHECK(j["fits"].size() == 3);
  CHECK_FALSE(j.contains("chisq"));
  CHECK(std::filesystem::exists(dir / "tail.csv"));
  CHECK(run({"dataset", w.string(), "--name", "wealth", "--xm", "5"}).code == kExitValidation);
  CHECK(run({"dataset", w.string(), "--name", "custom"}).code == kExitValidation);
  const auto csv = run({"dataset", w.string(), "--name", "wealth", "--boot", "99", "--seed", "1",
                        "--format", "csv"});
  CHECK(std::count(csv.out.begin(), csv.out.end(), '\n') == 4);
}

TEST_CASE("thread count from the environment") {
  ::setenv("PLBIN_THREADS", "3", 1);
  CHECK(default_threads() == 3);
  ::setenv("PLBIN_THREADS", "junk", 1);
  CHECK(default_threads() >= 1);
  ::unsetenv("PLBIN_THREADS");
  CHECK(default_threads() >= 1);
}

TEST_CASE("help and version exit cleanly") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--version"}).code == 0);
  CHECK(run({}).code == kExitValidation);
  CHECK(run({"frobnicate"}).code == kExitValidation);
}
