#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <doctest.h>

#include "bse/experiment.hpp"

using namespace bse;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ExperimentConfig tiny_config(const std::string& out) {
  ExperimentConfig cfg;
  cfg.alpha = 1.5;
  cfg.beta = 0.0;
  cfg.law = {0.5, 0.0, 0.5};
  cfg.n_steps = 64;
  cfg.cloud_size = 4000;
  cfg.replications = 3000;
  cfg.x_max = 50.0;
  cfg.grid_points = 80;
  cfg.seed = 11;
  cfg.output_dir = out;
  return cfg;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BSE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag)
      : path(fs::temp_directory_path() / ("bse_test_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_CASE("config validation and hashing") {
  ExperimentConfig cfg = tiny_config("out");
  CHECK_NOTHROW(cfg.validate());
  const auto h = cfg.hash();

  ExperimentConfig other = cfg;
  other.seed = 12;
  CHECK(other.hash() != h);

  other = cfg;
  other.alpha = 2.5;
  CHECK_THROWS_AS(other.validate(), std::invalid_argument);
  other = cfg;
  other.law = {0.2, 0.2};
  CHECK_THROWS_AS(other.validate(), std::invalid_argument);
  other = cfg;
  other.replications = 0;
  CHECK_THROWS_AS(other.validate(), std::invalid_argument);
  other = cfg;
  other.x1 = -1.0;
  CHECK_THROWS_AS(other.validate(), std::invalid_argument);
}

TEST_CASE("ks helper on identical and shifted samples") {
  std::vector<double> a, b, c;
  for (int i = 0; i < 2000; ++i) {
    a.push_back(i * 0.001);
    b.push_back(i * 0.001);
    c.push_back(i * 0.001 + 0.5);
  }
  CHECK(ks_statistic(a, b) == doctest::Approx(0.0));
  CHECK(ks_statistic(a, c) > 0.2);
  CHECK(ks_threshold(1e-3, 2000, 2000) == doctest::Approx(1.9495 * std::sqrt(2.0 / 2000.0)).epsilon(1e-3));
}

TEST_CASE("simulate artifacts are byte-identical across reruns and thread counts") {
  TempDir d1("sim1"), d2("sim2"), d3("sim3");
  ExperimentConfig cfg = tiny_config(d1.str());
  cfg.replications = 500;
  run_simulate(cfg);

  ExperimentConfig cfg2 = cfg;
  cfg2.output_dir = d2.str();
  run_simulate(cfg2);

  ExperimentConfig cfg3 = cfg;
  cfg3.output_dir = d3.str();
  cfg3.threads = 4;
  run_simulate(cfg3);

  const std::string runs1 = slurp(d1.str() + "/runs.csv");
  CHECK(runs1 == slurp(d2.str() + "/runs.csv"));
  CHECK(runs1 == slurp(d3.str() + "/runs.csv"));
  CHECK(slurp(d1.str() + "/simulate_summary.json") == slurp(d3.str() + "/simulate_summary.json"));

  // metadata embeds the tool version and the config hash
  CHECK(runs1.find("# tool: branching-stable-extremes") != std::string::npos);
  CHECK(runs1.find("# config_hash:") != std::string::npos);

  // a different seed changes the bytes
  ExperimentConfig cfg4 = cfg;
  cfg4.seed = 999;
  cfg4.output_dir = d1.str() + "/reseed";
  run_simulate(cfg4);
  CHECK(runs1 != slurp(cfg4.output_dir + "/runs.csv"));
}

TEST_CASE("single-particle simulate reports the KS cross-check") {
  TempDir d("simks");
  ExperimentConfig cfg = tiny_config(d.str());
  cfg.law = {1.0};
  cfg.replications = 20'000;
  cfg.n_steps = 128;
  const SimulateSummary s = run_simulate(cfg);
  REQUIRE(s.single_particle_ks.has_value());
  CHECK(*s.single_particle_ks < *s.single_particle_ks_threshold);
  CHECK(s.extinct_fraction == 1.0);
  CHECK(s.truncated_fraction == 0.0);
}

TEST_CASE("solve artifacts: convergence metadata and residual files") {
  TempDir d("solve");
  ExperimentConfig cfg = tiny_config(d.str());
  const SolveOutput o = run_solve(cfg);
  CHECK(o.sandwich.consistent);
  CHECK(o.residual.ok);
  CHECK(fs::exists(o.u_csv));
  CHECK(fs::exists(o.phi0_csv));
  CHECK(fs::exists(o.residual_csv));
  CHECK(fs::exists(o.summary_json));
  const std::string u_csv = slurp(o.u_csv);
  CHECK(u_csv.find("# columns: x,u") != std::string::npos);
  const std::string cloud_csv = slurp(o.cloud_csv);
  CHECK(cloud_csv.find("# columns: e,l,s") != std::string::npos);
  CHECK(cloud_csv.find("# n_steps: 64") != std::string::npos);
  CHECK(cloud_csv.find("# seed: 11") != std::string::npos);

  // byte-determinism of the solver artifacts too
  TempDir d2("solve2");
  ExperimentConfig cfg2 = tiny_config(d2.str());
  cfg2.threads = 4;
  const SolveOutput o2 = run_solve(cfg2);
  CHECK(slurp(o.u_csv) == slurp(o2.u_csv));
  CHECK(slurp(o.residual_csv) == slurp(o2.residual_csv));
}

TEST_CASE("cli: constants subcommand and exit codes") {
  CHECK(run_cli("constants --alpha 1 --beta 0") == 0);
  CHECK(run_cli("constants --alpha 0.5 --beta 1") == 0);
  CHECK(run_cli("constants --alpha 1 --beta 0.5") == kExitInvalidInput);
  CHECK(run_cli("constants --alpha 2 --beta 0") == kExitInvalidInput);
  CHECK(run_cli("nonsense") == kExitInvalidInput);
}

TEST_CASE("cli: constants prints the Remark-1 values") {
  const std::string out = fs::temp_directory_path() / "bse_constants_out.txt";
  const std::string cmd =
      std::string(BSE_CLI_PATH) + " constants --alpha 1 --beta 0 > " + out + " 2>/dev/null";
  REQUIRE(WEXITSTATUS(std::system(cmd.c_str())) == 0);
  const std::string text = slurp(out);
  CHECK(text.find("0.318309886184") != std::string::npos);  // 1/pi
  fs::remove(out);

  const std::string cmd2 =
      std::string(BSE_CLI_PATH) + " constants --alpha 0.5 --beta 1 > " + out + " 2>/dev/null";
  REQUIRE(WEXITSTATUS(std::system(cmd2.c_str())) == 0);
  const std::string text2 = slurp(out);
  CHECK(text2.find("0.564189583548") != std::string::npos);  // 1/sqrt(pi)
  fs::remove(out);
}

TEST_CASE("cli: simulate accepts a config file and flags override it") {
  TempDir d("cfgfile");
  const std::string cfg_path = d.str() + "/exp.toml";
  {
    std::ofstream out(cfg_path);
    out << "[simulate]\n"
        << "alpha = 1.5\n"
        << "beta = 0.0\n"
        << "law = \"1.0\"\n"
        << "reps = 200\n"
        << "n-steps = 64\n"
        << "cloud-size = 100\n"
        << "xmax = 50.0\n"
        << "grid-points = 60\n"
        << "seed = 3\n"
        << "out = \"" << d.str() << "/a\"\n";
  }
  CHECK(run_cli("--config " + cfg_path + " simulate") == 0);
  CHECK(fs::exists(d.str() + "/a/runs.csv"));

  // flag overrides the config file's output directory
  CHECK(run_cli("--config " + cfg_path + " simulate --out " + d.str() + "/b") == 0);
  CHECK(fs::exists(d.str() + "/b/runs.csv"));

  // identical config -> identical bytes
  CHECK(slurp(d.str() + "/a/runs.csv") == slurp(d.str() + "/b/runs.csv"));
}

TEST_CASE("cli: verify negative control exits nonzero" * doctest::test_suite("slow")) {
  TempDir d("verify");
  // subcritical preset: sharp enough that a 0.3 exponent shift must flip
  // the check while the honest run stays green
  const std::string base = "verify --alpha 1.5 --beta 0 --law 0.6,0,0.4 --reps 100000"
                           " --cloud-size 50000 --n-steps 256 --xmax 200 --grid-points 200"
                           " --seed 42 --out ";
  CHECK(run_cli(base + d.str() + "/ok") == 0);
  CHECK(run_cli(base + d.str() + "/bad --inject-exponent-offset 0.3") == kExitVerifyFailed);
}
