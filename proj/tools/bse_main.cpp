#include <cstdio>
#include <exception>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bse/experiment.hpp"

namespace {

std::vector<double> parse_law(const std::string& csv) {
  std::vector<double> probs;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    probs.push_back(std::stod(item));
  }
  if (probs.empty()) throw std::invalid_argument("offspring law: empty list");
  return probs;
}

void add_config_options(CLI::App* cmd, bse::ExperimentConfig& cfg, std::string& law_csv) {
  cmd->add_option("--alpha", cfg.alpha, "stable scaling index, (0,1)u(1,2) or 1");
  cmd->add_option("--beta", cfg.beta, "stable skew, (-1,1] (must be 0 when alpha=1)");
  cmd->add_option("--law", law_csv, "offspring probabilities p0,p1,... (comma separated)");
  cmd->add_option("--max-particles", cfg.max_particles, "truncation cap on particles ever born");
  cmd->add_option("--max-time", cfg.max_time, "truncation cap on tree depth in time");
  cmd->add_option("--n-steps", cfg.n_steps,
                  "path resolution: cloud steps over [0,e]; sim steps per unit time");
  cmd->add_option("--cloud-size", cfg.cloud_size, "samples of (e, L_e, S_e) for the solver");
  cmd->add_option("--reps", cfg.replications, "number of branching-tree replicates");
  cmd->add_option("--x1", cfg.x1, "first positive grid node");
  cmd->add_option("--xmax", cfg.x_max, "last grid node");
  cmd->add_option("--grid-points", cfg.grid_points, "grid size including the node at 0");
  cmd->add_option("--tol", cfg.tol, "solver sup-norm tolerance");
  cmd->add_option("--max-iter", cfg.max_iter, "solver iteration cap");
  cmd->add_option("--seed", cfg.seed, "master seed; pins every artifact byte");
  cmd->add_option("--threads", cfg.threads, "worker threads (0 = hardware)");
  cmd->add_option("--out", cfg.output_dir, "output directory");
}

int fail(int code, const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and numerical verification of the all-time maximum of\n"
               "critical and subcritical branching stable processes with positive jumps."};
  app.set_config("--config", "", "TOML/INI config file; command-line flags override it");
  app.require_subcommand(1);

  bse::ExperimentConfig cfg;
  std::string law_csv = "0.5,0,0.5";

  double c_alpha = 1.5, c_beta = 0.0;
  auto* constants = app.add_subcommand("constants", "print c and kappa for (alpha, beta)");
  constants->add_option("--alpha", c_alpha, "stable scaling index")->required();
  constants->add_option("--beta", c_beta, "stable skew")->required();

  auto* simulate = app.add_subcommand("simulate", "run replicated branching trees, emit CSV");
  add_config_options(simulate, cfg, law_csv);

  auto* solve = app.add_subcommand("solve", "solve the integral equation for u on the grid");
  add_config_options(solve, cfg, law_csv);

  auto* verify = app.add_subcommand("verify", "end-to-end check against the tail asymptotics");
  add_config_options(verify, cfg, law_csv);
  bse::VerifyOptions vopts;
  verify->add_option("--inject-exponent-offset", vopts.exponent_offset,
                     "shift the target exponent (negative control)");
  verify->add_flag("!--no-tauberian", vopts.tauberian, "skip the Laplace probe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : bse::kExitInvalidInput;
  }

  try {
    if (constants->parsed()) {
      const bse::StableParams p = bse::validate_params(c_alpha, c_beta);
      std::printf("alpha  = %.12g\n", p.alpha);
      std::printf("beta   = %.12g\n", p.beta);
      std::printf("c      = %.12g\n", p.c);
      std::printf("kappa  = %.12g\n", p.kappa);
      std::printf("admissible: %s\n",
                  p.alpha == 1.0 ? "alpha=1, beta=0 (Cauchy branch)"
                                 : "alpha in (0,1)u(1,2), beta in (-1,1]");
      return bse::kExitOk;
    }

    cfg.law = parse_law(law_csv);
    cfg.validate();

    if (simulate->parsed()) {
      const bse::SimulateSummary s = bse::run_simulate(cfg);
      std::printf("replications       : %lld\n", static_cast<long long>(s.replications));
      std::printf("truncated fraction : %.6g\n", s.truncated_fraction);
      std::printf("extinct fraction   : %.6g\n", s.extinct_fraction);
      std::printf("mean particles     : %.6g\n", s.mean_particles);
      for (const auto& [q, v] : s.max_quantiles) std::printf("max q%-7g: %.6g\n", q, v);
      if (s.single_particle_ks)
        std::printf("KS(max, S_e)       : %.6g (threshold %.6g)\n", *s.single_particle_ks,
                    *s.single_particle_ks_threshold);
      std::printf("wrote %s\n", s.runs_csv.c_str());
      std::printf("wrote %s\n", s.summary_json.c_str());
      return bse::kExitOk;
    }

    if (solve->parsed()) {
      const bse::SolveOutput o = bse::run_solve(cfg);
      std::printf("iterations (from 1 / from survival): %d / %d\n",
                  o.sandwich.from_one.iterations, o.sandwich.from_survival.iterations);
      std::printf("sandwich gap       : %.3g (consistent: %s)\n", o.sandwich.gap,
                  o.sandwich.consistent ? "yes" : "NO");
      std::printf("residual bound ok  : %s\n", o.residual.ok ? "yes" : "NO");
      std::printf("wrote %s\n", o.u_csv.c_str());
      std::printf("wrote %s\n", o.phi0_csv.c_str());
      std::printf("wrote %s\n", o.residual_csv.c_str());
      if (!o.sandwich.consistent || !o.residual.ok)
        return bse::kExitVerifyFailed;
      return bse::kExitOk;
    }

    const bse::VerifyReport rep = bse::run_verify(cfg, vopts);
    for (const auto& c : rep.checks)
      std::printf("%-28s %s  value=%.6g band=[%.6g, %.6g]\n", c.name.c_str(),
                  c.pass ? "PASS" : "FAIL", c.value, c.lo, c.hi);
    std::printf("overall: %s\n", rep.pass ? "PASS" : "FAIL");
    std::printf("wrote %s\n", rep.report_json.c_str());
    return rep.pass ? bse::kExitOk : bse::kExitVerifyFailed;
  } catch (const std::invalid_argument& e) {
    return fail(bse::kExitInvalidInput, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(bse::kExitIoError, e.what());
  } catch (const std::runtime_error& e) {
    const std::string what = e.what();
    if (what.find("cannot write") != std::string::npos ||
        what.find("cannot create") != std::string::npos)
      return fail(bse::kExitIoError, what);
    return fail(bse::kExitVerifyFailed, what);  // e.g. solver non-convergence
  } catch (const std::exception& e) {
    return fail(bse::kExitVerifyFailed, e.what());
  }
}
