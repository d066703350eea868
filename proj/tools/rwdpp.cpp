#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rwdpp/config.hpp"
#include "rwdpp/experiments.hpp"

namespace {

using rwdpp::config::Experiment;
using rwdpp::config::ExperimentConfig;

std::string resolve_out(const std::string& flag_out, const std::string& cfg_out,
                        const std::string& experiment) {
  if (!flag_out.empty()) return flag_out;
  if (!cfg_out.empty()) return cfg_out;
  if (const char* env_out = std::getenv("RWDPP_OUT")) return std::string(env_out);
  return "rwdpp_out/" + experiment;
}

int run_subcommand(Experiment which, const std::string& config_path, bool seed_set,
                   std::uint64_t seed, const std::string& out, int jobs) {
  ExperimentConfig cfg;
  if (!config_path.empty()) cfg = ExperimentConfig::load(config_path);
  cfg.experiment = which;
  if (seed_set) cfg.seed = seed;
  if (jobs > 0) cfg.jobs = jobs;
  cfg.out_dir = resolve_out(out, cfg.out_dir, rwdpp::config::experiment_name(which));
  const auto result = rwdpp::experiments::run_experiment(cfg, std::cout);
  return result.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulator and numerical verification toolkit for random walks on discrete "
               "point processes"};
  app.require_subcommand(1);

  std::string config_path, out_dir, replay_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;

  app.add_option("--config", config_path, "experiment config file (key = value lines)");
  app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
    seed_set = true;
  });
  app.add_option("--out", out_dir, "output directory (default: $RWDPP_OUT or ./rwdpp_out)");
  app.add_option("--jobs", jobs, "worker threads (0 = hardware default)");

  struct Sub {
    const char* name;
    const char* blurb;
    Experiment which;
  };
  const Sub subs[] = {
      {"env-check", "environment law checks: purity, stationarity, dependence, (A1)",
       Experiment::kEnvCheck},
      {"walk", "trajectory dumps, growth bound, big-jump control", Experiment::kWalk},
      {"diffusion", "empirical diffusion matrix across environments", Experiment::kDiffusion},
      {"gaussianity", "KS test of the rescaled endpoint against the normal law",
       Experiment::kGaussianity},
      {"corrector", "torus corrector solve, diagnostics ladder, cross-method D",
       Experiment::kCorrector},
      {"heatkernel", "exact and Monte Carlo return probability profiles",
       Experiment::kHeatkernel},
      {"displacement", "E|Y_t - x|/sqrt(t) profile with trend test", Experiment::kDisplacement},
      {"distance-decay", "chemical-distance comparison decay fit", Experiment::kDistanceDecay},
      {"events", "Monte Carlo event estimates: p_L, E, F, G, H, Lambda", Experiment::kEvents},
      {"oracle-compare", "Monte Carlo vs exact distributions, brute force vs BFS",
       Experiment::kOracleCompare},
      {"full-suite", "every experiment on one configuration", Experiment::kFullSuite},
  };
  for (const auto& sub : subs) app.add_subcommand(sub.name, sub.blurb);

  auto* replay_cmd = app.add_subcommand("replay", "re-run a recorded experiment and verify digests");
  replay_cmd->add_option("replay_file", replay_path, "replay.cfg from a previous run")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (replay_cmd->parsed()) {
      const std::string out = out_dir.empty() ? "rwdpp_out/replay" : out_dir;
      return rwdpp::experiments::replay(replay_path, out, jobs, std::cout);
    }
    for (const auto& sub : subs)
      if (app.get_subcommand(sub.name)->parsed())
        return run_subcommand(sub.which, config_path, seed_set, seed, out_dir, jobs);
    std::cerr << "no subcommand selected\n";
    return 2;
  } catch (const rwdpp::config::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const rwdpp::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
