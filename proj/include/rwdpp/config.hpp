#ifndef RWDPP_CONFIG_HPP
#define RWDPP_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rwdpp/environment.hpp"
#include "rwdpp/lattice.hpp"

namespace rwdpp::config {

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

enum class Experiment {
  kEnvCheck,
  kWalk,
  kDiffusion,
  kGaussianity,
  kCorrector,
  kHeatkernel,
  kDisplacement,
  kDistanceDecay,
  kEvents,
  kOracleCompare,
  kFullSuite,
};

std::string experiment_name(Experiment e);
Experiment experiment_from_name(const std::string& name);

// One flat config per experiment. Every key is known to the parser; unknown
// keys are rejected. Serialization emits all keys in a fixed order, so a
// config round-trips losslessly and replay files are canonical.
struct ExperimentConfig {
  // process law
  int dimension = 2;
  std::string kind = "bernoulli";  // bernoulli | block_factor | periodic | explicit
  double p = 0.5;
  int m = 1;
  std::string rule = "any_below";  // all_below | any_below
  std::vector<std::uint8_t> pattern;
  std::vector<std::int64_t> periods;
  bool condition_on_origin = true;

  // run identity
  Experiment experiment = Experiment::kFullSuite;
  std::uint64_t seed = 1;
  std::string out_dir;  // empty: resolved from --out / env var / default
  int jobs = 0;         // 0: hardware default

  // ensemble sizes
  std::int64_t n_steps = 2000;
  std::int64_t n_walks = 20000;
  std::int64_t samples = 100000;
  std::int64_t n_envs = 3;

  // torus parameters
  std::int64_t torus_side = 64;
  std::vector<std::int64_t> torus_ladder = {16, 32, 64, 128};

  // scalars used by the various experiments
  std::vector<double> direction = {1, 0};
  double epsilon = 0.05;
  double lindeberg_epsilon = 0.5;
  double theta = 1.0;
  double lambda = 1.0;
  double rho = 0.1;
  double delta = 0.5;
  std::int64_t big_l = 2;
  std::int64_t ell = 1;
  std::int64_t u = 0;
  double horizon = 100.0;
  std::vector<double> t_grid;
  std::vector<double> radii;
  std::vector<Site> sites;
  std::vector<std::int64_t> event_n = {2, 4, 8};
  std::int64_t search_cap = 30;

  env::ProcessSpec to_process_spec() const;
  std::string serialize() const;

  static ExperimentConfig parse_text(const std::string& text);
  static ExperimentConfig load(const std::filesystem::path& path);
};

}  // namespace rwdpp::config

#endif  // RWDPP_CONFIG_HPP
