#ifndef RWDPP_EXPERIMENTS_HPP
#define RWDPP_EXPERIMENTS_HPP

#include <filesystem>
#include <iosfwd>

#include "rwdpp/config.hpp"

namespace rwdpp::experiments {

inline constexpr const char* kVersion = "rwdpp 0.1.0";

struct RunResult {
  int exit_code = 0;  // 0: all checks passed, 1: some failed
  bool all_passed = false;
  std::filesystem::path out_dir;
};

// Executes the configured experiment, writing CSV reports, summary.txt,
// replay.cfg and timing.txt under cfg.out_dir (which must be set).
RunResult run_experiment(const config::ExperimentConfig& cfg, std::ostream& log);

// Re-runs the experiment recorded in a replay file and compares report
// digests. jobs_override > 0 replaces the recorded worker count. Returns 0
// on bit-identical reports, 1 on divergence or version mismatch.
int replay(const std::filesystem::path& replay_file, const std::filesystem::path& out_dir,
           int jobs_override, std::ostream& log);

}  // namespace rwdpp::experiments

#endif  // RWDPP_EXPERIMENTS_HPP
