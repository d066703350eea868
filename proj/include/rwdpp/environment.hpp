#ifndef RWDPP_ENVIRONMENT_HPP
#define RWDPP_ENVIRONMENT_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "rwdpp/lattice.hpp"
#include "rwdpp/rng.hpp"

namespace rwdpp::env {

inline constexpr std::int64_t kDefaultGammaCap = 1'000'000;
inline constexpr std::int64_t kDefaultWindowCap = std::int64_t{1} << 26;
inline constexpr std::int64_t kDefaultConditionAttemptCap = 1'000'000;

enum class ProcessKind { kBernoulli, kBlockFactor, kPeriodic, kExplicit };

// Block-factor rules: the occupancy bit is a function of the i.i.d. uniforms
// in the window of radius m around the site. Both rules hit the marginal
// target p exactly; the threshold is solved per rule.
enum class BlockRule {
  kAllBelow,  // occupied iff every window uniform <= p^(1/V)
  kAnyBelow,  // occupied iff some window uniform <= 1-(1-p)^(1/V)
};

struct ProcessSpec {
  int dim = 2;
  ProcessKind kind = ProcessKind::kBernoulli;
  double p = 0.5;                  // marginal target (bernoulli, block_factor)
  int m = 1;                       // block-factor window radius
  BlockRule rule = BlockRule::kAnyBelow;
  std::vector<std::uint8_t> pattern;              // x1-fastest, row-major
  std::array<std::int64_t, kMaxDim> periods{};    // per-axis periods

  static ProcessSpec bernoulli(int dim, double p);
  static ProcessSpec block_factor(int dim, double p, int m, BlockRule rule);
  static ProcessSpec periodic(int dim, std::vector<std::uint8_t> pattern,
                              std::array<std::int64_t, kMaxDim> periods);
  static ProcessSpec explicit_window(int dim, std::vector<std::uint8_t> grid,
                                     std::array<std::int64_t, kMaxDim> sides);
  // Deterministic patterns used throughout the test and config corpus.
  static ProcessSpec full_lattice(int dim);
  static ProcessSpec even_sites_1d();

  // Throws Error on invalid parameters ((A1) violations that make the
  // process unusable, inconsistent pattern shapes, bad dimensions).
  void validate() const;

  // True for laws with a deterministic or trivially degenerate marginal
  // (p = 1, all-ones patterns): they violate (A1) but are kept as test
  // environments and flagged in reports.
  bool degenerate_a1() const;

  bool deterministic() const {
    return kind == ProcessKind::kPeriodic || kind == ProcessKind::kExplicit;
  }

  // Finite-dependence range: occupancy on sets separated by at least this
  // distance is independent. 2m+1 for block factors, 1 for product laws,
  // 1 for deterministic patterns (no randomness at all).
  int dependence_range() const;

  // Q(site occupied) under the unconditioned law; exact for every kind.
  double marginal() const;

  bool pattern_bit(const Site& x) const;  // periodic/explicit lookup

  std::string describe() const;
};

struct WindowGrid {
  Box box;
  std::vector<std::uint8_t> bits;  // x1-fastest over box

  std::int64_t index_of(const Site& x) const {
    std::int64_t idx = 0, stride = 1;
    for (int i = 0; i < box.dim; ++i) {
      idx += (x[i] - box.lo[i]) * stride;
      stride *= box.side(i);
    }
    return idx;
  }

  bool at(const Site& x) const { return bits[static_cast<std::size_t>(index_of(x))] != 0; }
  bool contains(const Site& x) const { return box.contains(x); }
};

// A lazily sampled occupancy field on Z^d. Occupancy is a pure function of
// (spec, master seed, site): queries may come from any thread in any order
// and always return the same bit.
class Environment {
 public:
  Environment(ProcessSpec spec, std::uint64_t master_seed, bool condition_on_origin,
              std::int64_t condition_attempt_cap = kDefaultConditionAttemptCap);

  int dim() const { return spec_.dim; }
  const ProcessSpec& spec() const { return spec_; }
  std::uint64_t master_seed() const { return master_seed_; }
  bool conditioned_on_origin() const { return conditioned_; }

  bool occupancy(const Site& x) const;

  // gamma_e(T_x omega): smallest k in [1, cap] with occupancy(x + k e) = 1.
  // Throws when the scan exceeds cap.
  std::int64_t gamma(const Site& x, int dir, std::int64_t cap = kDefaultGammaCap) const;

  WindowGrid window(const Box& box, std::int64_t volume_cap = kDefaultWindowCap) const;

 private:
  bool occupancy_uncached(const Site& x) const;
  double factor_uniform(const Site& y) const;
  bool block_factor_bit(const Site& x) const;

  ProcessSpec spec_;
  std::uint64_t master_seed_ = 0;
  bool conditioned_ = false;
  std::uint64_t occupancy_stream_ = 0;
  std::uint64_t factor_stream_ = 0;
  std::uint64_t retry_stream_ = 0;  // equals factor_stream_ when no resample was needed
  double threshold_ = 0;            // block-factor per-uniform threshold

  // Block-factor queries cost a window of hashes, so those bits are memoized
  // behind sharded locks; the other kinds are a single hash or a table
  // lookup and stay stateless.
  struct MemoShard {
    std::mutex mu;
    std::unordered_map<Site, std::uint8_t, SiteHash> bits;
  };
  static constexpr int kMemoShards = 16;
  mutable std::unique_ptr<std::array<MemoShard, kMemoShards>> memo_;
};

}  // namespace rwdpp::env

#endif  // RWDPP_ENVIRONMENT_HPP
