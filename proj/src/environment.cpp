#include "rwdpp/environment.hpp"

#include <algorithm>
#include <cmath>

namespace rwdpp::env {

ProcessSpec ProcessSpec::bernoulli(int dim, double p) {
  ProcessSpec s;
  s.dim = dim;
  s.kind = ProcessKind::kBernoulli;
  s.p = p;
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::block_factor(int dim, double p, int m, BlockRule rule) {
  ProcessSpec s;
  s.dim = dim;
  s.kind = ProcessKind::kBlockFactor;
  s.p = p;
  s.m = m;
  s.rule = rule;
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::periodic(int dim, std::vector<std::uint8_t> pattern,
                                  std::array<std::int64_t, kMaxDim> periods) {
  ProcessSpec s;
  s.dim = dim;
  s.kind = ProcessKind::kPeriodic;
  s.pattern = std::move(pattern);
  s.periods = periods;
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::explicit_window(int dim, std::vector<std::uint8_t> grid,
                                         std::array<std::int64_t, kMaxDim> sides) {
  ProcessSpec s;
  s.dim = dim;
  s.kind = ProcessKind::kExplicit;
  s.pattern = std::move(grid);
  s.periods = sides;
  s.validate();
  return s;
}

ProcessSpec ProcessSpec::full_lattice(int dim) {
  std::array<std::int64_t, kMaxDim> periods{};
  for (int i = 0; i < dim; ++i) periods[static_cast<std::size_t>(i)] = 1;
  return periodic(dim, {1}, periods);
}

ProcessSpec ProcessSpec::even_sites_1d() { return periodic(1, {1, 0}, {2, 0, 0, 0}); }

void ProcessSpec::validate() const {
  if (dim < 1 || dim > kMaxDim)
    throw Error("process spec: dimension must be in [1," + std::to_string(kMaxDim) + "]");
  switch (kind) {
    case ProcessKind::kBernoulli:
      if (!(p > 0.0))
        throw Error("process spec: bernoulli p = 0 has no occupied sites, violating (A1)");
      if (p > 1.0) throw Error("process spec: bernoulli p > 1");
      break;
    case ProcessKind::kBlockFactor:
      if (!(p > 0.0))
        throw Error("process spec: block factor marginal p = 0 violates (A1)");
      if (p > 1.0) throw Error("process spec: block factor marginal p > 1");
      if (m < 0) throw Error("process spec: block factor radius m < 0");
      break;
    case ProcessKind::kPeriodic:
    case ProcessKind::kExplicit: {
      std::int64_t volume = 1;
      for (int i = 0; i < dim; ++i) {
        if (periods[static_cast<std::size_t>(i)] < 1)
          throw Error("process spec: pattern periods must be >= 1 on each axis");
        volume *= periods[static_cast<std::size_t>(i)];
      }
      if (static_cast<std::int64_t>(pattern.size()) != volume)
        throw Error("process spec: pattern size does not match periods");
      if (std::all_of(pattern.begin(), pattern.end(), [](std::uint8_t b) { return b == 0; }))
        throw Error("process spec: empty pattern has no occupied sites, violating (A1)");
      break;
    }
  }
}

bool ProcessSpec::degenerate_a1() const {
  switch (kind) {
    case ProcessKind::kBernoulli:
    case ProcessKind::kBlockFactor:
      return p >= 1.0;
    case ProcessKind::kPeriodic:
    case ProcessKind::kExplicit:
      return std::all_of(pattern.begin(), pattern.end(), [](std::uint8_t b) { return b != 0; });
  }
  return false;
}

int ProcessSpec::dependence_range() const {
  return kind == ProcessKind::kBlockFactor ? 2 * m + 1 : 1;
}

double ProcessSpec::marginal() const {
  switch (kind) {
    case ProcessKind::kBernoulli:
    case ProcessKind::kBlockFactor:
      return p;
    case ProcessKind::kPeriodic:
    case ProcessKind::kExplicit: {
      std::int64_t ones = 0;
      for (std::uint8_t b : pattern) ones += b ? 1 : 0;
      return static_cast<double>(ones) / static_cast<double>(pattern.size());
    }
  }
  return 0;
}

bool ProcessSpec::pattern_bit(const Site& x) const {
  std::int64_t idx = 0, stride = 1;
  for (int i = 0; i < dim; ++i) {
    const std::int64_t s = periods[static_cast<std::size_t>(i)];
    const std::int64_t r = ((x[i] % s) + s) % s;
    idx += r * stride;
    stride *= s;
  }
  return pattern[static_cast<std::size_t>(idx)] != 0;
}

std::string ProcessSpec::describe() const {
  switch (kind) {
    case ProcessKind::kBernoulli:
      return "bernoulli(d=" + std::to_string(dim) + ",p=" + std::to_string(p) + ")";
    case ProcessKind::kBlockFactor:
      return "block_factor(d=" + std::to_string(dim) + ",p=" + std::to_string(p) +
             ",m=" + std::to_string(m) +
             (rule == BlockRule::kAllBelow ? ",all_below)" : ",any_below)");
    case ProcessKind::kPeriodic:
      return "periodic(d=" + std::to_string(dim) + ")";
    case ProcessKind::kExplicit:
      return "explicit(d=" + std::to_string(dim) + ")";
  }
  return "?";
}

namespace {

int window_volume(int dim, int m) {
  int v = 1;
  for (int i = 0; i < dim; ++i) v *= 2 * m + 1;
  return v;
}

}  // namespace

Environment::Environment(ProcessSpec spec, std::uint64_t master_seed, bool condition_on_origin,
                         std::int64_t condition_attempt_cap)
    : spec_(std::move(spec)), master_seed_(master_seed), conditioned_(condition_on_origin) {
  spec_.validate();
  occupancy_stream_ = rng::derive(master_seed_, rng::Role::kOccupancy);
  factor_stream_ = rng::derive(master_seed_, rng::Role::kFactorInput);
  retry_stream_ = factor_stream_;

  if (spec_.kind == ProcessKind::kBlockFactor) {
    const int v = window_volume(spec_.dim, spec_.m);
    threshold_ = spec_.rule == BlockRule::kAllBelow
                     ? std::pow(spec_.p, 1.0 / v)
                     : 1.0 - std::pow(1.0 - spec_.p, 1.0 / v);
    memo_ = std::make_unique<std::array<MemoShard, kMemoShards>>();
  }

  if (!conditioned_) return;

  switch (spec_.kind) {
    case ProcessKind::kBernoulli:
      break;  // origin bit forced below; the off-origin product law is untouched
    case ProcessKind::kPeriodic:
    case ProcessKind::kExplicit:
      if (!spec_.pattern_bit(Site{}))
        throw Error("conditioning impossible: pattern is unoccupied at the origin");
      break;
    case ProcessKind::kBlockFactor: {
      // The origin bit is a function of the uniforms within radius m only;
      // resampling exactly those inputs until the bit comes up 1 realizes
      // Q(.|Omega_0) with everything else untouched.
      std::int64_t attempt = 0;
      for (;; ++attempt) {
        if (attempt > condition_attempt_cap)
          throw Error("conditioning on the origin exceeded the attempt cap (" +
                      std::to_string(condition_attempt_cap) + ") for " + spec_.describe());
        retry_stream_ = attempt == 0
                            ? factor_stream_
                            : rng::derive(master_seed_, rng::Role::kFactorRetry,
                                          static_cast<std::uint64_t>(attempt));
        if (block_factor_bit(Site{})) break;
      }
      break;
    }
  }
}

double Environment::factor_uniform(const Site& y) const {
  const bool in_retry_region = conditioned_ && linf_norm(y) <= spec_.m;
  return rng::site_uniform(in_retry_region ? retry_stream_ : factor_stream_, y);
}

bool Environment::block_factor_bit(const Site& x) const {
  const int m = spec_.m;
  Site j;
  for (int i = 0; i < spec_.dim; ++i) j[i] = -m;
  const bool all = spec_.rule == BlockRule::kAllBelow;
  for (;;) {
    const double u = factor_uniform(x + j);
    if (all) {
      if (u > threshold_) return false;
    } else {
      if (u <= threshold_) return true;
    }
    int i = 0;
    while (i < spec_.dim && j[i] == m) {
      j[i] = -m;
      ++i;
    }
    if (i == spec_.dim) break;
    ++j[i];
  }
  return all;
}

bool Environment::occupancy_uncached(const Site& x) const {
  switch (spec_.kind) {
    case ProcessKind::kBernoulli:
      if (conditioned_ && linf_norm(x) == 0) return true;
      return rng::site_uniform(occupancy_stream_, x) < spec_.p;
    case ProcessKind::kPeriodic:
    case ProcessKind::kExplicit:
      return spec_.pattern_bit(x);
    case ProcessKind::kBlockFactor:
      return block_factor_bit(x);
  }
  return false;
}

bool Environment::occupancy(const Site& x) const {
  if (!memo_) return occupancy_uncached(x);
  MemoShard& shard = (*memo_)[SiteHash{}(x) % kMemoShards];
  {
    std::lock_guard<std::mutex> lock(shard.mu);
    auto it = shard.bits.find(x);
    if (it != shard.bits.end()) return it->second != 0;
  }
  const bool bit = occupancy_uncached(x);
  {
    std::lock_guard<std::mutex> lock(shard.mu);
    shard.bits.emplace(x, bit ? 1 : 0);
  }
  return bit;
}

std::int64_t Environment::gamma(const Site& x, int dir, std::int64_t cap) const {
  const Site e = unit_step(dir);
  Site y = x;
  for (std::int64_t k = 1; k <= cap; ++k) {
    y = y + e;
    if (occupancy(y)) return k;
  }
  throw Error("gamma scan from " + to_string(x, spec_.dim) + " exceeded cap " +
              std::to_string(cap) + " for " + spec_.describe());
}

WindowGrid Environment::window(const Box& box, std::int64_t volume_cap) const {
  if (box.dim != spec_.dim) throw Error("window box dimension mismatch");
  const std::int64_t volume = box.volume();
  if (volume > volume_cap)
    throw Error("window volume " + std::to_string(volume) + " exceeds cap " +
                std::to_string(volume_cap));
  WindowGrid grid;
  grid.box = box;
  grid.bits.resize(static_cast<std::size_t>(volume));
  Site x = box.lo;
  for (std::int64_t idx = 0; idx < volume; ++idx) {
    grid.bits[static_cast<std::size_t>(idx)] = occupancy(x) ? 1 : 0;
    int i = 0;
    while (i < box.dim && x[i] == box.hi[i]) {
      x[i] = box.lo[i];
      ++i;
    }
    if (i < box.dim) ++x[i];
  }
  return grid;
}

}  // namespace rwdpp::env
