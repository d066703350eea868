#ifndef RWDPP_GRAPH_HPP
#define RWDPP_GRAPH_HPP

#include <array>
#include <cstdint>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "rwdpp/environment.hpp"
#include "rwdpp/estimates.hpp"
#include "rwdpp/lattice.hpp"

namespace rwdpp::graph {

// Cached view of the random graph over P(omega): jump lengths per (site,
// direction) are computed once and shared. Thread-safe behind a mutex; the
// underlying environment is already observationally pure.
class NeighborMap {
 public:
  explicit NeighborMap(const env::Environment& e,
                       std::int64_t gamma_cap = env::kDefaultGammaCap)
      : env_(&e), gamma_cap_(gamma_cap) {}

  const env::Environment& environment() const { return *env_; }
  int dim() const { return env_->dim(); }

  std::int64_t gamma(const Site& x, int dir) const;

  // The 2d nearest neighbors of an occupied site, in direction order.
  std::vector<Site> neighbors(const Site& x) const;

 private:
  const env::Environment* env_;
  std::int64_t gamma_cap_;
  mutable std::mutex mu_;
  mutable std::unordered_map<Site, std::array<std::int64_t, 2 * kMaxDim>, SiteHash> cache_;
};

struct DistanceResult {
  enum class Status { kReached, kDisconnected, kTruncated };
  Status status = Status::kTruncated;
  std::int64_t hops = -1;

  bool reached() const { return status == Status::kReached; }
};

// Breadth-first graph distance with deterministic expansion order
// (+e1,-e1,...). When a confinement box is given, paths must stay inside
// it; exhausting the confined component yields kDisconnected, while hitting
// hop_cap yields kTruncated (truncation is not evidence of disconnection).
DistanceResult graph_distance(const NeighborMap& nm, const Site& x, const Site& y,
                              const std::optional<Box>& confinement = std::nullopt,
                              std::int64_t hop_cap = 1'000'000);

// B_L(x) = x + [-L, L)^d is blocked when every axis-parallel segment through
// it meets P(omega).
bool is_blocked(const env::Environment& e, const Site& x, std::int64_t L);

// Monte Carlo estimate of p_L = Q(B_L(0) is unblocked) over fresh
// unconditioned environments, with a Wilson interval.
ProbabilityEstimate estimate_p_L(const env::ProcessSpec& spec, std::int64_t L,
                                 std::int64_t samples, std::uint64_t seed, int jobs = 1);

// Exact number of lattice animals of size n containing the origin
// (connected subsets of Z^d). Enumeration cap n <= 12.
std::int64_t count_lattice_animals(int dim, int n);

struct EventCaps {
  std::int64_t window_volume = env::kDefaultWindowCap;
  std::int64_t hop_cap = 10'000'000;
};

// E_{theta,n}: every occupied site of [-n,n]^d is reached from the origin by
// a path confined to |z|_inf <= lambda * n^theta.
bool event_E_theta_n(const env::Environment& e, std::int64_t n, double theta, double lambda,
                     const EventCaps& caps = EventCaps{});

// F_{i,n}(x): every occupied site of the slab [-n,n]^i x {x_{i+1..d}} is
// reached from x by a path inside the slab.
bool event_F(const env::Environment& e, int i, std::int64_t n, const Site& x,
             const EventCaps& caps = EventCaps{});

// G_{i,n}(x): as F with the slab {x_1} x [-n,n]^i x {x_{i+2..d}} (ranged
// axes clamped to the dimension).
bool event_G(const env::Environment& e, int i, std::int64_t n, const Site& x,
             const EventCaps& caps = EventCaps{});

// H_{i,n}(z): every first-axis level k in [-n,n] carries an occupied site
// with free coordinates 2..i in [-n,n] and coordinate i+1 pinned to z.
bool event_H(const env::Environment& e, int i, std::int64_t n, const Site& z,
             const EventCaps& caps = EventCaps{});

// Lambda_0 / Lambda_1 / Lambda_2 of the d=2 base case.
bool event_Lambda(const env::Environment& e, int which, std::int64_t u, double delta,
                  std::int64_t L, std::int64_t n, std::int64_t ell);

struct MNResult {
  std::int64_t m = 0;          // empirical M(omega), valid only when m_valid
  std::int64_t n = 0;          // N(omega) = M + max gamma over B_inf(0, M)
  bool m_valid = false;
  std::int64_t search_cap = 0;
};

// Empirical surrogate for the a.s.-finite M(omega): the smallest n0 such
// that max over the ball B_inf(0,n) of gamma stays <= n for every n in
// [n0, search_cap]. Cap-bounded by construction; the cap travels with the
// result.
MNResult compute_M_N(const env::Environment& e, std::int64_t search_cap);

}  // namespace rwdpp::graph

#endif  // RWDPP_GRAPH_HPP
