#ifndef RWDPP_WALK_HPP
#define RWDPP_WALK_HPP

#include <cstdint>
#include <vector>

#include "rwdpp/environment.hpp"
#include "rwdpp/lattice.hpp"
#include "rwdpp/rng.hpp"

namespace rwdpp::walk {

// A quenched walk path. For continuous-time trajectories, event_times[k] is
// the Poisson jump time taking the walk to positions[k+1]; Y_t is constant
// between events.
struct Trajectory {
  Site start;
  std::vector<Site> positions;      // X_0 .. X_n
  std::vector<double> event_times;  // empty for discrete-time trajectories
  std::uint64_t walk_seed = 0;

  bool continuous_time() const { return !event_times.empty() || positions.size() == 1; }
  std::int64_t steps() const { return static_cast<std::int64_t>(positions.size()) - 1; }

  // Y_t for a continuous-time trajectory.
  const Site& position_at(double t) const;
};

// One transition of Eq.-style uniform law over the 2d nearest neighbors;
// consumes exactly one uniform variate.
Site step(const env::Environment& e, const Site& x, rng::Stream& steps);

// Discrete-time quenched walk of n_steps steps from x0. The per-walk seed
// fully determines the path; the step stream is derived from it with the
// kWalkSteps role.
Trajectory simulate(const env::Environment& e, const Site& x0, std::int64_t n_steps,
                    std::uint64_t walk_seed);

// Poissonized walk Y_t = X_{N_t} run to the given horizon. Clock variates
// come from a separate stream (kWalkClock), so the embedded chain is
// bit-identical to simulate() under the same walk seed.
Trajectory simulate_ct(const env::Environment& e, const Site& x0, double horizon,
                       std::uint64_t walk_seed);

// B_n(t): linear interpolation of the rescaled path.
std::array<double, kMaxDim> interpolate(const Trajectory& traj, std::int64_t n, double t);

struct ExitClock {
  double radius = 0;
  double tau = 0;              // infinity() when not exited within horizon
  bool exited = false;
  std::int64_t exit_index = -1;  // index into positions of the exit state
};

// First times |Y_t - Y_0| >= radius (Euclidean), per radius.
std::vector<ExitClock> exit_times(const Trajectory& traj, const std::vector<double>& radii);

// Checks |X_1|_inf <= N and |X_k|_inf <= 2^{k-1} N for k >= 2 on fresh
// trajectories from the origin.
bool geometric_bound_check(const env::Environment& e, std::int64_t n_steps,
                           std::int64_t n_walks, std::uint64_t seed, std::int64_t n_omega);

}  // namespace rwdpp::walk

#endif  // RWDPP_WALK_HPP
