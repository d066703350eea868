#include "rwdpp/walk.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rwdpp::walk {

const Site& Trajectory::position_at(double t) const {
  if (t < 0) throw Error("position_at: negative time");
  const auto it = std::upper_bound(event_times.begin(), event_times.end(), t);
  const auto jumps = static_cast<std::size_t>(it - event_times.begin());
  return positions[jumps];
}

Site step(const env::Environment& e, const Site& x, rng::Stream& steps) {
  if (!e.occupancy(x)) throw Error("step: site " + to_string(x, e.dim()) + " is not occupied");
  const int dir = steps.uniform_index(2 * e.dim());
  Site y = x;
  y[axis_of(dir)] += sign_of(dir) * e.gamma(x, dir);
  return y;
}

Trajectory simulate(const env::Environment& e, const Site& x0, std::int64_t n_steps,
                    std::uint64_t walk_seed) {
  if (!e.occupancy(x0)) throw Error("simulate: start site not occupied");
  if (n_steps < 0) throw Error("simulate: negative step count");
  Trajectory traj;
  traj.start = x0;
  traj.walk_seed = walk_seed;
  traj.positions.reserve(static_cast<std::size_t>(n_steps) + 1);
  traj.positions.push_back(x0);
  rng::Stream steps(rng::derive(walk_seed, rng::Role::kWalkSteps));
  Site x = x0;
  for (std::int64_t k = 0; k < n_steps; ++k) {
    const int dir = steps.uniform_index(2 * e.dim());
    x[axis_of(dir)] += sign_of(dir) * e.gamma(x, dir);
    traj.positions.push_back(x);
  }
  return traj;
}

Trajectory simulate_ct(const env::Environment& e, const Site& x0, double horizon,
                       std::uint64_t walk_seed) {
  if (!(horizon > 0)) throw Error("simulate_ct: horizon must be positive");
  rng::Stream clock(rng::derive(walk_seed, rng::Role::kWalkClock));
  std::vector<double> times;
  double t = clock.exponential();
  while (t <= horizon) {
    times.push_back(t);
    t += clock.exponential();
  }
  Trajectory traj = simulate(e, x0, static_cast<std::int64_t>(times.size()), walk_seed);
  traj.event_times = std::move(times);
  return traj;
}

std::array<double, kMaxDim> interpolate(const Trajectory& traj, std::int64_t n, double t) {
  if (n < 1 || t < 0) throw Error("interpolate: require n >= 1 and t >= 0");
  const double tn = t * static_cast<double>(n);
  const auto k = static_cast<std::int64_t>(std::floor(tn));
  const double w = tn - static_cast<double>(k);
  const std::int64_t len = static_cast<std::int64_t>(traj.positions.size());
  if (k >= len || (w > 0 && k + 1 >= len))
    throw Error("interpolate: trajectory too short for t*n = " + std::to_string(tn));
  const Site& a = traj.positions[static_cast<std::size_t>(k)];
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  std::array<double, kMaxDim> out{};
  if (w == 0) {
    for (int i = 0; i < kMaxDim; ++i) out[static_cast<std::size_t>(i)] =
        static_cast<double>(a[i]) * inv_sqrt_n;
    return out;
  }
  const Site& b = traj.positions[static_cast<std::size_t>(k + 1)];
  for (int i = 0; i < kMaxDim; ++i)
    out[static_cast<std::size_t>(i)] =
        (static_cast<double>(a[i]) + w * static_cast<double>(b[i] - a[i])) * inv_sqrt_n;
  return out;
}

std::vector<ExitClock> exit_times(const Trajectory& traj, const std::vector<double>& radii) {
  if (traj.positions.size() > 1 && traj.event_times.empty())
    throw Error("exit_times: requires a continuous-time trajectory");
  std::vector<ExitClock> out;
  out.reserve(radii.size());
  for (const double r : radii) {
    ExitClock clock;
    clock.radius = r;
    if (r <= 0) {
      clock.tau = 0;
      clock.exited = true;
      clock.exit_index = 0;
      out.push_back(clock);
      continue;
    }
    clock.tau = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < traj.positions.size(); ++k) {
      if (l2_norm(traj.positions[k] - traj.positions[0]) >= r) {
        clock.tau = traj.event_times[k - 1];
        clock.exited = true;
        clock.exit_index = static_cast<std::int64_t>(k);
        break;
      }
    }
    out.push_back(clock);
  }
  return out;
}

bool geometric_bound_check(const env::Environment& e, std::int64_t n_steps,
                           std::int64_t n_walks, std::uint64_t seed, std::int64_t n_omega) {
  if (n_omega < 1) throw Error("geometric_bound_check: N(omega) must be >= 1");
  for (std::int64_t w = 0; w < n_walks; ++w) {
    const std::uint64_t walk_seed =
        rng::derive(seed, rng::Role::kWalkSteps, static_cast<std::uint64_t>(w));
    const Trajectory traj = simulate(e, Site{}, n_steps, walk_seed);
    for (std::size_t k = 1; k < traj.positions.size(); ++k) {
      const std::int64_t reach = linf_norm(traj.positions[k]);
      if (k == 1) {
        if (reach > n_omega) return false;
        continue;
      }
      if (k - 1 >= 62) continue;  // 2^{k-1} N dwarfs any finite path
      const unsigned __int128 bound =
          (static_cast<unsigned __int128>(1) << (k - 1)) *
          static_cast<unsigned __int128>(n_omega);
      if (static_cast<unsigned __int128>(reach) > bound) return false;
    }
  }
  return true;
}

}  // namespace rwdpp::walk
