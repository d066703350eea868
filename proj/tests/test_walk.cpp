#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rwdpp/environment.hpp"
#include "rwdpp/estimates.hpp"
#include "rwdpp/graph.hpp"
#include "rwdpp/oracle.hpp"
#include "rwdpp/periodic_env.hpp"
#include "rwdpp/rng.hpp"
#include "rwdpp/walk.hpp"

using namespace rwdpp;
using env::Environment;
using env::ProcessSpec;

TEST_CASE("step law on the full lattice: 1/2d per neighbor") {
  Environment e(ProcessSpec::full_lattice(2), 1, false);
  rng::Stream s(rng::derive(5, rng::Role::kWalkSteps));
  const std::int64_t n = 1'000'000;
  std::vector<std::int64_t> counts(4, 0);
  for (std::int64_t i = 0; i < n; ++i) {
    const Site y = walk::step(e, Site{}, s);
    for (int dir = 0; dir < 4; ++dir)
      if (y == unit_step(dir)) ++counts[static_cast<std::size_t>(dir)];
  }
  const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(n));
  for (auto c : counts) {
    const double freq = static_cast<double>(c) / static_cast<double>(n);
    CHECK(std::abs(freq - 0.25) < 3 * sigma);
  }
}

TEST_CASE("step on even sites: +-2 with equal probability") {
  Environment e(ProcessSpec::even_sites_1d(), 1, false);
  rng::Stream s(rng::derive(6, rng::Role::kWalkSteps));
  const std::int64_t n = 200000;
  std::int64_t plus = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    const Site y = walk::step(e, Site{}, s);
    REQUIRE((y == Site{2} || y == Site{-2}));
    if (y == Site{2}) ++plus;
  }
  const double freq = static_cast<double>(plus) / static_cast<double>(n);
  CHECK(std::abs(freq - 0.5) < 3 * std::sqrt(0.25 / static_cast<double>(n)));

  CHECK_THROWS_AS(walk::step(e, Site{1}, s), Error);
}

TEST_CASE("replay determinism: identical seeds give identical paths") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 33, true);
  const auto t1 = walk::simulate(e, Site{}, 500, 4242);
  const auto t2 = walk::simulate(e, Site{}, 500, 4242);
  CHECK(t1.positions == t2.positions);
  const auto t3 = walk::simulate(e, Site{}, 500, 4243);
  CHECK(t1.positions != t3.positions);
}

TEST_CASE("zero-step trajectory") {
  Environment e(ProcessSpec::full_lattice(2), 1, false);
  const auto traj = walk::simulate(e, Site{3, 1}, 0, 1);
  CHECK(traj.positions.size() == 1);
  CHECK(traj.positions[0] == Site{3, 1});
}

TEST_CASE("trajectory invariant: consecutive positions are neighbors") {
  Environment e(ProcessSpec::bernoulli(2, 0.4), 77, true);
  graph::NeighborMap nm(e);
  const auto traj = walk::simulate(e, Site{}, 200, 9);
  for (std::size_t k = 0; k + 1 < traj.positions.size(); ++k) {
    const auto nb = nm.neighbors(traj.positions[k]);
    bool found = false;
    for (const auto& y : nb) found = found || y == traj.positions[k + 1];
    CHECK(found);
  }
}

TEST_CASE("full-lattice increments pass a chi-square uniformity test") {
  Environment e(ProcessSpec::full_lattice(2), 1, false);
  const auto traj = walk::simulate(e, Site{}, 1'000'000, 123);
  std::vector<std::int64_t> counts(4, 0);
  for (std::size_t k = 0; k + 1 < traj.positions.size(); ++k) {
    const Site d = traj.positions[k + 1] - traj.positions[k];
    for (int dir = 0; dir < 4; ++dir)
      if (d == unit_step(dir)) ++counts[static_cast<std::size_t>(dir)];
  }
  // 0.999 quantile of chi-square with 3 degrees of freedom.
  CHECK(chi_square_uniform(counts) < 16.266);
}

TEST_CASE("even-sites walk stays on the even subgroup") {
  Environment e(ProcessSpec::even_sites_1d(), 1, false);
  const auto traj = walk::simulate(e, Site{}, 300, 5);
  for (const auto& x : traj.positions) CHECK(x[0] % 2 == 0);
}

TEST_CASE("quenched Markov property: per-site transition frequencies are uniform") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 314, true);
  graph::NeighborMap nm(e);
  // One long walk; bin transitions out of each site visited often enough.
  const auto traj = walk::simulate(e, Site{}, 200000, 2718);
  std::unordered_map<Site, std::vector<std::int64_t>, SiteHash> transitions;
  for (std::size_t k = 0; k + 1 < traj.positions.size(); ++k) {
    const Site& x = traj.positions[k];
    const Site d = traj.positions[k + 1] - x;
    auto& bins = transitions[x];
    if (bins.empty()) bins.assign(4, 0);
    for (int dir = 0; dir < 4; ++dir) {
      Site expect;
      expect[axis_of(dir)] = sign_of(dir) * nm.gamma(x, dir);
      if (d == expect) {
        ++bins[static_cast<std::size_t>(dir)];
        break;
      }
    }
  }
  int tested = 0;
  for (const auto& [site, bins] : transitions) {
    std::int64_t total = 0;
    for (auto b : bins) total += b;
    if (total < 500) continue;
    ++tested;
    CHECK(chi_square_uniform(bins) < 16.266);  // 0.999 quantile, df = 3
  }
  CHECK(tested >= 5);
}

TEST_CASE("poissonization: clock statistics and embedded chain") {
  Environment e(ProcessSpec::full_lattice(2), 1, false);
  const double horizon = 50.0;
  const std::int64_t n_walks = 2000;
  double jumps = 0;
  for (std::int64_t w = 0; w < n_walks; ++w) {
    const auto traj = walk::simulate_ct(e, Site{}, horizon,
                                        rng::derive(1, rng::Role::kWalkSteps,
                                                    static_cast<std::uint64_t>(w)));
    jumps += static_cast<double>(traj.event_times.size());
    CHECK(traj.positions.front() == Site{});
    for (std::size_t k = 1; k < traj.event_times.size(); ++k)
      CHECK(traj.event_times[k] > traj.event_times[k - 1]);
  }
  const double mean_jumps = jumps / static_cast<double>(n_walks);
  const double sigma = std::sqrt(horizon / static_cast<double>(n_walks));
  CHECK(std::abs(mean_jumps - horizon) < 3 * sigma);

  // Same walk seed: the embedded chain is the discrete walk, bit for bit.
  const auto ct = walk::simulate_ct(e, Site{}, 20.0, 555);
  const auto dt = walk::simulate(e, Site{}, ct.steps(), 555);
  CHECK(ct.positions == dt.positions);
}

TEST_CASE("continuous-time marginal matches the Poissonized exact distribution") {
  // Full lattice d=2 at t=5 on a 64-torus: the walk cannot wrap, so the
  // folded exact distribution is the free-lattice law.
  Environment full(ProcessSpec::full_lattice(2), 1, false);
  const auto penv = corrector::PeriodicEnvironment::sample(full, 64);
  const auto chain = oracle::ExactChain::build(penv);
  const std::int32_t origin = penv.rank_at(Site{});
  const double t = 5.0;
  const auto exact = oracle::exact_ct_distribution(chain, origin, t);

  const std::int64_t n_walks = 300000;  // spec example quotes TV < 0.02 at 10^6
  std::vector<std::int64_t> counts(static_cast<std::size_t>(chain.n_states()), 0);
  for (std::int64_t w = 0; w < n_walks; ++w) {
    const auto traj = walk::simulate_ct(full, Site{}, t,
                                        rng::derive(17, rng::Role::kWalkSteps,
                                                    static_cast<std::uint64_t>(w)));
    ++counts[static_cast<std::size_t>(penv.rank_at(traj.positions.back()))];
  }
  double tv = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    tv += std::abs(static_cast<double>(counts[i]) / static_cast<double>(n_walks) - exact[i]);
  tv /= 2;
  CHECK(tv < 0.02);
}

TEST_CASE("interpolation formula") {
  Environment e(ProcessSpec::full_lattice(2), 1, false);
  const auto traj = walk::simulate(e, Site{}, 100, 8);
  const std::int64_t n = 100;

  const auto at0 = walk::interpolate(traj, n, 0.0);
  CHECK(at0[0] == 0.0);
  CHECK(at0[1] == 0.0);

  const double t_exact = 7.0 / static_cast<double>(n);
  const auto at7 = walk::interpolate(traj, n, t_exact);
  CHECK(at7[0] == doctest::Approx(static_cast<double>(traj.positions[7][0]) / 10.0));

  const double t_mid = 7.5 / static_cast<double>(n);
  const auto mid = walk::interpolate(traj, n, t_mid);
  CHECK(mid[0] == doctest::Approx(
                      (static_cast<double>(traj.positions[7][0] + traj.positions[8][0])) / 2.0 /
                      10.0));

  CHECK_THROWS_AS(walk::interpolate(traj, n, 1.5), Error);
}

TEST_CASE("exit clocks") {
  Environment e(ProcessSpec::full_lattice(2), 1, false);
  const auto traj = walk::simulate_ct(e, Site{}, 200.0, 99);
  const std::vector<double> radii = {0, 1, 2, 4, 8};
  const auto clocks = walk::exit_times(traj, radii);
  CHECK(clocks[0].tau == 0.0);
  for (std::size_t i = 1; i < clocks.size(); ++i) {
    if (clocks[i].exited && clocks[i - 1].exited) CHECK(clocks[i].tau >= clocks[i - 1].tau);
  }
}

TEST_CASE("big jumps: |Y_{t ^ tau_n} - Y_0|_inf never exceeds 3n for n >= N(omega)") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 606, true);
  const auto mn = graph::compute_M_N(e, 30);
  REQUIRE(mn.m_valid);
  const std::vector<double> radii = {static_cast<double>(mn.n),
                                     static_cast<double>(2 * mn.n),
                                     static_cast<double>(4 * mn.n)};
  for (std::int64_t w = 0; w < 200; ++w) {
    const auto traj = walk::simulate_ct(e, Site{}, 100.0,
                                        rng::derive(4, rng::Role::kWalkSteps,
                                                    static_cast<std::uint64_t>(w)));
    const auto clocks = walk::exit_times(traj, radii);
    for (std::size_t r = 0; r < radii.size(); ++r) {
      const double n = radii[r];
      const std::int64_t stop = clocks[r].exited
                                    ? clocks[r].exit_index
                                    : static_cast<std::int64_t>(traj.positions.size()) - 1;
      for (std::int64_t k = 0; k <= stop; ++k)
        CHECK(static_cast<double>(linf_norm(traj.positions[static_cast<std::size_t>(k)] -
                                            traj.positions[0])) <= 3 * n);
    }
  }
}

TEST_CASE("geometric bound check") {
  Environment full(ProcessSpec::full_lattice(2), 1, false);
  CHECK(walk::geometric_bound_check(full, 40, 50, 1, 2));

  Environment even(ProcessSpec::even_sites_1d(), 1, true);
  CHECK(walk::geometric_bound_check(even, 40, 50, 2, 4));

  Environment bern(ProcessSpec::bernoulli(2, 0.5), 606, true);
  const auto mn = graph::compute_M_N(bern, 30);
  REQUIRE(mn.m_valid);
  CHECK(walk::geometric_bound_check(bern, 30, 1000, 3, mn.n));
}

TEST_CASE("torus walker shares paths with the lazy walk on the unrolled spec") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 11, true);
  const auto penv = corrector::PeriodicEnvironment::sample(e, 16);
  Environment unrolled(penv.as_process_spec(), 3, false);

  const Site start = penv.anchor_site();
  const std::uint64_t walk_seed = 12345;
  const auto traj = walk::simulate(unrolled, start, 2000, walk_seed);

  rng::Stream steps(rng::derive(walk_seed, rng::Role::kWalkSteps));
  corrector::TorusWalker walker(penv, penv.anchor_rank());
  for (int k = 0; k < 2000; ++k) walker.step(steps);
  CHECK(traj.positions.back() - start == walker.displacement());
}
