#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "rwdpp/environment.hpp"
#include "rwdpp/graph.hpp"
#include "rwdpp/oracle.hpp"
#include "rwdpp/periodic_env.hpp"
#include "rwdpp/rng.hpp"
#include "rwdpp/walk.hpp"

using namespace rwdpp;
using corrector::PeriodicEnvironment;
using env::Environment;
using env::ProcessSpec;
using oracle::ExactChain;

namespace {

PeriodicEnvironment full_torus(int dim, std::int64_t side) {
  Environment e(ProcessSpec::full_lattice(dim), 1, false);
  return PeriodicEnvironment::sample(e, side);
}

}  // namespace

TEST_CASE("chain on the full 4x4 torus") {
  const auto penv = full_torus(2, 4);
  const auto chain = ExactChain::build(penv);
  CHECK(chain.n_states() == 16);
  for (auto m : chain.column_multiplicities()) CHECK(m == 4);

  // Uniform distribution is stationary: u P = u.
  std::vector<double> u(16, 1.0 / 16.0);
  const auto v = chain.apply(u);
  for (double x : v) CHECK(x == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
}

TEST_CASE("chain on the even-sites torus of side 8") {
  Environment e(ProcessSpec::even_sites_1d(), 1, false);
  const auto penv = PeriodicEnvironment::sample(e, 8);
  const auto chain = ExactChain::build(penv);
  CHECK(chain.n_states() == 4);
  std::vector<double> point(4, 0.0);
  point[0] = 1.0;
  const auto after = chain.apply(point);
  int halves = 0;
  for (double x : after)
    if (x == doctest::Approx(0.5)) ++halves;
  CHECK(halves == 2);
}

TEST_CASE("exact_distribution basics") {
  const auto penv = full_torus(2, 8);
  const auto chain = ExactChain::build(penv);
  const std::int32_t origin = penv.rank_at(Site{});

  const auto d0 = oracle::exact_distribution(chain, origin, 0);
  CHECK(d0[static_cast<std::size_t>(origin)] == 1.0);

  const auto d1 = oracle::exact_distribution(chain, origin, 1);
  for (int dir = 0; dir < 4; ++dir) {
    Site nb;
    nb[axis_of(dir)] = sign_of(dir);
    CHECK(d1[static_cast<std::size_t>(penv.rank_at(nb))] == doctest::Approx(0.25));
  }

  const auto d9 = oracle::exact_distribution(chain, origin, 9);
  double total = 0;
  for (double x : d9) total += x;
  CHECK(std::abs(total - 1.0) < 1e-12);
}

TEST_CASE("exact_ct_distribution: point mass, normalization and plateau") {
  const auto penv = full_torus(2, 64);
  const auto chain = ExactChain::build(penv);
  const std::int32_t origin = penv.rank_at(Site{});

  const auto d0 = oracle::exact_ct_distribution(chain, origin, 0.0);
  CHECK(d0[static_cast<std::size_t>(origin)] == doctest::Approx(1.0));

  const auto d50 = oracle::exact_ct_distribution(chain, origin, 50.0);
  double total = 0;
  for (double x : d50) total += x;
  CHECK(std::abs(total - 1.0) < 1e-11);

  const auto d100 = oracle::exact_ct_distribution(chain, origin, 100.0);
  const double v50 = 50.0 * d50[static_cast<std::size_t>(origin)];
  const double v100 = 100.0 * d100[static_cast<std::size_t>(origin)];
  CHECK(std::abs(v100 - v50) / v50 < 0.05);
}

TEST_CASE("enumerate_probability: trivial and Lambda_0 cases") {
  Box window;
  window.dim = 1;
  window.lo = Site{-2};
  window.hi = Site{-1};
  const auto one = oracle::enumerate_probability(
      window, oracle::make_rational(1, 2), [](const env::WindowGrid&) { return true; });
  CHECK(one == oracle::make_rational(1, 1));

  // Lambda_0(u=0, L=2): at least one of the two sites below the origin.
  const auto lambda0 = oracle::enumerate_probability(
      window, oracle::make_rational(1, 2), [](const env::WindowGrid& g) {
        return g.at(Site{-1}) || g.at(Site{-2});
      });
  CHECK(lambda0 == oracle::make_rational(3, 4));

  // Same with p = 1/3: 1 - (2/3)^2 = 5/9.
  const auto third = oracle::enumerate_probability(
      window, oracle::make_rational(1, 3), [](const env::WindowGrid& g) {
        return g.at(Site{-1}) || g.at(Site{-2});
      });
  CHECK(third == oracle::make_rational(5, 9));

  CHECK_THROWS_AS(oracle::enumerate_probability(Box::cube(3, 2), oracle::make_rational(1, 2),
                                                [](const env::WindowGrid&) { return true; }),
                  Error);
}

TEST_CASE("brute_force_paths basics") {
  Environment full(ProcessSpec::full_lattice(2), 1, false);
  const auto grid = full.window(Box::cube(2, 2));
  CHECK(oracle::brute_force_paths(grid, Site{}, Site{}, 5) == 0);
  CHECK(oracle::brute_force_paths(grid, Site{}, Site{2, 1}, 10) == 3);
  CHECK_FALSE(oracle::brute_force_paths(grid, Site{}, Site{2, 2}, 1).has_value());
}

TEST_CASE("brute force agrees with BFS on random windows") {
  const auto spec = ProcessSpec::bernoulli(2, 0.5);
  int tested = 0;
  for (std::uint64_t seed = 0; seed < 300 && tested < 100; ++seed) {
    Environment e(spec, seed, false);
    const Box box = Box::cube(2, 2);
    const auto grid = e.window(box);
    if (!grid.at(Site{})) continue;
    // The periodic extension below needs every line inhabited.
    bool line_valid = true;
    for (int axis = 0; axis < 2 && line_valid; ++axis)
      for (std::int64_t t = -2; t <= 2 && line_valid; ++t) {
        bool hit = false;
        for (std::int64_t k = -2; k <= 2 && !hit; ++k)
          hit = grid.at(axis == 0 ? Site{k, t} : Site{t, k});
        line_valid = hit;
      }
    if (!line_valid) continue;
    // First occupied site distinct from the origin, scanning the window.
    Site target;
    bool found = false;
    for (std::int64_t x = -2; x <= 2 && !found; ++x)
      for (std::int64_t y = -2; y <= 2 && !found; ++y)
        if (!(x == 0 && y == 0) && grid.at(Site{x, y})) {
          target = Site{x, y};
          found = true;
        }
    if (!found) continue;
    ++tested;

    const auto brute = oracle::brute_force_paths(grid, Site{}, target, 12, 2'000'000);

    // BFS on the periodic extension, confined to the window box.
    auto wrapped = ProcessSpec::periodic(
        2, grid.bits, {box.side(0), box.side(1), 0, 0});
    Environment pe(wrapped, 1, false);
    graph::NeighborMap nm(pe);
    // The periodic environment indexes its fundamental domain from 0; shift
    // both endpoints so the window sits at [0, side)^2.
    const Site shift{2, 2};
    const Box confinement{Site{0, 0}, Site{4, 4}, 2};
    const auto bfs = graph_distance(nm, Site{} + shift, target + shift, confinement, 100);

    if (brute.has_value()) {
      CHECK(bfs.reached());
      CHECK(bfs.hops == *brute);
    } else {
      CHECK_FALSE(bfs.reached());
    }
  }
  CHECK(tested == 100);
}

TEST_CASE("Monte Carlo to exact TV distance is small") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 2024, true);
  const auto penv = PeriodicEnvironment::sample(e, 16);
  const auto chain = ExactChain::build(penv);
  const std::int32_t start = penv.anchor_rank();
  const Site start_site = penv.anchor_site();

  const std::int64_t n_steps = 20;
  const std::int64_t n_walks = 200000;  // acceptance runs 10^6 at TV < 0.01
  const auto exact = oracle::exact_distribution(chain, start, n_steps);

  // Walks on the unrolled periodic environment, folded onto the torus.
  Environment unrolled(penv.as_process_spec(), 7, false);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(chain.n_states()), 0);
  for (std::int64_t w = 0; w < n_walks; ++w) {
    const std::uint64_t walk_seed =
        rng::derive(99, rng::Role::kWalkSteps, static_cast<std::uint64_t>(w));
    const auto traj = walk::simulate(unrolled, start_site, n_steps, walk_seed);
    ++counts[static_cast<std::size_t>(penv.rank_at(traj.positions.back()))];
  }
  double tv = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    tv += std::abs(static_cast<double>(counts[i]) / static_cast<double>(n_walks) - exact[i]);
  tv /= 2;
  CHECK(tv < 0.015);
}
