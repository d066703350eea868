#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rwdpp/environment.hpp"
#include "rwdpp/rng.hpp"

using namespace rwdpp;
using env::Environment;
using env::ProcessSpec;

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::uint8_t byte) {
  h ^= byte;
  return h * 0x100000001B3ull;
}

std::uint64_t occupancy_digest(const Environment& e, std::int64_t radius) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  const Box box = Box::cube(radius, e.dim());
  Site x = box.lo;
  const std::int64_t volume = box.volume();
  for (std::int64_t i = 0; i < volume; ++i) {
    h = fnv1a(h, e.occupancy(x) ? 1 : 0);
    int a = 0;
    while (a < box.dim && x[a] == box.hi[a]) {
      x[a] = box.lo[a];
      ++a;
    }
    if (a < box.dim) ++x[a];
  }
  return h;
}

}  // namespace

TEST_CASE("spec validation enforces (A1) and shape consistency") {
  CHECK_THROWS_AS(ProcessSpec::bernoulli(2, 0.0), Error);
  CHECK_THROWS_AS(ProcessSpec::bernoulli(2, 1.5), Error);
  CHECK_THROWS_AS(ProcessSpec::periodic(1, {0, 0}, {2, 0, 0, 0}), Error);
  CHECK_THROWS_AS(ProcessSpec::periodic(1, {1, 0, 1}, {2, 0, 0, 0}), Error);
  CHECK(ProcessSpec::bernoulli(2, 1.0).degenerate_a1());
  CHECK_FALSE(ProcessSpec::bernoulli(2, 0.5).degenerate_a1());
  CHECK(ProcessSpec::full_lattice(2).degenerate_a1());
}

TEST_CASE("even-sites pattern conditioned on the origin") {
  Environment e(ProcessSpec::even_sites_1d(), 1, /*condition_on_origin=*/true);
  CHECK(e.occupancy(Site{0}));
  CHECK_FALSE(e.occupancy(Site{1}));
  CHECK(e.occupancy(Site{2}));
  CHECK_FALSE(e.occupancy(Site{3}));
  CHECK(e.occupancy(Site{-4}));
}

TEST_CASE("full lattice occupies everything") {
  Environment e(ProcessSpec::bernoulli(2, 1.0), 7, false);
  for (std::int64_t x = -5; x <= 5; ++x)
    for (std::int64_t y = -5; y <= 5; ++y) CHECK(e.occupancy(Site{x, y}));
}

TEST_CASE("conditioning a deterministic pattern unoccupied at the origin fails") {
  // odd sites: pattern 0,1 -> origin empty
  CHECK_THROWS_AS(Environment(ProcessSpec::periodic(1, {0, 1}, {2, 0, 0, 0}), 1, true), Error);
}

TEST_CASE("purity: repeated occupancy queries and digests agree") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 42, true);
  const Site probe{13, -27};
  CHECK(e.occupancy(probe) == e.occupancy(probe));
  CHECK(occupancy_digest(e, 64) == occupancy_digest(e, 64));

  Environment bf(ProcessSpec::block_factor(2, 0.5, 1, env::BlockRule::kAnyBelow), 42, true);
  CHECK(occupancy_digest(bf, 40) == occupancy_digest(bf, 40));
}

TEST_CASE("conditioned environments always report an occupied origin") {
  // Low-marginal block factor exercises the rejection loop.
  const auto spec = env::ProcessSpec::block_factor(2, 0.2, 1, env::BlockRule::kAnyBelow);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Environment e(spec, seed, true);
    CHECK(e.occupancy(Site{}));
  }
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Environment e(ProcessSpec::bernoulli(2, 0.3), seed, true);
    CHECK(e.occupancy(Site{}));
  }
}

TEST_CASE("bernoulli conditional law leaves off-origin bits at p") {
  // Oracle: exhaustive enumeration of the 2-site window {0, e1} under the
  // product law conditioned on omega(0)=1 gives P(omega(e1)=1) = p exactly.
  const double p = 0.5;
  {
    double num = 0, den = 0;
    for (int b0 = 0; b0 <= 1; ++b0)
      for (int b1 = 0; b1 <= 1; ++b1) {
        const double w = (b0 ? p : 1 - p) * (b1 ? p : 1 - p);
        if (b0 == 1) {
          den += w;
          if (b1 == 1) num += w;
        }
      }
    CHECK(num / den == doctest::Approx(p));
  }

  const std::int64_t n = 100000;
  std::int64_t hits = 0;
  for (std::int64_t s = 0; s < n; ++s) {
    Environment e(ProcessSpec::bernoulli(2, p),
                  rng::derive(501, rng::Role::kEnvReplicate, static_cast<std::uint64_t>(s)),
                  true);
    if (e.occupancy(Site{1, 0})) ++hits;
  }
  const double freq = static_cast<double>(hits) / static_cast<double>(n);
  const double sigma = std::sqrt(p * (1 - p) / static_cast<double>(n));
  CHECK(std::abs(freq - p) < 3 * sigma);
}

TEST_CASE("gamma on deterministic patterns") {
  Environment full(ProcessSpec::full_lattice(2), 1, false);
  for (int dir = 0; dir < 4; ++dir) CHECK(full.gamma(Site{3, -2}, dir) == 1);

  Environment even(ProcessSpec::even_sites_1d(), 1, false);
  CHECK(even.gamma(Site{0}, 0) == 2);  // +e1 from 0
  CHECK(even.gamma(Site{0}, 1) == 2);
  CHECK(even.gamma(Site{1}, 0) == 1);  // scan from an unoccupied site
}

TEST_CASE("gamma cap raises") {
  Environment even(ProcessSpec::even_sites_1d(), 1, false);
  CHECK_THROWS_AS(even.gamma(Site{0}, 0, 1), Error);
}

TEST_CASE("gamma law under bernoulli is geometric") {
  // Oracle: exhaustive enumeration of length-k prefixes: Q(gamma = k) =
  // (1-p)^{k-1} p. Accumulated over fresh environments.
  const double p = 0.5;
  const std::int64_t n = 200000;
  std::vector<std::int64_t> counts(10, 0);
  double mean_acc = 0;
  for (std::int64_t s = 0; s < n; ++s) {
    Environment e(ProcessSpec::bernoulli(1, p),
                  rng::derive(777, rng::Role::kEnvReplicate, static_cast<std::uint64_t>(s)),
                  false);
    const std::int64_t g = e.gamma(Site{}, 0);
    mean_acc += static_cast<double>(g);
    if (g < static_cast<std::int64_t>(counts.size())) ++counts[static_cast<std::size_t>(g)];
  }
  const double mean = mean_acc / static_cast<double>(n);
  CHECK(std::abs(mean - 1.0 / p) < 0.01 * (1.0 / p));
  for (std::int64_t k = 1; k <= 8; ++k) {
    const double expect = std::pow(1 - p, static_cast<double>(k - 1)) * p;
    const double freq =
        static_cast<double>(counts[static_cast<std::size_t>(k)]) / static_cast<double>(n);
    const double sigma = std::sqrt(expect * (1 - expect) / static_cast<double>(n));
    CHECK(std::abs(freq - expect) < 4 * sigma + 1e-9);
  }
}

TEST_CASE("window matches pointwise occupancy") {
  Environment e(ProcessSpec::block_factor(2, 0.4, 1, env::BlockRule::kAllBelow), 9, false);
  Box box;
  box.dim = 2;
  box.lo = Site{-3, -2};
  box.hi = Site{4, 3};
  const env::WindowGrid grid = e.window(box);
  for (std::int64_t x = -3; x <= 4; ++x)
    for (std::int64_t y = -2; y <= 3; ++y)
      CHECK(grid.at(Site{x, y}) == e.occupancy(Site{x, y}));
}

TEST_CASE("window examples") {
  Environment full(ProcessSpec::full_lattice(2), 1, false);
  const auto grid = full.window(Box::cube(1, 2));
  for (std::int64_t x = -1; x <= 1; ++x)
    for (std::int64_t y = -1; y <= 1; ++y) CHECK(grid.at(Site{x, y}));

  Environment even(ProcessSpec::even_sites_1d(), 1, false);
  Box b;
  b.dim = 1;
  b.lo = Site{-2};
  b.hi = Site{2};
  const auto g1 = even.window(b);
  CHECK(g1.at(Site{-2}));
  CHECK_FALSE(g1.at(Site{-1}));
  CHECK(g1.at(Site{0}));
  CHECK_FALSE(g1.at(Site{1}));
  CHECK(g1.at(Site{2}));

  CHECK_THROWS_AS(full.window(Box::cube(10000, 2), /*volume_cap=*/100), Error);
}

TEST_CASE("stationarity of the block-factor field") {
  // Empirical frequency of a fixed 2x1 pattern at the origin vs at a shift.
  const auto spec = env::ProcessSpec::block_factor(2, 0.5, 1, env::BlockRule::kAnyBelow);
  const std::int64_t n = 100000;
  std::int64_t at_origin = 0, at_shift = 0;
  const Site shift{3, -2};
  for (std::int64_t s = 0; s < n; ++s) {
    Environment e(spec, rng::derive(31, rng::Role::kEnvReplicate, static_cast<std::uint64_t>(s)),
                  false);
    if (e.occupancy(Site{0, 0}) && !e.occupancy(Site{1, 0})) ++at_origin;
    if (e.occupancy(shift) && !e.occupancy(shift + Site{1, 0})) ++at_shift;
  }
  const double f0 = static_cast<double>(at_origin) / static_cast<double>(n);
  const double f1 = static_cast<double>(at_shift) / static_cast<double>(n);
  const double sigma = std::sqrt(0.25 / static_cast<double>(n));
  CHECK(std::abs(f0 - f1) < 4 * std::sqrt(2.0) * sigma);
}

TEST_CASE("finite dependence: correlation vanishes beyond 2m+1") {
  const auto spec = env::ProcessSpec::block_factor(1, 0.5, 1, env::BlockRule::kAnyBelow);
  const std::int64_t n = 100000;
  const Site far{4};  // |x| = 4 > 2m+1 = 3
  std::int64_t c00 = 0, c0 = 0, cx = 0;
  for (std::int64_t s = 0; s < n; ++s) {
    Environment e(spec, rng::derive(77, rng::Role::kEnvReplicate, static_cast<std::uint64_t>(s)),
                  false);
    const bool a = e.occupancy(Site{});
    const bool b = e.occupancy(far);
    c0 += a;
    cx += b;
    c00 += (a && b);
  }
  const double fa = static_cast<double>(c0) / n;
  const double fb = static_cast<double>(cx) / n;
  const double fab = static_cast<double>(c00) / n;
  const double cov = fab - fa * fb;
  const double sigma = std::sqrt(fa * (1 - fa) * fb * (1 - fb) / n);
  CHECK(std::abs(cov) < 4 * sigma);

  // Within range the field is genuinely correlated (sanity that the law is
  // not secretly a product).
  std::int64_t near00 = 0;
  for (std::int64_t s = 0; s < n; ++s) {
    Environment e(spec, rng::derive(77, rng::Role::kEnvReplicate, static_cast<std::uint64_t>(s)),
                  false);
    if (e.occupancy(Site{}) && e.occupancy(Site{1})) ++near00;
  }
  const double fnear = static_cast<double>(near00) / n;
  CHECK(fnear - fa * fb > 10 * sigma);
}

TEST_CASE("(A1): empirical marginal strictly inside (0,1) for random specs") {
  for (const auto& spec : {env::ProcessSpec::bernoulli(2, 0.5),
                           env::ProcessSpec::block_factor(2, 0.5, 1, env::BlockRule::kAnyBelow),
                           env::ProcessSpec::block_factor(2, 0.3, 1, env::BlockRule::kAllBelow)}) {
    const std::int64_t n = 20000;
    std::int64_t hits = 0;
    for (std::int64_t s = 0; s < n; ++s) {
      Environment e(spec, rng::derive(5, rng::Role::kEnvReplicate, static_cast<std::uint64_t>(s)),
                    false);
      if (e.occupancy(Site{})) ++hits;
    }
    CHECK(hits > 0);
    CHECK(hits < n);
    const double freq = static_cast<double>(hits) / static_cast<double>(n);
    const double sigma =
        std::sqrt(spec.marginal() * (1 - spec.marginal()) / static_cast<double>(n));
    CHECK(std::abs(freq - spec.marginal()) < 4 * sigma);
  }
}
