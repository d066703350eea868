#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "rwdpp/environment.hpp"
#include "rwdpp/estimates.hpp"
#include "rwdpp/rng.hpp"
#include "rwdpp/stats.hpp"

using namespace rwdpp;
using env::Environment;
using env::ProcessSpec;

TEST_CASE("wilson and clopper-pearson intervals") {
  const auto e = wilson_interval(50, 100);
  CHECK(e.estimate == doctest::Approx(0.5));
  CHECK(e.ci_low < 0.5);
  CHECK(e.ci_high > 0.5);
  CHECK(e.ci_high - e.ci_low < 0.25);

  CHECK(clopper_pearson_upper_zero(10000) == doctest::Approx(3.0 / 10000).epsilon(0.05));
}

TEST_CASE("mann-kendall detects trends and tolerates noise") {
  std::vector<double> rising, flat;
  rng::Stream s(rng::derive(3, rng::Role::kExperiment));
  for (int i = 0; i < 12; ++i) {
    rising.push_back(static_cast<double>(i) + 0.01 * s.u01());
    flat.push_back(1.0 + 0.01 * (s.u01() - 0.5));
  }
  CHECK(mann_kendall(rising).z > 2.326);
  CHECK(mann_kendall(flat).z < 2.326);
}

TEST_CASE("line fit recovers a known slope") {
  std::vector<double> x, y;
  for (int i = 0; i < 8; ++i) {
    x.push_back(static_cast<double>(i));
    y.push_back(3.0 - 0.7 * static_cast<double>(i) + 0.001 * ((i % 3) - 1));
  }
  const auto fit = fit_line(x, y);
  CHECK(fit.slope == doctest::Approx(-0.7).epsilon(0.01));
  CHECK(std::abs(fit.t_stat) > 3);
}

TEST_CASE("empirical D on the full lattice approaches diag(1/2,1/2)") {
  Environment e(ProcessSpec::full_lattice(2), 1, false);
  const auto d = stats::estimate_D_empirical(e, 500, 4000, 77, 2);
  CHECK(std::abs(d.d(0, 0) - 0.5) < 0.05);
  CHECK(std::abs(d.d(1, 1) - 0.5) < 0.05);
  CHECK(std::abs(d.d(0, 1)) < 0.05);
  CHECK(d.se(0, 0) > 0);
  CHECK(d.se(0, 0) < 0.05);
}

TEST_CASE("empirical D on even sites approaches 4") {
  Environment e(ProcessSpec::even_sites_1d(), 1, true);
  const auto d = stats::estimate_D_empirical(e, 500, 4000, 78, 2);
  CHECK(std::abs(d.d(0, 0) - 4.0) < 4 * d.se(0, 0) + 0.05);
}

TEST_CASE("quenched stability: two environments agree within combined errors") {
  const auto spec = ProcessSpec::bernoulli(2, 0.5);
  Environment e1(spec, 101, true);
  Environment e2(spec, 202, true);
  const auto d1 = stats::estimate_D_empirical(e1, 2000, 4000, 11, 2);
  const auto d2 = stats::estimate_D_empirical(e2, 2000, 4000, 12, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double se = std::sqrt(d1.se(i, j) * d1.se(i, j) + d2.se(i, j) * d2.se(i, j));
      CHECK(std::abs(d1.d(i, j) - d2.d(i, j)) < 4 * se);
    }
}

TEST_CASE("isotropy: off-diagonals straddle zero, diagonals agree") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 313, true);
  const auto d = stats::estimate_D_empirical(e, 2000, 6000, 5, 2);
  CHECK(std::abs(d.d(0, 1)) < 3 * d.se(0, 1));
  const double se_diag = std::sqrt(d.se(0, 0) * d.se(0, 0) + d.se(1, 1) * d.se(1, 1));
  CHECK(std::abs(d.d(0, 0) - d.d(1, 1)) < 4 * se_diag);
}

TEST_CASE("jackknife variance scales like 1/N") {
  Environment e(ProcessSpec::full_lattice(2), 1, false);
  const auto half = stats::estimate_D_empirical(e, 200, 4000, 31, 2);
  const auto full = stats::estimate_D_empirical(e, 200, 8000, 31, 2);
  const double ratio = (full.se(0, 0) * full.se(0, 0)) / (half.se(0, 0) * half.se(0, 0));
  CHECK(ratio > 0.35);
  CHECK(ratio < 0.65);
}

TEST_CASE("gaussianity check on the full lattice") {
  Environment e(ProcessSpec::full_lattice(2), 1, false);
  const std::array<double, kMaxDim> a{1, 0, 0, 0};
  const auto ks = stats::gaussianity_check(e, a, 2000, 3000, 99, 2);
  CHECK(ks.p_value > 0.01);
  CHECK(ks.variance_used == doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("gaussianity check flags a two-point law") {
  Environment e(ProcessSpec::even_sites_1d(), 1, true);
  const std::array<double, kMaxDim> a{1, 0, 0, 0};
  const auto ks = stats::gaussianity_check(e, a, 1, 3000, 7, 2);
  CHECK(ks.p_value < 0.01);
  CHECK(ks.statistic > 0.2);
}

TEST_CASE("return probability profile: exact torus values") {
  Environment full(ProcessSpec::full_lattice(2), 1, false);
  const auto penv = corrector::PeriodicEnvironment::sample(full, 64);
  const auto series = stats::return_prob_profile(penv, Site{}, {10, 50, 100, 200});
  // t * P(Y_t = 0) bounded and slowly varying on the grid.
  for (const auto& pt : series) {
    CHECK(pt.value > 0.05);
    CHECK(pt.value < 1.0);
  }
  const double ratio = series[3].value / series[1].value;
  CHECK(ratio > 0.8);
  CHECK(ratio < 1.25);
}

TEST_CASE("return probability profile: P(Y_0 = x) = 1 and censoring") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 404, true);
  const auto series = stats::return_prob_profile(e, Site{}, {0.0, 2.0}, 400, 10, 2);
  CHECK(series[0].hits == 400);
  CHECK(series[0].value == doctest::Approx(1.0));

  // A horizon far beyond the walk's return window: zero hits get censored.
  const auto far = stats::return_prob_profile(e, Site{}, {4000.0}, 50, 11, 2);
  if (far[0].hits == 0) {
    CHECK(far[0].censored);
    CHECK(far[0].value > 0);
  }
}

TEST_CASE("MC return profile agrees with the exact torus computation") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 2024, true);
  const auto penv = corrector::PeriodicEnvironment::sample(e, 16);
  Environment unrolled(penv.as_process_spec(), 5, false);
  const Site x = penv.anchor_site();
  const std::vector<double> grid = {5.0, 20.0};
  const auto exact = stats::return_prob_profile(penv, x, grid);
  const auto mc = stats::return_prob_profile(unrolled, x, grid, 40000, 6, 2);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(std::abs(mc[i].value - exact[i].value) < 4 * mc[i].std_err + 1e-9);
}

TEST_CASE("displacement profile: vanishing small-t limit and boundedness") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 11, true);
  const auto profile =
      stats::displacement_profile(e, Site{}, {0.25, 1.0, 4.0, 16.0, 64.0}, 800, 3, 2);
  REQUIRE(profile.euclidean.size() == 5);
  // E|Y_t - x| itself tends to zero as t -> 0.
  CHECK(profile.euclidean[0].value * std::sqrt(0.25) < 1.0);
  for (const auto& pt : profile.euclidean) {
    CHECK(pt.value >= 0);
    CHECK(pt.value < 10.0);
  }
}

TEST_CASE("displacement profile: graph-distance companion stays bounded") {
  Environment e(ProcessSpec::bernoulli(2, 0.5), 12, true);
  const auto profile = stats::displacement_profile(e, Site{}, {4.0, 16.0}, 100, 4, 2, 50);
  REQUIRE(profile.graph_distance.size() == 2);
  for (const auto& pt : profile.graph_distance) {
    CHECK(pt.samples > 0);
    CHECK(pt.value < 10.0);
  }
}

TEST_CASE("distance comparison: full lattice has zero short-distance frequency") {
  const auto report = stats::distance_comparison(ProcessSpec::full_lattice(2), 0.5,
                                                 {Site{2, 0}, Site{0, 3}}, 500, 1, 2);
  for (const auto& row : report.sites) {
    CHECK(row.hits == 0);
    CHECK(row.censored);
  }
  CHECK_FALSE(report.fit_valid);
}

TEST_CASE("distance comparison: bernoulli decay has a significantly negative slope") {
  // With rho = 0.1 the event at |x| = k <= 19 is a single geometric jump:
  // frequency p/2^k exactly, so the log-slope is -log 2.
  const std::vector<Site> sites = {Site{10, 0}, Site{12, 0}, Site{14, 0}};
  const auto report = stats::distance_comparison(ProcessSpec::bernoulli(2, 0.5), 0.1, sites,
                                                 400000, 51, 2);
  REQUIRE(report.fit_valid);
  CHECK(report.slope_significant);
  CHECK(report.fit.slope < 0);
  CHECK(report.c6_hat == doctest::Approx(std::log(2.0)).epsilon(0.35));
  CHECK(report.c7_hat == doctest::Approx(2.0 * 4.0 / report.c6_hat));

  // Direct frequency oracle at |x| = 10: P(omega(0)=1) * P(gamma = 10).
  const auto& row10 = report.sites[0];
  const double expect = 0.5 * std::pow(0.5, 10.0);
  const double se = std::sqrt(expect / 400000.0);
  CHECK(std::abs(row10.frequency - expect) < 5 * se);
}

TEST_CASE("gamma moment check") {
  // bernoulli(1/2), d=2, eps=1: E gamma^3 = (6 - 6p + p^2)/p^3 = 26.
  const auto b = stats::gamma_moment_check(ProcessSpec::bernoulli(2, 0.5), 0, 1.0, 200000, 5, 2);
  CHECK(b.has_analytic);
  CHECK(b.analytic == doctest::Approx(26.0).epsilon(1e-6));
  CHECK(std::abs(b.empirical - b.analytic) < 3 * b.std_err);

  const auto full = stats::gamma_moment_check(ProcessSpec::bernoulli(2, 1.0), 0, 1.0, 100, 6, 1);
  CHECK(full.empirical == doctest::Approx(1.0));

  const auto even = stats::gamma_moment_check(ProcessSpec::even_sites_1d(), 0, 1.0, 100, 7, 1);
  CHECK(even.empirical == doctest::Approx(4.0));  // gamma = 2, exponent d+eps = 2
}
