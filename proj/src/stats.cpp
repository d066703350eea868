#include "rwdpp/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rwdpp/graph.hpp"
#include "rwdpp/oracle.hpp"
#include "rwdpp/parallel.hpp"
#include "rwdpp/walk.hpp"

namespace rwdpp::stats {

std::vector<std::array<double, kMaxDim>> rescaled_endpoints(const env::Environment& e,
                                                            std::int64_t n_steps,
                                                            std::int64_t n_walks,
                                                            std::uint64_t seed, int jobs) {
  if (n_steps < 1 || n_walks < 1) throw Error("rescaled_endpoints: bad ensemble size");
  std::vector<std::array<double, kMaxDim>> out(static_cast<std::size_t>(n_walks));
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_steps));
  const int dim = e.dim();
  parallel_chunks(n_walks, jobs, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    for (std::int64_t w = begin; w < end; ++w) {
      const std::uint64_t walk_seed =
          rng::derive(seed, rng::Role::kWalkSteps, static_cast<std::uint64_t>(w));
      rng::Stream steps(rng::derive(walk_seed, rng::Role::kWalkSteps));
      Site x;
      for (std::int64_t k = 0; k < n_steps; ++k) {
        const int dir = steps.uniform_index(2 * dim);
        x[axis_of(dir)] += sign_of(dir) * e.gamma(x, dir);
      }
      auto& v = out[static_cast<std::size_t>(w)];
      for (int i = 0; i < dim; ++i)
        v[static_cast<std::size_t>(i)] = static_cast<double>(x[i]) * inv_sqrt_n;
    }
  });
  return out;
}

std::vector<std::array<double, kMaxDim>> rescaled_endpoints(
    const corrector::PeriodicEnvironment& penv, std::int64_t n_steps, std::int64_t n_walks,
    std::uint64_t seed, int jobs) {
  if (n_steps < 1 || n_walks < 1) throw Error("rescaled_endpoints: bad ensemble size");
  std::vector<std::array<double, kMaxDim>> out(static_cast<std::size_t>(n_walks));
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_steps));
  const int dim = penv.dim();
  const std::int32_t start = penv.anchor_rank();
  parallel_chunks(n_walks, jobs, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    for (std::int64_t w = begin; w < end; ++w) {
      const std::uint64_t walk_seed =
          rng::derive(seed, rng::Role::kWalkSteps, static_cast<std::uint64_t>(w));
      rng::Stream steps(rng::derive(walk_seed, rng::Role::kWalkSteps));
      corrector::TorusWalker walker(penv, start);
      for (std::int64_t k = 0; k < n_steps; ++k) walker.step(steps);
      auto& v = out[static_cast<std::size_t>(w)];
      for (int i = 0; i < dim; ++i)
        v[static_cast<std::size_t>(i)] =
            static_cast<double>(walker.displacement()[i]) * inv_sqrt_n;
    }
  });
  return out;
}

DiffusionEstimate estimate_D_empirical(const env::Environment& e, std::int64_t n_steps,
                                       std::int64_t n_walks, std::uint64_t seed, int jobs) {
  if (!e.occupancy(Site{})) throw Error("estimate_D_empirical: origin not occupied");
  return covariance_with_jackknife(rescaled_endpoints(e, n_steps, n_walks, seed, jobs),
                                   e.dim());
}

DiffusionEstimate estimate_D_empirical(const corrector::PeriodicEnvironment& penv,
                                       std::int64_t n_steps, std::int64_t n_walks,
                                       std::uint64_t seed, int jobs) {
  return covariance_with_jackknife(rescaled_endpoints(penv, n_steps, n_walks, seed, jobs),
                                   penv.dim());
}

KsResult gaussianity_check(const env::Environment& e, const std::array<double, kMaxDim>& a,
                           std::int64_t n_steps, std::int64_t n_walks, std::uint64_t seed,
                           int jobs) {
  double a_norm = 0;
  for (int i = 0; i < e.dim(); ++i)
    a_norm += a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(i)];
  if (a_norm == 0) throw Error("gaussianity_check: direction vector must be nonzero");

  // Variance target from a disjoint stream, then the sample proper.
  const std::uint64_t var_seed = rng::derive(seed, rng::Role::kExperiment, 1);
  const std::uint64_t sample_seed = rng::derive(seed, rng::Role::kExperiment, 2);
  const DiffusionEstimate d_hat = estimate_D_empirical(e, n_steps, n_walks, var_seed, jobs);
  double variance = 0;
  for (int i = 0; i < e.dim(); ++i)
    for (int j = 0; j < e.dim(); ++j)
      variance += a[static_cast<std::size_t>(i)] * d_hat.d(i, j) * a[static_cast<std::size_t>(j)];
  if (!(variance > 0)) throw Error("gaussianity_check: degenerate variance estimate");

  const auto endpoints = rescaled_endpoints(e, n_steps, n_walks, sample_seed, jobs);
  std::vector<double> projected(endpoints.size());
  for (std::size_t w = 0; w < endpoints.size(); ++w) {
    double s = 0;
    for (int i = 0; i < e.dim(); ++i)
      s += a[static_cast<std::size_t>(i)] * endpoints[w][static_cast<std::size_t>(i)];
    projected[w] = s;
  }
  return ks_against_normal(std::move(projected), variance);
}

std::vector<SeriesPoint> return_prob_profile(const corrector::PeriodicEnvironment& penv,
                                             const Site& x, const std::vector<double>& t_grid) {
  const std::int32_t rank = penv.rank_at(x);
  if (rank < 0) throw Error("return_prob_profile: x not occupied");
  const oracle::ExactChain chain = oracle::ExactChain::build(penv);
  const double half_d = static_cast<double>(penv.dim()) / 2.0;
  std::vector<SeriesPoint> out;
  out.reserve(t_grid.size());
  for (const double t : t_grid) {
    const auto dist = oracle::exact_ct_distribution(chain, rank, t);
    SeriesPoint pt;
    pt.t = t;
    pt.value = std::pow(t, half_d) * dist[static_cast<std::size_t>(rank)];
    pt.samples = 0;
    out.push_back(pt);
  }
  return out;
}

std::vector<SeriesPoint> return_prob_profile(const env::Environment& e, const Site& x,
                                             const std::vector<double>& t_grid,
                                             std::int64_t n_walks, std::uint64_t seed,
                                             int jobs) {
  if (!e.occupancy(x)) throw Error("return_prob_profile: x not occupied");
  if (n_walks < 1) throw Error("return_prob_profile: n_walks must be >= 1");
  double horizon = 0;
  for (double t : t_grid) horizon = std::max(horizon, t);

  std::vector<std::vector<std::int64_t>> chunk_hits(
      static_cast<std::size_t>(chunk_count(n_walks)),
      std::vector<std::int64_t>(t_grid.size(), 0));
  parallel_chunks(n_walks, jobs, [&](std::int64_t chunk, std::int64_t begin, std::int64_t end) {
    auto& hits = chunk_hits[static_cast<std::size_t>(chunk)];
    for (std::int64_t w = begin; w < end; ++w) {
      const std::uint64_t walk_seed =
          rng::derive(seed, rng::Role::kWalkSteps, static_cast<std::uint64_t>(w));
      const walk::Trajectory traj =
          horizon > 0 ? walk::simulate_ct(e, x, horizon, walk_seed)
                      : walk::simulate(e, x, 0, walk_seed);
      for (std::size_t gi = 0; gi < t_grid.size(); ++gi)
        if ((t_grid[gi] == 0 ? traj.positions.front() : traj.position_at(t_grid[gi])) == x)
          ++hits[gi];
    }
  });

  const double half_d = static_cast<double>(e.dim()) / 2.0;
  std::vector<SeriesPoint> out;
  for (std::size_t gi = 0; gi < t_grid.size(); ++gi) {
    std::int64_t hits = 0;
    for (const auto& ch : chunk_hits) hits += ch[gi];
    SeriesPoint pt;
    pt.t = t_grid[gi];
    pt.samples = n_walks;
    pt.hits = hits;
    const double scale = std::pow(pt.t, half_d);
    if (hits == 0) {
      pt.censored = true;
      pt.value = scale * clopper_pearson_upper_zero(n_walks);
    } else {
      const double freq = static_cast<double>(hits) / static_cast<double>(n_walks);
      pt.value = scale * freq;
      pt.std_err = scale * std::sqrt(freq * (1 - freq) / static_cast<double>(n_walks));
    }
    out.push_back(pt);
  }
  return out;
}

DisplacementProfile displacement_profile(const env::Environment& e, const Site& x,
                                         const std::vector<double>& t_grid,
                                         std::int64_t n_walks, std::uint64_t seed, int jobs,
                                         std::int64_t graph_walks) {
  if (!e.occupancy(x)) throw Error("displacement_profile: x not occupied");
  DisplacementProfile profile;

  for (std::size_t gi = 0; gi < t_grid.size(); ++gi) {
    const double t = t_grid[gi];
    if (!(t > 0)) throw Error("displacement_profile: grid times must be positive");
    const std::uint64_t grid_seed =
        rng::derive(seed, rng::Role::kExperiment, static_cast<std::uint64_t>(gi));
    std::vector<double> values(static_cast<std::size_t>(n_walks), 0.0);
    parallel_chunks(n_walks, jobs, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
      for (std::int64_t w = begin; w < end; ++w) {
        const std::uint64_t walk_seed =
            rng::derive(grid_seed, rng::Role::kWalkSteps, static_cast<std::uint64_t>(w));
        const walk::Trajectory traj = walk::simulate_ct(e, x, t, walk_seed);
        values[static_cast<std::size_t>(w)] = l2_norm(traj.positions.back() - x);
      }
    });
    const MeanEstimate m = mean_with_se(values);
    SeriesPoint pt;
    pt.t = t;
    pt.samples = n_walks;
    pt.value = m.mean / std::sqrt(t);
    pt.std_err = m.std_err / std::sqrt(t);
    profile.euclidean.push_back(pt);

    if (graph_walks > 0) {
      graph::NeighborMap nm(e);
      std::vector<double> dists(static_cast<std::size_t>(graph_walks), 0.0);
      parallel_chunks(graph_walks, jobs, [&](std::int64_t, std::int64_t begin,
                                             std::int64_t end) {
        for (std::int64_t w = begin; w < end; ++w) {
          const std::uint64_t walk_seed =
              rng::derive(grid_seed, rng::Role::kWalkClock, static_cast<std::uint64_t>(w));
          const walk::Trajectory traj = walk::simulate_ct(e, x, t, walk_seed);
          const Site y = traj.positions.back();
          const auto res = graph_distance(nm, x, y, std::nullopt,
                                          /*hop_cap=*/2 * l1_norm(y - x) + 128);
          dists[static_cast<std::size_t>(w)] =
              res.reached() ? static_cast<double>(res.hops)
                            : std::numeric_limits<double>::quiet_NaN();
        }
      });
      // Hop-capped searches that give up are dropped from the mean; the
      // sample count records what survived.
      std::vector<double> reached;
      reached.reserve(dists.size());
      for (double d : dists)
        if (!std::isnan(d)) reached.push_back(d);
      const MeanEstimate m2 = mean_with_se(reached);
      SeriesPoint pt2;
      pt2.t = t;
      pt2.samples = m2.samples;
      pt2.value = m2.mean / std::sqrt(t);
      pt2.std_err = m2.std_err / std::sqrt(t);
      profile.graph_distance.push_back(pt2);
    }
  }
  return profile;
}

DecayReport distance_comparison(const env::ProcessSpec& spec, double rho,
                                const std::vector<Site>& sites, std::int64_t samples,
                                std::uint64_t seed, int jobs) {
  if (!(rho > 0)) throw Error("distance_comparison: rho must be positive");
  DecayReport report;

  for (std::size_t si = 0; si < sites.size(); ++si) {
    const Site& x = sites[si];
    const double dist = l2_norm(x);
    const auto cap = static_cast<std::int64_t>(std::floor(rho * dist));
    const std::uint64_t site_seed =
        rng::derive(seed, rng::Role::kExperiment, static_cast<std::uint64_t>(si));

    std::vector<std::int64_t> chunk_hits(static_cast<std::size_t>(chunk_count(samples)), 0);
    parallel_chunks(samples, jobs, [&](std::int64_t chunk, std::int64_t begin,
                                       std::int64_t end) {
      std::int64_t hits = 0;
      for (std::int64_t s = begin; s < end; ++s) {
        const std::uint64_t env_seed =
            rng::derive(site_seed, rng::Role::kEnvReplicate, static_cast<std::uint64_t>(s));
        env::Environment e(spec, env_seed, /*condition_on_origin=*/false);
        if (!e.occupancy(Site{}) || !e.occupancy(x)) continue;
        if (cap < 0) continue;  // rho |x| < 0 is impossible
        if (x == Site{}) {
          ++hits;
          continue;
        }
        if (cap == 0) continue;  // d_omega >= 1 for distinct sites
        graph::NeighborMap nm(e);
        if (graph_distance(nm, Site{}, x, std::nullopt, cap).reached()) ++hits;
      }
      chunk_hits[static_cast<std::size_t>(chunk)] = hits;
    });
    std::int64_t hits = 0;
    for (auto h : chunk_hits) hits += h;

    DecaySite row;
    row.x = x;
    row.distance = dist;
    row.samples = samples;
    row.hits = hits;
    if (hits == 0) {
      row.censored = true;
      row.frequency = clopper_pearson_upper_zero(samples);
    } else {
      row.frequency = static_cast<double>(hits) / static_cast<double>(samples);
    }
    report.sites.push_back(row);
  }

  std::vector<double> xs, ys;
  for (const auto& row : report.sites)
    if (!row.censored) {
      xs.push_back(row.distance);
      ys.push_back(std::log(row.frequency));
    }
  if (xs.size() >= 3) {
    report.fit = fit_line(xs, ys);
    report.fit_valid = true;
    report.c6_hat = -report.fit.slope;
    report.c7_hat = report.c6_hat > 0
                        ? 2.0 * static_cast<double>(spec.dim + 2) / report.c6_hat
                        : std::numeric_limits<double>::infinity();
    report.slope_significant = report.fit.slope < 0 && std::abs(report.fit.t_stat) > 3.0;
  }
  return report;
}

namespace {

// E[gamma^s] for gamma ~ geometric(p) on {1,2,...}, by direct summation to
// machine-precision tail.
double geometric_moment(double p, double s) {
  double sum = 0;
  double weight = p;  // P(gamma = 1)
  for (int k = 1; k < 100000; ++k) {
    const double term = std::pow(static_cast<double>(k), s) * weight;
    sum += term;
    if (term < 1e-16 * sum && k > 10) break;
    weight *= (1.0 - p);
  }
  return sum;
}

}  // namespace

MomentReport gamma_moment_check(const env::ProcessSpec& spec, int dir, double eps,
                                std::int64_t samples, std::uint64_t seed, int jobs) {
  if (!(eps > 0)) throw Error("gamma_moment_check: eps must be positive");
  const double exponent = static_cast<double>(spec.dim) + eps;

  std::vector<double> values(static_cast<std::size_t>(samples), 0.0);
  parallel_chunks(samples, jobs, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    for (std::int64_t s = begin; s < end; ++s) {
      const std::uint64_t env_seed =
          rng::derive(seed, rng::Role::kEnvReplicate, static_cast<std::uint64_t>(s));
      env::Environment e(spec, env_seed, /*condition_on_origin=*/false);
      values[static_cast<std::size_t>(s)] =
          std::pow(static_cast<double>(e.gamma(Site{}, dir)), exponent);
    }
  });
  const MeanEstimate m = mean_with_se(values);

  MomentReport report;
  report.exponent = exponent;
  report.empirical = m.mean;
  report.std_err = m.std_err;
  report.samples = samples;
  if (spec.kind == env::ProcessKind::kBernoulli) {
    report.analytic = geometric_moment(spec.p, exponent);
    report.has_analytic = true;
  } else {
    report.analytic = std::numeric_limits<double>::quiet_NaN();
  }
  return report;
}

}  // namespace rwdpp::stats
