#ifndef RWDPP_STATS_HPP
#define RWDPP_STATS_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "rwdpp/corrector.hpp"
#include "rwdpp/environment.hpp"
#include "rwdpp/estimates.hpp"
#include "rwdpp/lattice.hpp"
#include "rwdpp/periodic_env.hpp"

namespace rwdpp::stats {

// Sample covariance of X_n / sqrt(n) over independent quenched walks from
// the origin, with delete-1 jackknife standard errors.
DiffusionEstimate estimate_D_empirical(const env::Environment& e, std::int64_t n_steps,
                                       std::int64_t n_walks, std::uint64_t seed, int jobs = 1);

// Same estimator on a torus via the precomputed jump table, starting from
// the anchor site. Identical in law to the lazy version on
// penv.as_process_spec().
DiffusionEstimate estimate_D_empirical(const corrector::PeriodicEnvironment& penv,
                                       std::int64_t n_steps, std::int64_t n_walks,
                                       std::uint64_t seed, int jobs = 1);

// Kolmogorov-Smirnov check of a . X_n / sqrt(n) against N(0, a^T D a), with
// D estimated on a disjoint seed stream.
KsResult gaussianity_check(const env::Environment& e, const std::array<double, kMaxDim>& a,
                           std::int64_t n_steps, std::int64_t n_walks, std::uint64_t seed,
                           int jobs = 1);

// t^{d/2} P(Y_t = x) series. Exact Poissonized values on a torus.
std::vector<SeriesPoint> return_prob_profile(const corrector::PeriodicEnvironment& penv,
                                             const Site& x, const std::vector<double>& t_grid);

// Monte Carlo version on a lazy environment; zero-frequency points are
// censored with the Clopper-Pearson upper bound.
std::vector<SeriesPoint> return_prob_profile(const env::Environment& e, const Site& x,
                                             const std::vector<double>& t_grid,
                                             std::int64_t n_walks, std::uint64_t seed,
                                             int jobs = 1);

struct DisplacementProfile {
  std::vector<SeriesPoint> euclidean;       // E|Y_t - x| / sqrt(t)
  std::vector<SeriesPoint> graph_distance;  // E d_omega(x, Y_t) / sqrt(t); optional
};

// E|Y_t - x| / sqrt(t) over the grid; each grid point uses an independent
// walk ensemble. graph_walks > 0 adds the graph-distance companion series
// on a reduced ensemble.
DisplacementProfile displacement_profile(const env::Environment& e, const Site& x,
                                         const std::vector<double>& t_grid,
                                         std::int64_t n_walks, std::uint64_t seed,
                                         int jobs = 1, std::int64_t graph_walks = 0);

struct DecaySite {
  Site x;
  double distance = 0;
  std::int64_t samples = 0;
  std::int64_t hits = 0;
  double frequency = 0;    // censored: Clopper-Pearson upper bound
  bool censored = false;
};

struct DecayReport {
  std::vector<DecaySite> sites;
  LineFit fit;             // log-frequency vs |x| over uncensored sites
  bool fit_valid = false;
  double c6_hat = 0;       // -slope
  double c7_hat = 0;       // 2(d+2)/c6_hat
  bool slope_significant = false;  // slope < 0 with |t| > 3
};

// Empirical frequency of {0, x occupied and d_omega(0, x) <= rho |x|} over
// fresh unconditioned environments, per site, with an exponential decay fit.
DecayReport distance_comparison(const env::ProcessSpec& spec, double rho,
                                const std::vector<Site>& sites, std::int64_t samples,
                                std::uint64_t seed, int jobs = 1);

struct MomentReport {
  double exponent = 0;
  double empirical = 0;
  double std_err = 0;
  double analytic = 0;     // NaN when no closed form applies
  bool has_analytic = false;
  std::int64_t samples = 0;
};

// Empirical E[gamma_e^{d+eps}] under Q, compared with the geometric moment
// for bernoulli laws.
MomentReport gamma_moment_check(const env::ProcessSpec& spec, int dir, double eps,
                                std::int64_t samples, std::uint64_t seed, int jobs = 1);

// Final positions X_n / sqrt(n) of independent walks; shared by the
// estimators above and exposed for experiment-level reuse.
std::vector<std::array<double, kMaxDim>> rescaled_endpoints(const env::Environment& e,
                                                            std::int64_t n_steps,
                                                            std::int64_t n_walks,
                                                            std::uint64_t seed, int jobs);
std::vector<std::array<double, kMaxDim>> rescaled_endpoints(
    const corrector::PeriodicEnvironment& penv, std::int64_t n_steps, std::int64_t n_walks,
    std::uint64_t seed, int jobs);

}  // namespace rwdpp::stats

#endif  // RWDPP_STATS_HPP
