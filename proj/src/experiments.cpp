#include "rwdpp/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include "rwdpp/corrector.hpp"
#include "rwdpp/environment.hpp"
#include "rwdpp/estimates.hpp"
#include "rwdpp/graph.hpp"
#include "rwdpp/oracle.hpp"
#include "rwdpp/parallel.hpp"
#include "rwdpp/periodic_env.hpp"
#include "rwdpp/report.hpp"
#include "rwdpp/rng.hpp"
#include "rwdpp/stats.hpp"
#include "rwdpp/walk.hpp"

namespace rwdpp::experiments {

namespace {

namespace fs = std::filesystem;
using config::Experiment;
using config::ExperimentConfig;
using report::Check;
using report::format_double;
using report::format_int;

struct Context {
  const ExperimentConfig& cfg;
  env::ProcessSpec spec;
  int jobs;
  fs::path out;
  report::Summary& summary;
  std::vector<fs::path>& reports;
  std::ostream& log;
  std::vector<std::pair<std::string, double>>& timings;
};

std::uint64_t sub_seed(const Context& ctx, std::uint64_t slot) {
  return rng::derive(ctx.cfg.seed, rng::Role::kExperiment, slot);
}

void add_check(Context& ctx, const std::string& name, const std::string& criterion,
               double measured, bool pass) {
  ctx.summary.add_check(Check{name, criterion, measured, pass});
  ctx.log << (pass ? "PASS " : "FAIL ") << name << " (" << criterion
          << "; measured = " << format_double(measured) << ")\n";
}

// Samples a line-valid torus; deterministic bounded retry on the rare
// windows with an empty axis line.
corrector::PeriodicEnvironment sample_torus(const env::ProcessSpec& spec, std::uint64_t seed,
                                            std::int64_t side) {
  if (spec.deterministic()) {
    for (int i = 0; i < spec.dim; ++i)
      if (side % spec.periods[static_cast<std::size_t>(i)] != 0)
        throw Error("torus side must be a multiple of the pattern period");
    env::Environment e(spec, seed, false);
    return corrector::PeriodicEnvironment::sample(e, side);
  }
  std::string last;
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    try {
      env::Environment e(spec, rng::derive(seed, rng::Role::kTorusSample, attempt), false);
      return corrector::PeriodicEnvironment::sample(e, side);
    } catch (const Error& err) {
      last = err.what();
    }
  }
  throw Error("no line-valid torus of side " + std::to_string(side) + " in 100 draws: " + last);
}

std::string site_string(const Site& x, int dim) {
  std::string s;
  for (int i = 0; i < dim; ++i) {
    if (i) s += ";";
    s += format_int(x[i]);
  }
  return s;
}

// ---------------------------------------------------------------- env-check

void run_env_check(Context& ctx) {
  const auto& spec = ctx.spec;
  const int d = spec.dim;
  report::CsvWriter csv(ctx.out / "env_check.csv", {"metric", "value"});

  // Purity: hashing the occupancy window twice gives identical digests.
  const std::int64_t radius = d == 1 ? 512 : d == 2 ? 64 : 8;
  env::Environment probe(spec, sub_seed(ctx, 1), !spec.deterministic() || spec.pattern_bit(Site{}));
  std::uint64_t digests[2] = {0xCBF29CE484222325ull, 0xCBF29CE484222325ull};
  for (int pass = 0; pass < 2; ++pass) {
    const Box box = Box::cube(radius, d);
    Site x = box.lo;
    const std::int64_t volume = box.volume();
    for (std::int64_t i = 0; i < volume; ++i) {
      digests[pass] ^= probe.occupancy(x) ? 1 : 0;
      digests[pass] *= 0x100000001B3ull;
      int a = 0;
      while (a < box.dim && x[a] == box.hi[a]) {
        x[a] = box.lo[a];
        ++a;
      }
      if (a < box.dim) ++x[a];
    }
  }
  add_check(ctx, "env_purity", "digest(pass1) == digest(pass2)",
            digests[0] == digests[1] ? 1 : 0, digests[0] == digests[1]);
  csv.row({"purity_digest", format_int(static_cast<std::int64_t>(digests[0]))});

  // Conditional correctness.
  if (!spec.deterministic() || spec.pattern_bit(Site{})) {
    bool all_occupied = true;
    for (std::uint64_t s = 0; s < 200; ++s) {
      env::Environment e(spec, rng::derive(sub_seed(ctx, 2), rng::Role::kEnvReplicate, s), true);
      all_occupied = all_occupied && e.occupancy(Site{});
    }
    add_check(ctx, "env_conditioning", "occupancy(0) = 1 on 200 conditioned draws",
              all_occupied ? 1 : 0, all_occupied);
  }

  if (spec.degenerate_a1()) {
    ctx.summary.set("a1_flag", "degenerate (marginal = 1; kept as a test law)");
  } else if (!spec.deterministic()) {
    // (A1): empirical marginal strictly inside (0,1).
    const std::int64_t n = std::min<std::int64_t>(ctx.cfg.samples, 100000);
    std::vector<std::int64_t> hits(static_cast<std::size_t>(chunk_count(n)), 0);
    parallel_chunks(n, ctx.jobs, [&](std::int64_t c, std::int64_t b, std::int64_t e2) {
      std::int64_t h = 0;
      for (std::int64_t s = b; s < e2; ++s) {
        env::Environment e(spec, rng::derive(sub_seed(ctx, 3), rng::Role::kEnvReplicate,
                                             static_cast<std::uint64_t>(s)),
                           false);
        if (e.occupancy(Site{})) ++h;
      }
      hits[static_cast<std::size_t>(c)] = h;
    });
    std::int64_t total = 0;
    for (auto h : hits) total += h;
    const double freq = static_cast<double>(total) / static_cast<double>(n);
    const double sigma =
        std::sqrt(spec.marginal() * (1 - spec.marginal()) / static_cast<double>(n));
    csv.row({"marginal", format_double(freq)});
    add_check(ctx, "env_a1", "0 < marginal < 1 and within 4 sigma of the law", freq,
              total > 0 && total < n && std::abs(freq - spec.marginal()) < 4 * sigma);

    // Stationarity: single-pattern frequency at the origin vs a shift.
    const std::int64_t ns = std::min<std::int64_t>(ctx.cfg.samples, 100000);
    Site shift;
    shift[0] = 3;
    if (d > 1) shift[1] = -2;
    std::int64_t at0 = 0, aty = 0;
    for (std::int64_t s = 0; s < ns; ++s) {
      env::Environment e(spec, rng::derive(sub_seed(ctx, 4), rng::Role::kEnvReplicate,
                                           static_cast<std::uint64_t>(s)),
                         false);
      Site e1;
      e1[0] = 1;
      if (e.occupancy(Site{}) && !e.occupancy(e1)) ++at0;
      if (e.occupancy(shift) && !e.occupancy(shift + e1)) ++aty;
    }
    const double f0 = static_cast<double>(at0) / static_cast<double>(ns);
    const double fy = static_cast<double>(aty) / static_cast<double>(ns);
    const double s_se = std::sqrt(2 * 0.25 / static_cast<double>(ns));
    csv.row({"pattern_freq_origin", format_double(f0)});
    csv.row({"pattern_freq_shift", format_double(fy)});
    add_check(ctx, "env_stationarity", "pattern frequency shift-invariant within 4 sigma",
              std::abs(f0 - fy), std::abs(f0 - fy) < 4 * s_se);
  }

  // Finite dependence for block factors.
  if (spec.kind == env::ProcessKind::kBlockFactor) {
    const std::int64_t ns = std::min<std::int64_t>(ctx.cfg.samples, 100000);
    Site far;
    far[0] = spec.dependence_range() + 1;
    std::int64_t c0 = 0, cx = 0, cboth = 0;
    for (std::int64_t s = 0; s < ns; ++s) {
      env::Environment e(spec, rng::derive(sub_seed(ctx, 5), rng::Role::kEnvReplicate,
                                           static_cast<std::uint64_t>(s)),
                         false);
      const bool a = e.occupancy(Site{});
      const bool b = e.occupancy(far);
      c0 += a;
      cx += b;
      cboth += a && b;
    }
    const double fa = static_cast<double>(c0) / ns;
    const double fb = static_cast<double>(cx) / ns;
    const double cov = static_cast<double>(cboth) / ns - fa * fb;
    const double sigma = std::sqrt(fa * (1 - fa) * fb * (1 - fb) / ns);
    csv.row({"dependence_cov_beyond_range", format_double(cov)});
    add_check(ctx, "env_finite_dependence",
              "cov(omega(0), omega(x)) within 4 sigma of 0 beyond 2m+1", cov,
              std::abs(cov) < 4 * sigma);
  }

  // Moment of gamma under Q, with the geometric oracle for bernoulli.
  if (!spec.deterministic()) {
    const auto moment = stats::gamma_moment_check(spec, 0, 1.0,
                                                  std::min<std::int64_t>(ctx.cfg.samples, 200000),
                                                  sub_seed(ctx, 6), ctx.jobs);
    csv.row({"gamma_moment_empirical", format_double(moment.empirical)});
    if (moment.has_analytic) {
      csv.row({"gamma_moment_analytic", format_double(moment.analytic)});
      add_check(ctx, "env_gamma_moment", "E[gamma^(d+1)] within 3 sigma of the geometric moment",
                moment.empirical,
                std::abs(moment.empirical - moment.analytic) < 3 * moment.std_err);
    }
  }

  csv.close();
  ctx.reports.push_back(csv.path());
}

// --------------------------------------------------------------------- walk

void run_walk(Context& ctx) {
  env::Environment e(ctx.spec, sub_seed(ctx, 10), true);
  const int d = ctx.spec.dim;

  const auto mn = graph::compute_M_N(e, ctx.cfg.search_cap);
  ctx.summary.set_int("walk.M", mn.m);
  ctx.summary.set_int("walk.N", mn.n);
  ctx.summary.set_int("walk.search_cap", mn.search_cap);
  add_check(ctx, "walk_m_valid", "M(omega) certified below the search cap",
            static_cast<double>(mn.m), mn.m_valid);

  // Trajectory dump: three continuous-time walks.
  {
    std::vector<std::string> header = {"walk_id", "k", "t_k"};
    for (int i = 0; i < d; ++i) header.push_back("x_" + std::to_string(i + 1));
    report::CsvWriter csv(ctx.out / "trajectories.csv", header);
    for (std::int64_t w = 0; w < 3; ++w) {
      const auto traj = walk::simulate_ct(
          e, Site{}, std::min(ctx.cfg.horizon, 50.0),
          rng::derive(sub_seed(ctx, 11), rng::Role::kWalkSteps, static_cast<std::uint64_t>(w)));
      for (std::size_t k = 0; k < traj.positions.size(); ++k) {
        std::vector<std::string> row = {format_int(w), format_int(static_cast<std::int64_t>(k)),
                                        k == 0 ? "" : format_double(traj.event_times[k - 1])};
        for (int i = 0; i < d; ++i) row.push_back(format_int(traj.positions[k][i]));
        csv.row(row);
      }
    }
    csv.close();
    ctx.reports.push_back(csv.path());
  }

  // Ensemble summary with exit clocks.
  std::vector<double> radii = ctx.cfg.radii;
  if (radii.empty()) radii = {4, 8, 16};
  {
    std::vector<std::string> header = {"walk_id", "jumps"};
    for (int i = 0; i < d; ++i) header.push_back("x_" + std::to_string(i + 1));
    header.push_back("abs");
    for (double r : radii) header.push_back("tau_" + format_double(r));
    report::CsvWriter csv(ctx.out / "walk_ensemble.csv", header);
    const std::int64_t n_dump = std::min<std::int64_t>(ctx.cfg.n_walks, 500);
    for (std::int64_t w = 0; w < n_dump; ++w) {
      const auto traj = walk::simulate_ct(
          e, Site{}, ctx.cfg.horizon,
          rng::derive(sub_seed(ctx, 12), rng::Role::kWalkSteps, static_cast<std::uint64_t>(w)));
      const auto clocks = walk::exit_times(traj, radii);
      std::vector<std::string> row = {format_int(w), format_int(traj.steps())};
      for (int i = 0; i < d; ++i) row.push_back(format_int(traj.positions.back()[i]));
      row.push_back(format_double(l2_norm(traj.positions.back())));
      for (const auto& c : clocks) row.push_back(c.exited ? format_double(c.tau) : "inf");
      csv.row(row);
    }
    csv.close();
    ctx.reports.push_back(csv.path());
  }

  // Geometric growth bound from Prop-style N(omega).
  if (mn.m_valid) {
    const bool ok = walk::geometric_bound_check(e, 30, std::min<std::int64_t>(ctx.cfg.n_walks, 1000),
                                                sub_seed(ctx, 13), mn.n);
    add_check(ctx, "walk_geometric_bound", "|X_k|_inf <= 2^{k-1} N(omega) on all trajectories",
              ok ? 1 : 0, ok);

    // Big jumps: |Y_{t ^ tau_n} - Y_0|_inf > 3n never happens for n >= N.
    std::int64_t violations = 0;
    std::int64_t trials = 0;
    // Deterministic pick of start sites inside B(0, n).
    for (const std::int64_t n : {mn.n, 2 * mn.n, 4 * mn.n}) {
      std::vector<Site> starts = {Site{}};
      {
        const Box ball = Box::cube(n, d);
        Site x = ball.lo;
        const std::int64_t volume = ball.volume();
        for (std::int64_t i = 0; i < volume && starts.size() < 4; ++i) {
          if (!(x == Site{}) && e.occupancy(x)) starts.push_back(x);
          int a = 0;
          while (a < ball.dim && x[a] == ball.hi[a]) {
            x[a] = ball.lo[a];
            ++a;
          }
          if (a < ball.dim) ++x[a];
        }
      }
      for (const Site& x0 : starts)
        for (std::int64_t w = 0; w < 50; ++w) {
          const auto traj = walk::simulate_ct(
              e, x0, ctx.cfg.horizon,
              rng::derive(sub_seed(ctx, 14), rng::Role::kWalkSteps,
                          static_cast<std::uint64_t>(w * 1000 + n)));
          const auto clocks = walk::exit_times(traj, {static_cast<double>(n)});
          const std::int64_t stop = clocks[0].exited
                                        ? clocks[0].exit_index
                                        : static_cast<std::int64_t>(traj.positions.size()) - 1;
          ++trials;
          for (std::int64_t k = 0; k <= stop; ++k)
            if (linf_norm(traj.positions[static_cast<std::size_t>(k)] - traj.positions[0]) >
                3 * n) {
              ++violations;
              break;
            }
        }
    }
    ctx.summary.set_int("walk.big_jump_trials", trials);
    add_check(ctx, "walk_big_jumps", "frequency of |Y_{t^tau_n}-Y_0|_inf > 3n is exactly 0",
              static_cast<double>(violations), violations == 0);
  }
}

// ---------------------------------------------------------------- diffusion

void run_diffusion(Context& ctx) {
  const int d = ctx.spec.dim;
  report::CsvWriter csv(ctx.out / "diffusion.csv", {"env_index", "i", "j", "d_ij", "se_ij"});
  std::vector<DiffusionEstimate> estimates;
  for (std::int64_t k = 0; k < ctx.cfg.n_envs; ++k) {
    env::Environment e(ctx.spec, rng::derive(sub_seed(ctx, 20), rng::Role::kEnvReplicate,
                                             static_cast<std::uint64_t>(k)),
                       true);
    const auto est = stats::estimate_D_empirical(e, ctx.cfg.n_steps, ctx.cfg.n_walks,
                                                 rng::derive(sub_seed(ctx, 21),
                                                             rng::Role::kEnvReplicate,
                                                             static_cast<std::uint64_t>(k)),
                                                 ctx.jobs);
    estimates.push_back(est);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        csv.row({format_int(k), format_int(i + 1), format_int(j + 1),
                 format_double(est.d(i, j)), format_double(est.se(i, j))});
  }
  csv.close();
  ctx.reports.push_back(csv.path());

  // Quenched omega-independence: pairwise consistency at 3 sigma.
  if (estimates.size() > 1) {
    double worst = 0;
    bool pass = true;
    for (std::size_t a = 0; a < estimates.size(); ++a)
      for (std::size_t b = a + 1; b < estimates.size(); ++b)
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) {
            const double se = std::sqrt(estimates[a].se(i, j) * estimates[a].se(i, j) +
                                        estimates[b].se(i, j) * estimates[b].se(i, j));
            const double dev = std::abs(estimates[a].d(i, j) - estimates[b].d(i, j));
            if (se > 0) worst = std::max(worst, dev / se);
            pass = pass && dev <= 3 * se;
          }
    add_check(ctx, "diffusion_quenched_stability",
              "pairwise |D_a - D_b| <= 3 combined sigma across environments", worst, pass);
  }

  // Positive semidefiniteness within error (2x2 exact, Gershgorin above).
  {
    const auto& est = estimates.front();
    double min_eig = 0;
    if (d == 1) {
      min_eig = est.d(0, 0);
    } else if (d == 2) {
      const double tr = est.d(0, 0) + est.d(1, 1);
      const double det = est.d(0, 0) * est.d(1, 1) - est.d(0, 1) * est.d(1, 0);
      min_eig = tr / 2 - std::sqrt(std::max(0.0, tr * tr / 4 - det));
    } else {
      min_eig = est.d(0, 0);
      for (int i = 0; i < d; ++i) {
        double row = est.d(i, i);
        for (int j = 0; j < d; ++j)
          if (j != i) row -= std::abs(est.d(i, j));
        min_eig = std::min(min_eig, row);
      }
    }
    double max_se = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) max_se = std::max(max_se, est.se(i, j));
    add_check(ctx, "diffusion_psd", "smallest eigenvalue >= -3 max standard error", min_eig,
              min_eig >= -3 * max_se);
  }

  // Isotropy for reflection/rotation invariant laws.
  if (ctx.spec.kind == env::ProcessKind::kBernoulli && d >= 2) {
    const auto& est = estimates.front();
    bool pass = true;
    double worst = 0;
    for (int i = 0; i < d && pass; ++i)
      for (int j = 0; j < d; ++j) {
        if (i == j) continue;
        if (est.se(i, j) > 0) worst = std::max(worst, std::abs(est.d(i, j)) / est.se(i, j));
        pass = pass && std::abs(est.d(i, j)) <= 3 * est.se(i, j);
      }
    const double se_diag = std::sqrt(est.se(0, 0) * est.se(0, 0) + est.se(1, 1) * est.se(1, 1));
    pass = pass && std::abs(est.d(0, 0) - est.d(1, 1)) <= 4 * se_diag;
    add_check(ctx, "diffusion_isotropy",
              "off-diagonals within 3 sigma of 0; diagonals mutually consistent", worst, pass);
  }

  // Degenerate full-lattice reference: D = I/d exactly in the limit.
  if (ctx.spec.marginal() == 1.0) {
    const auto& est = estimates.front();
    bool pass = true;
    double worst = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double target = i == j ? 1.0 / d : 0.0;
        const double dev = std::abs(est.d(i, j) - target);
        worst = std::max(worst, dev);
        pass = pass && dev <= 0.02;
      }
    add_check(ctx, "diffusion_srw_reference", "|D - I/d| <= 0.02 entrywise on the full lattice",
              worst, pass);
  }
}

// -------------------------------------------------------------- gaussianity

void run_gaussianity(Context& ctx) {
  env::Environment e(ctx.spec, sub_seed(ctx, 30), true);
  std::array<double, kMaxDim> a{};
  for (std::size_t i = 0; i < ctx.cfg.direction.size() && i < kMaxDim; ++i)
    a[i] = ctx.cfg.direction[i];
  const auto ks = stats::gaussianity_check(e, a, ctx.cfg.n_steps, ctx.cfg.n_walks,
                                           sub_seed(ctx, 31), ctx.jobs);
  report::CsvWriter csv(ctx.out / "gaussianity.csv",
                        {"n", "walks", "ks_statistic", "p_value", "variance"});
  csv.row({format_int(ctx.cfg.n_steps), format_int(ctx.cfg.n_walks),
           format_double(ks.statistic), format_double(ks.p_value),
           format_double(ks.variance_used)});
  csv.close();
  ctx.reports.push_back(csv.path());
  add_check(ctx, "gaussianity_ks", "KS p-value > 0.01", ks.p_value, ks.p_value > 0.01);
}

// ---------------------------------------------------------------- corrector

void run_corrector(Context& ctx) {
  const int d = ctx.spec.dim;
  report::CsvWriter ladder_csv(ctx.out / "corrector_ladder.csv",
                               {"side", "n_occupied", "residual", "pair_sum_per_site",
                                "sublinear_fraction", "max_ratio", "theta_ratio"});
  std::vector<corrector::DiagnosticsRow> rows;
  std::optional<corrector::PeriodicEnvironment> main_store;
  std::optional<corrector::CorrectorField> main_field;

  // The detailed reports below use the rung matching torus_side, or the
  // last rung when none matches.
  std::size_t main_index = ctx.cfg.torus_ladder.size() - 1;
  for (std::size_t i = 0; i < ctx.cfg.torus_ladder.size(); ++i)
    if (ctx.cfg.torus_ladder[i] == ctx.cfg.torus_side) main_index = i;

  for (std::size_t i = 0; i < ctx.cfg.torus_ladder.size(); ++i) {
    const std::int64_t side = ctx.cfg.torus_ladder[i];
    auto penv = sample_torus(ctx.spec, rng::derive(sub_seed(ctx, 40), rng::Role::kTorusSample,
                                                   static_cast<std::uint64_t>(side)),
                             side);
    const auto field = corrector::solve_corrector(penv, 1e-10);
    const auto row = corrector::corrector_diagnostics(penv, field, ctx.cfg.epsilon,
                                                      ctx.cfg.theta);
    rows.push_back(row);
    ladder_csv.row({format_int(row.side), format_int(row.n_occupied),
                    format_double(row.residual), format_double(row.pair_sum_per_site),
                    format_double(row.sublinear_fraction), format_double(row.max_ratio),
                    format_double(row.theta_ratio)});
    if (i == main_index) {
      main_store.emplace(std::move(penv));
      main_field.emplace(field);
    }
  }
  ladder_csv.close();
  ctx.reports.push_back(ladder_csv.path());

  double worst_residual = 0;
  for (const auto& row : rows) worst_residual = std::max(worst_residual, row.residual);
  add_check(ctx, "corrector_residual", "harmonicity defect <= 1e-10 on every rung",
            worst_residual, worst_residual <= 1e-10);

  if (ctx.spec.deterministic() || ctx.spec.marginal() == 1.0) {
    // Homogeneous laws: chi vanishes identically.
    double max_ratio = 0;
    for (const auto& row : rows) max_ratio = std::max(max_ratio, row.max_ratio);
    add_check(ctx, "corrector_exactness", "chi identically 0 on homogeneous tori", max_ratio,
              max_ratio <= 1e-10);
  } else if (rows.size() > 1) {
    bool strict = true, nonincr = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      strict = strict && rows[i].max_ratio < rows[i - 1].max_ratio;
      nonincr = nonincr && rows[i].sublinear_fraction <= rows[i - 1].sublinear_fraction;
    }
    add_check(ctx, "corrector_sublinearity_max", "max|chi|/(S/2) strictly decreasing",
              rows.back().max_ratio, strict);
    add_check(ctx, "corrector_sublinearity_fraction", "exceedance fraction nonincreasing",
              rows.back().sublinear_fraction, nonincr);
  }

  if (!main_store) return;
  const auto& penv = *main_store;
  const auto& field = *main_field;

  // Field dump for the main rung.
  {
    std::vector<std::string> header;
    for (int i = 0; i < d; ++i) header.push_back("x_" + std::to_string(i + 1));
    for (int i = 0; i < d; ++i) header.push_back("chi_" + std::to_string(i + 1));
    report::CsvWriter csv(ctx.out / "corrector_field.csv", header);
    for (std::int32_t r = 0; r < penv.n_occupied(); ++r) {
      std::vector<std::string> row;
      const Site x = penv.site_of_rank(r);
      for (int i = 0; i < d; ++i) row.push_back(format_int(x[i]));
      for (int i = 0; i < d; ++i) row.push_back(format_double(field.chi(r, i)));
      csv.row(row);
    }
    csv.close();
    ctx.reports.push_back(csv.path());
    ctx.summary.set_int("corrector.side", penv.side(0));
    ctx.summary.set_int("corrector.n_occupied", penv.n_occupied());
    ctx.summary.set_double("corrector.residual", field.residual);
    ctx.summary.set_int("corrector.iterations", field.iterations);
    ctx.summary.set("corrector.anchor", site_string(field.anchor, d));
  }

  // Cross-method diffusion matrix.
  const auto d_mart = corrector::estimate_D_martingale(penv, field);
  const auto d_emp = stats::estimate_D_empirical(penv, ctx.cfg.n_steps, ctx.cfg.n_walks,
                                                 sub_seed(ctx, 41), ctx.jobs);
  {
    report::CsvWriter csv(ctx.out / "corrector_d.csv", {"method", "i", "j", "value", "se"});
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        csv.row({"martingale", format_int(i + 1), format_int(j + 1),
                 format_double(d_mart.d(i, j)), format_double(d_mart.se(i, j))});
        csv.row({"empirical", format_int(i + 1), format_int(j + 1),
                 format_double(d_emp.d(i, j)), format_double(d_emp.se(i, j))});
      }
    csv.close();
    ctx.reports.push_back(csv.path());
  }
  {
    bool pass = true;
    double worst = 0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double se = std::sqrt(d_mart.se(i, j) * d_mart.se(i, j) +
                                    d_emp.se(i, j) * d_emp.se(i, j));
        const double dev = std::abs(d_mart.d(i, j) - d_emp.d(i, j));
        if (se > 0) worst = std::max(worst, dev / se);
        pass = pass && dev <= 3 * se;
      }
    add_check(ctx, "corrector_cross_method_d",
              "martingale and empirical D agree within combined 3 sigma", worst, pass);
  }

  // Lindeberg decay: V_{n,n}(eps) at n = 10^4 vs n = 10^2.
  {
    env::Environment unrolled(penv.as_process_spec(), sub_seed(ctx, 42), false);
    std::array<double, kMaxDim> a{};
    for (std::size_t i = 0; i < ctx.cfg.direction.size() && i < kMaxDim; ++i)
      a[i] = ctx.cfg.direction[i];
    const double eps = ctx.cfg.lindeberg_epsilon;
    const auto traj_small = walk::simulate(unrolled, penv.anchor_site(), 100,
                                           rng::derive(sub_seed(ctx, 43),
                                                       rng::Role::kWalkSteps, 1));
    const auto traj_big = walk::simulate(unrolled, penv.anchor_site(), 10000,
                                         rng::derive(sub_seed(ctx, 43),
                                                     rng::Role::kWalkSteps, 2));
    const double v_small = corrector::lindeberg_V(penv, field, traj_small.positions, a, eps, 100);
    const double v_big = corrector::lindeberg_V(penv, field, traj_big.positions, a, eps, 10000);
    ctx.summary.set_double("lindeberg.v_100", v_small);
    ctx.summary.set_double("lindeberg.v_10000", v_big);
    if (ctx.spec.deterministic() || ctx.spec.marginal() == 1.0) {
      add_check(ctx, "corrector_lindeberg", "V vanishes on homogeneous laws at eps sqrt(n) > jump",
                v_big, v_big == 0.0);
    } else {
      add_check(ctx, "corrector_lindeberg", "V_{n,n}(eps) at n=10^4 <= 0.1 x value at n=10^2",
                v_big, v_small > 0 ? v_big <= v_small / 10.0 : v_big == 0.0);
    }
  }
}

// --------------------------------------------------------------- heatkernel

void run_heatkernel(Context& ctx) {
  const auto penv = sample_torus(ctx.spec, sub_seed(ctx, 50), ctx.cfg.torus_side);
  std::vector<double> grid = ctx.cfg.t_grid;
  if (grid.empty()) grid = {10, 25, 50, 100, 200};
  const Site x = penv.anchor_site();
  const auto exact = stats::return_prob_profile(penv, x, grid);

  report::CsvWriter csv(ctx.out / "heatkernel.csv",
                        {"method", "t", "value", "se", "samples", "hits", "censored"});
  for (const auto& pt : exact)
    csv.row({"exact", format_double(pt.t), format_double(pt.value), "", "", "", "0"});

  // Monte Carlo cross-check on the unrolled law at a reduced ensemble.
  env::Environment unrolled(penv.as_process_spec(), sub_seed(ctx, 51), false);
  std::vector<double> mc_grid;
  std::vector<double> mc_exact;
  for (std::size_t i = 0; i < grid.size(); ++i)
    if (grid[i] <= 50) {
      mc_grid.push_back(grid[i]);
      mc_exact.push_back(exact[i].value);
    }
  if (!mc_grid.empty()) {
    const auto mc = stats::return_prob_profile(
        unrolled, x, mc_grid, std::min<std::int64_t>(ctx.cfg.n_walks, 5000), sub_seed(ctx, 52),
        ctx.jobs);
    double worst = 0;
    bool pass = true;
    for (std::size_t i = 0; i < mc.size(); ++i) {
      csv.row({"mc", format_double(mc[i].t), format_double(mc[i].value),
               format_double(mc[i].std_err), format_int(mc[i].samples), format_int(mc[i].hits),
               mc[i].censored ? "1" : "0"});
      if (!mc[i].censored) {
        const double dev = std::abs(mc[i].value - mc_exact[i]);
        const double tol = 4 * mc[i].std_err + 1e-12;
        worst = std::max(worst, tol > 0 ? dev / tol : 0.0);
        pass = pass && dev <= tol;
      }
    }
    add_check(ctx, "heatkernel_mc_vs_exact", "MC return probabilities within 4 sigma of exact",
              worst, pass);
  }
  csv.close();
  ctx.reports.push_back(csv.path());

  // Diffusive boundedness: t^{d/2} P(Y_t = x) plateau between t=50 and 100.
  double v50 = 0, v100 = 0;
  for (const auto& pt : exact) {
    if (pt.t == 50) v50 = pt.value;
    if (pt.t == 100) v100 = pt.value;
  }
  if (v50 > 0 && v100 > 0) {
    const double rel = std::abs(v100 - v50) / v50;
    add_check(ctx, "heatkernel_plateau", "t^{d/2} P(Y_t=x) varies < 5% between t=50 and t=100",
              rel, rel < 0.05);
  }
}

// ------------------------------------------------------------- displacement

void run_displacement(Context& ctx) {
  env::Environment e(ctx.spec, sub_seed(ctx, 60), true);
  std::vector<double> grid = ctx.cfg.t_grid;
  if (grid.empty()) grid = {1, 3, 10, 30, 100, 300, 1000, 3000, 10000};
  const std::int64_t walks = std::min<std::int64_t>(ctx.cfg.n_walks, 2000);
  const auto profile = stats::displacement_profile(e, Site{}, grid, walks, sub_seed(ctx, 61),
                                                   ctx.jobs, /*graph_walks=*/0);

  // The graph-distance companion pays a breadth-first search per sample, so
  // it runs on the short-time part of the grid only.
  std::vector<double> companion_grid;
  for (double t : grid)
    if (t <= 100) companion_grid.push_back(t);
  stats::DisplacementProfile companion;
  if (!companion_grid.empty())
    companion = stats::displacement_profile(e, Site{}, companion_grid, 50, sub_seed(ctx, 62),
                                            ctx.jobs, /*graph_walks=*/200);

  report::CsvWriter csv(ctx.out / "displacement.csv",
                        {"series", "t", "value", "se", "samples"});
  std::vector<double> values;
  for (const auto& pt : profile.euclidean) {
    csv.row({"euclidean", format_double(pt.t), format_double(pt.value),
             format_double(pt.std_err), format_int(pt.samples)});
    values.push_back(pt.value);
  }
  for (const auto& pt : companion.graph_distance)
    csv.row({"graph", format_double(pt.t), format_double(pt.value), format_double(pt.std_err),
             format_int(pt.samples)});
  csv.close();
  ctx.reports.push_back(csv.path());

  const auto mk = mann_kendall(values);
  ctx.summary.set_double("displacement.mann_kendall_z", mk.z);
  add_check(ctx, "displacement_no_upward_trend",
            "Mann-Kendall z < 2.326 (no upward trend at the 1% level)", mk.z, mk.z < 2.326);
}

// ----------------------------------------------------------- distance-decay

void run_distance_decay(Context& ctx) {
  std::vector<Site> sites = ctx.cfg.sites;
  if (sites.empty())
    sites = {Site{10, 0}, Site{11, 0}, Site{12, 0}, Site{13, 0}, Site{14, 0}, Site{40, 0}};
  const auto report = stats::distance_comparison(ctx.spec, ctx.cfg.rho, sites,
                                                 ctx.cfg.samples, sub_seed(ctx, 70), ctx.jobs);

  report::CsvWriter csv(ctx.out / "distance_decay.csv",
                        {"site", "distance", "samples", "hits", "frequency", "censored"});
  for (const auto& row : report.sites)
    csv.row({site_string(row.x, ctx.spec.dim), format_double(row.distance),
             format_int(row.samples), format_int(row.hits), format_double(row.frequency),
             row.censored ? "1" : "0"});
  csv.close();
  ctx.reports.push_back(csv.path());

  if (report.fit_valid) {
    ctx.summary.set_double("decay.slope", report.fit.slope);
    ctx.summary.set_double("decay.slope_t", report.fit.t_stat);
    ctx.summary.set_double("decay.c6_hat", report.c6_hat);
    ctx.summary.set_double("decay.c7_hat", report.c7_hat);
    add_check(ctx, "decay_slope", "log-frequency slope negative with |t| > 3",
              report.fit.t_stat, report.slope_significant);
  }
  // Far-site frequency bound (applies to the most distant site).
  const auto far = std::max_element(report.sites.begin(), report.sites.end(),
                                    [](const auto& a, const auto& b) {
                                      return a.distance < b.distance;
                                    });
  if (far != report.sites.end() && far->distance >= 40) {
    const double freq = far->censored ? far->frequency : static_cast<double>(far->hits) /
                                                             static_cast<double>(far->samples);
    add_check(ctx, "decay_far_site", "frequency at |x| >= 40 below 1e-3", freq, freq < 1e-3);
  }
}

// ------------------------------------------------------------------- events

void run_events(Context& ctx) {
  const int d = ctx.spec.dim;
  report::CsvWriter csv(ctx.out / "events.csv",
                        {"event", "params", "n", "samples", "hits", "estimate", "ci_low",
                         "ci_high", "seed"});

  // p_L over a small ladder.
  std::vector<graph::ProbabilityEstimate> pl;
  const std::int64_t pl_samples = std::min<std::int64_t>(ctx.cfg.samples, 40000);
  for (std::int64_t L = 1; L <= 4; ++L) {
    const std::uint64_t seed = sub_seed(ctx, 80 + static_cast<std::uint64_t>(L));
    const auto est = graph::estimate_p_L(ctx.spec, L, pl_samples, seed, ctx.jobs);
    pl.push_back(est);
    csv.row({"p_L", "L=" + format_int(L), format_int(L), format_int(est.samples),
             format_int(est.hits), format_double(est.estimate), format_double(est.ci_low),
             format_double(est.ci_high), format_int(static_cast<std::int64_t>(seed))});
  }
  if (d == 2 && ctx.spec.kind == env::ProcessKind::kBernoulli && ctx.spec.p == 0.5) {
    add_check(ctx, "events_p1_oracle", "p_1 Wilson CI contains the enumerated 9/16",
              pl[0].estimate, pl[0].ci_low <= 9.0 / 16.0 && pl[0].ci_high >= 9.0 / 16.0);
  }
  if (!ctx.spec.deterministic() && !ctx.spec.degenerate_a1()) {
    const double se1 = (pl[0].ci_high - pl[0].ci_low) / (2 * 1.96);
    const double se4 = (pl[3].ci_high - pl[3].ci_low) / (2 * 1.96);
    const double gap = pl[0].estimate - pl[3].estimate;
    add_check(ctx, "events_p_L_monotone", "p_1 - p_4 > 4 combined sigma", gap,
              gap > 4 * std::sqrt(se1 * se1 + se4 * se4));
  }

  // Lattice-animal counts: exact values against the (2d)^{2n} bound.
  {
    std::vector<std::string> header = {"n", "count", "bound"};
    report::CsvWriter animals(ctx.out / "lattice_animals.csv", header);
    bool bound_ok = true;
    for (int n = 1; n <= 8; ++n) {
      const std::int64_t count = graph::count_lattice_animals(d, n);
      const double bound = std::pow(static_cast<double>(2 * d), 2.0 * n);
      bound_ok = bound_ok && static_cast<double>(count) <= bound;
      animals.row({format_int(n), format_int(count), format_double(bound)});
    }
    animals.close();
    ctx.reports.push_back(animals.path());
    add_check(ctx, "events_animal_bound", "origin animals of size n <= (2d)^{2n} for n <= 8",
              bound_ok ? 1 : 0, bound_ok);
  }

  // Monte Carlo event estimates over the configured n ladder.
  const std::int64_t ev_samples = std::min<std::int64_t>(ctx.cfg.samples, 2000);
  auto estimate_event = [&](const std::string& name, const std::string& params,
                            std::int64_t n, bool conditioned, std::uint64_t slot,
                            const std::function<bool(const env::Environment&)>& pred) {
    const std::uint64_t seed = sub_seed(ctx, slot);
    std::vector<std::int64_t> hits(static_cast<std::size_t>(chunk_count(ev_samples)), 0);
    parallel_chunks(ev_samples, ctx.jobs, [&](std::int64_t c, std::int64_t b, std::int64_t e2) {
      std::int64_t h = 0;
      for (std::int64_t s = b; s < e2; ++s) {
        env::Environment e(ctx.spec, rng::derive(seed, rng::Role::kEnvReplicate,
                                                 static_cast<std::uint64_t>(s)),
                           conditioned);
        if (pred(e)) ++h;
      }
      hits[static_cast<std::size_t>(c)] = h;
    });
    std::int64_t total = 0;
    for (auto h : hits) total += h;
    const auto est = wilson_interval(total, ev_samples);
    csv.row({name, params, format_int(n), format_int(est.samples), format_int(est.hits),
             format_double(est.estimate), format_double(est.ci_low),
             format_double(est.ci_high), format_int(static_cast<std::int64_t>(seed))});
    return est;
  };

  std::uint64_t slot = 100;
  std::vector<double> lambda1_fail;
  for (const std::int64_t n : ctx.cfg.event_n) {
    estimate_event("E_theta_n",
                   "theta=" + format_double(ctx.cfg.theta) +
                       ";lambda=" + format_double(ctx.cfg.lambda),
                   n, true, slot++, [&](const env::Environment& e) {
                     return graph::event_E_theta_n(e, n, ctx.cfg.theta, ctx.cfg.lambda);
                   });
    if (d >= 2) {
      estimate_event("F", "i=2", n, true, slot++, [&](const env::Environment& e) {
        return graph::event_F(e, 2, n, Site{});
      });
      estimate_event("G", "i=2", n, true, slot++, [&](const env::Environment& e) {
        return graph::event_G(e, 2, n, Site{});
      });
      estimate_event("H", "i=2", n, false, slot++, [&](const env::Environment& e) {
        return graph::event_H(e, 2, n, Site{});
      });
    }
    if (d == 2) {
      estimate_event("Lambda_0", "u=" + format_int(ctx.cfg.u) + ";L=" + format_int(ctx.cfg.big_l),
                     n, false, slot++, [&](const env::Environment& e) {
                       return graph::event_Lambda(e, 0, ctx.cfg.u, ctx.cfg.delta, ctx.cfg.big_l,
                                                  n, ctx.cfg.ell);
                     });
      const auto l1 = estimate_event(
          "Lambda_1",
          "u=" + format_int(ctx.cfg.u) + ";delta=" + format_double(ctx.cfg.delta) +
              ";L=" + format_int(ctx.cfg.big_l),
          n, false, slot++, [&](const env::Environment& e) {
            return graph::event_Lambda(e, 1, ctx.cfg.u, ctx.cfg.delta, ctx.cfg.big_l, n,
                                       ctx.cfg.ell);
          });
      lambda1_fail.push_back(1.0 - l1.estimate);
      estimate_event("Lambda_2",
                     "u=" + format_int(ctx.cfg.u) + ";L=" + format_int(ctx.cfg.big_l) +
                         ";ell=" + format_int(ctx.cfg.ell),
                     n, false, slot++, [&](const env::Environment& e) {
                       return graph::event_Lambda(e, 2, ctx.cfg.u, ctx.cfg.delta, ctx.cfg.big_l,
                                                  n, ctx.cfg.ell);
                     });
    }
  }
  csv.close();
  ctx.reports.push_back(csv.path());

  if (d == 2 && !ctx.spec.deterministic() && !ctx.spec.degenerate_a1() &&
      lambda1_fail.size() > 1) {
    bool nonincr = true;
    for (std::size_t i = 1; i < lambda1_fail.size(); ++i)
      nonincr = nonincr && lambda1_fail[i] <= lambda1_fail[i - 1] + 2.0 / std::sqrt(ev_samples);
    add_check(ctx, "events_lambda1_decay",
              "Q(Lambda_1 fails) nonincreasing in n (within MC noise)",
              lambda1_fail.back(), nonincr);
  }

  // M(omega), N(omega) on a conditioned draw.
  if (!ctx.spec.deterministic() || ctx.spec.pattern_bit(Site{})) {
    env::Environment e(ctx.spec, sub_seed(ctx, 99), true);
    const auto mn = graph::compute_M_N(e, ctx.cfg.search_cap);
    ctx.summary.set_int("events.M", mn.m);
    ctx.summary.set_int("events.N", mn.n);
    add_check(ctx, "events_n_bound", "N(omega) >= M(omega) + 1", static_cast<double>(mn.n),
              !mn.m_valid || mn.n >= mn.m + 1);
  }
}

// ----------------------------------------------------------- oracle-compare

void run_oracle_compare(Context& ctx) {
  const std::int64_t side = std::min<std::int64_t>(ctx.cfg.torus_side, 16);
  const auto penv = sample_torus(ctx.spec, sub_seed(ctx, 110), side);
  const auto chain = oracle::ExactChain::build(penv);

  bool doubly = true;
  for (auto m : chain.column_multiplicities()) doubly = doubly && m == 2 * ctx.spec.dim;
  add_check(ctx, "oracle_doubly_stochastic", "integer column sums equal 2d exactly",
            doubly ? 1 : 0, doubly);

  const std::int64_t n_steps = 50;
  const auto exact = oracle::exact_distribution(chain, penv.anchor_rank(), n_steps);
  double total = 0;
  for (double v : exact) total += v;
  add_check(ctx, "oracle_normalization", "exact distribution sums to 1 within 1e-12",
            std::abs(total - 1.0), std::abs(total - 1.0) < 1e-12);

  // Monte Carlo vs exact in total variation, on the fast torus walker.
  const std::int64_t n_walks = std::max<std::int64_t>(ctx.cfg.n_walks, 1'000'000);
  std::vector<std::vector<std::int64_t>> chunk_counts(
      static_cast<std::size_t>(chunk_count(n_walks)),
      std::vector<std::int64_t>(static_cast<std::size_t>(chain.n_states()), 0));
  const std::uint64_t mc_seed = sub_seed(ctx, 111);
  parallel_chunks(n_walks, ctx.jobs, [&](std::int64_t c, std::int64_t b, std::int64_t e2) {
    auto& counts = chunk_counts[static_cast<std::size_t>(c)];
    for (std::int64_t w = b; w < e2; ++w) {
      rng::Stream steps(rng::derive(rng::derive(mc_seed, rng::Role::kWalkSteps,
                                                static_cast<std::uint64_t>(w)),
                                    rng::Role::kWalkSteps));
      corrector::TorusWalker walker(penv, penv.anchor_rank());
      for (std::int64_t k = 0; k < n_steps; ++k) walker.step(steps);
      ++counts[static_cast<std::size_t>(walker.rank())];
    }
  });
  std::vector<std::int64_t> counts(static_cast<std::size_t>(chain.n_states()), 0);
  for (const auto& ch : chunk_counts)
    for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += ch[i];
  double tv = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    tv += std::abs(static_cast<double>(counts[i]) / static_cast<double>(n_walks) - exact[i]);
  tv /= 2;
  report::CsvWriter csv(ctx.out / "oracle_compare.csv",
                        {"quantity", "value", "samples"});
  csv.row({"tv_mc_vs_exact_n50", format_double(tv), format_int(n_walks)});
  add_check(ctx, "oracle_tv", "TV(MC, exact) < 0.01 at n = 50", tv, tv < 0.01);

  // Brute-force path search vs BFS on random small windows.
  std::int64_t agree = 0, tested = 0;
  for (std::uint64_t s = 0; s < 400 && tested < 100; ++s) {
    env::Environment e(ctx.spec, rng::derive(sub_seed(ctx, 112), rng::Role::kEnvReplicate, s),
                       false);
    const Box box = Box::cube(2, ctx.spec.dim);
    const auto grid = e.window(box);
    if (!grid.at(Site{})) continue;
    bool line_valid = true;
    Site probe;
    for (int axis = 0; axis < ctx.spec.dim && line_valid; ++axis) {
      Site t = box.lo;
      for (;;) {
        bool hit = false;
        for (std::int64_t k = box.lo[axis]; k <= box.hi[axis] && !hit; ++k) {
          probe = t;
          probe[axis] = k;
          hit = grid.at(probe);
        }
        if (!hit) {
          line_valid = false;
          break;
        }
        int a = 0;
        while (a < ctx.spec.dim && (a == axis || t[a] == box.hi[a])) {
          if (a != axis) t[a] = box.lo[a];
          ++a;
        }
        if (a == ctx.spec.dim) break;
        if (a != axis) ++t[a];
      }
    }
    if (!line_valid) continue;
    Site target;
    bool found = false;
    {
      Site t = box.lo;
      const std::int64_t volume = box.volume();
      for (std::int64_t i = 0; i < volume && !found; ++i) {
        if (!(t == Site{}) && grid.at(t)) {
          target = t;
          found = true;
        }
        int a = 0;
        while (a < box.dim && t[a] == box.hi[a]) {
          t[a] = box.lo[a];
          ++a;
        }
        if (a < box.dim) ++t[a];
      }
    }
    if (!found) continue;
    ++tested;
    const auto brute = oracle::brute_force_paths(grid, Site{}, target, 12, 2'000'000);
    std::array<std::int64_t, kMaxDim> sides{};
    for (int i = 0; i < ctx.spec.dim; ++i) sides[static_cast<std::size_t>(i)] = box.side(i);
    auto wrapped = env::ProcessSpec::periodic(ctx.spec.dim, grid.bits, sides);
    env::Environment pe(wrapped, 1, false);
    graph::NeighborMap nm(pe);
    Site shift;
    for (int i = 0; i < ctx.spec.dim; ++i) shift[i] = -box.lo[i];
    Box confinement;
    confinement.dim = ctx.spec.dim;
    for (int i = 0; i < ctx.spec.dim; ++i) {
      confinement.lo[i] = 0;
      confinement.hi[i] = box.side(i) - 1;
    }
    const auto bfs = graph_distance(nm, Site{} + shift, target + shift, confinement, 100);
    const bool match = brute.has_value() ? (bfs.reached() && bfs.hops == *brute)
                                         : !bfs.reached();
    if (match) ++agree;
  }
  csv.row({"bruteforce_bfs_agree", format_int(agree), format_int(tested)});
  csv.close();
  ctx.reports.push_back(csv.path());
  add_check(ctx, "oracle_bruteforce_bfs", "brute-force minimal paths equal BFS on all windows",
            static_cast<double>(agree), tested > 0 && agree == tested);
}

void dispatch(Context& ctx, Experiment which) {
  const auto start = std::chrono::steady_clock::now();
  switch (which) {
    case Experiment::kEnvCheck: run_env_check(ctx); break;
    case Experiment::kWalk: run_walk(ctx); break;
    case Experiment::kDiffusion: run_diffusion(ctx); break;
    case Experiment::kGaussianity: run_gaussianity(ctx); break;
    case Experiment::kCorrector: run_corrector(ctx); break;
    case Experiment::kHeatkernel: run_heatkernel(ctx); break;
    case Experiment::kDisplacement: run_displacement(ctx); break;
    case Experiment::kDistanceDecay: run_distance_decay(ctx); break;
    case Experiment::kEvents: run_events(ctx); break;
    case Experiment::kOracleCompare: run_oracle_compare(ctx); break;
    case Experiment::kFullSuite: break;  // handled by the caller
  }
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - start)
                        .count();
  ctx.timings.emplace_back(config::experiment_name(which), ms);
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, std::ostream& log) {
  if (cfg.out_dir.empty()) throw Error("run_experiment: output directory not set");
  RunResult result;
  result.out_dir = cfg.out_dir;
  fs::create_directories(result.out_dir);

  report::Summary summary;
  std::vector<fs::path> reports;
  std::vector<std::pair<std::string, double>> timings;
  const int jobs = cfg.jobs > 0 ? cfg.jobs
                                : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  Context ctx{cfg, cfg.to_process_spec(), jobs, result.out_dir, summary, reports, log, timings};

  summary.set("version", kVersion);
  summary.set("experiment", config::experiment_name(cfg.experiment));
  summary.set("spec", ctx.spec.describe());
  summary.set_int("master_seed", static_cast<std::int64_t>(cfg.seed));

  if (cfg.experiment == Experiment::kFullSuite) {
    for (Experiment e : {Experiment::kEnvCheck, Experiment::kWalk, Experiment::kDiffusion,
                         Experiment::kGaussianity, Experiment::kCorrector,
                         Experiment::kHeatkernel, Experiment::kDisplacement,
                         Experiment::kDistanceDecay, Experiment::kEvents,
                         Experiment::kOracleCompare})
      dispatch(ctx, e);
  } else {
    dispatch(ctx, cfg.experiment);
  }

  // Digest every CSV, then freeze the summary and the replay file.
  for (const auto& path : reports)
    summary.set("digest." + path.filename().string(), report::file_digest(path));
  const fs::path summary_path = result.out_dir / "summary.txt";
  summary.write(summary_path);

  {
    std::ofstream replay_out(result.out_dir / "replay.cfg", std::ios::binary | std::ios::trunc);
    replay_out << "version = " << kVersion << "\n";
    replay_out << cfg.serialize();
    for (const auto& path : reports)
      replay_out << "digest." << path.filename().string() << " = "
                 << report::file_digest(path) << "\n";
    replay_out << "digest.summary.txt = " << report::file_digest(summary_path) << "\n";
  }
  {
    std::ofstream timing_out(result.out_dir / "timing.txt");
    for (const auto& [name, ms] : timings) timing_out << name << "_ms = " << ms << "\n";
  }

  result.all_passed = summary.all_passed();
  result.exit_code = result.all_passed ? 0 : 1;
  log << (result.all_passed ? "ALL CHECKS PASSED\n" : "SOME CHECKS FAILED\n");
  return result;
}

int replay(const fs::path& replay_file, const fs::path& out_dir, int jobs_override,
           std::ostream& log) {
  std::ifstream in(replay_file);
  if (!in) throw Error("replay: cannot open " + replay_file.string());
  std::string line, config_text, version;
  std::vector<std::pair<std::string, std::string>> digests;
  while (std::getline(in, line)) {
    if (line.rfind("version = ", 0) == 0) {
      version = line.substr(10);
    } else if (line.rfind("digest.", 0) == 0) {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) throw Error("replay: malformed digest line");
      digests.emplace_back(line.substr(7, eq - 7), line.substr(eq + 3));
    } else {
      config_text += line + "\n";
    }
  }
  if (version != kVersion) {
    log << "replay refused: recorded version '" << version << "' != '" << kVersion << "'\n";
    return 1;
  }

  auto cfg = ExperimentConfig::parse_text(config_text);
  cfg.out_dir = out_dir.string();
  if (jobs_override > 0) cfg.jobs = jobs_override;
  run_experiment(cfg, log);

  bool identical = true;
  for (const auto& [file, digest] : digests) {
    const std::string fresh = report::file_digest(out_dir / file);
    if (fresh != digest) {
      log << "digest mismatch for " << file << ": recorded " << digest << ", got " << fresh
          << "\n";
      identical = false;
    }
  }
  log << (identical ? "replay verified: reports are byte-identical\n"
                    : "replay diverged\n");
  return identical ? 0 : 1;
}

}  // namespace rwdpp::experiments
