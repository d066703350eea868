#include "rwdpp/corrector.hpp"

#include <algorithm>
#include <cmath>

namespace rwdpp::corrector {

namespace {

// y = (I - P) x on the occupied torus sites.
void apply_laplacian(const PeriodicEnvironment& penv, const std::vector<double>& x,
                     std::vector<double>& y) {
  const std::int64_t n = penv.n_occupied();
  const int two_d = 2 * penv.dim();
  const double inv = 1.0 / static_cast<double>(two_d);
  for (std::int32_t r = 0; r < n; ++r) {
    double acc = 0;
    for (int dir = 0; dir < two_d; ++dir)
      acc += x[static_cast<std::size_t>(penv.jump(r, dir).to)];
    y[static_cast<std::size_t>(r)] = x[static_cast<std::size_t>(r)] - inv * acc;
  }
}

double max_abs(const std::vector<double>& v) {
  double m = 0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Conjugate gradients on the consistent singular system (I - P) u = b.
// Returns iterations used; throws when the inner tolerance is unreachable.
int conjugate_gradient(const PeriodicEnvironment& penv, const std::vector<double>& b,
                       std::vector<double>& u, double tol, int max_iter) {
  const std::size_t n = b.size();
  u.assign(n, 0.0);
  std::vector<double> r = b;
  if (max_abs(r) <= tol) return 0;
  std::vector<double> p = r;
  std::vector<double> q(n, 0.0);

  auto dot = [](const std::vector<double>& a, const std::vector<double>& c) {
    CompensatedSum s;
    for (std::size_t i = 0; i < a.size(); ++i) s.add(a[i] * c[i]);
    return s.value();
  };

  double rho = dot(r, r);
  for (int it = 1; it <= max_iter; ++it) {
    apply_laplacian(penv, p, q);
    const double pq = dot(p, q);
    if (pq <= 0) throw Error("corrector solve: conjugate gradient broke down");
    const double alpha = rho / pq;
    for (std::size_t i = 0; i < n; ++i) u[i] += alpha * p[i];
    for (std::size_t i = 0; i < n; ++i) r[i] -= alpha * q[i];

    // Recompute the true residual periodically to defeat accumulation drift.
    if (it % 64 == 0) {
      apply_laplacian(penv, u, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
    }
    if (max_abs(r) <= tol) {
      apply_laplacian(penv, u, q);
      for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
      if (max_abs(r) <= tol) return it;
    }
    const double rho_next = dot(r, r);
    const double beta = rho_next / rho;
    rho = rho_next;
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
  }
  throw Error("corrector solve: no convergence within " + std::to_string(max_iter) +
              " iterations");
}

}  // namespace

CorrectorField solve_corrector(const PeriodicEnvironment& penv, double tol, int max_iter) {
  if (!(tol > 0)) throw Error("corrector solve: tolerance must be positive");
  const std::int64_t n = penv.n_occupied();
  const int dim = penv.dim();
  const int two_d = 2 * dim;
  const double inv = 1.0 / static_cast<double>(two_d);

  CorrectorField field;
  field.dim = dim;
  field.n_occupied = n;
  field.values.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(dim), 0.0);
  field.anchor = penv.anchor_site();

  // Right-hand side: per-site drift (1/2d) sum_e delta_e(x), one column per
  // component. Solvable because the signed jump lengths cancel around every
  // axis line; the integer witness is checked before solving.
  std::vector<std::vector<double>> b(static_cast<std::size_t>(dim),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<std::int64_t> drift_sum(static_cast<std::size_t>(dim), 0);
  for (std::int32_t r = 0; r < n; ++r)
    for (int dir = 0; dir < two_d; ++dir) {
      const auto& j = penv.jump(r, dir);
      b[static_cast<std::size_t>(axis_of(dir))][static_cast<std::size_t>(r)] +=
          inv * static_cast<double>(j.disp);
      drift_sum[static_cast<std::size_t>(axis_of(dir))] += j.disp;
    }
  for (int comp = 0; comp < dim; ++comp)
    if (drift_sum[static_cast<std::size_t>(comp)] != 0)
      throw Error("corrector solve: drift does not cancel; the torus jump table is broken");

  const double inner_tol = tol / (4.0 * std::sqrt(static_cast<double>(dim)));
  std::vector<double> u(static_cast<std::size_t>(n), 0.0);
  for (int comp = 0; comp < dim; ++comp) {
    const int iters = conjugate_gradient(penv, b[static_cast<std::size_t>(comp)], u, inner_tol,
                                         max_iter);
    field.iterations = std::max(field.iterations, iters);
    for (std::int32_t r = 0; r < n; ++r)
      field.values[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) +
                   static_cast<std::size_t>(comp)] = u[static_cast<std::size_t>(r)];
  }

  // Pin the anchor: chi(anchor) = 0 exactly.
  const std::int32_t anchor = penv.anchor_rank();
  for (int comp = 0; comp < dim; ++comp) {
    const double shift = field.chi(anchor, comp);
    for (std::int32_t r = 0; r < n; ++r)
      field.values[static_cast<std::size_t>(r) * static_cast<std::size_t>(dim) +
                   static_cast<std::size_t>(comp)] -= shift;
  }

  // Report the achieved harmonicity defect, measured on the displacement
  // identity itself.
  double defect = 0;
  for (std::int32_t r = 0; r < n; ++r) {
    double norm2 = 0;
    for (int comp = 0; comp < dim; ++comp) {
      double acc = 0;
      for (int dir = 0; dir < two_d; ++dir) {
        const auto& j = penv.jump(r, dir);
        const double delta = axis_of(dir) == comp ? static_cast<double>(j.disp) : 0.0;
        acc += field.chi(j.to, comp) - field.chi(r, comp) + delta;
      }
      acc *= inv;
      norm2 += acc * acc;
    }
    defect = std::max(defect, std::sqrt(norm2));
  }
  field.residual = defect;
  if (defect > tol)
    throw Error("corrector solve: residual " + std::to_string(defect) +
                " exceeds tolerance " + std::to_string(tol));
  return field;
}

std::array<double, kMaxDim> martingale_increment(const PeriodicEnvironment& penv,
                                                 const CorrectorField& field,
                                                 std::int32_t rank, int dir) {
  const auto& j = penv.jump(rank, dir);
  std::array<double, kMaxDim> inc{};
  for (int comp = 0; comp < penv.dim(); ++comp)
    inc[static_cast<std::size_t>(comp)] = field.chi(j.to, comp) - field.chi(rank, comp);
  inc[static_cast<std::size_t>(axis_of(dir))] += static_cast<double>(j.disp);
  return inc;
}

std::array<double, kMaxDim> martingale_increment(const PeriodicEnvironment& penv,
                                                 const CorrectorField& field, const Site& x,
                                                 const Site& y) {
  const std::int32_t rank = penv.rank_at(x);
  if (rank < 0) throw Error("martingale_increment: x not occupied");
  const std::int32_t target = penv.rank_at(y);
  for (int dir = 0; dir < 2 * penv.dim(); ++dir)
    if (penv.jump(rank, dir).to == target) return martingale_increment(penv, field, rank, dir);
  throw Error("martingale_increment: y is not a torus neighbor of x");
}

DiffusionEstimate estimate_D_martingale(const PeriodicEnvironment& penv,
                                        const CorrectorField& field) {
  const int dim = penv.dim();
  const int two_d = 2 * dim;
  const std::int64_t n = penv.n_occupied();
  DiffusionEstimate est;
  est.dim = dim;
  est.method = DiffusionEstimate::Method::kMartingale;
  est.samples = n * two_d;

  std::array<std::array<CompensatedSum, kMaxDim>, kMaxDim> acc;
  for (std::int32_t r = 0; r < n; ++r)
    for (int dir = 0; dir < two_d; ++dir) {
      const auto inc = martingale_increment(penv, field, r, dir);
      for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j)
          acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].add(
              inc[static_cast<std::size_t>(i)] * inc[static_cast<std::size_t>(j)]);
    }
  const double norm = 1.0 / (static_cast<double>(n) * static_cast<double>(two_d));
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      const double v = acc[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].value() * norm;
      est.d_matrix[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = v;
      est.d_matrix[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = v;
    }
  return est;
}

double f_K(const PeriodicEnvironment& penv, const CorrectorField& field,
           const std::array<double, kMaxDim>& a, double K, std::int32_t rank) {
  const int two_d = 2 * penv.dim();
  double acc = 0;
  for (int dir = 0; dir < two_d; ++dir) {
    const auto inc = martingale_increment(penv, field, rank, dir);
    double proj = 0;
    for (int i = 0; i < penv.dim(); ++i)
      proj += a[static_cast<std::size_t>(i)] * inc[static_cast<std::size_t>(i)];
    if (std::abs(proj) >= K) acc += proj * proj;
  }
  return acc / static_cast<double>(two_d);
}

double f_K(const PeriodicEnvironment& penv, const CorrectorField& field,
           const std::array<double, kMaxDim>& a, double K, const Site& x) {
  const std::int32_t rank = penv.rank_at(x);
  if (rank < 0) throw Error("f_K: site not occupied on the torus");
  return f_K(penv, field, a, K, rank);
}

double lindeberg_V(const PeriodicEnvironment& penv, const CorrectorField& field,
                   const std::vector<Site>& positions, const std::array<double, kMaxDim>& a,
                   double eps, std::int64_t n) {
  if (n < 1) throw Error("lindeberg_V: n must be >= 1");
  const double cutoff = eps * std::sqrt(static_cast<double>(n));
  CompensatedSum acc;
  for (const Site& x : positions) {
    const std::int32_t rank = penv.rank_at(x);
    if (rank < 0) throw Error("lindeberg_V: trajectory leaves the point process");
    acc.add(f_K(penv, field, a, cutoff, rank));
  }
  return acc.value() / static_cast<double>(n);
}

DiagnosticsRow corrector_diagnostics(const PeriodicEnvironment& penv,
                                     const CorrectorField& field, double eps, double theta) {
  const int dim = penv.dim();
  const std::int64_t side = penv.side(0);
  for (int i = 1; i < dim; ++i)
    if (penv.side(i) != side)
      throw Error("corrector_diagnostics: ladder rungs must be cubic tori");
  DiagnosticsRow row;
  row.side = side;
  row.n = side / 2;
  row.n_occupied = penv.n_occupied();
  row.residual = field.residual;

  const int two_d = 2 * dim;
  CompensatedSum pair_sum;
  for (std::int32_t r = 0; r < penv.n_occupied(); ++r)
    for (int dir = 0; dir < two_d; ++dir) {
      const auto& j = penv.jump(r, dir);
      double norm2 = 0;
      for (int comp = 0; comp < dim; ++comp) {
        const double diff = field.chi(j.to, comp) - field.chi(r, comp);
        norm2 += diff * diff;
      }
      pair_sum.add(norm2);
    }
  row.pair_sum_per_site = pair_sum.value() / static_cast<double>(penv.n_occupied());

  const double n = static_cast<double>(row.n);
  std::int64_t exceed = 0;
  double max_chi = 0;
  for (std::int32_t r = 0; r < penv.n_occupied(); ++r) {
    Site x = penv.site_of_rank(r);
    // Center the fundamental domain at the origin.
    for (int i = 0; i < dim; ++i)
      if (x[i] >= side / 2) x[i] -= side;
    if (l2_norm(x) > n) continue;
    double chi2 = 0;
    for (int comp = 0; comp < dim; ++comp) {
      const double c = field.chi(r, comp);
      chi2 += c * c;
    }
    const double chi_norm = std::sqrt(chi2);
    max_chi = std::max(max_chi, chi_norm);
    if (chi_norm >= eps * n) ++exceed;
  }
  row.sublinear_fraction =
      static_cast<double>(exceed) / std::pow(n, static_cast<double>(dim));
  row.max_ratio = max_chi / n;
  row.theta_ratio = max_chi / std::pow(n, theta);
  return row;
}

}  // namespace rwdpp::corrector
