#ifndef RWDPP_CORRECTOR_HPP
#define RWDPP_CORRECTOR_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "rwdpp/estimates.hpp"
#include "rwdpp/lattice.hpp"
#include "rwdpp/periodic_env.hpp"

namespace rwdpp::corrector {

// Corrector values chi(x) in R^d on the occupied sites of a torus, pinned to
// zero at the anchor (the lexicographically smallest occupied site).
struct CorrectorField {
  int dim = 0;
  std::int64_t n_occupied = 0;
  std::vector<double> values;  // rank-major, component-minor
  Site anchor;
  double residual = 0;  // achieved max harmonicity defect (Euclidean per site)
  int iterations = 0;

  double chi(std::int32_t rank, int comp) const {
    return values[static_cast<std::size_t>(rank) * static_cast<std::size_t>(dim) +
                  static_cast<std::size_t>(comp)];
  }
  std::array<double, kMaxDim> chi_vec(std::int32_t rank) const {
    std::array<double, kMaxDim> v{};
    for (int i = 0; i < dim; ++i) v[static_cast<std::size_t>(i)] = chi(rank, i);
    return v;
  }
};

// Solves the displacement-form harmonicity equations
//   (1/2d) sum_e [chi(x_e) - chi(x) + delta_e(x)] = 0
// on the torus by conjugate gradients on I - P (symmetric, doubly
// stochastic), component by component. Throws on non-convergence.
CorrectorField solve_corrector(const PeriodicEnvironment& penv, double tol = 1e-10,
                               int max_iter = 100'000);

// (y - x) + chi(y) - chi(x) with the true unwrapped displacement of the
// torus jump in the given direction.
std::array<double, kMaxDim> martingale_increment(const PeriodicEnvironment& penv,
                                                 const CorrectorField& field,
                                                 std::int32_t rank, int dir);

// Site-based form: y must be a torus neighbor of x; the increment of the
// first matching direction is returned.
std::array<double, kMaxDim> martingale_increment(const PeriodicEnvironment& penv,
                                                 const CorrectorField& field, const Site& x,
                                                 const Site& y);

// Exact quadrature of D_ij over the torus: uniform average over occupied
// sites of the 1/2d-weighted increment outer products.
DiffusionEstimate estimate_D_martingale(const PeriodicEnvironment& penv,
                                        const CorrectorField& field);

// f_K at a site: average over the 2d transitions of (a . M_1)^2 on the event
// |a . M_1| >= K.
double f_K(const PeriodicEnvironment& penv, const CorrectorField& field,
           const std::array<double, kMaxDim>& a, double K, std::int32_t rank);
double f_K(const PeriodicEnvironment& penv, const CorrectorField& field,
           const std::array<double, kMaxDim>& a, double K, const Site& x);

// V_{n,m}(eps) = (1/n) sum_{k=0..m} f_{eps sqrt(n)} at the walk positions
// (m = trajectory length).
double lindeberg_V(const PeriodicEnvironment& penv, const CorrectorField& field,
                   const std::vector<Site>& positions, const std::array<double, kMaxDim>& a,
                   double eps, std::int64_t n);

struct DiagnosticsRow {
  std::int64_t side = 0;          // torus side S
  std::int64_t n = 0;             // ladder radius S/2
  std::int64_t n_occupied = 0;
  double residual = 0;
  double pair_sum_per_site = 0;   // square-integrability surrogate
  double sublinear_fraction = 0;  // #{|chi| >= eps n, |x| <= n} / n^d
  double max_ratio = 0;           // max_{|x| <= n} |chi| / n
  double theta_ratio = 0;         // max |chi| / n^theta
};

// Finite-volume sublinearity diagnostics for one rung of the torus ladder.
DiagnosticsRow corrector_diagnostics(const PeriodicEnvironment& penv,
                                     const CorrectorField& field, double eps, double theta);

}  // namespace rwdpp::corrector

#endif  // RWDPP_CORRECTOR_HPP
