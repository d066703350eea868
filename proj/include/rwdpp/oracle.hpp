#ifndef RWDPP_ORACLE_HPP
#define RWDPP_ORACLE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rwdpp/environment.hpp"
#include "rwdpp/lattice.hpp"
#include "rwdpp/periodic_env.hpp"

namespace rwdpp::oracle {

// Row-stochastic transition operator of the torus walk, stored as CSR with
// integer multiplicities: row sums are exactly 2d, so double stochasticity
// is an integer identity.
class ExactChain {
 public:
  static ExactChain build(const corrector::PeriodicEnvironment& penv);

  std::int64_t n_states() const { return static_cast<std::int64_t>(row_ptr_.size()) - 1; }
  int two_d() const { return two_d_; }

  // One application of the operator to a distribution (row vector times P),
  // with compensated accumulation.
  std::vector<double> apply(const std::vector<double>& v) const;

  // Column multiplicity sums; all equal to 2d iff the chain is doubly
  // stochastic (exact integer check).
  std::vector<std::int64_t> column_multiplicities() const;

 private:
  int two_d_ = 0;
  std::vector<std::int64_t> row_ptr_;
  std::vector<std::int32_t> col_;
  std::vector<std::int32_t> mult_;
};

// delta_{x0} P^n by repeated sparse application.
std::vector<double> exact_distribution(const ExactChain& chain, std::int32_t start_rank,
                                       std::int64_t n);

// Poissonization: sum_n e^{-t} t^n / n! delta_{x0} P^n, truncated when the
// remaining Poisson tail mass drops below tail_tol.
std::vector<double> exact_ct_distribution(const ExactChain& chain, std::int32_t start_rank,
                                          double t, double tail_tol = 1e-12);

// Exact rational over 128-bit integers; large enough for 2^24-pattern
// enumerations with small rational p.
struct Rational {
  __int128 num = 0;
  __int128 den = 1;

  void reduce();
  double to_double() const;
  std::string to_string() const;
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num * b.den == b.num * a.den;
  }
};

inline Rational make_rational(std::int64_t num, std::int64_t den) {
  Rational r;
  r.num = num;
  r.den = den;
  r.reduce();
  return r;
}

// Sums p^{#occupied} (1-p)^{#empty} over all occupancy patterns of the
// window satisfying the predicate. Volume capped at 24 sites.
Rational enumerate_probability(const Box& window, Rational p,
                               const std::function<bool(const env::WindowGrid&)>& predicate);

// Exhaustive depth-bounded search over nearest-neighbor self-avoiding paths
// inside the window; independent of the BFS it cross-checks. Neighbors are
// the nearest occupied sites along each axis within the window. Returns the
// minimal hop count, or nullopt when y is unreached within max_len.
std::optional<std::int64_t> brute_force_paths(const env::WindowGrid& window, const Site& x,
                                              const Site& y, std::int64_t max_len,
                                              std::int64_t state_cap = 10'000);

}  // namespace rwdpp::oracle

#endif  // RWDPP_ORACLE_HPP
