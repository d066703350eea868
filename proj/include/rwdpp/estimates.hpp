#ifndef RWDPP_ESTIMATES_HPP
#define RWDPP_ESTIMATES_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "rwdpp/lattice.hpp"

namespace rwdpp {

// d x d diffusion matrix with per-entry standard errors. The martingale
// quadrature is exact on its torus (zero errors); the empirical estimator
// carries jackknife errors.
struct DiffusionEstimate {
  enum class Method { kMartingale, kEmpirical };

  int dim = 0;
  Method method = Method::kEmpirical;
  std::int64_t samples = 0;
  std::array<std::array<double, kMaxDim>, kMaxDim> d_matrix{};
  std::array<std::array<double, kMaxDim>, kMaxDim> std_err{};

  double d(int i, int j) const { return d_matrix[i][j]; }
  double se(int i, int j) const { return std_err[i][j]; }
};

struct ProbabilityEstimate {
  std::int64_t samples = 0;
  std::int64_t hits = 0;
  double estimate = 0;
  double ci_low = 0;
  double ci_high = 0;
};

struct SeriesPoint {
  double t = 0;
  double value = 0;  // for censored points: the Clopper-Pearson upper bound
  double std_err = 0;
  std::int64_t samples = 0;
  std::int64_t hits = -1;  // -1 when the point is a mean, not a frequency
  bool censored = false;
};

// Wilson score interval at the given z (default z = 1.96, ~95%).
ProbabilityEstimate wilson_interval(std::int64_t hits, std::int64_t samples, double z = 1.96);

// Exact upper confidence bound for a binomial proportion with zero hits:
// 1 - alpha^(1/n).
double clopper_pearson_upper_zero(std::int64_t samples, double alpha = 0.05);

// Mean and delete-1 jackknife standard error of a sample.
struct MeanEstimate {
  double mean = 0;
  double std_err = 0;
  std::int64_t samples = 0;
};
MeanEstimate mean_with_se(const std::vector<double>& values);

// Sample covariance (N-1 normalization) of d-dimensional samples with
// delete-1 jackknife standard errors per entry.
DiffusionEstimate covariance_with_jackknife(const std::vector<std::array<double, kMaxDim>>& v,
                                            int dim);

// Two-sided Kolmogorov-Smirnov test of a sample against the centered normal
// with the given variance. p-value via the asymptotic Kolmogorov law with
// Stephens' finite-sample correction.
struct KsResult {
  double statistic = 0;
  double p_value = 0;
  std::int64_t samples = 0;
  double variance_used = 0;
};
KsResult ks_against_normal(std::vector<double> samples, double variance);

double normal_cdf(double x);

// Mann-Kendall trend statistic. upward_significant compares the one-sided
// z-score against the critical value (2.326 at the 1% level).
struct MannKendall {
  std::int64_t s = 0;
  double z = 0;
  std::int64_t points = 0;
};
MannKendall mann_kendall(const std::vector<double>& series);

// Ordinary least squares y = a + b x; returns slope, its standard error and
// the t statistic.
struct LineFit {
  double slope = 0;
  double intercept = 0;
  double slope_std_err = 0;
  double t_stat = 0;
  int points = 0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Pearson chi-square statistic for observed counts against uniform cells.
double chi_square_uniform(const std::vector<std::int64_t>& counts);

// Neumaier compensated accumulator for order-stable reductions.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v))
      comp_ += (sum_ - t) + v;
    else
      comp_ += (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0;
  double comp_ = 0;
};

}  // namespace rwdpp

#endif  // RWDPP_ESTIMATES_HPP
