#include "rwdpp/estimates.hpp"

#include <algorithm>
#include <cmath>

namespace rwdpp {

ProbabilityEstimate wilson_interval(std::int64_t hits, std::int64_t samples, double z) {
  ProbabilityEstimate e;
  e.samples = samples;
  e.hits = hits;
  if (samples <= 0) return e;
  const double n = static_cast<double>(samples);
  const double phat = static_cast<double>(hits) / n;
  e.estimate = phat;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (phat + z2 / (2 * n)) / denom;
  const double half = z * std::sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom;
  e.ci_low = std::max(0.0, center - half);
  e.ci_high = std::min(1.0, center + half);
  return e;
}

double clopper_pearson_upper_zero(std::int64_t samples, double alpha) {
  if (samples <= 0) return 1.0;
  return 1.0 - std::pow(alpha, 1.0 / static_cast<double>(samples));
}

MeanEstimate mean_with_se(const std::vector<double>& values) {
  MeanEstimate m;
  m.samples = static_cast<std::int64_t>(values.size());
  if (values.empty()) return m;
  CompensatedSum s;
  for (double v : values) s.add(v);
  m.mean = s.value() / static_cast<double>(values.size());
  if (values.size() < 2) return m;
  CompensatedSum sq;
  for (double v : values) sq.add((v - m.mean) * (v - m.mean));
  const double n = static_cast<double>(values.size());
  m.std_err = std::sqrt(sq.value() / (n - 1) / n);
  return m;
}

DiffusionEstimate covariance_with_jackknife(const std::vector<std::array<double, kMaxDim>>& v,
                                            int dim) {
  DiffusionEstimate est;
  est.dim = dim;
  est.method = DiffusionEstimate::Method::kEmpirical;
  est.samples = static_cast<std::int64_t>(v.size());
  const std::int64_t n64 = est.samples;
  if (n64 < 3) throw Error("covariance estimate needs at least 3 samples");
  const double n = static_cast<double>(n64);

  std::array<double, kMaxDim> sum{};
  std::array<std::array<double, kMaxDim>, kMaxDim> sumsq{};
  {
    std::array<CompensatedSum, kMaxDim> cs;
    std::array<std::array<CompensatedSum, kMaxDim>, kMaxDim> cq;
    for (const auto& w : v)
      for (int i = 0; i < dim; ++i) {
        cs[i].add(w[i]);
        for (int j = i; j < dim; ++j) cq[i][j].add(w[i] * w[j]);
      }
    for (int i = 0; i < dim; ++i) {
      sum[i] = cs[i].value();
      for (int j = i; j < dim; ++j) sumsq[i][j] = cq[i][j].value();
    }
  }

  auto cov_from_sums = [](double sij, double si, double sj, double count) {
    return (sij - si * sj / count) / (count - 1);
  };

  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      est.d_matrix[i][j] = cov_from_sums(sumsq[i][j], sum[i], sum[j], n);
      est.d_matrix[j][i] = est.d_matrix[i][j];
    }

  // Delete-1 jackknife: each leave-one-out covariance is a closed form of
  // the global sums, so the sweep is O(n d^2).
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) {
      CompensatedSum acc, acc2;
      for (const auto& w : v) {
        const double si = sum[i] - w[i];
        const double sj = sum[j] - w[j];
        const double sij = sumsq[i][j] - w[i] * w[j];
        const double theta = cov_from_sums(sij, si, sj, n - 1);
        acc.add(theta);
        acc2.add(theta * theta);
      }
      const double mean_theta = acc.value() / n;
      const double var_jack = (n - 1) / n * (acc2.value() - n * mean_theta * mean_theta);
      est.std_err[i][j] = std::sqrt(std::max(0.0, var_jack));
      est.std_err[j][i] = est.std_err[i][j];
    }
  return est;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

namespace {

double kolmogorov_q(double lambda) {
  if (lambda <= 0) return 1.0;
  double sum = 0;
  double sign = 1;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    sign = -sign;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_against_normal(std::vector<double> samples, double variance) {
  KsResult r;
  r.samples = static_cast<std::int64_t>(samples.size());
  r.variance_used = variance;
  if (samples.empty()) throw Error("KS test on empty sample");
  if (!(variance > 0)) throw Error("KS test against degenerate variance");
  std::sort(samples.begin(), samples.end());
  const double sd = std::sqrt(variance);
  const double n = static_cast<double>(samples.size());
  double d_stat = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = normal_cdf(samples[i] / sd);
    const double hi = (static_cast<double>(i) + 1.0) / n - f;
    const double lo = f - static_cast<double>(i) / n;
    d_stat = std::max({d_stat, hi, lo});
  }
  r.statistic = d_stat;
  const double sqn = std::sqrt(n);
  r.p_value = kolmogorov_q((sqn + 0.12 + 0.11 / sqn) * d_stat);
  return r;
}

MannKendall mann_kendall(const std::vector<double>& series) {
  MannKendall mk;
  mk.points = static_cast<std::int64_t>(series.size());
  const std::size_t n = series.size();
  if (n < 3) return mk;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double diff = series[j] - series[i];
      mk.s += diff > 0 ? 1 : (diff < 0 ? -1 : 0);
    }
  const double nn = static_cast<double>(n);
  const double var = nn * (nn - 1) * (2 * nn + 5) / 18.0;
  double s = static_cast<double>(mk.s);
  if (s > 0) s -= 1;
  else if (s < 0) s += 1;
  mk.z = s / std::sqrt(var);
  return mk;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  LineFit f;
  if (x.size() != y.size() || x.size() < 3)
    throw Error("line fit needs at least 3 matched points");
  f.points = static_cast<int>(x.size());
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double sxx_c = sxx - sx * sx / n;
  if (sxx_c <= 0) throw Error("line fit with degenerate abscissae");
  f.slope = (sxy - sx * sy / n) / sxx_c;
  f.intercept = (sy - f.slope * sx) / n;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss_res += r * r;
  }
  const double sigma2 = ss_res / (n - 2);
  f.slope_std_err = std::sqrt(sigma2 / sxx_c);
  f.t_stat = f.slope_std_err > 0 ? f.slope / f.slope_std_err : 0;
  return f;
}

double chi_square_uniform(const std::vector<std::int64_t>& counts) {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  if (counts.empty() || total == 0) return 0;
  const double expected = static_cast<double>(total) / static_cast<double>(counts.size());
  double x2 = 0;
  for (auto c : counts) {
    const double diff = static_cast<double>(c) - expected;
    x2 += diff * diff / expected;
  }
  return x2;
}

}  // namespace rwdpp
