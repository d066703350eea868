#include "rwdpp/oracle.hpp"

#include <algorithm>
#include <cmath>

#include "rwdpp/estimates.hpp"

namespace rwdpp::oracle {

ExactChain ExactChain::build(const corrector::PeriodicEnvironment& penv) {
  ExactChain chain;
  chain.two_d_ = 2 * penv.dim();
  const std::int64_t n = penv.n_occupied();
  chain.row_ptr_.reserve(static_cast<std::size_t>(n) + 1);
  chain.row_ptr_.push_back(0);

  std::vector<std::int32_t> targets;
  for (std::int32_t rank = 0; rank < n; ++rank) {
    targets.clear();
    for (int dir = 0; dir < chain.two_d_; ++dir) targets.push_back(penv.jump(rank, dir).to);
    std::sort(targets.begin(), targets.end());
    for (std::size_t i = 0; i < targets.size();) {
      std::size_t j = i;
      while (j < targets.size() && targets[j] == targets[i]) ++j;
      chain.col_.push_back(targets[i]);
      chain.mult_.push_back(static_cast<std::int32_t>(j - i));
      i = j;
    }
    chain.row_ptr_.push_back(static_cast<std::int64_t>(chain.col_.size()));
  }
  return chain;
}

std::vector<double> ExactChain::apply(const std::vector<double>& v) const {
  const std::int64_t n = n_states();
  if (static_cast<std::int64_t>(v.size()) != n) throw Error("chain apply: size mismatch");
  std::vector<double> out(v.size(), 0.0);
  std::vector<double> comp(v.size(), 0.0);
  const double inv = 1.0 / static_cast<double>(two_d_);
  for (std::int64_t row = 0; row < n; ++row) {
    const double mass = v[static_cast<std::size_t>(row)];
    if (mass == 0.0) continue;
    for (std::int64_t k = row_ptr_[static_cast<std::size_t>(row)];
         k < row_ptr_[static_cast<std::size_t>(row) + 1]; ++k) {
      const auto c = static_cast<std::size_t>(col_[static_cast<std::size_t>(k)]);
      const double add = mass * inv * static_cast<double>(mult_[static_cast<std::size_t>(k)]);
      // Neumaier step on the target entry.
      const double t = out[c] + add;
      if (std::abs(out[c]) >= std::abs(add))
        comp[c] += (out[c] - t) + add;
      else
        comp[c] += (add - t) + out[c];
      out[c] = t;
    }
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += comp[i];
  return out;
}

std::vector<std::int64_t> ExactChain::column_multiplicities() const {
  std::vector<std::int64_t> sums(static_cast<std::size_t>(n_states()), 0);
  for (std::size_t k = 0; k < col_.size(); ++k)
    sums[static_cast<std::size_t>(col_[k])] += mult_[k];
  return sums;
}

std::vector<double> exact_distribution(const ExactChain& chain, std::int32_t start_rank,
                                       std::int64_t n) {
  std::vector<double> v(static_cast<std::size_t>(chain.n_states()), 0.0);
  v[static_cast<std::size_t>(start_rank)] = 1.0;
  for (std::int64_t k = 0; k < n; ++k) v = chain.apply(v);
  return v;
}

std::vector<double> exact_ct_distribution(const ExactChain& chain, std::int32_t start_rank,
                                          double t, double tail_tol) {
  if (t < 0) throw Error("exact_ct_distribution: negative time");
  if (t > 500) throw Error("exact_ct_distribution: t too large for direct Poisson weights");
  std::vector<double> v(static_cast<std::size_t>(chain.n_states()), 0.0);
  v[static_cast<std::size_t>(start_rank)] = 1.0;
  std::vector<CompensatedSum> acc(v.size());

  double weight = std::exp(-t);
  double covered = 0;
  for (std::int64_t n = 0;; ++n) {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0.0) acc[i].add(weight * v[i]);
    covered += weight;
    if (1.0 - covered < tail_tol) break;
    v = chain.apply(v);
    weight *= t / static_cast<double>(n + 1);
  }

  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = acc[i].value();
  return out;
}

namespace {

__int128 gcd128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 r = a % b;
    a = b;
    b = r;
  }
  return a;
}

}  // namespace

void Rational::reduce() {
  if (den == 0) throw Error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const __int128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

double Rational::to_double() const {
  return static_cast<double>(static_cast<long double>(num) / static_cast<long double>(den));
}

std::string Rational::to_string() const {
  auto print128 = [](__int128 v) {
    if (v == 0) return std::string("0");
    const bool neg = v < 0;
    if (neg) v = -v;
    std::string s;
    while (v > 0) {
      s.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
      v /= 10;
    }
    if (neg) s.push_back('-');
    std::reverse(s.begin(), s.end());
    return s;
  };
  return print128(num) + "/" + print128(den);
}

Rational enumerate_probability(const Box& window, Rational p,
                               const std::function<bool(const env::WindowGrid&)>& predicate) {
  const std::int64_t volume = window.volume();
  if (volume < 1 || volume > 24)
    throw Error("enumerate_probability: window volume must be in [1,24]");
  p.reduce();
  if (p.num < 0 || p.num > p.den) throw Error("enumerate_probability: p outside [0,1]");
  if (p.den > 64) throw Error("enumerate_probability: denominator too large for exact powers");

  const __int128 num1 = p.num;             // weight of an occupied site
  const __int128 num0 = p.den - p.num;     // weight of an empty site

  // Precompute num1^k and num0^k for k <= volume.
  std::vector<__int128> pow1(static_cast<std::size_t>(volume) + 1, 1);
  std::vector<__int128> pow0(static_cast<std::size_t>(volume) + 1, 1);
  for (std::int64_t k = 1; k <= volume; ++k) {
    pow1[static_cast<std::size_t>(k)] = pow1[static_cast<std::size_t>(k - 1)] * num1;
    pow0[static_cast<std::size_t>(k)] = pow0[static_cast<std::size_t>(k - 1)] * num0;
  }

  env::WindowGrid grid;
  grid.box = window;
  grid.bits.assign(static_cast<std::size_t>(volume), 0);

  __int128 numerator = 0;
  const std::uint32_t n_patterns = 1u << volume;
  for (std::uint32_t mask = 0; mask < n_patterns; ++mask) {
    int ones = 0;
    for (std::int64_t i = 0; i < volume; ++i) {
      const bool bit = (mask >> i) & 1u;
      grid.bits[static_cast<std::size_t>(i)] = bit ? 1 : 0;
      ones += bit ? 1 : 0;
    }
    if (predicate(grid))
      numerator += pow1[static_cast<std::size_t>(ones)] *
                   pow0[static_cast<std::size_t>(volume - ones)];
  }

  Rational result;
  result.num = numerator;
  result.den = 1;
  for (std::int64_t k = 0; k < volume; ++k) result.den *= p.den;
  result.reduce();
  return result;
}

namespace {

struct PathSearch {
  const env::WindowGrid& window;
  const Site& target;
  std::int64_t max_len;
  std::int64_t state_cap;
  std::int64_t states = 0;
  std::int64_t best = -1;  // -1: unreached so far
  std::vector<Site> on_path;

  // Nearest occupied site from x along dir, inside the window; nullopt when
  // the scan exits the window first.
  std::optional<Site> window_neighbor(const Site& x, int dir) const {
    const Site e = unit_step(dir);
    Site y = x;
    for (;;) {
      y = y + e;
      if (!window.contains(y)) return std::nullopt;
      if (window.at(y)) return y;
    }
  }

  void dfs(const Site& x, std::int64_t len) {
    if (++states > state_cap)
      throw Error("brute_force_paths: state cap exceeded (" + std::to_string(state_cap) + ")");
    if (x == target) {
      if (best < 0 || len < best) best = len;
      return;
    }
    if (len >= max_len) return;
    if (best >= 0 && len + 1 >= best) return;
    for (int dir = 0; dir < 2 * window.box.dim; ++dir) {
      const auto next = window_neighbor(x, dir);
      if (!next) continue;
      if (std::find(on_path.begin(), on_path.end(), *next) != on_path.end()) continue;
      on_path.push_back(*next);
      dfs(*next, len + 1);
      on_path.pop_back();
    }
  }
};

}  // namespace

std::optional<std::int64_t> brute_force_paths(const env::WindowGrid& window, const Site& x,
                                              const Site& y, std::int64_t max_len,
                                              std::int64_t state_cap) {
  if (!window.contains(x) || !window.at(x)) throw Error("brute_force_paths: x not occupied");
  if (!window.contains(y) || !window.at(y)) throw Error("brute_force_paths: y not occupied");
  PathSearch search{window, y, max_len, state_cap};
  search.on_path.push_back(x);
  search.dfs(x, 0);
  if (search.best < 0) return std::nullopt;
  return search.best;
}

}  // namespace rwdpp::oracle
