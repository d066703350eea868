#include "rwdpp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_set>

#include "rwdpp/parallel.hpp"
#include "rwdpp/rng.hpp"

namespace rwdpp::graph {

std::int64_t NeighborMap::gamma(const Site& x, int dir) const {
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(x);
    if (it != cache_.end() && it->second[static_cast<std::size_t>(dir)] != 0)
      return it->second[static_cast<std::size_t>(dir)];
  }
  const std::int64_t g = env_->gamma(x, dir, gamma_cap_);
  {
    std::lock_guard<std::mutex> lock(mu_);
    cache_[x][static_cast<std::size_t>(dir)] = g;
  }
  return g;
}

std::vector<Site> NeighborMap::neighbors(const Site& x) const {
  if (!env_->occupancy(x))
    throw Error("neighbors: site " + to_string(x, dim()) + " is not occupied");
  std::vector<Site> out;
  out.reserve(static_cast<std::size_t>(2 * dim()));
  for (int dir = 0; dir < 2 * dim(); ++dir) {
    Site y = x;
    y[axis_of(dir)] += sign_of(dir) * gamma(x, dir);
    out.push_back(y);
  }
  return out;
}

DistanceResult graph_distance(const NeighborMap& nm, const Site& x, const Site& y,
                              const std::optional<Box>& confinement, std::int64_t hop_cap) {
  if (!nm.environment().occupancy(x) || !nm.environment().occupancy(y))
    throw Error("graph_distance: endpoints must be occupied");
  DistanceResult res;
  if (confinement && (!confinement->contains(x) || !confinement->contains(y))) {
    res.status = DistanceResult::Status::kDisconnected;
    return res;
  }
  if (x == y) {
    res.status = DistanceResult::Status::kReached;
    res.hops = 0;
    return res;
  }

  const int dim = nm.dim();
  std::unordered_map<Site, std::int64_t, SiteHash> dist;
  std::deque<Site> queue;
  dist.emplace(x, 0);
  queue.push_back(x);
  bool truncated_frontier = false;

  while (!queue.empty()) {
    const Site cur = queue.front();
    queue.pop_front();
    const std::int64_t d = dist.at(cur);
    if (d >= hop_cap) {
      truncated_frontier = true;
      continue;
    }
    for (int dir = 0; dir < 2 * dim; ++dir) {
      Site next = cur;
      next[axis_of(dir)] += sign_of(dir) * nm.gamma(cur, dir);
      if (confinement && !confinement->contains(next)) continue;
      if (dist.count(next)) continue;
      if (next == y) {
        res.status = DistanceResult::Status::kReached;
        res.hops = d + 1;
        return res;
      }
      dist.emplace(next, d + 1);
      queue.push_back(next);
    }
  }
  res.status = truncated_frontier ? DistanceResult::Status::kTruncated
                                  : DistanceResult::Status::kDisconnected;
  return res;
}

bool is_blocked(const env::Environment& e, const Site& x, std::int64_t L) {
  if (L < 1) throw Error("is_blocked: L must be >= 1");
  const int dim = e.dim();
  Box box;
  box.dim = dim;
  for (int i = 0; i < dim; ++i) {
    box.lo[i] = x[i] - L;
    box.hi[i] = x[i] + L - 1;
  }
  const env::WindowGrid grid = e.window(box);

  for (int axis = 0; axis < dim; ++axis) {
    // Sweep all transverse positions of lines parallel to this axis.
    Site pos = box.lo;
    for (;;) {
      bool hit = false;
      for (std::int64_t k = box.lo[axis]; k <= box.hi[axis] && !hit; ++k) {
        Site s = pos;
        s[axis] = k;
        hit = grid.at(s);
      }
      if (!hit) return false;
      int i = 0;
      while (i < dim && (i == axis || pos[i] == box.hi[i])) {
        if (i != axis) pos[i] = box.lo[i];
        ++i;
      }
      if (i == dim) break;
      ++pos[i];
    }
  }
  return true;
}

ProbabilityEstimate estimate_p_L(const env::ProcessSpec& spec, std::int64_t L,
                                 std::int64_t samples, std::uint64_t seed, int jobs) {
  if (samples < 1) throw Error("estimate_p_L: samples must be >= 1");
  std::vector<std::int64_t> chunk_hits(static_cast<std::size_t>(chunk_count(samples)), 0);
  parallel_chunks(samples, jobs, [&](std::int64_t chunk, std::int64_t begin, std::int64_t end) {
    std::int64_t hits = 0;
    for (std::int64_t s = begin; s < end; ++s) {
      const std::uint64_t env_seed =
          rng::derive(seed, rng::Role::kEnvReplicate, static_cast<std::uint64_t>(s));
      env::Environment e(spec, env_seed, /*condition_on_origin=*/false);
      if (!is_blocked(e, Site{}, L)) ++hits;
    }
    chunk_hits[static_cast<std::size_t>(chunk)] = hits;
  });
  std::int64_t hits = 0;
  for (auto h : chunk_hits) hits += h;
  return wilson_interval(hits, samples);
}

namespace {

// Order used to root each animal at its minimal cell: compare coordinate
// tuples from the highest axis down.
bool less_than_origin(const Site& x, int dim) {
  for (int i = dim - 1; i >= 0; --i) {
    if (x[i] != 0) return x[i] < 0;
  }
  return false;
}

struct AnimalCounter {
  int dim;
  int max_size;
  std::int64_t fixed_count = 0;  // animals of size exactly max_size, rooted at origin
  std::unordered_set<Site, SiteHash> reached;

  void recurse(std::vector<Site> untried, int size) {
    while (!untried.empty()) {
      const Site cell = untried.back();
      untried.pop_back();
      if (size + 1 == max_size) {
        ++fixed_count;
        continue;
      }
      std::vector<Site> added;
      for (int dir = 0; dir < 2 * dim; ++dir) {
        const Site nc = cell + unit_step(dir);
        if (less_than_origin(nc, dim)) continue;
        if (reached.count(nc)) continue;
        reached.insert(nc);
        added.push_back(nc);
      }
      std::vector<Site> next = untried;
      next.insert(next.end(), added.begin(), added.end());
      recurse(std::move(next), size + 1);
      for (const Site& nc : added) reached.erase(nc);
    }
  }
};

}  // namespace

std::int64_t count_lattice_animals(int dim, int n) {
  if (dim < 1 || dim > kMaxDim) throw Error("count_lattice_animals: bad dimension");
  if (n < 1 || n > 12) throw Error("count_lattice_animals: size must be in [1,12]");
  if (n == 1) return 1;

  AnimalCounter counter{dim, n};
  counter.reached.insert(Site{});
  std::vector<Site> untried;
  for (int dir = 0; dir < 2 * dim; ++dir) {
    const Site nc = unit_step(dir);
    if (less_than_origin(nc, dim)) continue;
    counter.reached.insert(nc);
    untried.push_back(nc);
  }
  counter.recurse(std::move(untried), 1);
  // Fixed translation classes, times the n placements of the origin.
  return counter.fixed_count * n;
}

namespace {

// Breadth-first reachability inside a materialized window: hops go to the
// nearest occupied site along each axis, skipped when the scan exits the
// window (the environment's gamma-neighbor would leave the slab).
std::unordered_set<Site, SiteHash> window_reachable(const env::WindowGrid& grid, const Site& from) {
  std::unordered_set<Site, SiteHash> visited;
  std::deque<Site> queue;
  visited.insert(from);
  queue.push_back(from);
  while (!queue.empty()) {
    const Site cur = queue.front();
    queue.pop_front();
    for (int dir = 0; dir < 2 * grid.box.dim; ++dir) {
      const Site e = unit_step(dir);
      Site y = cur;
      for (;;) {
        y = y + e;
        if (!grid.contains(y)) break;
        if (!grid.at(y)) continue;
        if (!visited.count(y)) {
          visited.insert(y);
          queue.push_back(y);
        }
        break;
      }
    }
  }
  return visited;
}

bool all_occupied_reached(const env::WindowGrid& grid,
                          const std::unordered_set<Site, SiteHash>& visited, const Box& sweep) {
  Site x = sweep.lo;
  const std::int64_t volume = sweep.volume();
  for (std::int64_t idx = 0; idx < volume; ++idx) {
    if (grid.contains(x) && grid.at(x) && !visited.count(x)) return false;
    int i = 0;
    while (i < sweep.dim && x[i] == sweep.hi[i]) {
      x[i] = sweep.lo[i];
      ++i;
    }
    if (i < sweep.dim) ++x[i];
  }
  return true;
}

void check_window_volume(const Box& box, std::int64_t cap, const char* who) {
  double volume = 1;
  for (int i = 0; i < box.dim; ++i) volume *= static_cast<double>(box.side(i));
  if (volume > static_cast<double>(cap))
    throw Error(std::string(who) + ": window volume exceeds cap");
}

}  // namespace

bool event_E_theta_n(const env::Environment& e, std::int64_t n, double theta, double lambda,
                     const EventCaps& caps) {
  if (!e.occupancy(Site{})) throw Error("event_E_theta_n: origin not occupied");
  if (n < 1 || theta <= 0 || lambda <= 0) throw Error("event_E_theta_n: bad parameters");
  const double radius = lambda * std::pow(static_cast<double>(n), theta);
  const std::int64_t r = static_cast<std::int64_t>(std::floor(radius));
  if (r < 0) return false;
  const Box confinement = Box::cube(r, e.dim());
  check_window_volume(confinement, caps.window_volume, "event_E_theta_n");
  const env::WindowGrid grid = e.window(confinement, caps.window_volume);
  const auto visited = window_reachable(grid, Site{});
  return all_occupied_reached(grid, visited, Box::cube(n, e.dim()));
}

namespace {

bool slab_event(const env::Environment& e, const Box& slab, const Site& start,
                const EventCaps& caps, const char* who) {
  if (!e.occupancy(start)) throw Error(std::string(who) + ": start site not occupied");
  if (!slab.contains(start)) throw Error(std::string(who) + ": start site outside slab");
  check_window_volume(slab, caps.window_volume, who);
  const env::WindowGrid grid = e.window(slab, caps.window_volume);
  const auto visited = window_reachable(grid, start);
  return all_occupied_reached(grid, visited, slab);
}

}  // namespace

bool event_F(const env::Environment& e, int i, std::int64_t n, const Site& x,
             const EventCaps& caps) {
  if (i < 2 || i > e.dim()) throw Error("event_F: require 2 <= i <= d");
  Box slab;
  slab.dim = e.dim();
  for (int a = 0; a < e.dim(); ++a) {
    if (a < i) {
      slab.lo[a] = -n;
      slab.hi[a] = n;
    } else {
      slab.lo[a] = x[a];
      slab.hi[a] = x[a];
    }
  }
  return slab_event(e, slab, x, caps, "event_F");
}

bool event_G(const env::Environment& e, int i, std::int64_t n, const Site& x,
             const EventCaps& caps) {
  if (i < 2 || i > e.dim()) throw Error("event_G: require 2 <= i <= d");
  Box slab;
  slab.dim = e.dim();
  for (int a = 0; a < e.dim(); ++a) {
    // Axis 1 pinned to x_1; axes 2..i+1 ranged (clamped to d); rest pinned.
    if (a >= 1 && a <= i && a < e.dim()) {
      slab.lo[a] = -n;
      slab.hi[a] = n;
    } else {
      slab.lo[a] = x[a];
      slab.hi[a] = x[a];
    }
  }
  return slab_event(e, slab, x, caps, "event_G");
}

bool event_H(const env::Environment& e, int i, std::int64_t n, const Site& z,
             const EventCaps& caps) {
  if (i < 2 || i > e.dim()) throw Error("event_H: require 2 <= i <= d");
  Box window;
  window.dim = e.dim();
  for (int a = 0; a < e.dim(); ++a) {
    if (a == 0 || a < i) {
      window.lo[a] = -n;
      window.hi[a] = n;
    } else {
      window.lo[a] = z[a];
      window.hi[a] = z[a];
    }
  }
  check_window_volume(window, caps.window_volume, "event_H");
  const env::WindowGrid grid = e.window(window, caps.window_volume);

  for (std::int64_t k = -n; k <= n; ++k) {
    bool found = false;
    // Sweep the free coordinates w_2..w_i at first coordinate k.
    Site w;
    w[0] = k;
    for (int a = 1; a < e.dim(); ++a) w[a] = a < i ? -n : z[a];
    for (;;) {
      if (grid.at(w)) {
        found = true;
        break;
      }
      int a = 1;
      while (a < i && w[a] == n) {
        w[a] = -n;
        ++a;
      }
      if (a >= i) break;
      ++w[a];
    }
    if (!found) return false;
  }
  return true;
}

namespace {

bool lambda0_shifted(const env::Environment& e, std::int64_t shift1, std::int64_t u,
                     std::int64_t L) {
  for (std::int64_t j = 1; j <= L; ++j)
    if (e.occupancy(Site{shift1, u - j})) return true;
  return false;
}

}  // namespace

bool event_Lambda(const env::Environment& e, int which, std::int64_t u, double delta,
                  std::int64_t L, std::int64_t n, std::int64_t ell) {
  if (e.dim() != 2) throw Error("event_Lambda: defined for d = 2 only");
  switch (which) {
    case 0:
      return lambda0_shifted(e, 0, u, L);
    case 1: {
      if (!(delta > 0 && delta < 1)) throw Error("event_Lambda: delta must be in (0,1)");
      std::int64_t count = 0;
      for (std::int64_t i = -n; i <= n; ++i)
        if (lambda0_shifted(e, i, u, L)) ++count;
      return static_cast<double>(count) > (1.0 - delta) * static_cast<double>(2 * n + 1);
    }
    case 2: {
      if (ell < 1 || ell > L) throw Error("event_Lambda: require 1 <= ell <= L");
      for (std::int64_t j = ell; j <= L; ++j) {
        bool found = false;
        for (std::int64_t i = 0; i <= n && !found; ++i)
          found = e.occupancy(Site{i, 0}) && e.occupancy(Site{i, u - j});
        if (!found) return false;
      }
      for (std::int64_t m = 0; m <= ell - 1; ++m) {
        bool found = false;
        for (std::int64_t k = 0; k <= n && !found; ++k)
          found = e.occupancy(Site{k, u - m}) && e.occupancy(Site{k, u - (m + ell)});
        if (!found) return false;
      }
      return true;
    }
    default:
      throw Error("event_Lambda: which must be 0, 1 or 2");
  }
}

MNResult compute_M_N(const env::Environment& e, std::int64_t search_cap) {
  if (!e.occupancy(Site{})) throw Error("compute_M_N: origin not occupied");
  if (search_cap < 1) throw Error("compute_M_N: search cap must be >= 1");
  const int dim = e.dim();

  // Running max of gamma over the ball B_inf(0, n), shell by shell.
  std::vector<std::int64_t> g_at(static_cast<std::size_t>(search_cap) + 1, 0);
  std::int64_t running = 0;
  std::int64_t last_violation = 0;
  for (std::int64_t n = 0; n <= search_cap; ++n) {
    Box shell_box = Box::cube(n, dim);
    Site x = shell_box.lo;
    const std::int64_t volume = shell_box.volume();
    for (std::int64_t idx = 0; idx < volume; ++idx) {
      if (linf_norm(x) == n) {
        for (int dir = 0; dir < 2 * dim; ++dir)
          running = std::max(running, e.gamma(x, dir));
      }
      int i = 0;
      while (i < dim && x[i] == shell_box.hi[i]) {
        x[i] = shell_box.lo[i];
        ++i;
      }
      if (i < dim) ++x[i];
    }
    g_at[static_cast<std::size_t>(n)] = running;
    if (n >= 1 && running > n) last_violation = n;
  }

  MNResult res;
  res.search_cap = search_cap;
  res.m_valid = last_violation < search_cap;
  res.m = last_violation + 1;
  res.n = res.m_valid ? res.m + g_at[static_cast<std::size_t>(res.m)] : 0;
  return res;
}

}  // namespace rwdpp::graph
