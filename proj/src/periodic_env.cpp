#include "rwdpp/periodic_env.hpp"

namespace rwdpp::corrector {

PeriodicEnvironment::PeriodicEnvironment(int dim, std::array<std::int64_t, kMaxDim> sides,
                                         std::vector<std::uint8_t> occupancy)
    : dim_(dim), sides_(sides), bits_(std::move(occupancy)) {
  if (dim < 1 || dim > kMaxDim) throw Error("periodic environment: bad dimension");
  std::int64_t volume = 1;
  for (int i = 0; i < dim_; ++i) {
    if (sides_[static_cast<std::size_t>(i)] < 1)
      throw Error("periodic environment: sides must be >= 1");
    volume *= sides_[static_cast<std::size_t>(i)];
  }
  if (static_cast<std::int64_t>(bits_.size()) != volume)
    throw Error("periodic environment: occupancy size does not match sides");

  rank_of_cell_.assign(bits_.size(), -1);
  for (std::size_t cell = 0; cell < bits_.size(); ++cell)
    if (bits_[cell]) {
      rank_of_cell_[cell] = static_cast<std::int32_t>(occupied_cells_.size());
      occupied_cells_.push_back(static_cast<std::int64_t>(cell));
    }
  if (occupied_cells_.empty()) throw Error("periodic environment: no occupied sites");

  // Every axis line must meet the point process, otherwise gamma is
  // undefined on the torus.
  for (int axis = 0; axis < dim_; ++axis) {
    const std::int64_t s = sides_[static_cast<std::size_t>(axis)];
    std::int64_t lines = volume / s;
    for (std::int64_t line = 0; line < lines; ++line) {
      // Decode the transverse coordinates of this line.
      Site x;
      std::int64_t rem = line;
      for (int i = 0; i < dim_; ++i) {
        if (i == axis) continue;
        const std::int64_t side_i = sides_[static_cast<std::size_t>(i)];
        x[i] = rem % side_i;
        rem /= side_i;
      }
      bool hit = false;
      for (std::int64_t k = 0; k < s && !hit; ++k) {
        x[axis] = k;
        hit = occupied(x);
      }
      if (!hit)
        throw Error("periodic environment: axis " + std::to_string(axis + 1) +
                    " has an empty line; gamma is undefined on this torus");
    }
  }

  // Precompute wrap-aware jumps for every occupied site and direction.
  jumps_.resize(occupied_cells_.size() * static_cast<std::size_t>(2 * dim_));
  for (std::int32_t rank = 0; rank < static_cast<std::int32_t>(occupied_cells_.size()); ++rank) {
    const Site x = site_of_rank(rank);
    for (int dir = 0; dir < 2 * dim_; ++dir) {
      const int axis = axis_of(dir);
      const int sgn = sign_of(dir);
      const std::int64_t s = sides_[static_cast<std::size_t>(axis)];
      Site y = x;
      std::int64_t k = 1;
      for (; k <= s; ++k) {
        y[axis] = ((x[axis] + sgn * k) % s + s) % s;
        if (occupied(y)) break;
      }
      Jump j;
      j.to = rank_at(y);
      j.disp = static_cast<std::int32_t>(sgn * k);
      jumps_[static_cast<std::size_t>(rank) * static_cast<std::size_t>(2 * dim_) +
             static_cast<std::size_t>(dir)] = j;
    }
  }

  anchor_rank_ = 0;
  Site best = site_of_rank(0);
  for (std::int32_t rank = 1; rank < static_cast<std::int32_t>(occupied_cells_.size()); ++rank) {
    const Site cand = site_of_rank(rank);
    if (cand < best) {
      best = cand;
      anchor_rank_ = rank;
    }
  }
}

PeriodicEnvironment PeriodicEnvironment::sample(const env::Environment& e, std::int64_t side) {
  Box box;
  box.dim = e.dim();
  for (int i = 0; i < e.dim(); ++i) {
    box.lo[i] = 0;
    box.hi[i] = side - 1;
  }
  env::WindowGrid grid = e.window(box);
  std::array<std::int64_t, kMaxDim> sides{};
  for (int i = 0; i < e.dim(); ++i) sides[static_cast<std::size_t>(i)] = side;
  return PeriodicEnvironment(e.dim(), sides, std::move(grid.bits));
}

Site PeriodicEnvironment::site_of_rank(std::int32_t rank) const {
  std::int64_t cell = occupied_cells_[static_cast<std::size_t>(rank)];
  Site x;
  for (int i = 0; i < dim_; ++i) {
    const std::int64_t s = sides_[static_cast<std::size_t>(i)];
    x[i] = cell % s;
    cell /= s;
  }
  return x;
}

env::ProcessSpec PeriodicEnvironment::as_process_spec() const {
  return env::ProcessSpec::periodic(dim_, bits_, sides_);
}

}  // namespace rwdpp::corrector
