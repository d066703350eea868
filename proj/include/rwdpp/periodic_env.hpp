#ifndef RWDPP_PERIODIC_ENV_HPP
#define RWDPP_PERIODIC_ENV_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "rwdpp/environment.hpp"
#include "rwdpp/lattice.hpp"
#include "rwdpp/rng.hpp"

namespace rwdpp::corrector {

// Finite-volume surrogate for the infinite environment: an occupancy grid on
// a torus with wrap-aware jump lengths. Valid only when every axis line of
// the fundamental domain holds at least one occupied site, so every gamma
// scan terminates.
class PeriodicEnvironment {
 public:
  struct Jump {
    std::int32_t to = 0;     // occupied-site rank of the torus neighbor
    std::int32_t disp = 0;   // signed jump length along the direction's axis
  };

  PeriodicEnvironment(int dim, std::array<std::int64_t, kMaxDim> sides,
                      std::vector<std::uint8_t> occupancy);

  // Materializes env over the window [0, side)^d.
  static PeriodicEnvironment sample(const env::Environment& e, std::int64_t side);

  int dim() const { return dim_; }
  std::int64_t side(int axis) const { return sides_[static_cast<std::size_t>(axis)]; }
  std::int64_t n_cells() const { return static_cast<std::int64_t>(bits_.size()); }
  std::int64_t n_occupied() const { return static_cast<std::int64_t>(occupied_cells_.size()); }

  bool occupied(const Site& x) const { return bits_[static_cast<std::size_t>(cell_of(x))] != 0; }
  // Rank of an occupied site; -1 for empty cells. Coordinates are reduced
  // modulo the torus, so Z^d walk positions fold directly.
  std::int32_t rank_at(const Site& x) const {
    return rank_of_cell_[static_cast<std::size_t>(cell_of(x))];
  }
  Site site_of_rank(std::int32_t rank) const;

  const Jump& jump(std::int32_t rank, int dir) const {
    return jumps_[static_cast<std::size_t>(rank) * static_cast<std::size_t>(2 * dim_) +
                  static_cast<std::size_t>(dir)];
  }

  // Lexicographically smallest occupied site of the fundamental domain.
  Site anchor_site() const { return site_of_rank(anchor_rank_); }
  std::int32_t anchor_rank() const { return anchor_rank_; }

  // The law of the walk on this torus, unrolled to Z^d.
  env::ProcessSpec as_process_spec() const;

 private:
  std::int64_t cell_of(const Site& x) const {
    std::int64_t idx = 0, stride = 1;
    for (int i = 0; i < dim_; ++i) {
      const std::int64_t s = sides_[static_cast<std::size_t>(i)];
      const std::int64_t r = ((x[i] % s) + s) % s;
      idx += r * stride;
      stride *= s;
    }
    return idx;
  }

  int dim_;
  std::array<std::int64_t, kMaxDim> sides_{};
  std::vector<std::uint8_t> bits_;                 // x1-fastest
  std::vector<std::int32_t> rank_of_cell_;         // -1 for empty cells
  std::vector<std::int64_t> occupied_cells_;       // rank -> cell index
  std::vector<Jump> jumps_;                        // rank-major, dir-minor
  std::int32_t anchor_rank_ = 0;
};

// Walk on the torus via the precomputed jump table. Consumes exactly one
// uniform per step from the same stream discipline as walk::simulate, so a
// torus walk and a lazy walk on as_process_spec() share paths bit for bit.
class TorusWalker {
 public:
  TorusWalker(const PeriodicEnvironment& penv, std::int32_t start_rank)
      : penv_(&penv), rank_(start_rank) {}

  void step(rng::Stream& steps) {
    const int dir = steps.uniform_index(2 * penv_->dim());
    const auto& j = penv_->jump(rank_, dir);
    displacement_[axis_of(dir)] += j.disp;
    rank_ = j.to;
  }

  std::int32_t rank() const { return rank_; }
  const Site& displacement() const { return displacement_; }

 private:
  const PeriodicEnvironment* penv_;
  std::int32_t rank_;
  Site displacement_{};
};

}  // namespace rwdpp::corrector

#endif  // RWDPP_PERIODIC_ENV_HPP
