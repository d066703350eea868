#ifndef RWDPP_LATTICE_HPP
#define RWDPP_LATTICE_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>

namespace rwdpp {

// Dimensions 1..kMaxDim are supported at runtime; coordinates above the
// active dimension must stay zero so that hashing and comparison are
// dimension-agnostic.
inline constexpr int kMaxDim = 4;

class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct Site {
  std::array<std::int64_t, kMaxDim> c{};

  Site() = default;
  Site(std::int64_t x1) { c[0] = x1; }
  Site(std::int64_t x1, std::int64_t x2) {
    c[0] = x1;
    c[1] = x2;
  }
  Site(std::int64_t x1, std::int64_t x2, std::int64_t x3) {
    c[0] = x1;
    c[1] = x2;
    c[2] = x3;
  }

  std::int64_t& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
  std::int64_t operator[](int i) const { return c[static_cast<std::size_t>(i)]; }

  friend bool operator==(const Site& a, const Site& b) { return a.c == b.c; }
  friend bool operator!=(const Site& a, const Site& b) { return a.c != b.c; }
  friend bool operator<(const Site& a, const Site& b) { return a.c < b.c; }

  friend Site operator+(Site a, const Site& b) {
    for (int i = 0; i < kMaxDim; ++i) a.c[i] += b.c[i];
    return a;
  }
  friend Site operator-(Site a, const Site& b) {
    for (int i = 0; i < kMaxDim; ++i) a.c[i] -= b.c[i];
    return a;
  }
};

inline std::int64_t linf_norm(const Site& x) {
  std::int64_t m = 0;
  for (int i = 0; i < kMaxDim; ++i) m = std::max(m, std::abs(x.c[i]));
  return m;
}

inline std::int64_t l1_norm(const Site& x) {
  std::int64_t s = 0;
  for (int i = 0; i < kMaxDim; ++i) s += std::abs(x.c[i]);
  return s;
}

inline double l2_norm(const Site& x) {
  double s = 0;
  for (int i = 0; i < kMaxDim; ++i) {
    const double v = static_cast<double>(x.c[i]);
    s += v * v;
  }
  return std::sqrt(s);
}

// Signed unit directions are indexed 0..2d-1 in the fixed order
// +e1, -e1, +e2, -e2, ...; every breadth-first expansion and every
// transition-law enumeration uses this order.
inline int axis_of(int dir) { return dir / 2; }
inline int sign_of(int dir) { return (dir % 2 == 0) ? +1 : -1; }

inline Site unit_step(int dir) {
  Site e;
  e[axis_of(dir)] = sign_of(dir);
  return e;
}

inline int opposite_dir(int dir) { return dir ^ 1; }

// Axis-aligned box with inclusive bounds on the first `dim` axes.
struct Box {
  Site lo;
  Site hi;
  int dim = 0;

  static Box cube(std::int64_t radius, int dim) {
    Box b;
    b.dim = dim;
    for (int i = 0; i < dim; ++i) {
      b.lo[i] = -radius;
      b.hi[i] = radius;
    }
    return b;
  }

  bool contains(const Site& x) const {
    for (int i = 0; i < dim; ++i)
      if (x[i] < lo[i] || x[i] > hi[i]) return false;
    return true;
  }

  std::int64_t side(int i) const { return hi[i] - lo[i] + 1; }

  std::int64_t volume() const {
    std::int64_t v = 1;
    for (int i = 0; i < dim; ++i) v *= side(i);
    return v;
  }
};

struct SiteHash {
  std::size_t operator()(const Site& x) const {
    std::uint64_t h = 0x2545F4914F6CDD1Dull;
    for (int i = 0; i < kMaxDim; ++i) {
      std::uint64_t z = h ^ (static_cast<std::uint64_t>(x.c[i]) + 0x9E3779B97F4A7C15ull);
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      h = z ^ (z >> 31);
    }
    return static_cast<std::size_t>(h);
  }
};

inline std::string to_string(const Site& x, int dim) {
  std::string s = "(";
  for (int i = 0; i < dim; ++i) {
    if (i) s += ",";
    s += std::to_string(x[i]);
  }
  s += ")";
  return s;
}

}  // namespace rwdpp

#endif  // RWDPP_LATTICE_HPP
