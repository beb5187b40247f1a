#ifndef INTERLACE_LATTICE_HPP_
#define INTERLACE_LATTICE_HPP_

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "interlace/errors.hpp"

namespace interlace {

inline constexpr int kMaxDim = 8;
inline constexpr int kMinDim = 3;
// Walks leaving this box abort; configured experiments never get close.
inline constexpr std::int64_t kCoordLimit = std::int64_t{1} << 40;

inline void check_dim(int d) {
  if (d < kMinDim || d > kMaxDim) {
    throw ConfigError("dimension must be in [" + std::to_string(kMinDim) +
                      ", " + std::to_string(kMaxDim) + "], got " +
                      std::to_string(d));
  }
}

/// A site of Z^d. Coordinates beyond `dim` are kept at zero so that
/// equality and hashing can look at the whole array.
class LatticePoint {
 public:
  LatticePoint() = default;
  explicit LatticePoint(int dim) : dim_(dim) { check_dim(dim); }
  LatticePoint(std::initializer_list<std::int64_t> coords)
      : dim_(static_cast<int>(coords.size())) {
    check_dim(dim_);
    std::copy(coords.begin(), coords.end(), c_.begin());
  }
  explicit LatticePoint(const std::vector<std::int64_t> &coords)
      : dim_(static_cast<int>(coords.size())) {
    check_dim(dim_);
    std::copy(coords.begin(), coords.end(), c_.begin());
  }

  static LatticePoint origin(int dim) { return LatticePoint(dim); }
  static LatticePoint unit(int dim, int axis, std::int64_t scale = 1) {
    LatticePoint p(dim);
    p.c_[static_cast<std::size_t>(axis)] = scale;
    return p;
  }

  int dim() const { return dim_; }
  std::int64_t operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  std::int64_t &operator[](int i) { return c_[static_cast<std::size_t>(i)]; }

  double norm2() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) {
      const double v = static_cast<double>(c_[static_cast<std::size_t>(i)]);
      s += v * v;
    }
    return s;
  }
  double norm() const { return std::sqrt(norm2()); }

  LatticePoint operator+(const LatticePoint &o) const {
    LatticePoint r = *this;
    for (int i = 0; i < dim_; ++i) r[i] += o[i];
    return r;
  }
  LatticePoint operator-(const LatticePoint &o) const {
    LatticePoint r = *this;
    for (int i = 0; i < dim_; ++i) r[i] -= o[i];
    return r;
  }

  bool operator==(const LatticePoint &o) const {
    return dim_ == o.dim_ && c_ == o.c_;
  }
  bool operator!=(const LatticePoint &o) const { return !(*this == o); }
  // Lexicographic order on coordinates.
  bool operator<(const LatticePoint &o) const {
    return std::lexicographical_compare(c_.begin(), c_.begin() + dim_,
                                        o.c_.begin(), o.c_.begin() + o.dim_);
  }

  std::vector<std::int64_t> coords() const {
    return {c_.begin(), c_.begin() + dim_};
  }

  std::string to_string() const {
    std::ostringstream os;
    for (int i = 0; i < dim_; ++i) {
      if (i) os << ',';
      os << c_[static_cast<std::size_t>(i)];
    }
    return os.str();
  }

 private:
  int dim_ = 0;
  std::array<std::int64_t, kMaxDim> c_{};
};

struct LatticePointHash {
  std::size_t operator()(const LatticePoint &p) const noexcept {
    std::uint64_t h = 0x9E3779B97F4A7C15ull;
    for (int i = 0; i < p.dim(); ++i) {
      std::uint64_t v = static_cast<std::uint64_t>(p[i]);
      v ^= v >> 33;
      v *= 0xff51afd7ed558ccdull;
      v ^= v >> 33;
      h = (h ^ v) * 0x100000001b3ull + static_cast<std::uint64_t>(i);
    }
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

inline double distance(const LatticePoint &a, const LatticePoint &b) {
  return (a - b).norm();
}

/// The 2d nearest neighbours of x, ordered +e_1, -e_1, +e_2, -e_2, ...
inline std::vector<LatticePoint> neighbors(const LatticePoint &x) {
  std::vector<LatticePoint> out;
  out.reserve(static_cast<std::size_t>(2 * x.dim()));
  for (int i = 0; i < x.dim(); ++i) {
    LatticePoint p = x;
    p[i] += 1;
    out.push_back(p);
    p[i] -= 2;
    out.push_back(p);
  }
  return out;
}

/// Moves x to its k-th neighbour (same ordering as neighbors()).
inline void step_to_neighbor(LatticePoint &x, unsigned k) {
  const int axis = static_cast<int>(k >> 1);
  x[axis] += (k & 1u) ? -1 : 1;
  if (x[axis] > kCoordLimit || x[axis] < -kCoordLimit) {
    throw NumericalError("walk left the coordinate guard box at " +
                         x.to_string());
  }
}

/// Finite set of distinct sites with stable insertion order and O(1)
/// membership.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(int dim) : dim_(dim) { check_dim(dim); }
  PointSet(int dim, const std::vector<LatticePoint> &pts) : PointSet(dim) {
    for (const auto &p : pts) {
      if (!insert(p)) {
        throw ConfigError("duplicate point " + p.to_string() + " in set");
      }
    }
  }

  /// Returns false if p is already present.
  bool insert(const LatticePoint &p) {
    if (p.dim() != dim_) {
      throw ConfigError("point " + p.to_string() + " has dimension " +
                        std::to_string(p.dim()) + ", set has " +
                        std::to_string(dim_));
    }
    auto [it, fresh] = index_.emplace(p, points_.size());
    if (!fresh) return false;
    points_.push_back(p);
    return true;
  }

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  bool empty() const { return points_.empty(); }
  const LatticePoint &operator[](std::size_t i) const { return points_[i]; }
  const std::vector<LatticePoint> &points() const { return points_; }
  auto begin() const { return points_.begin(); }
  auto end() const { return points_.end(); }

  bool contains(const LatticePoint &p) const { return index_.count(p) != 0; }
  /// Index of p, or -1 when absent.
  std::ptrdiff_t index_of(const LatticePoint &p) const {
    auto it = index_.find(p);
    return it == index_.end() ? -1 : static_cast<std::ptrdiff_t>(it->second);
  }

  PointSet translated(const LatticePoint &shift) const {
    PointSet out(dim_);
    for (const auto &p : points_) out.insert(p + shift);
    return out;
  }

  PointSet subset(const std::vector<std::size_t> &indices) const {
    PointSet out(dim_);
    for (auto i : indices) out.insert(points_.at(i));
    return out;
  }

 private:
  int dim_ = 0;
  std::vector<LatticePoint> points_;
  std::unordered_map<LatticePoint, std::size_t, LatticePointHash> index_;
};

struct SetMetrics {
  double diameter = 0.0;
  double min_pair_distance = std::numeric_limits<double>::infinity();
};

inline SetMetrics set_metrics(const PointSet &a) {
  if (a.empty()) throw ConfigError("set_metrics needs a nonempty set");
  double max2 = 0.0;
  double min2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      const double r2 = (a[i] - a[j]).norm2();
      max2 = std::max(max2, r2);
      min2 = std::min(min2, r2);
    }
  }
  return {std::sqrt(max2), std::sqrt(min2)};
}

/// Minimum distance between two sets.
inline double set_distance(const PointSet &a, const PointSet &b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto &p : a)
    for (const auto &q : b) best = std::min(best, (p - q).norm2());
  return std::sqrt(best);
}

struct BoundingBox {
  LatticePoint lo, hi;
  bool contains(const LatticePoint &p) const {
    for (int i = 0; i < lo.dim(); ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
};

inline BoundingBox bounding_box(const PointSet &a) {
  if (a.empty()) throw ConfigError("bounding box of an empty set");
  BoundingBox b{a[0], a[0]};
  for (const auto &p : a) {
    for (int i = 0; i < a.dim(); ++i) {
      b.lo[i] = std::min(b.lo[i], p[i]);
      b.hi[i] = std::max(b.hi[i], p[i]);
    }
  }
  return b;
}

// ---------------------------------------------------------------------------
// Geometry builders

/// B_N^l = [0,N-1]^l x {0}^{d-l}, enumerated with the first axis fastest.
inline PointSet box_set(int dim, std::int64_t side, int l) {
  check_dim(dim);
  if (l < 1 || l > dim) throw ConfigError("box: l must be in [1, dim]");
  if (side < 1) throw ConfigError("box: side must be >= 1");
  PointSet out(dim);
  LatticePoint p(dim);
  while (true) {
    out.insert(p);
    int axis = 0;
    while (axis < l) {
      if (++p[axis] < side) break;
      p[axis] = 0;
      ++axis;
    }
    if (axis == l) break;
  }
  return out;
}

/// Axis-aligned grid with the given per-axis counts and spacing.
inline PointSet grid_set(int dim, const std::vector<std::int64_t> &counts,
                         std::int64_t spacing) {
  check_dim(dim);
  if (counts.empty() || counts.size() > static_cast<std::size_t>(dim))
    throw ConfigError("grid: need between 1 and dim axis counts");
  if (spacing < 1) throw ConfigError("grid: spacing must be >= 1");
  PointSet out(dim);
  std::vector<std::int64_t> idx(counts.size(), 0);
  while (true) {
    LatticePoint p(dim);
    for (std::size_t i = 0; i < idx.size(); ++i)
      p[static_cast<int>(i)] = idx[i] * spacing;
    out.insert(p);
    std::size_t axis = 0;
    while (axis < idx.size()) {
      if (++idx[axis] < counts[axis]) break;
      idx[axis] = 0;
      ++axis;
    }
    if (axis == idx.size()) break;
  }
  return out;
}

/// Parses "x1,..,xd;y1,..,yd;..." into a point set.
inline PointSet parse_point_set(int dim, const std::string &text) {
  PointSet out(dim);
  std::stringstream all(text);
  std::string item;
  while (std::getline(all, item, ';')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<std::int64_t> coords;
    std::stringstream ps(item);
    std::string tok;
    while (std::getline(ps, tok, ',')) {
      try {
        std::size_t used = 0;
        coords.push_back(std::stoll(tok, &used));
        if (tok.find_first_not_of(" \t", used) != std::string::npos)
          throw std::invalid_argument(tok);
      } catch (const std::exception &) {
        throw ConfigError("bad coordinate '" + tok + "' in point set");
      }
    }
    if (static_cast<int>(coords.size()) != dim) {
      throw ConfigError("point '" + item + "' has " +
                        std::to_string(coords.size()) +
                        " coordinates, expected " + std::to_string(dim));
    }
    if (!out.insert(LatticePoint(coords)))
      throw ConfigError("duplicate point '" + item + "' in set");
  }
  if (out.empty()) throw ConfigError("point set is empty");
  return out;
}

inline LatticePoint parse_point(int dim, const std::string &text) {
  PointSet s = parse_point_set(dim, text);
  if (s.size() != 1) throw ConfigError("expected a single point");
  return s[0];
}

}  // namespace interlace

#endif  // INTERLACE_LATTICE_HPP_
