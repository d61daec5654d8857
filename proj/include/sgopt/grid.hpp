#ifndef SGOPT_GRID_HPP
#define SGOPT_GRID_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <unordered_map>
#include <vector>

#include "sgopt/common.hpp"

namespace sgopt {

/// A d-dimensional hierarchical level-index pair (l, i) addressing the grid
/// point x = i * 2^-l componentwise.
struct LevelIndex {
  std::vector<int> level;
  std::vector<std::int64_t> index;

  LevelIndex() = default;
  LevelIndex(std::vector<int> l, std::vector<std::int64_t> i)
      : level(std::move(l)), index(std::move(i)) {}

  int dim() const { return static_cast<int>(level.size()); }
  int level_sum() const;

  bool operator==(const LevelIndex& other) const {
    return level == other.level && index == other.index;
  }

  /// Canonical form: per dimension, index odd if level > 0, in {0, 1} if level = 0.
  bool is_canonical() const;
};

struct LevelIndexHash {
  std::size_t operator()(const LevelIndex& p) const;
};

/// Level-sum-ascending, then lexicographic; used wherever a deterministic
/// point or level order is required.
bool level_sum_lex_less(const LevelIndex& a, const LevelIndex& b);

/// Coordinates x_t = i_t * 2^-l_t of a (not necessarily canonical) pair.
std::vector<double> point_coordinate(const LevelIndex& p);
double point_coordinate_1d(int level, std::int64_t index);

/// Reduces (l, i) with 0 <= i_t <= 2^l_t to the unique coarsest pair with the
/// same coordinate. Boundary values map to level 0; interior indices drop
/// trailing zero bits.
LevelIndex canonicalize(const std::vector<int>& level, const std::vector<std::int64_t>& index);

/// An ordered, duplicate-free set of canonical level-index pairs with
/// membership lookup and per-point refinement degrees.
class SparseGrid {
 public:
  explicit SparseGrid(int dim) : dim_(dim) {
    if (dim < 1) throw DomainError("SparseGrid: dimension must be positive");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return points_.size(); }
  const LevelIndex& operator[](std::size_t k) const { return points_[k]; }
  const std::vector<LevelIndex>& points() const { return points_; }

  bool contains(const LevelIndex& p) const { return lookup_.count(p) > 0; }
  std::optional<std::size_t> find(const LevelIndex& p) const {
    auto it = lookup_.find(p);
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
  }

  /// Inserts a canonical pair; returns its position. Duplicates are rejected
  /// (returns the existing position).
  std::size_t insert(const LevelIndex& p);

  std::vector<double> coordinates(std::size_t k) const { return point_coordinate(points_[k]); }

  int refinement_degree(std::size_t k) const { return degrees_[k]; }
  void increment_refinement_degree(std::size_t k) { ++degrees_[k]; }

  void save(std::ostream& out) const;
  static SparseGrid load(std::istream& in);

 private:
  int dim_;
  std::vector<LevelIndex> points_;
  std::vector<int> degrees_;
  std::unordered_map<LevelIndex, std::size_t, LevelIndexHash> lookup_;
};

/// Downward closed set of level tuples for dimensionally adaptive grids.
class LevelSet {
 public:
  explicit LevelSet(std::vector<std::vector<int>> levels);

  const std::vector<std::vector<int>>& levels() const { return levels_; }
  bool is_downward_closed() const;

  /// Maximal elements under the componentwise order (the active nodal spaces).
  std::vector<std::vector<int>> maximal_levels() const;

  static LevelSet regular(int n, int d);

 private:
  std::vector<std::vector<int>> levels_;
};

/// Regular sparse grid of level n: all (l, i) with |l|_1 <= n, i in I_l.
SparseGrid regular_grid(int n, int d);

/// Interior part of the regular sparse grid (l >= 1 componentwise); the grid
/// for boundaryless (modified) bases.
SparseGrid regular_grid_interior(int n, int d);

/// Regular sparse grid with coarse boundary parameter b (b = 0 delegates to
/// regular_grid). Always contains the 2^d corners.
SparseGrid regular_grid_coarse_boundary(int n, int d, int b);

/// Grid containing {(l, i) : l in L, i in I_l} in level-sum/lex order.
SparseGrid grid_from_level_set(const LevelSet& levels, int d);

/// Hierarchical representation of the full grid of level l (all pairs with
/// level <= l componentwise).
SparseGrid full_grid(const std::vector<int>& level);

/// Number of interior points of the regular sparse grid; 0 if n < d.
std::uint64_t interior_point_count(int n, int d);

/// Point count of the coarse-boundary grid via the counting formula
/// (zero-dimensional interior grids count as one point).
std::uint64_t coarse_boundary_count(int n, int d, int b);

/// Point count of the regular sparse grid via the face decomposition formula.
std::uint64_t regular_point_count(int n, int d);

/// Children with one level raised by 1 in one dimension.
std::vector<LevelIndex> direct_children(const LevelIndex& p);

/// m-th order children in dimension t (0-based); m = 1 gives the direct
/// children of that dimension.
std::vector<LevelIndex> mth_order_children(const LevelIndex& p, int t, int m);

/// Direct ancestors in dimension t: empty for level 0, both corners for
/// level 1, the unique odd-index parent otherwise.
std::vector<LevelIndex> direct_ancestors(const LevelIndex& p, int t);

}  // namespace sgopt

#endif
