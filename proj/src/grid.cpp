#include "sgopt/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace sgopt {

int LevelIndex::level_sum() const {
  int s = 0;
  for (int l : level) s += l;
  return s;
}

bool LevelIndex::is_canonical() const {
  if (level.size() != index.size()) return false;
  for (std::size_t t = 0; t < level.size(); ++t) {
    if (level[t] < 0) return false;
    if (level[t] == 0) {
      if (index[t] != 0 && index[t] != 1) return false;
    } else {
      if (index[t] < 1 || index[t] > ipow2(level[t]) - 1 || index[t] % 2 == 0) return false;
    }
  }
  return true;
}

std::size_t LevelIndexHash::operator()(const LevelIndex& p) const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  };
  for (std::size_t t = 0; t < p.level.size(); ++t) {
    mix(static_cast<std::uint64_t>(p.level[t]));
    mix(static_cast<std::uint64_t>(p.index[t]));
  }
  return static_cast<std::size_t>(h);
}

bool level_sum_lex_less(const LevelIndex& a, const LevelIndex& b) {
  int sa = a.level_sum(), sb = b.level_sum();
  if (sa != sb) return sa < sb;
  if (a.level != b.level) return a.level < b.level;
  return a.index < b.index;
}

double point_coordinate_1d(int level, std::int64_t index) {
  return std::ldexp(static_cast<double>(index), -level);
}

std::vector<double> point_coordinate(const LevelIndex& p) {
  std::vector<double> x(p.level.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (p.level[t] < 0 || p.index[t] < 0 || p.index[t] > ipow2(p.level[t])) {
      throw DomainError("point_coordinate: index out of range");
    }
    x[t] = point_coordinate_1d(p.level[t], p.index[t]);
  }
  return x;
}

LevelIndex canonicalize(const std::vector<int>& level, const std::vector<std::int64_t>& index) {
  if (level.size() != index.size()) throw DomainError("canonicalize: size mismatch");
  LevelIndex out;
  out.level.resize(level.size());
  out.index.resize(level.size());
  for (std::size_t t = 0; t < level.size(); ++t) {
    int l = level[t];
    std::int64_t i = index[t];
    if (l < 0 || i < 0 || i > ipow2(l)) throw DomainError("canonicalize: index out of range");
    if (i == 0) {
      out.level[t] = 0;
      out.index[t] = 0;
    } else if (i == ipow2(l)) {
      out.level[t] = 0;
      out.index[t] = 1;
    } else {
      int z = std::countr_zero(static_cast<std::uint64_t>(i));
      out.level[t] = l - z;
      out.index[t] = i >> z;
    }
  }
  return out;
}

std::size_t SparseGrid::insert(const LevelIndex& p) {
  if (p.dim() != dim_) throw DomainError("SparseGrid::insert: dimension mismatch");
  if (!p.is_canonical()) throw DomainError("SparseGrid::insert: point not in canonical form");
  auto it = lookup_.find(p);
  if (it != lookup_.end()) return it->second;
  points_.push_back(p);
  degrees_.push_back(0);
  lookup_.emplace(p, points_.size() - 1);
  return points_.size() - 1;
}

void SparseGrid::save(std::ostream& out) const {
  out << "d=" << dim_ << " n=" << points_.size() << "\n";
  for (const auto& p : points_) {
    for (int t = 0; t < dim_; ++t) out << p.level[t] << ' ';
    for (int t = 0; t < dim_; ++t) out << p.index[t] << (t + 1 < dim_ ? ' ' : '\n');
  }
}

SparseGrid SparseGrid::load(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw DomainError("SparseGrid::load: missing header");
  int d = 0;
  std::size_t n = 0;
  if (std::sscanf(header.c_str(), "d=%d n=%zu", &d, &n) != 2) {
    throw DomainError("SparseGrid::load: malformed header");
  }
  SparseGrid grid(d);
  for (std::size_t k = 0; k < n; ++k) {
    LevelIndex p;
    p.level.resize(d);
    p.index.resize(d);
    for (int t = 0; t < d; ++t) in >> p.level[t];
    for (int t = 0; t < d; ++t) in >> p.index[t];
    if (!in) throw DomainError("SparseGrid::load: truncated point list");
    grid.insert(p);
  }
  return grid;
}

namespace {

// Enumerates level tuples accepted by `keep`, in level-sum/lex order, up to
// max level sum `max_sum`.
std::vector<std::vector<int>> enumerate_levels(
    int d, int max_sum, const std::function<bool(const std::vector<int>&)>& keep) {
  std::vector<std::vector<int>> out;
  std::vector<int> level(d, 0);
  for (int s = 0; s <= max_sum; ++s) {
    // All tuples with sum s, lexicographic.
    std::function<void(int, int)> rec = [&](int t, int rest) {
      if (t == d - 1) {
        level[t] = rest;
        if (keep(level)) out.push_back(level);
        return;
      }
      for (int l = 0; l <= rest; ++l) {
        level[t] = l;
        rec(t + 1, rest - l);
      }
    };
    rec(0, s);
  }
  return out;
}

void append_level_points(SparseGrid& grid, const std::vector<int>& level) {
  const int d = static_cast<int>(level.size());
  LevelIndex p;
  p.level = level;
  p.index.assign(d, 0);
  std::function<void(int)> rec = [&](int t) {
    if (t == d) {
      grid.insert(p);
      return;
    }
    if (level[t] == 0) {
      for (std::int64_t i : {std::int64_t{0}, std::int64_t{1}}) {
        p.index[t] = i;
        rec(t + 1);
      }
    } else {
      for (std::int64_t i = 1; i < ipow2(level[t]); i += 2) {
        p.index[t] = i;
        rec(t + 1);
      }
    }
  };
  rec(0);
}

SparseGrid grid_from_levels(int d, const std::vector<std::vector<int>>& levels) {
  SparseGrid grid(d);
  for (const auto& level : levels) append_level_points(grid, level);
  return grid;
}

int max_of_one_norm(const std::vector<int>& level) {
  int s = 0;
  for (int l : level) s += std::max(l, 1);
  return s;
}

}  // namespace

LevelSet::LevelSet(std::vector<std::vector<int>> levels) : levels_(std::move(levels)) {
  std::sort(levels_.begin(), levels_.end(), [](const auto& a, const auto& b) {
    int sa = 0, sb = 0;
    for (int v : a) sa += v;
    for (int v : b) sb += v;
    if (sa != sb) return sa < sb;
    return a < b;
  });
  levels_.erase(std::unique(levels_.begin(), levels_.end()), levels_.end());
}

bool LevelSet::is_downward_closed() const {
  std::set<std::vector<int>> all(levels_.begin(), levels_.end());
  for (const auto& level : levels_) {
    for (std::size_t t = 0; t < level.size(); ++t) {
      if (level[t] > 0) {
        auto lower = level;
        --lower[t];
        if (!all.count(lower)) return false;
      }
    }
  }
  return true;
}

std::vector<std::vector<int>> LevelSet::maximal_levels() const {
  std::vector<std::vector<int>> out;
  for (const auto& a : levels_) {
    bool dominated = false;
    for (const auto& b : levels_) {
      if (a == b) continue;
      bool le = true;
      for (std::size_t t = 0; t < a.size(); ++t) {
        if (a[t] > b[t]) {
          le = false;
          break;
        }
      }
      if (le) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.push_back(a);
  }
  return out;
}

LevelSet LevelSet::regular(int n, int d) {
  auto levels = enumerate_levels(d, n, [](const std::vector<int>&) { return true; });
  return LevelSet(std::move(levels));
}

SparseGrid regular_grid(int n, int d) {
  if (n < 0 || d < 1) throw DomainError("regular_grid: require n >= 0, d >= 1");
  auto levels = enumerate_levels(d, n, [](const std::vector<int>&) { return true; });
  return grid_from_levels(d, levels);
}

SparseGrid regular_grid_interior(int n, int d) {
  if (d < 1) throw DomainError("regular_grid_interior: require d >= 1");
  auto levels = enumerate_levels(d, n, [](const std::vector<int>& level) {
    for (int l : level) {
      if (l < 1) return false;
    }
    return true;
  });
  return grid_from_levels(d, levels);
}

SparseGrid regular_grid_coarse_boundary(int n, int d, int b) {
  if (b < 0) throw DomainError("regular_grid_coarse_boundary: require b >= 0");
  if (b == 0) return regular_grid(n, d);
  if (d < 1 || n < d) throw DomainError("regular_grid_coarse_boundary: require n >= d >= 1");
  auto levels = enumerate_levels(d, n, [&](const std::vector<int>& level) {
    bool interior = true;
    bool zero = true;
    for (int l : level) {
      if (l < 1) interior = false;
      if (l != 0) zero = false;
    }
    if (interior) return true;  // |l|_1 <= n enforced by enumeration bound
    if (zero) return true;
    return max_of_one_norm(level) <= n - b + 1;
  });
  return grid_from_levels(d, levels);
}

SparseGrid grid_from_level_set(const LevelSet& levels, int d) {
  return grid_from_levels(d, levels.levels());
}

SparseGrid full_grid(const std::vector<int>& level) {
  const int d = static_cast<int>(level.size());
  int max_sum = 0;
  for (int l : level) max_sum += l;
  auto levels = enumerate_levels(d, max_sum, [&](const std::vector<int>& cand) {
    for (int t = 0; t < d; ++t) {
      if (cand[t] > level[t]) return false;
    }
    return true;
  });
  return grid_from_levels(d, levels);
}

std::uint64_t interior_point_count(int n, int d) {
  if (d == 0) return 1;
  if (n < d) return 0;
  std::uint64_t total = 0;
  for (int q = 0; q <= n - d; ++q) {
    total += (std::uint64_t{1} << q) * binomial(d - 1 + q, d - 1);
  }
  return total;
}

std::uint64_t coarse_boundary_count(int n, int d, int b) {
  std::uint64_t total = interior_point_count(n, d);
  for (int q = 1; q <= d; ++q) {
    total += (std::uint64_t{1} << q) * binomial(d, q) * interior_point_count(n - q - b + 1, d - q);
  }
  return total;
}

std::uint64_t regular_point_count(int n, int d) {
  std::uint64_t total = 0;
  for (int q = 0; q <= d; ++q) {
    total += (std::uint64_t{1} << q) * binomial(d, q) * interior_point_count(n, d - q);
  }
  return total;
}

std::vector<LevelIndex> direct_children(const LevelIndex& p) {
  std::vector<LevelIndex> out;
  for (int t = 0; t < p.dim(); ++t) {
    auto children = mth_order_children(p, t, 1);
    out.insert(out.end(), children.begin(), children.end());
  }
  return out;
}

std::vector<LevelIndex> mth_order_children(const LevelIndex& p, int t, int m) {
  if (m < 1) throw DomainError("mth_order_children: require m >= 1");
  if (t < 0 || t >= p.dim()) throw DomainError("mth_order_children: dimension out of range");
  std::vector<LevelIndex> out;
  auto make_child = [&](std::int64_t i) {
    LevelIndex c = p;
    c.level[t] += m;
    c.index[t] = i;
    out.push_back(std::move(c));
  };
  if (p.level[t] == 0 && p.index[t] == 0) {
    make_child(1);
  } else if (p.level[t] == 0 && p.index[t] == 1) {
    make_child(ipow2(m) - 1);
  } else {
    make_child(ipow2(m) * p.index[t] - 1);
    make_child(ipow2(m) * p.index[t] + 1);
  }
  return out;
}

std::vector<LevelIndex> direct_ancestors(const LevelIndex& p, int t) {
  if (t < 0 || t >= p.dim()) throw DomainError("direct_ancestors: dimension out of range");
  std::vector<LevelIndex> out;
  if (p.level[t] == 0) return out;
  if (p.level[t] == 1) {
    // Both corners have (1, 1) as their direct child.
    for (std::int64_t i : {std::int64_t{0}, std::int64_t{1}}) {
      LevelIndex a = p;
      a.level[t] = 0;
      a.index[t] = i;
      out.push_back(std::move(a));
    }
    return out;
  }
  // Of the two half-indices exactly one is odd; that one is the parent.
  LevelIndex a = p;
  a.level[t] = p.level[t] - 1;
  std::int64_t lo = (p.index[t] - 1) / 2;
  std::int64_t hi = (p.index[t] + 1) / 2;
  a.index[t] = (lo % 2 == 1) ? lo : hi;
  out.push_back(std::move(a));
  return out;
}

}  // namespace sgopt
