#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>
#include <sstream>

#include "sgopt/grid.hpp"

using namespace sgopt;

TEST_CASE("point coordinates") {
  CHECK(point_coordinate({{3}, {5}})[0] == 0.625);
  CHECK(point_coordinate({{0}, {1}})[0] == 1.0);
  auto x = point_coordinate({{2, 1}, {1, 1}});
  CHECK(x[0] == 0.25);
  CHECK(x[1] == 0.5);
  CHECK_THROWS_AS(point_coordinate({{2}, {5}}), DomainError);
}

TEST_CASE("canonicalize") {
  auto p = canonicalize({3}, {4});
  CHECK(p.level[0] == 1);
  CHECK(p.index[0] == 1);
  p = canonicalize({3}, {6});
  CHECK(p.level[0] == 2);
  CHECK(p.index[0] == 3);
  p = canonicalize({5}, {0});
  CHECK(p.level[0] == 0);
  CHECK(p.index[0] == 0);
  p = canonicalize({5}, {32});
  CHECK(p.level[0] == 0);
  CHECK(p.index[0] == 1);
  CHECK_THROWS_AS(canonicalize({2}, {5}), DomainError);
}

TEST_CASE("canonicalize is idempotent and coordinate-preserving") {
  for (int l = 0; l <= 6; ++l) {
    for (std::int64_t i = 0; i <= ipow2(l); ++i) {
      LevelIndex p = canonicalize({l}, {i});
      CHECK(p.is_canonical());
      CHECK(point_coordinate(p)[0] == point_coordinate_1d(l, i));
      LevelIndex q = canonicalize(p.level, p.index);
      CHECK(q == p);
    }
  }
}

TEST_CASE("hierarchical decomposition covers the full 1-D grid") {
  for (int l = 0; l <= 6; ++l) {
    std::set<double> hier;
    SparseGrid grid = regular_grid(l, 1);
    for (std::size_t k = 0; k < grid.size(); ++k) hier.insert(grid.coordinates(k)[0]);
    std::set<double> full;
    for (std::int64_t i = 0; i <= ipow2(l); ++i) full.insert(point_coordinate_1d(l, i));
    CHECK(hier == full);
  }
}

TEST_CASE("regular grid sizes") {
  CHECK(regular_grid(3, 3).size() == 123);
  CHECK(regular_grid(1, 1).size() == 3);
  CHECK(regular_grid(0, 2).size() == 4);

  SparseGrid g11 = regular_grid(1, 1);
  std::set<double> coords;
  for (std::size_t k = 0; k < g11.size(); ++k) coords.insert(g11.coordinates(k)[0]);
  CHECK(coords == std::set<double>({0.0, 0.5, 1.0}));
}

TEST_CASE("regular grid size matches the face decomposition formula") {
  for (int d = 1; d <= 4; ++d) {
    for (int n = 0; n <= (d <= 2 ? 10 : 7); ++n) {
      CHECK(regular_grid(n, d).size() == regular_point_count(n, d));
    }
  }
}

TEST_CASE("interior point counts") {
  CHECK(interior_point_count(6, 3) == 111);
  CHECK(interior_point_count(10, 3) == 7423);
  CHECK(interior_point_count(13, 10) == 2001);
  CHECK(interior_point_count(2, 3) == 0);
  for (int d = 1; d <= 4; ++d) {
    for (int n = d; n <= 8; ++n) {
      CHECK(regular_grid_interior(n, d).size() == interior_point_count(n, d));
    }
  }
}

TEST_CASE("coarse boundary grids") {
  CHECK(regular_grid_coarse_boundary(3, 3, 1).size() == 27);
  CHECK(regular_grid_coarse_boundary(3, 3, 2).size() == 9);
  CHECK(coarse_boundary_count(3, 3, 1) == 27);
  CHECK(coarse_boundary_count(4, 3, 3) == 15);
  CHECK_THROWS_AS(regular_grid_coarse_boundary(2, 3, 1), DomainError);

  // b = 0 delegates to the plain regular grid.
  CHECK(regular_grid_coarse_boundary(3, 3, 0).size() == 123);

  // Corners are always present.
  for (int b = 1; b <= 4; ++b) {
    SparseGrid grid = regular_grid_coarse_boundary(4, 2, b);
    for (std::int64_t i0 : {0, 1}) {
      for (std::int64_t i1 : {0, 1}) {
        CHECK(grid.contains(LevelIndex({0, 0}, {i0, i1})));
      }
    }
  }
}

TEST_CASE("counting formula equals enumeration over a dense sweep") {
  for (int d = 1; d <= 4; ++d) {
    for (int n = d; n <= 8; ++n) {
      for (int b = 1; b <= 3; ++b) {
        CHECK(regular_grid_coarse_boundary(n, d, b).size() == coarse_boundary_count(n, d, b));
      }
    }
  }
}

TEST_CASE("b=1 level set matches the max-norm description") {
  int n = 5, d = 2;
  SparseGrid grid = regular_grid_coarse_boundary(n, d, 1);
  std::set<std::vector<int>> levels;
  for (std::size_t k = 0; k < grid.size(); ++k) levels.insert(grid[k].level);
  for (int l0 = 0; l0 <= n; ++l0) {
    for (int l1 = 0; l1 <= n; ++l1) {
      bool expected = std::max(l0, 1) + std::max(l1, 1) <= n;
      CHECK(levels.count({l0, l1}) == (expected ? 1 : 0));
    }
  }
}

TEST_CASE("direct children") {
  auto c = direct_children(LevelIndex({0}, {0}));
  REQUIRE(c.size() == 1);
  CHECK(c[0] == LevelIndex({1}, {1}));

  c = direct_children(LevelIndex({2}, {3}));
  REQUIRE(c.size() == 2);
  CHECK(c[0] == LevelIndex({3}, {5}));
  CHECK(c[1] == LevelIndex({3}, {7}));

  c = direct_children(LevelIndex({1, 1}, {1, 1}));
  CHECK(c.size() == 4);
}

TEST_CASE("mth order children") {
  auto c = mth_order_children(LevelIndex({0}, {0}), 0, 2);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == LevelIndex({2}, {1}));

  c = mth_order_children(LevelIndex({0}, {1}), 0, 2);
  REQUIRE(c.size() == 1);
  CHECK(c[0] == LevelIndex({2}, {3}));

  c = mth_order_children(LevelIndex({1}, {1}), 0, 1);
  REQUIRE(c.size() == 2);
  CHECK(c[0] == LevelIndex({2}, {1}));
  CHECK(c[1] == LevelIndex({2}, {3}));
}

TEST_CASE("children and ancestors are inverse relations") {
  SparseGrid grid = regular_grid(4, 2);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const LevelIndex& p = grid[k];
    for (int t = 0; t < 2; ++t) {
      for (const LevelIndex& child : mth_order_children(p, t, 1)) {
        auto ancestors = direct_ancestors(child, t);
        bool found = false;
        for (const auto& a : ancestors) found = found || (a == p);
        CHECK(found);
      }
      for (const LevelIndex& a : direct_ancestors(p, t)) {
        auto children = mth_order_children(a, t, 1);
        bool found = false;
        for (const auto& c : children) found = found || (c == p);
        CHECK(found);
      }
    }
  }
}

TEST_CASE("grid ordering is deterministic level-sum then lexicographic") {
  SparseGrid grid = regular_grid(3, 2);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    int prev = grid[k - 1].level_sum();
    int cur = grid[k].level_sum();
    CHECK(prev <= cur);
  }
}

TEST_CASE("grid rejects non-canonical and duplicate points") {
  SparseGrid grid(1);
  CHECK_THROWS_AS(grid.insert(LevelIndex({2}, {2})), DomainError);
  std::size_t a = grid.insert(LevelIndex({2}, {3}));
  std::size_t b = grid.insert(LevelIndex({2}, {3}));
  CHECK(a == b);
  CHECK(grid.size() == 1);
}

TEST_CASE("grid serialization round trip") {
  SparseGrid grid = regular_grid(3, 2);
  std::stringstream buffer;
  grid.save(buffer);
  std::string first_line;
  std::stringstream copy(buffer.str());
  std::getline(copy, first_line);
  CHECK(first_line == "d=2 n=" + std::to_string(grid.size()));

  SparseGrid loaded = SparseGrid::load(buffer);
  REQUIRE(loaded.size() == grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(loaded[k] == grid[k]);
}

TEST_CASE("level sets") {
  LevelSet regular = LevelSet::regular(3, 2);
  CHECK(regular.is_downward_closed());
  LevelSet broken(std::vector<std::vector<int>>{{0, 0}, {2, 0}});
  CHECK_FALSE(broken.is_downward_closed());

  auto maxima = regular.maximal_levels();
  CHECK(maxima.size() == 4);  // (0,3), (1,2), (2,1), (3,0)

  SparseGrid grid = grid_from_level_set(regular, 2);
  CHECK(grid.size() == regular_grid(3, 2).size());
}

TEST_CASE("full grid hierarchical representation") {
  SparseGrid fg = full_grid({2, 1});
  CHECK(fg.size() == 5 * 3);
  std::set<std::pair<double, double>> coords;
  for (std::size_t k = 0; k < fg.size(); ++k) {
    auto x = fg.coordinates(k);
    coords.insert({x[0], x[1]});
  }
  CHECK(coords.size() == 15);
}
