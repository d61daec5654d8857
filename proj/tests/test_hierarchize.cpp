#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <vector>

#include "sgopt/hierarchize.hpp"

using namespace sgopt;

namespace {

double smooth2(const std::vector<double>& x) {
  return std::exp(x[0]) * std::sin(3.0 * x[1]) + x[0] * x[0] + 0.3 * x[1];
}

double smooth_nd(const std::vector<double>& x) {
  double s = 1.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    s *= 1.0 + 0.5 * std::sin(2.0 * x[t] + 0.3 * t);
  }
  return s + x[0];
}

std::vector<double> sample(const SparseGrid& grid, double (*f)(const std::vector<double>&)) {
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = f(grid.coordinates(k));
  return values;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 1.0, diff = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  for (std::size_t k = 0; k < a.size(); ++k) diff = std::max(diff, std::abs(a[k] - b[k]));
  return diff / scale;
}

// Interpolation property: the surpluses reproduce the input values at every
// grid point.
double interpolation_residual(const SparseGrid& grid, const TensorBasis& basis,
                              const std::vector<double>& surpluses,
                              const std::vector<double>& values) {
  std::vector<double> reproduced = dehierarchize(grid, basis, surpluses);
  return max_rel_diff(reproduced, values);
}

// Small spatially adaptive grid with all hierarchical ancestors present.
SparseGrid adaptive_grid_2d() {
  SparseGrid grid = regular_grid(2, 2);
  std::vector<LevelIndex> extra = {
      {{2, 1}, {1, 1}}, {{1, 2}, {1, 1}}, {{2, 2}, {1, 1}},
      {{3, 0}, {1, 0}}, {{3, 0}, {3, 0}}, {{3, 1}, {1, 1}},
  };
  for (const auto& p : extra) grid.insert(p);
  return grid;
}

}  // namespace

TEST_CASE("collocation matrix structure") {
  SparseGrid grid = regular_grid(2, 1);
  TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, 1));
  std::vector<double> a = assemble_matrix(grid, hat);
  const std::size_t n = grid.size();
  for (std::size_t r = 0; r < n; ++r) {
    CHECK(a[r * n + r] == doctest::Approx(1.0));
    for (std::size_t c = r + 1; c < n; ++c) CHECK(a[r * n + c] == 0.0);
  }

  TensorBasis fs(uniform_specs(BasisFamily::Fundamental, 3, 2));
  SparseGrid grid2 = regular_grid(3, 2);
  std::vector<double> a2 = assemble_matrix(grid2, fs);
  const std::size_t n2 = grid2.size();
  auto order = sorted_order(grid2);
  for (std::size_t r = 0; r < n2; ++r) {
    CHECK(a2[r * n2 + r] == doctest::Approx(1.0).epsilon(1e-8));
    for (std::size_t c = r + 1; c < n2; ++c) {
      if (grid2[order[r]].level_sum() <= grid2[order[c]].level_sum()) {
        CHECK(std::abs(a2[r * n2 + c]) <= 1e-8);
      }
    }
  }

  SparseGrid one(1);
  one.insert(LevelIndex({0}, {0}));
  std::vector<double> a1 = assemble_matrix(one, hat);
  REQUIRE(a1.size() == 1);
  CHECK(a1[0] == 1.0);
}

TEST_CASE("direct hierarchization") {
  // Constant data with the modified basis: only the level-1 constant
  // function carries weight.
  SparseGrid interior = regular_grid_interior(2, 1);
  TensorBasis modified(uniform_specs(BasisFamily::Modified, 1, 1));
  SurplusVector constant(std::vector<double>(interior.size(), 4.2));
  SurplusVector alpha = hierarchize_direct(interior, modified, constant);
  for (std::size_t k = 0; k < interior.size(); ++k) {
    double expected = (interior[k].level[0] == 1) ? 4.2 : 0.0;
    CHECK(alpha.data[k] == doctest::Approx(expected).epsilon(1e-12));
  }

  // f(x) = x with hats reproduces the boundary function surpluses only.
  SparseGrid grid = regular_grid(3, 1);
  TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, 1));
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = grid.coordinates(k)[0];
  SurplusVector linear = hierarchize_direct(grid, hat, SurplusVector(values));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double expected = (grid[k].level[0] == 0 && grid[k].index[0] == 1) ? 1.0 : 0.0;
    CHECK(linear.data[k] == doctest::Approx(expected).epsilon(1e-12));
  }

  // Interpolation property for a non-trivial basis.
  SparseGrid g2 = regular_grid(4, 2);
  TensorBasis nak(uniform_specs(BasisFamily::NotAKnot, 3, 2));
  std::vector<double> u = sample(g2, smooth2);
  SurplusVector a = hierarchize_direct(g2, nak, SurplusVector(u));
  CHECK(interpolation_residual(g2, nak, a.data, u) <= 1e-9);
}

TEST_CASE("poles partition the grid") {
  SparseGrid grid = regular_grid(1, 2);
  auto pole_list = poles(grid, 0);
  std::size_t total = 0;
  for (const auto& pole : pole_list) total += pole.members.size();
  CHECK(total == grid.size());

  SparseGrid line = regular_grid(3, 1);
  auto single = poles(line, 0);
  REQUIRE(single.size() == 1);
  CHECK(single[0].members.size() == line.size());
  // Members sorted by coordinate.
  for (std::size_t k = 1; k < single[0].members.size(); ++k) {
    CHECK(line.coordinates(single[0].members[k - 1])[0] <
          line.coordinates(single[0].members[k])[0]);
  }
}

TEST_CASE("unidirectional principle on full grids equals direct") {
  for (BasisFamily family : {BasisFamily::Uniform, BasisFamily::NotAKnot}) {
    for (int p : {1, 3}) {
      SparseGrid fg = full_grid({2, 2});
      TensorBasis basis(uniform_specs(family, p, 2));
      std::vector<double> u = sample(fg, smooth2);
      SurplusVector direct = hierarchize_direct(fg, basis, SurplusVector(u));
      std::vector<double> up = unidirectional_principle(fg, basis, u, {0, 1});
      CHECK(max_rel_diff(direct.data, up) <= 1e-10);
    }
  }
}

TEST_CASE("unidirectional principle with weakly fundamental splines on regular grids") {
  SparseGrid grid = regular_grid(4, 2);
  TensorBasis wfs(uniform_specs(BasisFamily::WeaklyFundamental, 3, 2));
  std::vector<double> u = sample(grid, smooth2);
  SurplusVector direct = hierarchize_direct(grid, wfs, SurplusVector(u));
  std::vector<double> up = unidirectional_principle(grid, wfs, u, {0, 1});
  CHECK(max_rel_diff(direct.data, up) <= 1e-9);

  // No chain points are missing on regular grids.
  CHECK_FALSE(find_chain_violation(grid, wfs, {0, 1}).has_value());
}

TEST_CASE("duality of the unidirectional principle") {
  SparseGrid grid = regular_grid(4, 2);
  TensorBasis wfs(uniform_specs(BasisFamily::WeaklyFundamental, 3, 2));
  std::vector<double> u = sample(grid, smooth2);
  std::vector<double> alpha = unidirectional_principle(grid, wfs, u, {0, 1});
  std::vector<double> roundtrip =
      unidirectional_principle(grid, wfs, alpha, {1, 0}, PoleOperation::Dehierarchize);
  CHECK(max_rel_diff(roundtrip, u) <= 1e-10);
}

TEST_CASE("combination technique") {
  // Equals direct for hat functions on regular grids.
  for (int d = 1; d <= 3; ++d) {
    for (int n = 1; n <= (d < 3 ? 5 : 4); ++n) {
      SparseGrid grid = regular_grid(n, d);
      TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, d));
      std::vector<double> u = sample(grid, smooth_nd);
      SurplusVector direct = hierarchize_direct(grid, hat, SurplusVector(u));
      SurplusVector combined = hierarchize_combination(n, d, hat, SurplusVector(u));
      CHECK(max_rel_diff(direct.data, combined.data) <= 1e-9);
    }
  }
  // Equals direct for cubic not-a-knot B-splines.
  {
    SparseGrid grid = regular_grid(4, 2);
    TensorBasis nak(uniform_specs(BasisFamily::NotAKnot, 3, 2));
    std::vector<double> u = sample(grid, smooth2);
    SurplusVector direct = hierarchize_direct(grid, nak, SurplusVector(u));
    SurplusVector combined = hierarchize_combination(4, 2, nak, SurplusVector(u));
    CHECK(max_rel_diff(direct.data, combined.data) <= 1e-9);
  }
  // Uniform higher-degree B-splines lack the hierarchical splitting.
  {
    SparseGrid grid = regular_grid(3, 2);
    TensorBasis uniform3(uniform_specs(BasisFamily::Uniform, 3, 2));
    std::vector<double> u = sample(grid, smooth2);
    CHECK_THROWS_AS(hierarchize_combination(3, 2, uniform3, SurplusVector(u)), DomainError);
  }
}

TEST_CASE("residual interpolation") {
  // Regular level set: equals the combination technique.
  for (int p : {1, 3}) {
    int n = 4, d = 2;
    SparseGrid grid = regular_grid(n, d);
    BasisFamily family = (p == 1) ? BasisFamily::Uniform : BasisFamily::NotAKnot;
    TensorBasis basis(uniform_specs(family, p, d));
    std::vector<double> u = sample(grid, smooth2);
    SurplusVector combined = hierarchize_combination(n, d, basis, SurplusVector(u));
    SurplusVector residual = hierarchize_residual(LevelSet::regular(n, d), basis, SurplusVector(u));
    CHECK(max_rel_diff(combined.data, residual.data) <= 1e-9);
  }

  // A single active level is one unidirectional pass.
  {
    LevelSet levels(std::vector<std::vector<int>>{
        {0, 0}, {1, 0}, {0, 1}, {1, 1}, {2, 0}, {2, 1}});
    // Not downward closed check first: the above set is downward closed.
    REQUIRE(levels.is_downward_closed());
    LevelSet single(std::vector<std::vector<int>>{{0, 0}, {1, 0}, {0, 1}, {1, 1}});
    SparseGrid grid = grid_from_level_set(single, 2);
    TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, 2));
    std::vector<double> u = sample(grid, smooth2);
    SurplusVector res = hierarchize_residual(single, hat, SurplusVector(u));
    std::vector<double> up = unidirectional_principle(grid, hat, u, {0, 1});
    CHECK(max_rel_diff(res.data, up) <= 1e-10);
  }

  // Non-downward-closed level sets are rejected.
  {
    LevelSet broken(std::vector<std::vector<int>>{{0, 0}, {2, 0}});
    TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, 2));
    CHECK_THROWS_AS(hierarchize_residual(broken, hat, SurplusVector(std::vector<double>(6, 0.0))),
                    DomainError);
  }
}

TEST_CASE("breadth-first search hierarchization") {
  // Hats are fundamental.
  {
    SparseGrid grid = regular_grid(4, 2);
    TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, 2));
    std::vector<double> u = sample(grid, smooth2);
    SurplusVector direct = hierarchize_direct(grid, hat, SurplusVector(u));
    SurplusVector bfs = hierarchize_bfs(grid, hat, SurplusVector(u));
    CHECK(max_rel_diff(direct.data, bfs.data) <= 1e-10);
  }
  // Fundamental splines on a spatially adaptive grid.
  {
    SparseGrid grid = adaptive_grid_2d();
    TensorBasis fs(uniform_specs(BasisFamily::Fundamental, 3, 2));
    std::vector<double> u = sample(grid, smooth2);
    SurplusVector direct = hierarchize_direct(grid, fs, SurplusVector(u));
    SurplusVector bfs = hierarchize_bfs(grid, fs, SurplusVector(u));
    CHECK(max_rel_diff(direct.data, bfs.data) <= 1e-7);
  }
  // Corner-only grid: surpluses are the corner values.
  {
    SparseGrid corners(2);
    for (std::int64_t i0 : {0, 1}) {
      for (std::int64_t i1 : {0, 1}) corners.insert(LevelIndex({0, 0}, {i0, i1}));
    }
    TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, 2));
    std::vector<double> u = sample(corners, smooth2);
    SurplusVector bfs = hierarchize_bfs(corners, hat, SurplusVector(u));
    for (std::size_t k = 0; k < u.size(); ++k) CHECK(bfs.data[k] == u[k]);
  }
  // Missing corners and unreachable points are reported.
  {
    SparseGrid no_corner(1);
    no_corner.insert(LevelIndex({1}, {1}));
    TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, 1));
    CHECK_THROWS_AS(hierarchize_bfs(no_corner, hat, SurplusVector(std::vector<double>{0.0})),
                    DomainError);

    SparseGrid unreachable(1);
    unreachable.insert(LevelIndex({0}, {0}));
    unreachable.insert(LevelIndex({0}, {1}));
    unreachable.insert(LevelIndex({3}, {5}));  // level-1/2 ancestors missing
    std::vector<double> u = {0.0, 1.0, 0.5};
    CHECK_THROWS_AS(hierarchize_bfs(unreachable, hat, SurplusVector(u)), DomainError);
  }
}

TEST_CASE("iterative refinement") {
  // Hats on an ancestor-complete grid converge in one iteration.
  {
    SparseGrid grid = adaptive_grid_2d();
    TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, 2));
    std::vector<double> u = sample(grid, smooth2);
    auto result = hierarchize_iterative_refinement(grid, hat, SurplusVector(u), 1e-10, 20);
    CHECK(result.iterations == 1);
    SurplusVector direct = hierarchize_direct(grid, hat, SurplusVector(u));
    CHECK(max_rel_diff(direct.data, result.surpluses.data) <= 1e-10);
  }
  // Cubic B-splines on an adaptive grid converge to the direct solution.
  {
    SparseGrid grid = adaptive_grid_2d();
    TensorBasis uniform3(uniform_specs(BasisFamily::Uniform, 3, 2));
    std::vector<double> u = sample(grid, smooth2);
    auto result = hierarchize_iterative_refinement(grid, uniform3, SurplusVector(u), 1e-10, 200);
    SurplusVector direct = hierarchize_direct(grid, uniform3, SurplusVector(u));
    CHECK(max_rel_diff(direct.data, result.surpluses.data) <= 1e-8);
  }
  // Exhausting max_iter surfaces an error instead of returning silently.
  {
    SparseGrid grid = adaptive_grid_2d();
    TensorBasis uniform3(uniform_specs(BasisFamily::Uniform, 3, 2));
    std::vector<double> u = sample(grid, smooth2);
    CHECK_THROWS_AS(hierarchize_iterative_refinement(grid, uniform3, SurplusVector(u), 1e-14, 1),
                    SolverError);
  }
}

TEST_CASE("chain closure") {
  // Regular grid with weakly fundamental splines: no insertion.
  {
    SparseGrid grid = regular_grid(4, 2);
    TensorBasis wfs(uniform_specs(BasisFamily::WeaklyFundamental, 3, 2));
    SparseGrid closed = chain_closure(grid, wfs, {0, 1});
    CHECK(closed.size() == grid.size());
  }
  // One-dimensional grids are always closed.
  {
    SparseGrid grid = regular_grid(5, 1);
    TensorBasis uniform3(uniform_specs(BasisFamily::Uniform, 3, 1));
    CHECK(chain_closure(grid, uniform3, {0}).size() == grid.size());
  }
  // Adaptive grids with uniform B-splines can grow strongly; closure is
  // idempotent and passes the chain check.
  {
    SparseGrid grid = adaptive_grid_2d();
    TensorBasis uniform3(uniform_specs(BasisFamily::Uniform, 3, 2));
    SparseGrid closed = chain_closure(grid, uniform3, {0, 1});
    CHECK(closed.size() > grid.size());
    CHECK(chain_closure(closed, uniform3, {0, 1}).size() == closed.size());
    CHECK_FALSE(find_chain_violation(closed, uniform3, {0, 1}).has_value());
    // Original points stay a prefix.
    for (std::size_t k = 0; k < grid.size(); ++k) CHECK(closed[k] == grid[k]);
  }
  // Chain-closed wfs-nak grids hierarchize correctly through the UP.
  {
    SparseGrid grid = adaptive_grid_2d();
    TensorBasis wfsnak(uniform_specs(BasisFamily::WfsNak, 3, 2));
    SparseGrid closed = chain_closure(grid, wfsnak, {0, 1});
    std::vector<double> u = sample(closed, smooth2);
    SurplusVector direct = hierarchize_direct(closed, wfsnak, SurplusVector(u));
    std::vector<double> up = unidirectional_principle(closed, wfsnak, u, {0, 1});
    CHECK(max_rel_diff(direct.data, up) <= 1e-8);
  }
}

TEST_CASE("hermite hierarchization") {
  // p = 1 on a regular 1-D grid reduces to classical hat hierarchization.
  {
    SparseGrid grid = regular_grid(5, 1);
    TensorBasis hat(uniform_specs(BasisFamily::Uniform, 1, 1));
    TensorBasis wfs1(uniform_specs(BasisFamily::WeaklyFundamental, 1, 1));
    std::vector<double> u(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double x = grid.coordinates(k)[0];
      u[k] = std::sin(5.0 * x) + x;
    }
    SurplusVector hermite = hierarchize_hermite(grid, wfs1, SurplusVector(u));
    SurplusVector direct = hierarchize_direct(grid, hat, SurplusVector(u));
    CHECK(max_rel_diff(hermite.data, direct.data) <= 1e-12);
  }
  // p = 3 on a regular 1-D grid of level 6.
  {
    SparseGrid grid = regular_grid(6, 1);
    TensorBasis wfs(uniform_specs(BasisFamily::WeaklyFundamental, 3, 1));
    std::vector<double> u(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      double x = grid.coordinates(k)[0];
      u[k] = std::exp(x) * std::cos(4.0 * x);
    }
    SurplusVector hermite = hierarchize_hermite(grid, wfs, SurplusVector(u));
    SurplusVector direct = hierarchize_direct(grid, wfs, SurplusVector(u));
    CHECK(max_rel_diff(hermite.data, direct.data) <= 1e-9);
  }
  // p = 3 in three dimensions through the UP.
  {
    SparseGrid grid = regular_grid(6, 3);
    TensorBasis wfs(uniform_specs(BasisFamily::WeaklyFundamental, 3, 3));
    std::vector<double> u = sample(grid, smooth_nd);
    SurplusVector hermite = hierarchize_hermite(grid, wfs, SurplusVector(u));
    SurplusVector direct = hierarchize_direct(grid, wfs, SurplusVector(u));
    CHECK(max_rel_diff(hermite.data, direct.data) <= 1e-8);
  }
  // Missing parents in adaptive 1-D pole are reported.
  {
    SparseGrid grid(1);
    grid.insert(LevelIndex({0}, {0}));
    grid.insert(LevelIndex({0}, {1}));
    grid.insert(LevelIndex({3}, {5}));
    TensorBasis wfs(uniform_specs(BasisFamily::WeaklyFundamental, 3, 1));
    std::vector<double> u = {0.0, 1.0, 0.5};
    CHECK_THROWS_AS(hierarchize_hermite(grid, wfs, SurplusVector(u)), DomainError);
  }
}

TEST_CASE("hermite hierarchization runs in roughly linear time") {
  auto wfs = make_basis({BasisFamily::WeaklyFundamental, 3});
  std::vector<double> log_n, log_t;
  for (int n = 8; n <= 16; n += 2) {
    SparseGrid grid = regular_grid(n, 1);
    std::vector<int> levels(grid.size());
    std::vector<std::int64_t> indices(grid.size());
    std::vector<double> data(grid.size());
    auto order = poles(grid, 0)[0].members;
    for (std::size_t k = 0; k < order.size(); ++k) {
      levels[k] = grid[order[k]].level[0];
      indices[k] = grid[order[k]].index[0];
      double x = grid.coordinates(order[k])[0];
      data[k] = std::sin(7.0 * x);
    }
    // Warm up once for the smallest size to exclude cache setup.
    if (n == 8) {
      auto copy = data;
      hermite_pole_solve(*wfs, levels, indices, copy);
    }
    auto start = std::chrono::steady_clock::now();
    hermite_pole_solve(*wfs, levels, indices, data);
    auto stop = std::chrono::steady_clock::now();
    double seconds = std::chrono::duration<double>(stop - start).count();
    log_n.push_back(std::log2(static_cast<double>(grid.size())));
    log_t.push_back(std::log2(std::max(seconds, 1e-7)));
  }
  // Least-squares slope of log time vs log size.
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < log_n.size(); ++k) {
    mx += log_n[k];
    my += log_t[k];
  }
  mx /= log_n.size();
  my /= log_n.size();
  double num = 0, den = 0;
  for (std::size_t k = 0; k < log_n.size(); ++k) {
    num += (log_n[k] - mx) * (log_t[k] - my);
    den += (log_n[k] - mx) * (log_n[k] - mx);
  }
  CHECK(num / den <= 1.3);
}

TEST_CASE("cross-algorithm equivalence on regular grids") {
  for (int d : {2, 3}) {
    int n = 4;
    SparseGrid grid = regular_grid(n, d);
    std::vector<double> u = sample(grid, smooth_nd);

    for (int p : {1, 3}) {
      BasisFamily family = (p == 1) ? BasisFamily::Uniform : BasisFamily::NotAKnot;
      TensorBasis basis(uniform_specs(family, p, d));
      SurplusVector direct = hierarchize_direct(grid, basis, SurplusVector(u));
      CHECK(interpolation_residual(grid, basis, direct.data, u) <= 1e-8);

      SurplusVector comb = hierarchize_combination(n, d, basis, SurplusVector(u));
      CHECK(max_rel_diff(direct.data, comb.data) <= 1e-8);

      SurplusVector resid = hierarchize_residual(LevelSet::regular(n, d), basis, SurplusVector(u));
      CHECK(max_rel_diff(direct.data, resid.data) <= 1e-8);
    }

    TensorBasis wfs(uniform_specs(BasisFamily::WeaklyFundamental, 3, d));
    SurplusVector wfs_direct = hierarchize_direct(grid, wfs, SurplusVector(u));
    SurplusVector hermite = hierarchize_hermite(grid, wfs, SurplusVector(u));
    CHECK(max_rel_diff(wfs_direct.data, hermite.data) <= 1e-7);

    TensorBasis fs(uniform_specs(BasisFamily::Fundamental, 3, d));
    SurplusVector fs_direct = hierarchize_direct(grid, fs, SurplusVector(u));
    SurplusVector bfs = hierarchize_bfs(grid, fs, SurplusVector(u));
    CHECK(max_rel_diff(fs_direct.data, bfs.data) <= 1e-7);
  }
}

TEST_CASE("vector-valued direct hierarchization") {
  SparseGrid grid = regular_grid(3, 2);
  TensorBasis nak(uniform_specs(BasisFamily::NotAKnot, 3, 2));
  SurplusVector values;
  values.columns = 2;
  values.data.resize(grid.size() * 2);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    auto x = grid.coordinates(k);
    values.at(k, 0) = smooth2(x);
    values.at(k, 1) = x[0] - x[1];
  }
  SurplusVector alpha = hierarchize_direct(grid, nak, values);
  // Each column matches its scalar solve.
  for (int j = 0; j < 2; ++j) {
    std::vector<double> column(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) column[k] = values.at(k, j);
    SurplusVector scalar = hierarchize_direct(grid, nak, SurplusVector(column));
    for (std::size_t k = 0; k < grid.size(); ++k) {
      CHECK(alpha.at(k, j) == doctest::Approx(scalar.data[k]).epsilon(1e-12));
    }
  }
}
