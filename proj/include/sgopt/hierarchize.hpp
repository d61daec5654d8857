#ifndef SGOPT_HIERARCHIZE_HPP
#define SGOPT_HIERARCHIZE_HPP

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "sgopt/basis.hpp"
#include "sgopt/grid.hpp"

namespace sgopt {

/// Surplus (or value) vector aligned with a grid's point order; m columns
/// for vector-valued data.
struct SurplusVector {
  std::vector<double> data;
  int columns = 1;

  SurplusVector() = default;
  explicit SurplusVector(std::vector<double> values, int m = 1)
      : data(std::move(values)), columns(m) {}

  std::size_t size() const { return columns > 0 ? data.size() / columns : 0; }
  double& at(std::size_t k, int j = 0) { return data[k * columns + j]; }
  double at(std::size_t k, int j = 0) const { return data[k * columns + j]; }
};

/// One-dimensional subgrid: members agree in every component but `dimension`.
struct Pole {
  int dimension = 0;
  std::vector<std::size_t> members;  // grid indices sorted by coordinate in `dimension`
};

/// Grid indices sorted by level sum, then lexicographic level/index; the
/// ordering that makes fundamental collocation matrices literally triangular.
std::vector<std::size_t> sorted_order(const SparseGrid& grid);

/// Dense collocation matrix A[r][c] = basis_{perm[c]}(x_{perm[r]}), with a
/// support test deciding which entries are evaluated at all.
std::vector<double> assemble_matrix(const SparseGrid& grid, const TensorBasis& basis,
                                    const std::vector<std::size_t>& perm);
std::vector<double> assemble_matrix(const SparseGrid& grid, const TensorBasis& basis);

/// Evaluates the interpolant given by surpluses at every grid point
/// (the dehierarchization A * alpha).
std::vector<double> dehierarchize(const SparseGrid& grid, const TensorBasis& basis,
                                  const std::vector<double>& surpluses);

/// Hierarchization by solving the full collocation system with dense LU.
SurplusVector hierarchize_direct(const SparseGrid& grid, const TensorBasis& basis,
                                 const SurplusVector& values);

/// Partition of the grid into poles along dimension t.
std::vector<Pole> poles(const SparseGrid& grid, int t);

enum class PoleOperation { Hierarchize, Dehierarchize };

/// A one-dimensional operator applied on a pole: receives the 1-D levels,
/// indices, and data of the pole members (sorted by coordinate) and rewrites
/// the data in place.
using PoleOperator = std::function<void(
    int t, const std::vector<int>& levels, const std::vector<std::int64_t>& indices,
    std::vector<double>& data)>;

/// Unidirectional principle: applies the 1-D operator pole by pole,
/// dimension by dimension in the given order (0-based permutation).
std::vector<double> unidirectional_principle(const SparseGrid& grid,
                                             const std::vector<int>& order,
                                             const PoleOperator& op,
                                             const std::vector<double>& values);

/// UP with the interpolation operator of the given basis (solve per pole for
/// Hierarchize, multiply for Dehierarchize). Correctness on spatially
/// adaptive grids requires the chains of Cor. 4.25; enable check_chains to
/// verify (slow).
std::vector<double> unidirectional_principle(const SparseGrid& grid, const TensorBasis& basis,
                                             const std::vector<double>& values,
                                             const std::vector<int>& order,
                                             PoleOperation op = PoleOperation::Hierarchize,
                                             bool check_chains = false);

/// True if the family admits the hierarchical splitting on the whole unit
/// interval (hat functions or the not-a-knot families).
bool admits_hierarchical_splitting(const BasisSpec& spec);

/// Combination-technique hierarchization on the regular grid of level n
/// (values aligned with regular_grid(n, d)).
SurplusVector hierarchize_combination(int n, int d, const TensorBasis& basis,
                                      const SurplusVector& values);

/// Residual interpolation on a dimensionally adaptive grid (values aligned
/// with grid_from_level_set(levels, d)).
SurplusVector hierarchize_residual(const LevelSet& levels, const TensorBasis& basis,
                                   const SurplusVector& values);

/// Breadth-first-search forward substitution for fundamental bases; the grid
/// must contain the corners and every point must be reachable from them.
SurplusVector hierarchize_bfs(const SparseGrid& grid, const TensorBasis& basis,
                              const SurplusVector& values);

struct IterativeRefinementResult {
  SurplusVector surpluses;
  int iterations = 0;
};

/// Iterative refinement with the raw UP as preconditioner; throws
/// SolverError on divergence or when max_iter is exhausted.
IterativeRefinementResult hierarchize_iterative_refinement(const SparseGrid& grid,
                                                           const TensorBasis& basis,
                                                           const SurplusVector& values,
                                                           double tol, int max_iter);

/// Smallest superset of the grid containing, for every pair with
/// overlapping support, the chain with respect to the reversed order.
/// The original points stay a prefix of the result.
SparseGrid chain_closure(const SparseGrid& grid, const TensorBasis& basis,
                         const std::vector<int>& order);

/// Returns a pair violating the chain condition of Cor. 4.25 for the
/// reversed order, or nothing if the UP is correct for hierarchization.
std::optional<std::pair<LevelIndex, LevelIndex>> find_chain_violation(
    const SparseGrid& grid, const TensorBasis& basis, const std::vector<int>& order);

/// Hermite hierarchization (level-by-level, linear time) on one pole of a
/// weakly fundamental basis; exposed for use as a PoleOperator.
void hermite_pole_solve(const Basis1d& basis, const std::vector<int>& levels,
                        const std::vector<std::int64_t>& indices, std::vector<double>& data);

/// Hermite hierarchization: the 1-D operator above applied through the UP.
/// The basis must be weakly fundamental; on 1-D grids this is Alg.-style
/// level-by-level hierarchization in linear time.
SurplusVector hierarchize_hermite(const SparseGrid& grid, const TensorBasis& basis,
                                  const SurplusVector& values,
                                  const std::vector<int>& order = {});

}  // namespace sgopt

#endif
