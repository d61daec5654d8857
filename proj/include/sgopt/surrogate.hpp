#ifndef SGOPT_SURROGATE_HPP
#define SGOPT_SURROGATE_HPP

#include <string>
#include <vector>

#include "sgopt/basis.hpp"
#include "sgopt/grid.hpp"
#include "sgopt/hierarchize.hpp"

namespace sgopt {

enum class ExtrapolationMode { Constant, Linear, Quadratic };

/// Sparse grid interpolant: grid + basis + surpluses, possibly vector-valued
/// (shared grid, one column per output component). Immutable after
/// construction; evaluation is thread-safe.
class Interpolant {
 public:
  Interpolant(SparseGrid grid, TensorBasis basis, SurplusVector surpluses);

  /// Hierarchizes the given point values (direct dense solve, one
  /// factorization for all columns).
  static Interpolant fit(SparseGrid grid, TensorBasis basis, SurplusVector values);

  int dim() const { return grid_.dim(); }
  int columns() const { return surpluses_.columns; }
  const SparseGrid& grid() const { return grid_; }
  const TensorBasis& basis() const { return basis_; }
  const SurplusVector& surpluses() const { return surpluses_; }

  /// Value of column j at x in [0,1]^d.
  double evaluate(const std::vector<double>& x, int j = 0) const;

  /// All columns at once.
  void evaluate_all(const std::vector<double>& x, double* out) const;

  std::vector<double> gradient(const std::vector<double>& x, int j = 0) const;

  /// Values plus gradients of every column; gradients is columns x d row-major.
  void evaluate_with_gradients(const std::vector<double>& x, double* values,
                               double* gradients) const;

  /// Row-major d x d Hessian of column j; symmetric by construction.
  std::vector<double> hessian(const std::vector<double>& x, int j = 0) const;

  /// Taylor extension beyond the unit cube: the evaluation point is cropped
  /// componentwise and the requested Taylor terms are added (the quadratic
  /// form carries no 1/2 factor).
  double extrapolated_evaluate(const std::vector<double>& x, ExtrapolationMode mode,
                               int j = 0) const;

  /// Writes <prefix>.grid, <prefix>.surplus.csv, and <prefix>.spec.
  void save(const std::string& prefix) const;
  static Interpolant load(const std::string& prefix);

 private:
  void check_point(const std::vector<double>& x) const;

  SparseGrid grid_;
  TensorBasis basis_;
  SurplusVector surpluses_;
};

/// Matrix-valued SPD surrogate: interpolates the upper-triangular Cholesky
/// factors R(x) entrywise; the reconstruction R^T R is positive semidefinite
/// everywhere by construction.
class SpdSurrogate {
 public:
  /// samples: one row-major m x m SPD matrix per grid point.
  static SpdSurrogate build(SparseGrid grid, TensorBasis basis,
                            const std::vector<double>& samples, int m);

  int matrix_size() const { return m_; }
  const Interpolant& factors() const { return factors_; }

  /// E(x) = R(x)^T R(x), row-major m x m, exactly symmetric.
  std::vector<double> evaluate(const std::vector<double>& x) const;

  /// dE/dx_t = R^T dR/dx_t + (dR/dx_t)^T R.
  std::vector<double> derivative(const std::vector<double>& x, int t) const;

 private:
  SpdSurrogate(int m, Interpolant factors) : m_(m), factors_(std::move(factors)) {}

  int m_;
  Interpolant factors_;
};

/// Upper-triangular Cholesky factor R (row-major) of the SPD matrix a with
/// a = R^T R; throws SolverError naming the failing pivot otherwise.
std::vector<double> cholesky_upper(const std::vector<double>& a, int m);

}  // namespace sgopt

#endif
