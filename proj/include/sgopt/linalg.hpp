#ifndef SGOPT_LINALG_HPP
#define SGOPT_LINALG_HPP

#include <vector>

#include "sgopt/common.hpp"

namespace sgopt {

/// Dense row-major matrix solve A x = b via LU with partial pivoting.
/// Throws SolverError (with a condition estimate) when A is singular or the
/// solution residual is unacceptable.
std::vector<double> solve_dense(const std::vector<double>& a, int n, const std::vector<double>& b);

/// Multiple right-hand sides: B is n x m row-major, returns X (n x m).
std::vector<double> solve_dense_multi(const std::vector<double>& a, int n,
                                      const std::vector<double>& b, int m);

/// Reciprocal condition estimate of the last factorization path; helper
/// exposed for error reporting.
double dense_rcond(const std::vector<double>& a, int n);

/// Banded matrix in LAPACK-style band storage with kl sub- and ku
/// superdiagonals. Solving uses Gaussian elimination with partial pivoting
/// (fill widens the upper band by kl); linear time and memory in n.
class BandMatrix {
 public:
  BandMatrix(int n, int kl, int ku);

  int size() const { return n_; }
  double& at(int row, int col);
  double at(int row, int col) const;
  bool in_band(int row, int col) const {
    return col - row <= ku_ && row - col <= kl_;
  }

  /// Solves A x = b in place of the factorization (the matrix is consumed).
  std::vector<double> solve(std::vector<double> b);

 private:
  int n_, kl_, ku_;
  std::vector<double> data_;  // (2*kl + ku + 1) x n, column-major bands
  double& entry(int row, int col);
};

}  // namespace sgopt

#endif
