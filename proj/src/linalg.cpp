#include "sgopt/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace sgopt {

namespace {

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
map_matrix(const std::vector<double>& a, int n, int m) {
  return {a.data(), n, m};
}

}  // namespace

std::vector<double> solve_dense_multi(const std::vector<double>& a, int n,
                                      const std::vector<double>& b, int m) {
  if (static_cast<int>(a.size()) != n * n || static_cast<int>(b.size()) != n * m) {
    throw DomainError("solve_dense: size mismatch");
  }
  auto A = map_matrix(a, n, n);
  auto B = map_matrix(b, n, m);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  Eigen::MatrixXd x = lu.solve(B);
  double resid = (A * x - B).cwiseAbs().maxCoeff();
  double scale = B.cwiseAbs().maxCoeff();
  if (!x.allFinite() || (scale > 0 && resid > 1e-9 * scale)) {
    // One refinement step before giving up.
    Eigen::MatrixXd r = B - A * x;
    x += lu.solve(r);
    resid = (A * x - B).cwiseAbs().maxCoeff();
    if (!x.allFinite() || (scale > 0 && resid > 1e-9 * scale)) {
      throw SolverError("dense solve failed: residual " + std::to_string(resid),
                        1.0 / std::max(lu.rcond(), 1e-300));
    }
  }
  std::vector<double> out(n * m);
  Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      out.data(), n, m) = x;
  return out;
}

std::vector<double> solve_dense(const std::vector<double>& a, int n, const std::vector<double>& b) {
  return solve_dense_multi(a, n, b, 1);
}

double dense_rcond(const std::vector<double>& a, int n) {
  auto A = map_matrix(a, n, n);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
  return lu.rcond();
}

BandMatrix::BandMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku) {
  if (n < 1 || kl < 0 || ku < 0) throw DomainError("BandMatrix: invalid shape");
  data_.assign(static_cast<std::size_t>(2 * kl + ku + 1) * n, 0.0);
}

double& BandMatrix::entry(int row, int col) {
  // Row `row` of column `col` lives at band offset kl + ku + row - col.
  return data_[static_cast<std::size_t>(col) * (2 * kl_ + ku_ + 1) + (kl_ + ku_ + row - col)];
}

double& BandMatrix::at(int row, int col) {
  if (!in_band(row, col)) throw DomainError("BandMatrix::at: outside band");
  return entry(row, col);
}

double BandMatrix::at(int row, int col) const {
  if (!in_band(row, col)) return 0.0;
  return data_[static_cast<std::size_t>(col) * (2 * kl_ + ku_ + 1) + (kl_ + ku_ + row - col)];
}

std::vector<double> BandMatrix::solve(std::vector<double> b) {
  if (static_cast<int>(b.size()) != n_) throw DomainError("BandMatrix::solve: size mismatch");
  const int width = kl_ + ku_;  // widened upper bandwidth after pivoting
  std::vector<int> pivot(n_);

  for (int k = 0; k < n_; ++k) {
    int pmax = k;
    double vmax = std::abs(entry(k, k));
    for (int r = k + 1; r <= std::min(k + kl_, n_ - 1); ++r) {
      double v = std::abs(entry(r, k));
      if (v > vmax) {
        vmax = v;
        pmax = r;
      }
    }
    if (vmax == 0.0) throw SolverError("banded solve: singular matrix");
    pivot[k] = pmax;
    if (pmax != k) {
      for (int c = k; c <= std::min(k + width, n_ - 1); ++c) {
        std::swap(entry(k, c), entry(pmax, c));
      }
      std::swap(b[k], b[pmax]);
    }
    for (int r = k + 1; r <= std::min(k + kl_, n_ - 1); ++r) {
      double factor = entry(r, k) / entry(k, k);
      entry(r, k) = 0.0;
      if (factor != 0.0) {
        for (int c = k + 1; c <= std::min(k + width, n_ - 1); ++c) {
          entry(r, c) -= factor * entry(k, c);
        }
        b[r] -= factor * b[k];
      }
    }
  }
  for (int k = n_ - 1; k >= 0; --k) {
    double s = b[k];
    for (int c = k + 1; c <= std::min(k + width, n_ - 1); ++c) {
      s -= entry(k, c) * b[c];
    }
    b[k] = s / entry(k, k);
  }
  return b;
}

}  // namespace sgopt
