#include "sgopt/basis.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "sgopt/linalg.hpp"

namespace sgopt {

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

BasisFamily parse_family(const std::string& name) {
  static const std::map<std::string, BasisFamily> table = {
      {"uniform", BasisFamily::Uniform},
      {"modified", BasisFamily::Modified},
      {"clenshaw-curtis", BasisFamily::ClenshawCurtis},
      {"cc", BasisFamily::ClenshawCurtis},
      {"cc-modified", BasisFamily::CcModified},
      {"not-a-knot", BasisFamily::NotAKnot},
      {"nak", BasisFamily::NotAKnot},
      {"nak-modified", BasisFamily::NakModified},
      {"cc-not-a-knot", BasisFamily::CcNotAKnot},
      {"cc-nak", BasisFamily::CcNotAKnot},
      {"cc-nak-modified", BasisFamily::CcNakModified},
      {"fundamental", BasisFamily::Fundamental},
      {"fs", BasisFamily::Fundamental},
      {"fundamental-modified", BasisFamily::FundamentalModified},
      {"fs-modified", BasisFamily::FundamentalModified},
      {"fundamental-nak", BasisFamily::FundamentalNak},
      {"fs-nak", BasisFamily::FundamentalNak},
      {"weakly-fundamental", BasisFamily::WeaklyFundamental},
      {"wfs", BasisFamily::WeaklyFundamental},
      {"wfs-nak", BasisFamily::WfsNak},
  };
  auto it = table.find(name);
  if (it == table.end()) throw DomainError("unknown basis family: " + name);
  return it->second;
}

std::string family_name(BasisFamily family) {
  switch (family) {
    case BasisFamily::Uniform: return "uniform";
    case BasisFamily::Modified: return "modified";
    case BasisFamily::ClenshawCurtis: return "clenshaw-curtis";
    case BasisFamily::CcModified: return "cc-modified";
    case BasisFamily::NotAKnot: return "not-a-knot";
    case BasisFamily::NakModified: return "nak-modified";
    case BasisFamily::CcNotAKnot: return "cc-not-a-knot";
    case BasisFamily::CcNakModified: return "cc-nak-modified";
    case BasisFamily::Fundamental: return "fundamental";
    case BasisFamily::FundamentalModified: return "fundamental-modified";
    case BasisFamily::FundamentalNak: return "fundamental-nak";
    case BasisFamily::WeaklyFundamental: return "weakly-fundamental";
    case BasisFamily::WfsNak: return "wfs-nak";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Cardinal B-splines
// ---------------------------------------------------------------------------

double cardinal_bspline(int p, double x) {
  if (p < 0) throw DomainError("cardinal_bspline: degree must be non-negative");
  if (p == 0) return (x >= 0.0 && x < 1.0) ? 1.0 : 0.0;
  if (x <= 0.0 || x >= p + 1.0) return 0.0;
  return (x * cardinal_bspline(p - 1, x) + (p + 1.0 - x) * cardinal_bspline(p - 1, x - 1.0)) / p;
}

double cardinal_bspline_derivative(int p, int q, double x) {
  if (q < 0) throw DomainError("cardinal_bspline_derivative: order must be non-negative");
  if (q == 0) return cardinal_bspline(p, x);
  if (q > p) return 0.0;
  // d^q/dx^q b^p = sum_j (-1)^j C(q, j) b^(p-q)(x - j).
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 0; j <= q; ++j) {
    sum += sign * static_cast<double>(binomial(q, j)) * cardinal_bspline(p - q, x - j);
    sign = -sign;
  }
  return sum;
}

namespace {

// Piecewise monomial representation of b^p: one polynomial in the local
// coordinate u = x - j per knot interval [j, j+1).
struct CardinalTable {
  int degree;
  std::vector<std::vector<double>> pieces;  // pieces[j][k] = coeff of u^k

  double eval(int q, double x) const {
    int j = static_cast<int>(std::floor(x));
    if (j < 0 || j > degree || x != x) return 0.0;
    double u = x - j;
    const auto& c = pieces[j];
    // Horner on the q-th derivative of the local polynomial.
    double r = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= q; --k) {
      double factor = 1.0;
      for (int s = 0; s < q; ++s) factor *= (k - s);
      r = r * u + factor * c[k];
    }
    return r;
  }
};

const CardinalTable& cardinal_table(int p) {
  static std::mutex mutex;
  static std::map<int, CardinalTable> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(p);
  if (it != cache.end()) return it->second;

  CardinalTable table;
  table.degree = 0;
  table.pieces = {{1.0}};
  for (int deg = 1; deg <= p; ++deg) {
    CardinalTable next;
    next.degree = deg;
    next.pieces.assign(deg + 1, {});
    for (int j = 0; j <= deg; ++j) {
      std::vector<double> piece(deg + 1, 0.0);
      // (u + j)/deg * b^(deg-1) piece j  +  (deg + 1 - u - j)/deg * piece j-1
      if (j <= deg - 1) {
        const auto& prev = table.pieces[j];
        for (std::size_t k = 0; k < prev.size(); ++k) {
          piece[k] += (static_cast<double>(j) / deg) * prev[k];
          piece[k + 1] += prev[k] / deg;
        }
      }
      if (j >= 1) {
        const auto& prev = table.pieces[j - 1];
        for (std::size_t k = 0; k < prev.size(); ++k) {
          piece[k] += (static_cast<double>(deg + 1 - j) / deg) * prev[k];
          piece[k + 1] -= prev[k] / deg;
        }
      }
      next.pieces[j] = std::move(piece);
    }
    table = std::move(next);
  }
  return cache.emplace(p, std::move(table)).first->second;
}

}  // namespace

double cardinal_bspline_fast(int p, int q, double x) {
  if (q > p) return 0.0;
  return cardinal_table(p).eval(q, x);
}

// ---------------------------------------------------------------------------
// Knots and non-uniform B-splines
// ---------------------------------------------------------------------------

double chebyshev_point(int level, std::int64_t i) {
  if (level < 0 || i < 0 || i > ipow2(level)) throw DomainError("chebyshev_point: invalid index");
  std::int64_t n = ipow2(level);
  if (i == 0) return 0.0;
  if (i == n) return 1.0;
  if (2 * i == n) return 0.5;
  return (1.0 - std::cos(M_PI * static_cast<double>(i) / static_cast<double>(n))) / 2.0;
}

namespace {

double grid_point_1d(KnotKind kind, int level, std::int64_t i) {
  bool cc = (kind == KnotKind::ClenshawCurtis || kind == KnotKind::CcNotAKnot);
  if (!cc) return point_coordinate_1d(level, i);
  // Extend Chebyshev points beyond [0, 1] with the spacing of the first
  // interior point, matching the knot construction.
  std::int64_t n = ipow2(level);
  if (i < 0) return static_cast<double>(i) * chebyshev_point(level, 1);
  if (i > n) return 1.0 + static_cast<double>(i - n) * chebyshev_point(level, 1);
  return chebyshev_point(level, i);
}

}  // namespace

KnotSequence build_knots(KnotKind kind, int level, int p) {
  if (level < 0 || p < 1) throw DomainError("build_knots: invalid level or degree");
  std::int64_t n = ipow2(level);
  int m = static_cast<int>(n) + 1;
  KnotSequence ks;
  ks.degree = p;
  ks.knots.resize(m + p + 1);
  switch (kind) {
    case KnotKind::Uniform:
      for (int k = 0; k <= m + p; ++k) {
        ks.knots[k] = point_coordinate_1d(level, k - (p + 1) / 2);
      }
      break;
    case KnotKind::ClenshawCurtis: {
      double h1 = (level == 0) ? 1.0 : chebyshev_point(level, 1);
      for (int k = 0; k <= m + p; ++k) {
        if (k < (p + 1) / 2) {
          ks.knots[k] = (k - (p + 1) / 2) * h1;
        } else if (k <= n + (p + 1) / 2) {
          ks.knots[k] = chebyshev_point(level, k - (p + 1) / 2);
        } else {
          ks.knots[k] = 1.0 + (k - n - (p + 1) / 2) * h1;
        }
      }
      break;
    }
    case KnotKind::NotAKnot:
    case KnotKind::CcNotAKnot: {
      if (n < p + 1) {
        throw DomainError("build_knots: not-a-knot needs 2^level >= p + 1 (use Lagrange path)");
      }
      KnotKind base = (kind == KnotKind::NotAKnot) ? KnotKind::Uniform : KnotKind::ClenshawCurtis;
      for (int k = 0; k <= m + p; ++k) {
        std::int64_t i;
        if (k <= p) {
          i = k - p;
        } else if (k <= n) {
          i = k - (p + 1) / 2;
        } else {
          i = k - 1;
        }
        ks.knots[k] = grid_point_1d(base, level, i);
      }
      break;
    }
  }
  return ks;
}

namespace {

double bspline_rec(const double* knots, int k, int p, double x) {
  if (p == 0) return (x >= knots[k] && x < knots[k + 1]) ? 1.0 : 0.0;
  if (x <= knots[k] || x >= knots[k + p + 1]) return 0.0;
  double value = 0.0;
  double dl = knots[k + p] - knots[k];
  if (dl > 0.0) value += (x - knots[k]) / dl * bspline_rec(knots, k, p - 1, x);
  double dr = knots[k + p + 1] - knots[k + 1];
  if (dr > 0.0) value += (knots[k + p + 1] - x) / dr * bspline_rec(knots, k + 1, p - 1, x);
  return value;
}

double bspline_deriv_rec(const double* knots, int k, int p, int q, double x) {
  if (q == 0) return bspline_rec(knots, k, p, x);
  if (q > p) return 0.0;
  double value = 0.0;
  double dl = knots[k + p] - knots[k];
  if (dl > 0.0) value += bspline_deriv_rec(knots, k, p - 1, q - 1, x) / dl;
  double dr = knots[k + p + 1] - knots[k + 1];
  if (dr > 0.0) value -= bspline_deriv_rec(knots, k + 1, p - 1, q - 1, x) / dr;
  return p * value;
}

}  // namespace

double nonuniform_bspline(const KnotSequence& ks, int k, double x) {
  if (k < 0 || k >= ks.num_bsplines()) throw DomainError("nonuniform_bspline: index out of range");
  return bspline_rec(ks.knots.data(), k, ks.degree, x);
}

double nonuniform_bspline_derivative(const KnotSequence& ks, int k, int q, double x) {
  if (k < 0 || k >= ks.num_bsplines()) throw DomainError("nonuniform_bspline: index out of range");
  if (q < 0) throw DomainError("nonuniform_bspline_derivative: order must be non-negative");
  return bspline_deriv_rec(ks.knots.data(), k, ks.degree, q, x);
}

// ---------------------------------------------------------------------------
// Lagrange polynomials (coarse-level fallback of not-a-knot bases)
// ---------------------------------------------------------------------------

namespace {

class LagrangePolynomials {
 public:
  explicit LagrangePolynomials(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    const std::size_t n = nodes_.size();
    weights_.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j != i) weights_[i] /= (nodes_[i] - nodes_[j]);
      }
    }
    monomials_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> c = {1.0};
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        // multiply by (x - x_j) / (x_i - x_j)
        std::vector<double> next(c.size() + 1, 0.0);
        double denom = nodes_[i] - nodes_[j];
        for (std::size_t k = 0; k < c.size(); ++k) {
          next[k] -= c[k] * nodes_[j] / denom;
          next[k + 1] += c[k] / denom;
        }
        c = std::move(next);
      }
      monomials_[i] = std::move(c);
    }
  }

  std::size_t size() const { return nodes_.size(); }

  double value(std::size_t i, double x) const {
    // Second barycentric form with exact node handling.
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      double dx = x - nodes_[j];
      if (dx == 0.0) return (i == j) ? 1.0 : 0.0;
      double w = weights_[j] / dx;
      den += w;
      if (j == i) num = w;
    }
    return num / den;
  }

  double derivative(std::size_t i, int q, double x) const {
    const auto& c = monomials_[i];
    double r = 0.0;
    for (int k = static_cast<int>(c.size()) - 1; k >= q; --k) {
      double factor = 1.0;
      for (int s = 0; s < q; ++s) factor *= (k - s);
      r = r * x + factor * c[k];
    }
    return r;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
  std::vector<std::vector<double>> monomials_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Fundamental, modified fundamental, weakly fundamental coefficients
// ---------------------------------------------------------------------------

double FundamentalCoefficients::parent_derivative(int q, double x) const {
  // Only B-splines with x - k + (p+1)/2 in (0, p+1) contribute.
  double half = (degree + 1) / 2.0;
  int klo = static_cast<int>(std::ceil(x - half));
  int khi = static_cast<int>(std::floor(x + half));
  klo = std::max(klo, k_min);
  khi = std::min(khi, k_max());
  double sum = 0.0;
  for (int k = klo; k <= khi; ++k) {
    sum += at(k) * cardinal_bspline_fast(degree, q, x - k + (degree + 1) / 2);
  }
  return sum;
}

namespace {

void require_odd_degree(int p, const char* what) {
  if (p < 1 || p % 2 == 0) throw DomainError(std::string(what) + ": degree must be odd >= 1");
}

}  // namespace

FundamentalCoefficients fundamental_coefficients(int p, double threshold) {
  require_odd_degree(p, "fundamental_coefficients");
  if (threshold <= 0.0) throw DomainError("fundamental_coefficients: threshold must be positive");

  int n = 64;
  for (;;) {
    // Symmetric banded Toeplitz system: rows/cols k = -(n-1)..(n-1),
    // M[r][c] = b^p((p+1)/2 + r - c), right-hand side e_0.
    const int size = 2 * n - 1;
    const int band = (p - 1) / 2;
    BandMatrix mat(size, band, band);
    for (int r = 0; r < size; ++r) {
      for (int c = std::max(0, r - band); c <= std::min(size - 1, r + band); ++c) {
        mat.at(r, c) = cardinal_bspline(p, (p + 1) / 2.0 + (r - c));
      }
    }
    std::vector<double> rhs(size, 0.0);
    rhs[n - 1] = 1.0;
    std::vector<double> c = mat.solve(std::move(rhs));

    int largest = 0;
    for (int k = -(n - 1); k <= n - 1; ++k) {
      if (std::abs(c[k + n - 1]) >= threshold) largest = std::max(largest, std::abs(k));
    }
    int np = largest + 1;
    if (np + 10 > n) {
      n *= 2;
      continue;
    }
    FundamentalCoefficients out;
    out.degree = p;
    out.variant = FundamentalVariant::Fundamental;
    out.truncation_index = np;
    out.k_min = -(np - 1);
    out.coeff.assign(c.begin() + (n - np), c.begin() + (n + np - 1));
    return out;
  }
}

FundamentalCoefficients modified_fundamental_coefficients(int p, double threshold) {
  require_odd_degree(p, "modified_fundamental_coefficients");
  FundamentalCoefficients out;
  out.degree = p;
  out.variant = FundamentalVariant::ModifiedFundamental;
  if (p == 1) {
    // Linear extrapolation parent max(2 - x, 0) expressed in hat functions.
    out.truncation_index = 2;
    out.k_min = 0;
    out.coeff = {2.0, 1.0};
    return out;
  }

  const int k_min = 1 - (p + 1) / 2;
  int k_max = fundamental_coefficients(p, threshold).truncation_index + 10;
  const int unknowns = k_max - k_min + 1;
  const double half = (p + 1) / 2.0;

  // Rows: derivative conditions at 0 (q = 2..(p+1)/2), second derivative at
  // 1, fundamental conditions at the positive integers 1..k_max.
  std::vector<double> mat(static_cast<std::size_t>(unknowns) * unknowns, 0.0);
  std::vector<double> rhs(unknowns, 0.0);
  int row = 0;
  auto entry = [&](int r, int k) -> double& {
    return mat[static_cast<std::size_t>(r) * unknowns + (k - k_min)];
  };
  for (int q = 2; q <= (p + 1) / 2; ++q, ++row) {
    for (int k = k_min; k <= k_max; ++k) {
      entry(row, k) = cardinal_bspline_derivative(p, q, 0.0 - k + half);
    }
  }
  for (int k = k_min; k <= k_max; ++k) {
    entry(row, k) = cardinal_bspline_derivative(p, 2, 1.0 - k + half);
  }
  ++row;
  for (int i = 1; i <= k_max; ++i, ++row) {
    for (int k = k_min; k <= k_max; ++k) {
      entry(row, k) = cardinal_bspline(p, i - k + half);
    }
    rhs[row] = (i == 1) ? 1.0 : 0.0;
  }

  std::vector<double> c = solve_dense(mat, unknowns, rhs);
  int largest = k_min;
  for (int k = k_min; k <= k_max; ++k) {
    if (std::abs(c[k - k_min]) >= threshold) largest = k;
  }
  out.truncation_index = largest + 1;
  out.k_min = k_min;
  out.coeff.assign(c.begin(), c.begin() + (largest - k_min + 1));
  return out;
}

FundamentalCoefficients weakly_fundamental_coefficients(int p) {
  require_odd_degree(p, "weakly_fundamental_coefficients");
  FundamentalCoefficients out;
  out.degree = p;
  out.variant = FundamentalVariant::WeaklyFundamental;
  out.k_min = -(p - 1) / 2;
  out.truncation_index = (p - 1) / 2 + 1;
  if (p == 1) {
    out.coeff = {1.0};
    return out;
  }
  // c_0 = 1; the p - 1 free coefficients are fixed by zeros at the odd
  // integers -p+2, -p+4, ..., p-2.
  const int m = p - 1;
  const double half = (p + 1) / 2.0;
  std::vector<double> mat(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> rhs(m, 0.0);
  std::vector<int> ks;
  for (int k = out.k_min; k <= (p - 1) / 2; ++k) {
    if (k != 0) ks.push_back(k);
  }
  int row = 0;
  for (int kp = -p + 2; kp <= p - 2; kp += 2, ++row) {
    for (int col = 0; col < m; ++col) {
      mat[static_cast<std::size_t>(row) * m + col] = cardinal_bspline(p, kp - ks[col] + half);
    }
    rhs[row] = -cardinal_bspline(p, kp + half);
  }
  std::vector<double> sol = solve_dense(mat, m, rhs);
  out.coeff.assign(p, 0.0);
  out.coeff[0 - out.k_min] = 1.0;
  for (int col = 0; col < m; ++col) out.coeff[ks[col] - out.k_min] = sol[col];
  return out;
}

// ---------------------------------------------------------------------------
// 1-D family implementations
// ---------------------------------------------------------------------------

namespace {

void check_hierarchical_index(int level, std::int64_t i, bool boundaryless) {
  if (level < 0) throw DomainError("basis: negative level");
  if (boundaryless && level < 1) throw DomainError("basis: modified family requires level >= 1");
  if (i < 0 || i > ipow2(level)) throw DomainError("basis: index out of range");
}

// Uniform B-splines via the affine transform of the cardinal parent; valid
// for arbitrary integer indices.
class UniformBasis : public Basis1d {
 public:
  explicit UniformBasis(int p) : Basis1d(p) {}

  double value_any_index(int level, std::int64_t i, double x) const {
    double y = std::ldexp(x, level) + (degree_ + 1) / 2.0 - static_cast<double>(i);
    return cardinal_bspline_fast(degree_, 0, y);
  }

  double derivative_any_index(int level, std::int64_t i, int q, double x) const {
    double y = std::ldexp(x, level) + (degree_ + 1) / 2.0 - static_cast<double>(i);
    return std::ldexp(cardinal_bspline_fast(degree_, q, y), q * level);
  }

  double value(int level, std::int64_t i, double x) const override {
    check_hierarchical_index(level, i, false);
    return value_any_index(level, i, x);
  }

  double derivative(int level, std::int64_t i, int q, double x) const override {
    check_hierarchical_index(level, i, false);
    return derivative_any_index(level, i, q, x);
  }

  std::pair<double, double> support(int level, std::int64_t i) const override {
    double h = std::ldexp(1.0, -level);
    double half = (degree_ + 1) / 2.0;
    return {std::max(0.0, (i - half) * h), std::min(1.0, (i + half) * h)};
  }
};

// Clenshaw-Curtis B-splines; per level an extended knot sequence covering
// B-spline indices down to 1 - (p+1)/2 (for the modified sum).
class ClenshawCurtisBasis : public Basis1d {
 public:
  explicit ClenshawCurtisBasis(int p) : Basis1d(p) {}

  double value_any_index(int level, std::int64_t i, double x) const {
    const Table& table = this->table(level);
    return bspline_rec(table.knots.data(), static_cast<int>(i - table.first_index), degree_, x);
  }

  double derivative_any_index(int level, std::int64_t i, int q, double x) const {
    const Table& table = this->table(level);
    return bspline_deriv_rec(table.knots.data(), static_cast<int>(i - table.first_index), degree_,
                             q, x);
  }

  double value(int level, std::int64_t i, double x) const override {
    check_hierarchical_index(level, i, false);
    return value_any_index(level, i, x);
  }

  double derivative(int level, std::int64_t i, int q, double x) const override {
    check_hierarchical_index(level, i, false);
    return derivative_any_index(level, i, q, x);
  }

  std::pair<double, double> support(int level, std::int64_t i) const override {
    const Table& table = this->table(level);
    std::size_t k = static_cast<std::size_t>(i - table.first_index);
    return {std::max(0.0, table.knots[k]), std::min(1.0, table.knots[k + degree_ + 1])};
  }

 private:
  struct Table {
    std::int64_t first_index;  // B-spline index of knots[0..p+1]
    std::vector<double> knots;
  };

  const Table& table(int level) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = tables_.find(level);
    if (it != tables_.end()) return it->second;
    Table table;
    table.first_index = -(degree_ + 1) / 2 - 1;
    std::int64_t n = ipow2(level);
    // B-spline index k uses knots k..k+p+1; cover k up to n + (p+1)/2 + 1.
    std::int64_t last_knot = n + (degree_ + 1) / 2 + 1 + degree_ + 1;
    for (std::int64_t j = table.first_index; j <= last_knot; ++j) {
      table.knots.push_back(grid_point_1d(KnotKind::ClenshawCurtis, level,
                                          j - (degree_ + 1) / 2));
    }
    return tables_.emplace(level, std::move(table)).first->second;
  }

  mutable std::mutex mutex_;
  mutable std::map<int, Table> tables_;
};

// Not-a-knot B-splines (uniform or Clenshaw-Curtis points): Lagrange
// polynomials below the level where knot removal is possible.
class NotAKnotBasis : public Basis1d {
 public:
  NotAKnotBasis(int p, bool cc) : Basis1d(p), cc_(cc) {}

  bool is_lagrange_level(int level) const { return ipow2(level) < degree_ + 1; }

  double value(int level, std::int64_t i, double x) const override {
    check_hierarchical_index(level, i, false);
    const Level& data = this->level_data(level);
    if (data.lagrange) return data.lagrange->value(static_cast<std::size_t>(i), x);
    return bspline_rec(data.knots.knots.data(), static_cast<int>(i), degree_, x);
  }

  double derivative(int level, std::int64_t i, int q, double x) const override {
    check_hierarchical_index(level, i, false);
    const Level& data = this->level_data(level);
    if (data.lagrange) return data.lagrange->derivative(static_cast<std::size_t>(i), q, x);
    return bspline_deriv_rec(data.knots.knots.data(), static_cast<int>(i), degree_, q, x);
  }

  std::pair<double, double> support(int level, std::int64_t i) const override {
    const Level& data = this->level_data(level);
    if (data.lagrange) return {0.0, 1.0};
    return {std::max(0.0, data.knots.knots[i]),
            std::min(1.0, data.knots.knots[i + degree_ + 1])};
  }

 private:
  struct Level {
    std::unique_ptr<LagrangePolynomials> lagrange;
    KnotSequence knots;
  };

  const Level& level_data(int level) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = levels_.find(level);
    if (it != levels_.end()) return it->second;
    Level data;
    if (is_lagrange_level(level)) {
      std::vector<double> nodes;
      for (std::int64_t i = 0; i <= ipow2(level); ++i) {
        nodes.push_back(cc_ ? chebyshev_point(level, i) : point_coordinate_1d(level, i));
      }
      data.lagrange = std::make_unique<LagrangePolynomials>(std::move(nodes));
    } else {
      data.knots = build_knots(cc_ ? KnotKind::CcNotAKnot : KnotKind::NotAKnot, level, degree_);
    }
    return levels_.emplace(level, std::move(data)).first->second;
  }

  bool cc_;
  mutable std::mutex mutex_;
  mutable std::map<int, Level> levels_;
};

// Marsden-identity modification of uniform/Clenshaw-Curtis B-splines: the
// leftmost and rightmost hierarchical functions extrapolate linearly, level 1
// is the constant one.
class MarsdenModifiedBasis : public Basis1d {
 public:
  MarsdenModifiedBasis(int p, bool cc) : Basis1d(p), cc_(cc) {
    if (cc) {
      cc_base_ = std::make_unique<ClenshawCurtisBasis>(p);
    } else {
      uniform_base_ = std::make_unique<UniformBasis>(p);
    }
  }

  double value(int level, std::int64_t i, double x) const override {
    return derivative(level, i, 0, x);
  }

  double derivative(int level, std::int64_t i, int q, double x) const override {
    check_hierarchical_index(level, i, true);
    if (level == 1) return (q == 0) ? 1.0 : 0.0;
    if (i == 1) return left_derivative(level, q, x);
    if (i == ipow2(level) - 1) {
      double v = left_derivative(level, q, 1.0 - x);
      return (q % 2 == 0) ? v : -v;
    }
    return base_derivative(level, i, q, x);
  }

  std::pair<double, double> support(int level, std::int64_t i) const override {
    if (level == 1) return {0.0, 1.0};
    if (i == 1) return {0.0, base_support(level, 1).second};
    if (i == ipow2(level) - 1) return {1.0 - base_support(level, 1).second, 1.0};
    return base_support(level, i);
  }

  bool boundaryless() const override { return true; }

 private:
  double base_derivative(int level, std::int64_t i, int q, double x) const {
    if (cc_) return cc_base_->derivative_any_index(level, i, q, x);
    return uniform_base_->derivative_any_index(level, i, q, x);
  }

  std::pair<double, double> base_support(int level, std::int64_t i) const {
    if (cc_) return cc_base_->support(level, i);
    return uniform_base_->support(level, i);
  }

  double left_derivative(int level, int q, double x) const {
    double sum = 0.0;
    for (std::int64_t ip = 1 - (degree_ + 1) / 2; ip <= 1; ++ip) {
      sum += static_cast<double>(2 - ip) * base_derivative(level, ip, q, x);
    }
    return sum;
  }

  bool cc_;
  std::unique_ptr<UniformBasis> uniform_base_;
  std::unique_ptr<ClenshawCurtisBasis> cc_base_;
};

// Modified not-a-knot B-splines: the boundary neighbor is combined with the
// outermost function so the second derivative vanishes at the boundary.
class NakModifiedBasis : public Basis1d {
 public:
  NakModifiedBasis(int p, bool cc) : Basis1d(p), base_(std::make_unique<NotAKnotBasis>(p, cc)) {}

  double value(int level, std::int64_t i, double x) const override {
    return derivative(level, i, 0, x);
  }

  double derivative(int level, std::int64_t i, int q, double x) const override {
    check_hierarchical_index(level, i, true);
    if (level == 1) return (q == 0) ? 1.0 : 0.0;
    if (i == 1) return left_derivative(level, q, x);
    if (i == ipow2(level) - 1) {
      double v = left_derivative(level, q, 1.0 - x);
      return (q % 2 == 0) ? v : -v;
    }
    return base_->derivative(level, i, q, x);
  }

  std::pair<double, double> support(int level, std::int64_t i) const override {
    if (level == 1) return {0.0, 1.0};
    auto s0 = base_->support(level, 0);
    auto s1 = base_->support(level, 1);
    if (i == 1) return {0.0, std::max(s0.second, s1.second)};
    if (i == ipow2(level) - 1) return {1.0 - std::max(s0.second, s1.second), 1.0};
    return base_->support(level, i);
  }

  bool boundaryless() const override { return true; }

 private:
  double left_derivative(int level, int q, double x) const {
    if (degree_ == 1) {
      // Degree 1 has no curvature to cancel; use the linear extrapolation sum.
      return 2.0 * base_->derivative(level, 0, q, x) + base_->derivative(level, 1, q, x);
    }
    double r = ratio(level);
    return base_->derivative(level, 1, q, x) - r * base_->derivative(level, 0, q, x);
  }

  double ratio(int level) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = ratios_.find(level);
    if (it != ratios_.end()) return it->second;
    double d1 = base_->derivative(level, 1, 2, 0.0);
    double d0 = base_->derivative(level, 0, 2, 0.0);
    if (d0 == 0.0) throw SolverError("nak-modified: outer second derivative vanishes");
    return ratios_.emplace(level, d1 / d0).first->second;
  }

  std::unique_ptr<NotAKnotBasis> base_;
  mutable std::mutex mutex_;
  mutable std::map<int, double> ratios_;
};

// Fundamental splines (translation-invariant fundamental transform of the
// uniform B-splines) and the weakly fundamental splines; both are sums of
// uniform B-splines with precomputed parent coefficients.
class CoefficientBasis : public Basis1d {
 public:
  CoefficientBasis(int p, FundamentalCoefficients coeffs)
      : Basis1d(p), coeffs_(std::move(coeffs)) {}

  double value(int level, std::int64_t i, double x) const override {
    return derivative(level, i, 0, x);
  }

  double derivative(int level, std::int64_t i, int q, double x) const override {
    check_hierarchical_index(level, i, false);
    if (level == 0 && coeffs_.variant == FundamentalVariant::WeaklyFundamental) {
      // Level zero uses the linear Lagrange polynomials.
      if (q == 0) return (i == 0) ? 1.0 - x : x;
      if (q == 1) return (i == 0) ? -1.0 : 1.0;
      return 0.0;
    }
    double y = std::ldexp(x, level) - static_cast<double>(i);
    return std::ldexp(coeffs_.parent_derivative(q, y), q * level);
  }

  std::pair<double, double> support(int level, std::int64_t i) const override {
    if (level == 0 && coeffs_.variant == FundamentalVariant::WeaklyFundamental) return {0.0, 1.0};
    double h = std::ldexp(1.0, -level);
    double lo = (i + coeffs_.k_min - (degree_ + 1) / 2.0) * h;
    double hi = (i + coeffs_.k_max() + (degree_ + 1) / 2.0) * h;
    return {std::max(0.0, lo), std::min(1.0, hi)};
  }

  const FundamentalCoefficients& coefficients() const { return coeffs_; }

 private:
  FundamentalCoefficients coeffs_;
};

// Modified fundamental splines: level 1 constant, boundary-adjacent indices
// use the modified parent, all others the plain fundamental spline.
class FundamentalModifiedBasis : public Basis1d {
 public:
  explicit FundamentalModifiedBasis(int p)
      : Basis1d(p),
        plain_(p, fundamental_coefficients(p)),
        modified_(modified_fundamental_coefficients(p)) {}

  double value(int level, std::int64_t i, double x) const override {
    return derivative(level, i, 0, x);
  }

  double derivative(int level, std::int64_t i, int q, double x) const override {
    check_hierarchical_index(level, i, true);
    if (level == 1) return (q == 0) ? 1.0 : 0.0;
    if (i == 1) {
      double y = std::ldexp(x, level);
      return std::ldexp(modified_.parent_derivative(q, y), q * level);
    }
    if (i == ipow2(level) - 1) {
      double y = std::ldexp(1.0 - x, level);
      double v = std::ldexp(modified_.parent_derivative(q, y), q * level);
      return (q % 2 == 0) ? v : -v;
    }
    return plain_.derivative(level, i, q, x);
  }

  std::pair<double, double> support(int level, std::int64_t i) const override {
    if (level == 1) return {0.0, 1.0};
    double h = std::ldexp(1.0, -level);
    double span = (modified_.k_max() + (degree_ + 1) / 2.0) * h;
    if (i == 1) return {0.0, std::min(1.0, span)};
    if (i == ipow2(level) - 1) return {std::max(0.0, 1.0 - span), 1.0};
    return plain_.support(level, i);
  }

  bool boundaryless() const override { return true; }

 private:
  CoefficientBasis plain_;
  FundamentalCoefficients modified_;
};

// Fundamental not-a-knot splines: per level the full collocation system of
// nodal not-a-knot B-splines is solved and cached; coarse levels fall back
// to the Lagrange polynomials, which are already fundamental.
class FundamentalNakBasis : public Basis1d {
 public:
  explicit FundamentalNakBasis(int p) : Basis1d(p), nak_(std::make_unique<NotAKnotBasis>(p, false)) {}

  double value(int level, std::int64_t i, double x) const override {
    return derivative(level, i, 0, x);
  }

  double derivative(int level, std::int64_t i, int q, double x) const override {
    check_hierarchical_index(level, i, false);
    if (nak_->is_lagrange_level(level)) return nak_->derivative(level, i, q, x);
    const Level& data = level_data(level);
    const int n = static_cast<int>(ipow2(level)) + 1;
    // Only the B-splines whose knot span contains x are non-zero.
    const auto& knots = data.knots.knots;
    auto it = std::upper_bound(knots.begin(), knots.end(), x);
    int span = static_cast<int>(it - knots.begin()) - 1;
    double sum = 0.0;
    for (int j = std::max(0, span - degree_); j <= std::min(n - 1, span); ++j) {
      double w = data.inverse[static_cast<std::size_t>(j) * n + i];
      if (w != 0.0) {
        sum += w * bspline_deriv_rec(knots.data(), j, degree_, q, x);
      }
    }
    return sum;
  }

  std::pair<double, double> support(int, std::int64_t) const override { return {0.0, 1.0}; }

 private:
  struct Level {
    KnotSequence knots;
    std::vector<double> inverse;  // inverse[j * n + i] = coefficient of nodal j in function i
  };

  const Level& level_data(int level) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = levels_.find(level);
    if (it != levels_.end()) return it->second;
    Level data;
    data.knots = build_knots(KnotKind::NotAKnot, level, degree_);
    const int n = static_cast<int>(ipow2(level)) + 1;
    Eigen::MatrixXd collocation(n, n);
    for (int r = 0; r < n; ++r) {
      double xr = point_coordinate_1d(level, r);
      for (int j = 0; j < n; ++j) {
        collocation(r, j) = bspline_rec(data.knots.knots.data(), j, degree_, xr);
      }
    }
    Eigen::MatrixXd inv = collocation.partialPivLu().inverse();
    data.inverse.resize(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        data.inverse[static_cast<std::size_t>(j) * n + i] = inv(j, i);
      }
    }
    return levels_.emplace(level, std::move(data)).first->second;
  }

  std::unique_ptr<NotAKnotBasis> nak_;
  mutable std::mutex mutex_;
  mutable std::map<int, Level> levels_;
};

// Weakly fundamental not-a-knot splines: per hierarchical index a minimal
// window of nodal not-a-knot B-splines combined to vanish at all coarser
// grid points; near the boundary the window is widened until the constraint
// system becomes consistent.
class WfsNakBasis : public Basis1d {
 public:
  explicit WfsNakBasis(int p) : Basis1d(p), nak_(std::make_unique<NotAKnotBasis>(p, false)) {}

  double value(int level, std::int64_t i, double x) const override {
    return derivative(level, i, 0, x);
  }

  double derivative(int level, std::int64_t i, int q, double x) const override {
    check_hierarchical_index(level, i, false);
    if (nak_->is_lagrange_level(level)) return nak_->derivative(level, i, q, x);
    if (level >= 1 && i % 2 == 0) {
      throw DomainError("wfs-nak: nodal (even) indices are not defined for this family");
    }
    const Combination& combo = combination(level, i);
    double sum = 0.0;
    for (std::size_t j = 0; j < combo.coeff.size(); ++j) {
      if (combo.coeff[j] != 0.0) {
        sum += combo.coeff[j] * nak_->derivative(level, combo.first + static_cast<std::int64_t>(j),
                                                 q, x);
      }
    }
    return sum;
  }

  std::pair<double, double> support(int level, std::int64_t i) const override {
    if (nak_->is_lagrange_level(level)) return {0.0, 1.0};
    const Combination& combo = combination(level, i);
    return {combo.lo, combo.hi};
  }

 private:
  struct Combination {
    std::int64_t first = 0;
    std::vector<double> coeff;
    double lo = 0.0, hi = 1.0;
  };

  Combination build_combination(int level, std::int64_t i) const {
    const std::int64_t n = ipow2(level);
    std::int64_t w_lo = std::max<std::int64_t>(0, i - (degree_ - 1) / 2);
    std::int64_t w_hi = std::min<std::int64_t>(n, i + (degree_ - 1) / 2);
    for (;;) {
      // Even grid points where some window function is non-zero.
      std::vector<std::int64_t> constraints;
      for (std::int64_t e = 0; e <= n; e += 2) {
        double xe = point_coordinate_1d(level, e);
        for (std::int64_t j = w_lo; j <= w_hi; ++j) {
          if (std::abs(nak_->value(level, j, xe)) > 1e-13) {
            constraints.push_back(e);
            break;
          }
        }
      }
      const int unknowns = static_cast<int>(w_hi - w_lo + 1) - 1;
      if (static_cast<int>(constraints.size()) > unknowns && (w_lo > 0 || w_hi < n)) {
        // Widen toward the nearest boundary first: functions clamped there
        // add freedom without extending the support much.
        bool left_room = w_lo > 0;
        bool right_room = w_hi < n;
        bool prefer_left = i <= n - i;
        if (left_room && (prefer_left || !right_room)) {
          --w_lo;
        } else {
          ++w_hi;
        }
        continue;
      }

      const int rows = static_cast<int>(constraints.size());
      Eigen::MatrixXd a(rows, unknowns);
      Eigen::VectorXd b(rows);
      for (int r = 0; r < rows; ++r) {
        double xe = point_coordinate_1d(level, constraints[r]);
        int col = 0;
        for (std::int64_t j = w_lo; j <= w_hi; ++j) {
          if (j == i) continue;
          a(r, col++) = nak_->value(level, j, xe);
        }
        b(r) = -nak_->value(level, i, xe);
      }
      Eigen::VectorXd sol = (rows > 0 && unknowns > 0)
                                ? Eigen::VectorXd(a.completeOrthogonalDecomposition().solve(b))
                                : Eigen::VectorXd::Zero(unknowns);
      double resid = (rows > 0 && unknowns > 0) ? (a * sol - b).cwiseAbs().maxCoeff()
                                                : (rows > 0 ? b.cwiseAbs().maxCoeff() : 0.0);
      if (resid > 1e-11) {
        if (w_lo > 0) {
          --w_lo;
          continue;
        }
        if (w_hi < n) {
          ++w_hi;
          continue;
        }
        throw SolverError("wfs-nak: no consistent combination found");
      }

      Combination combo;
      combo.first = w_lo;
      combo.coeff.assign(static_cast<std::size_t>(w_hi - w_lo + 1), 0.0);
      combo.coeff[static_cast<std::size_t>(i - w_lo)] = 1.0;
      int col = 0;
      for (std::int64_t j = w_lo; j <= w_hi; ++j) {
        if (j == i) continue;
        combo.coeff[static_cast<std::size_t>(j - w_lo)] = sol(col++);
      }
      combo.lo = 1.0;
      combo.hi = 0.0;
      for (std::int64_t j = w_lo; j <= w_hi; ++j) {
        if (combo.coeff[static_cast<std::size_t>(j - w_lo)] == 0.0) continue;
        auto s = nak_->support(level, j);
        combo.lo = std::min(combo.lo, s.first);
        combo.hi = std::max(combo.hi, s.second);
      }
      return combo;
    }
  }

  const Combination& combination(int level, std::int64_t i) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto key = std::make_pair(level, i);
    auto it = combos_.find(key);
    if (it != combos_.end()) return it->second;
    return combos_.emplace(key, build_combination(level, i)).first->second;
  }

  std::unique_ptr<NotAKnotBasis> nak_;
  mutable std::mutex mutex_;
  mutable std::map<std::pair<int, std::int64_t>, Combination> combos_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Factory and tensor products
// ---------------------------------------------------------------------------

std::shared_ptr<const Basis1d> make_basis(const BasisSpec& spec) {
  const int p = spec.degree;
  if (p < 1 || p % 2 == 0) {
    throw DomainError("make_basis: degree must be odd >= 1 (got " + std::to_string(p) + ")");
  }
  if (p > 5 && !spec.allow_degree_above_5) {
    throw DomainError("make_basis: degrees above 5 must be enabled explicitly");
  }

  static std::mutex mutex;
  static std::map<std::pair<BasisFamily, int>, std::shared_ptr<const Basis1d>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(spec.family, p);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;

  std::shared_ptr<const Basis1d> basis;
  switch (spec.family) {
    case BasisFamily::Uniform:
      basis = std::make_shared<UniformBasis>(p);
      break;
    case BasisFamily::Modified:
      basis = std::make_shared<MarsdenModifiedBasis>(p, false);
      break;
    case BasisFamily::ClenshawCurtis:
      basis = std::make_shared<ClenshawCurtisBasis>(p);
      break;
    case BasisFamily::CcModified:
      basis = std::make_shared<MarsdenModifiedBasis>(p, true);
      break;
    case BasisFamily::NotAKnot:
      basis = std::make_shared<NotAKnotBasis>(p, false);
      break;
    case BasisFamily::NakModified:
      basis = std::make_shared<NakModifiedBasis>(p, false);
      break;
    case BasisFamily::CcNotAKnot:
      basis = std::make_shared<NotAKnotBasis>(p, true);
      break;
    case BasisFamily::CcNakModified:
      basis = std::make_shared<NakModifiedBasis>(p, true);
      break;
    case BasisFamily::Fundamental:
      basis = std::make_shared<CoefficientBasis>(p, fundamental_coefficients(p));
      break;
    case BasisFamily::FundamentalModified:
      basis = std::make_shared<FundamentalModifiedBasis>(p);
      break;
    case BasisFamily::FundamentalNak:
      basis = std::make_shared<FundamentalNakBasis>(p);
      break;
    case BasisFamily::WeaklyFundamental:
      basis = std::make_shared<CoefficientBasis>(p, weakly_fundamental_coefficients(p));
      break;
    case BasisFamily::WfsNak:
      basis = std::make_shared<WfsNakBasis>(p);
      break;
  }
  cache.emplace(key, basis);
  return basis;
}

TensorBasis::TensorBasis(std::vector<BasisSpec> specs) : specs_(std::move(specs)) {
  if (specs_.empty()) throw DomainError("TensorBasis: empty spec");
  for (const auto& spec : specs_) bases_.push_back(make_basis(spec));
}

bool TensorBasis::boundaryless() const {
  for (const auto& basis : bases_) {
    if (basis->boundaryless()) return true;
  }
  return false;
}

double TensorBasis::value(const LevelIndex& p, const std::vector<double>& x) const {
  double product = 1.0;
  for (int t = 0; t < dim(); ++t) {
    product *= bases_[t]->value(p.level[t], p.index[t], x[t]);
    if (product == 0.0) return 0.0;
  }
  return product;
}

void TensorBasis::value_gradient(const LevelIndex& p, const std::vector<double>& x, double& value,
                                 std::vector<double>& gradient) const {
  const int d = dim();
  std::vector<double> v(d), g(d);
  for (int t = 0; t < d; ++t) {
    v[t] = bases_[t]->value(p.level[t], p.index[t], x[t]);
    g[t] = bases_[t]->derivative(p.level[t], p.index[t], 1, x[t]);
  }
  gradient.assign(d, 0.0);
  value = 1.0;
  for (int t = 0; t < d; ++t) value *= v[t];
  for (int t = 0; t < d; ++t) {
    double prod = g[t];
    for (int s = 0; s < d; ++s) {
      if (s != t) prod *= v[s];
    }
    gradient[t] = prod;
  }
}

void TensorBasis::value_gradient_hessian(const LevelIndex& p, const std::vector<double>& x,
                                         double& value, std::vector<double>& gradient,
                                         std::vector<double>& hessian) const {
  const int d = dim();
  std::vector<double> v(d), g(d), h(d);
  for (int t = 0; t < d; ++t) {
    v[t] = bases_[t]->value(p.level[t], p.index[t], x[t]);
    g[t] = bases_[t]->derivative(p.level[t], p.index[t], 1, x[t]);
    h[t] = bases_[t]->derivative(p.level[t], p.index[t], 2, x[t]);
  }
  value = 1.0;
  for (int t = 0; t < d; ++t) value *= v[t];
  gradient.assign(d, 0.0);
  hessian.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (int t = 0; t < d; ++t) {
    double prod = g[t];
    for (int s = 0; s < d; ++s) {
      if (s != t) prod *= v[s];
    }
    gradient[t] = prod;
    for (int u = t; u < d; ++u) {
      double entry = (u == t) ? h[t] : g[t] * g[u];
      for (int s = 0; s < d; ++s) {
        if (s != t && s != u) entry *= v[s];
      }
      hessian[static_cast<std::size_t>(t) * d + u] = entry;
      hessian[static_cast<std::size_t>(u) * d + t] = entry;
    }
  }
}

bool TensorBasis::supports(const LevelIndex& p, const std::vector<double>& x, double slack) const {
  for (int t = 0; t < dim(); ++t) {
    auto [lo, hi] = bases_[t]->support(p.level[t], p.index[t]);
    if (x[t] < lo - slack || x[t] > hi + slack) return false;
  }
  return true;
}

std::vector<BasisSpec> uniform_specs(BasisFamily family, int degree, int dim,
                                     bool allow_degree_above_5) {
  std::vector<BasisSpec> specs(dim);
  for (auto& spec : specs) {
    spec.family = family;
    spec.degree = degree;
    spec.allow_degree_above_5 = allow_degree_above_5;
  }
  return specs;
}

}  // namespace sgopt
