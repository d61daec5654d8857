#ifndef SGOPT_BASIS_HPP
#define SGOPT_BASIS_HPP

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sgopt/common.hpp"
#include "sgopt/grid.hpp"

namespace sgopt {

enum class BasisFamily {
  Uniform,
  Modified,
  ClenshawCurtis,
  CcModified,
  NotAKnot,
  NakModified,
  CcNotAKnot,
  CcNakModified,
  Fundamental,
  FundamentalModified,
  FundamentalNak,
  WeaklyFundamental,
  WfsNak,
};

BasisFamily parse_family(const std::string& name);
std::string family_name(BasisFamily family);

/// Per-dimension basis family plus odd degree. Degrees above 5 must be
/// enabled explicitly (linear independence is only proven up to p = 7, and
/// the simple modification formulas degrade for large p).
struct BasisSpec {
  BasisFamily family = BasisFamily::Uniform;
  int degree = 1;
  bool allow_degree_above_5 = false;
};

/// Cardinal B-spline b^p on [0, p+1] via the two-term recurrence.
double cardinal_bspline(int p, double x);

/// q-th derivative of b^p; at knots where the derivative jumps, the right
/// limit is returned. q = 0 gives the value, q > p gives 0.
double cardinal_bspline_derivative(int p, int q, double x);

/// Precomputed piecewise-polynomial fast path; must match the recurrence
/// within 1e-14 (property-tested).
double cardinal_bspline_fast(int p, int q, double x);

/// Chebyshev point of level l and index i, exactly 0, 1/2, 1 at the
/// symmetric indices.
double chebyshev_point(int level, std::int64_t i);

/// Strictly increasing knots; B-spline k uses knots[k..k+p+1], the
/// interpolation domain is [knots[p], knots[m]] with m = size - p - 1.
struct KnotSequence {
  std::vector<double> knots;
  int degree = 0;

  int num_bsplines() const { return static_cast<int>(knots.size()) - degree - 1; }
  double domain_lo() const { return knots[degree]; }
  double domain_hi() const { return knots[num_bsplines()]; }
};

enum class KnotKind { Uniform, ClenshawCurtis, NotAKnot, CcNotAKnot };

/// Knot sequence of the requested kind for level l and degree p. Not-a-knot
/// kinds require 2^l >= p + 1 (coarser levels use the Lagrange path instead).
KnotSequence build_knots(KnotKind kind, int level, int degree);

/// Cox-de Boor evaluation of the k-th B-spline of ks.
double nonuniform_bspline(const KnotSequence& ks, int k, double x);

/// q-th derivative of the k-th B-spline of ks (right limits at knots).
double nonuniform_bspline_derivative(const KnotSequence& ks, int k, int q, double x);

enum class FundamentalVariant { Fundamental, ModifiedFundamental, WeaklyFundamental };

/// B-spline coefficients of a (weakly/modified) fundamental spline parent
/// function, truncated once the decay drops below the threshold.
struct FundamentalCoefficients {
  int degree = 1;
  FundamentalVariant variant = FundamentalVariant::Fundamental;
  int truncation_index = 1;  // n_p: |c_k| < threshold for all |k| >= n_p
  int k_min = 0;
  std::vector<double> coeff;  // c_{k_min}, c_{k_min + 1}, ...

  int k_max() const { return k_min + static_cast<int>(coeff.size()) - 1; }
  double at(int k) const {
    if (k < k_min || k > k_max()) return 0.0;
    return coeff[static_cast<std::size_t>(k - k_min)];
  }

  /// Parent function value/derivative, sum of c_k * b^p(x - k + (p+1)/2).
  double parent_value(double x) const { return parent_derivative(0, x); }
  double parent_derivative(int q, double x) const;
};

FundamentalCoefficients fundamental_coefficients(int p, double threshold = 1e-10);
FundamentalCoefficients modified_fundamental_coefficients(int p, double threshold = 1e-10);
FundamentalCoefficients weakly_fundamental_coefficients(int p);

/// One-dimensional hierarchical basis; evaluation is pure, caches are built
/// lazily under a lock and immutable afterwards.
class Basis1d {
 public:
  virtual ~Basis1d() = default;

  virtual double value(int level, std::int64_t i, double x) const = 0;

  /// q-th derivative; q = 0 delegates to value.
  virtual double derivative(int level, std::int64_t i, int q, double x) const = 0;

  /// Closed hull of the support intersected with [0, 1].
  virtual std::pair<double, double> support(int level, std::int64_t i) const = 0;

  /// True for modified families, which have no boundary functions (level 0
  /// is rejected and grids must be interior-only).
  virtual bool boundaryless() const { return false; }

  int degree() const { return degree_; }

 protected:
  explicit Basis1d(int degree) : degree_(degree) {}
  int degree_;
};

/// Shared, cached instance for the given spec; rejects even degrees and
/// (without the explicit flag) degrees above 5.
std::shared_ptr<const Basis1d> make_basis(const BasisSpec& spec);

/// Tensor product of per-dimension 1-D bases with value, gradient, and
/// Hessian of a single hierarchical basis function.
class TensorBasis {
 public:
  explicit TensorBasis(std::vector<BasisSpec> specs);

  int dim() const { return static_cast<int>(bases_.size()); }
  const Basis1d& axis(int t) const { return *bases_[t]; }
  const BasisSpec& spec(int t) const { return specs_[t]; }
  const std::vector<BasisSpec>& specs() const { return specs_; }
  bool boundaryless() const;

  double value(const LevelIndex& p, const std::vector<double>& x) const;
  void value_gradient(const LevelIndex& p, const std::vector<double>& x, double& value,
                      std::vector<double>& gradient) const;
  void value_gradient_hessian(const LevelIndex& p, const std::vector<double>& x, double& value,
                              std::vector<double>& gradient,
                              std::vector<double>& hessian) const;

  /// Support test with a small outward slack to avoid boundary flicker.
  bool supports(const LevelIndex& p, const std::vector<double>& x, double slack = 1e-14) const;

 private:
  std::vector<BasisSpec> specs_;
  std::vector<std::shared_ptr<const Basis1d>> bases_;
};

/// Uniform spec across all dimensions.
std::vector<BasisSpec> uniform_specs(BasisFamily family, int degree, int dim,
                                     bool allow_degree_above_5 = false);

}  // namespace sgopt

#endif
