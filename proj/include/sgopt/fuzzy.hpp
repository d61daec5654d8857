#ifndef SGOPT_FUZZY_HPP
#define SGOPT_FUZZY_HPP

#include <functional>
#include <utility>
#include <vector>

#include "sgopt/common.hpp"
#include "sgopt/grid.hpp"
#include "sgopt/optimize.hpp"
#include "sgopt/surrogate.hpp"

namespace sgopt {

/// Normalized convex fuzzy set with bounded support and nested alpha-cuts.
class FuzzyInterval {
 public:
  static FuzzyInterval triangular(double a, double b, double c);
  static FuzzyInterval trapezoidal(double a, double b, double c, double d);

  /// Membership exp(-((x - mean) / (2 sigma))^2) truncated at
  /// mean +- support_multiple * sigma.
  static FuzzyInterval quasi_gaussian(double mean, double sigma, double support_multiple = 3.0);

  /// Piecewise linear membership from (x, mu) samples; must be normalized
  /// (peak 1) and quasiconcave.
  static FuzzyInterval piecewise_linear(std::vector<std::pair<double, double>> points);

  double membership(double x) const;

  /// {x : membership(x) >= alpha} for alpha > 0; the support closure for
  /// alpha = 0.
  std::pair<double, double> alpha_cut(double alpha) const;

  std::pair<double, double> support() const { return alpha_cut(0.0); }

  /// Breakpoints where the membership is non-smooth (for quadrature).
  std::vector<double> breakpoints() const;

 private:
  enum class Kind { Triangular, Trapezoidal, QuasiGaussian, PiecewiseLinear };
  Kind kind_ = Kind::Triangular;
  std::vector<double> params_;
  std::vector<std::pair<double, double>> points_;
};

struct ExtensionOptions {
  int starts = 100;                  // multi-start count per alpha level
  std::size_t budget_per_start = 2000;
  std::uint64_t seed = 0;
};

/// Output of the alternative extension principle: the piecewise linear
/// membership plus the raw per-level cut bounds.
struct ExtensionResult {
  FuzzyInterval output;
  std::vector<double> alphas;
  std::vector<double> lower;  // minima per level
  std::vector<double> upper;  // maxima per level
};

/// Alternative fuzzy extension principle: per alpha level j/m the box of
/// input cuts is searched for min and max of f (multi-start Nelder-Mead for
/// raw callables).
ExtensionResult extension_principle(const ObjectiveFn& f,
                                    const std::vector<FuzzyInterval>& inputs, int m,
                                    const ExtensionOptions& options = {});

/// Surrogate variant: globalized gradient descent on the interpolant.
ExtensionResult extension_principle(const Interpolant& surrogate,
                                    const std::vector<FuzzyInterval>& inputs, int m,
                                    const ExtensionOptions& options = {});

/// Relative L2 distance of the membership functions over the union of the
/// supports.
double fuzzy_l2_error(const FuzzyInterval& reference, const FuzzyInterval& approx);

struct FuzzyRefinementConfig {
  std::size_t max_points = 1000;
  double gamma = 0.1;
  int alpha_segments = 10;  // m
};

/// Novak-Ritter grid generation targeting all alpha-level optima: per level
/// one minimum and one (rank-reversed) maximum candidate is refined, each
/// point at most once per round.
GeneratedGrid fuzzy_novak_ritter(const ObjectiveFn& f, const FuzzyRefinementConfig& config,
                                 const std::vector<FuzzyInterval>& inputs,
                                 GeneratedGrid start);

}  // namespace sgopt

#endif
