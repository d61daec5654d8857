#ifndef SGOPT_OPTIMIZE_HPP
#define SGOPT_OPTIMIZE_HPP

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sgopt/basis.hpp"
#include "sgopt/common.hpp"
#include "sgopt/grid.hpp"
#include "sgopt/surrogate.hpp"

namespace sgopt {

using ObjectiveFn = std::function<double(const std::vector<double>&)>;
using GradientFn = std::function<std::vector<double>(const std::vector<double>&)>;
using ConstraintFn = std::function<std::vector<double>(const std::vector<double>&)>;

/// Minimization problem on [0,1]^d; feasible iff constraints(x) <= 0.
/// gradient and constraints may be empty.
struct OptimizationProblem {
  int dim = 0;
  ObjectiveFn objective;
  GradientFn gradient;
  ConstraintFn constraints;
  int num_constraints = 0;

  /// Called once per counted objective evaluation (trace emission).
  std::function<void(std::size_t index, const std::vector<double>& x, double value)> on_evaluation;
};

struct OptimizerResult {
  std::vector<double> x_best;
  double f_best = std::numeric_limits<double>::infinity();
  std::size_t evaluations = 0;
  double violation = 0.0;
  bool converged = false;
  double penalty_parameter = 0.0;  // final mu of constrained methods
  std::size_t iterations = 0;      // accepted steps of the descent methods
};

enum class Method { GradientDescent, Nlcg, Bfgs, Rprop, NelderMead, DifferentialEvolution };
enum class ConstrainedMethod { LogBarrier, SquaredPenalty, AugmentedLagrangian };

Method parse_method(const std::string& name);

struct LineSearchResult {
  double step = 0.0;
  bool ok = false;
};

/// Armijo backtracking: returns a step with sufficient decrease
/// f(x + s d) <= f(x) + c1 s <grad, d>; falls back to the smallest trial
/// step with ok = false after the backtrack limit.
LineSearchResult armijo_line_search(const ObjectiveFn& f, const std::vector<double>& x,
                                    const std::vector<double>& direction, double f_x,
                                    double directional_derivative, double initial_step,
                                    double c1 = 1e-4, double backtrack = 0.5,
                                    int max_backtracks = 50);

struct UnconstrainedOptions {
  std::optional<std::vector<double>> initial_point;  // default: cube center
  bool exact_line_search = false;                    // Brent instead of Armijo
};

/// Minimizes over the unit cube (the objective is extended by +infinity
/// outside, evaluations outside are not counted). Stochastic methods draw
/// all randomness from the seed.
OptimizerResult minimize_unconstrained(const OptimizationProblem& problem, Method method,
                                       std::size_t budget, std::uint64_t seed,
                                       const UnconstrainedOptions& options = {});

/// Sequence of penalized/barrier auxiliary solves; returns the best feasible
/// (or least violating) point found. Budget counts objective evaluations
/// only; constraint evaluations are free.
OptimizerResult minimize_constrained(const OptimizationProblem& problem, ConstrainedMethod method,
                                     std::size_t budget, std::uint64_t seed);

struct FeasiblePointResult {
  std::vector<double> x;
  double slack = 0.0;  // max(max_i g_i(x), 0) at the returned point
  bool feasible = false;
};

/// Minimizes the worst constraint value to find a (strictly) feasible start;
/// reports the remaining slack when the problem looks infeasible.
FeasiblePointResult find_feasible_point(const ConstraintFn& constraints, int dim,
                                        std::uint64_t seed = 0);

/// Configuration of the Novak-Ritter grid generator and the surrogate
/// pipeline built on it.
struct RefinementConfig {
  std::size_t max_points = 1000;  // N_max: budget of objective evaluations
  double gamma = 0.15;            // adaptivity in [0, 1]
  int initial_level = -1;         // regular level of the start grid; -1 = auto

  // Surrogate-side budgets of the optimization step (cheap evaluations).
  std::size_t local_budget = 2000;
  std::size_t global_budget = 4000;
  std::size_t multistart_budget = 8000;
};

struct GeneratedGrid {
  SparseGrid grid;
  std::vector<double> values;
};

/// Novak-Ritter criterion value (r + 1)^gamma (|l|_1 + degree + 1)^(1-gamma).
double novak_ritter_criterion(std::size_t rank, int level_sum, int degree, double gamma);

/// Spatially adaptive grid generation: repeatedly refines the point with the
/// smallest criterion value, inserting the lowest-order children that are
/// new, until max_points objective evaluations are spent. Boundaryless
/// (modified) bases start from an interior grid.
GeneratedGrid novak_ritter_generate(const ObjectiveFn& f, const RefinementConfig& config,
                                    const std::vector<BasisSpec>& specs);

struct SurrogateOptimizationResult {
  OptimizerResult result;
  Interpolant surrogate;
};

/// Three-step pipeline: Novak-Ritter grid, hierarchization, optimization of
/// the interpolant (local runs from the best grid point, then global and
/// multi-start methods), with the candidates re-evaluated on the true
/// objective. Constrained problems swap the third step for
/// minimize_constrained on the surrogate.
SurrogateOptimizationResult optimize_surrogate(const OptimizationProblem& problem,
                                               const RefinementConfig& config,
                                               const std::vector<BasisSpec>& specs,
                                               std::uint64_t seed);

}  // namespace sgopt

#endif
