#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "sgopt/optimize.hpp"
#include "sgopt/surrogate.hpp"
#include "sgopt/testfns.hpp"

using namespace sgopt;

namespace {

OptimizationProblem sphere_problem(int d) {
  OptimizationProblem p;
  p.dim = d;
  p.objective = [](const std::vector<double>& x) {
    double s = 0.0;
    for (double c : x) s += (c - 0.5) * (c - 0.5);
    return s;
  };
  p.gradient = [](const std::vector<double>& x) {
    std::vector<double> g(x.size());
    for (std::size_t t = 0; t < x.size(); ++t) g[t] = 2.0 * (x[t] - 0.5);
    return g;
  };
  return p;
}

}  // namespace

TEST_CASE("armijo line search") {
  // f(x) = x^2 at x = 1 with direction -1.
  ObjectiveFn f = [](const std::vector<double>& x) { return x[0] * x[0]; };
  LineSearchResult r = armijo_line_search(f, {1.0}, {-1.0}, 1.0, -2.0, 1.0);
  CHECK(r.ok);
  double trial = (1.0 - r.step) * (1.0 - r.step);
  CHECK(trial <= 1.0 + 1e-4 * r.step * -2.0);

  // Constant objective accepts the first trial step (equality).
  ObjectiveFn constant = [](const std::vector<double>&) { return 3.0; };
  LineSearchResult rc = armijo_line_search(constant, {0.3}, {1.0}, 3.0, 0.0, 0.5);
  CHECK(rc.ok);
  CHECK(rc.step == 0.5);

  // Decrease condition holds post hoc on random quadratics.
  RandomStream rng(71, 0);
  for (int k = 0; k < 100; ++k) {
    double a = rng.uniform(0.5, 4.0);
    double c = rng.uniform(0.2, 0.8);
    double x0 = rng.uniform(0.0, 1.0);
    ObjectiveFn quad = [a, c](const std::vector<double>& x) {
      return a * (x[0] - c) * (x[0] - c);
    };
    double fx = quad({x0});
    double grad = 2.0 * a * (x0 - c);
    if (std::abs(grad) < 1e-12) continue;
    double dir = (grad > 0) ? -1.0 : 1.0;
    double gdot = grad * dir;
    LineSearchResult rr = armijo_line_search(quad, {x0}, {dir}, fx, gdot, 0.5);
    CHECK(rr.ok);
    CHECK(quad({x0 + rr.step * dir}) <= fx + 1e-4 * rr.step * gdot + 1e-15);
  }
}

TEST_CASE("all unconstrained methods find the sphere minimum") {
  for (Method method : {Method::GradientDescent, Method::Nlcg, Method::Bfgs, Method::Rprop,
                        Method::NelderMead, Method::DifferentialEvolution}) {
    OptimizationProblem p = sphere_problem(2);
    UnconstrainedOptions options;
    options.initial_point = std::vector<double>{0.15, 0.85};
    OptimizerResult r = minimize_unconstrained(p, method, 500, 7, options);
    REQUIRE(r.converged);
    for (double c : r.x_best) CHECK(std::abs(c - 0.5) <= 1e-3);
  }
}

TEST_CASE("gradient methods demand a gradient, budgets are validated") {
  OptimizationProblem p = sphere_problem(2);
  p.gradient = nullptr;
  CHECK_THROWS_AS(minimize_unconstrained(p, Method::Bfgs, 100, 0), DomainError);
  OptimizationProblem q = sphere_problem(3);
  CHECK_THROWS_AS(minimize_unconstrained(q, Method::NelderMead, 3, 0), DomainError);
}

TEST_CASE("nlcg with exact line search converges in at most d+1 iterations") {
  // Strictly convex quadratic in d = 3 with cross terms.
  OptimizationProblem p;
  p.dim = 3;
  auto value = [](const std::vector<double>& x) {
    double u = x[0] - 0.45, v = x[1] - 0.55, w = x[2] - 0.4;
    return 2.0 * u * u + 1.5 * v * v + w * w + 0.6 * u * v + 0.4 * v * w;
  };
  p.objective = value;
  p.gradient = [](const std::vector<double>& x) {
    double u = x[0] - 0.45, v = x[1] - 0.55, w = x[2] - 0.4;
    return std::vector<double>{4.0 * u + 0.6 * v, 3.0 * v + 0.6 * u + 0.4 * w,
                               2.0 * w + 0.4 * v};
  };
  UnconstrainedOptions options;
  options.initial_point = std::vector<double>{0.2, 0.3, 0.7};
  options.exact_line_search = true;
  OptimizerResult r = minimize_unconstrained(p, Method::Nlcg, 4000, 0, options);
  CHECK(r.f_best <= 1e-8);
  CHECK(r.iterations <= 4);
}

TEST_CASE("differential evolution is reproducible for a fixed seed") {
  OptimizationProblem p = sphere_problem(3);
  p.gradient = nullptr;
  OptimizerResult a = minimize_unconstrained(p, Method::DifferentialEvolution, 600, 99);
  OptimizerResult b = minimize_unconstrained(p, Method::DifferentialEvolution, 600, 99);
  CHECK(a.f_best == b.f_best);
  CHECK(a.x_best == b.x_best);
  OptimizerResult c = minimize_unconstrained(p, Method::DifferentialEvolution, 600, 100);
  CHECK((a.f_best != c.f_best || a.x_best != c.x_best));
}

TEST_CASE("best-so-far equals the minimum over the recorded evaluations") {
  OptimizationProblem p = sphere_problem(2);
  double recorded_min = std::numeric_limits<double>::infinity();
  std::size_t recorded = 0;
  p.on_evaluation = [&](std::size_t, const std::vector<double>&, double value) {
    recorded_min = std::min(recorded_min, value);
    ++recorded;
  };
  OptimizerResult r = minimize_unconstrained(p, Method::NelderMead, 300, 5);
  CHECK(r.f_best == recorded_min);
  CHECK(r.evaluations == recorded);
  CHECK(r.evaluations <= 300);
}

TEST_CASE("find feasible point") {
  ConstraintFn g1 = [](const std::vector<double>& x) {
    return std::vector<double>{x[0] - 0.5};
  };
  FeasiblePointResult r1 = find_feasible_point(g1, 2);
  CHECK(r1.feasible);
  CHECK(r1.x[0] <= 0.5 + 1e-12);

  ConstraintFn always = [](const std::vector<double>&) { return std::vector<double>{-1.0}; };
  FeasiblePointResult r2 = find_feasible_point(always, 2);
  CHECK(r2.feasible);
  CHECK(r2.x == std::vector<double>{0.5, 0.5});  // center is already feasible

  ConstraintFn never = [](const std::vector<double>&) { return std::vector<double>{1.0}; };
  FeasiblePointResult r3 = find_feasible_point(never, 2);
  CHECK_FALSE(r3.feasible);
  CHECK(r3.slack == doctest::Approx(1.0));
}

TEST_CASE("constrained methods solve an active linear constraint") {
  // min x1 subject to x1 >= 0.3.
  OptimizationProblem p;
  p.dim = 2;
  p.objective = [](const std::vector<double>& x) { return x[0]; };
  p.constraints = [](const std::vector<double>& x) {
    return std::vector<double>{0.3 - x[0]};
  };
  p.num_constraints = 1;
  for (ConstrainedMethod method : {ConstrainedMethod::SquaredPenalty,
                                   ConstrainedMethod::AugmentedLagrangian,
                                   ConstrainedMethod::LogBarrier}) {
    OptimizerResult r = minimize_constrained(p, method, 20000, 3);
    CHECK(r.violation <= 1e-6);
    CHECK(std::abs(r.x_best[0] - 0.3) <= 1e-4);
  }
}

TEST_CASE("augmented lagrangian needs a much smaller penalty than squared penalty") {
  OptimizationProblem p;
  p.dim = 2;
  p.objective = [](const std::vector<double>& x) { return x[0] + 0.5 * x[1]; };
  p.constraints = [](const std::vector<double>& x) {
    return std::vector<double>{0.4 - x[0], 0.25 - x[1]};
  };
  p.num_constraints = 2;
  OptimizerResult penalty = minimize_constrained(p, ConstrainedMethod::SquaredPenalty, 20000, 11);
  OptimizerResult al = minimize_constrained(p, ConstrainedMethod::AugmentedLagrangian, 20000, 11);
  CHECK(penalty.violation <= 1e-4);
  CHECK(al.violation <= 1e-6);
  CHECK(penalty.penalty_parameter >= 10.0 * al.penalty_parameter);
}

TEST_CASE("unconstrained problems delegate to the unconstrained path") {
  OptimizationProblem p = sphere_problem(2);
  OptimizerResult direct = minimize_unconstrained(p, Method::Bfgs, 400, 21);
  OptimizerResult via = minimize_constrained(p, ConstrainedMethod::AugmentedLagrangian, 400, 21);
  CHECK(via.f_best == direct.f_best);
  CHECK(via.x_best == direct.x_best);
}

TEST_CASE("novak-ritter criterion value") {
  CHECK(novak_ritter_criterion(1, 2, 0, 0.15) == doctest::Approx(2.8229784695707485).epsilon(1e-12));
  // gamma = 0 ignores the rank entirely.
  CHECK(novak_ritter_criterion(1, 2, 0, 0.0) == novak_ritter_criterion(500, 2, 0, 0.0));
}

namespace {

double rastrigin_like(const std::vector<double>& x) {
  double s = 0.0;
  for (double c : x) {
    s += (c - 0.3) * (c - 0.3) - 0.1 * std::cos(8.0 * (c - 0.3));
  }
  return s;
}

}  // namespace

TEST_CASE("novak-ritter generation") {
  RefinementConfig config;
  config.max_points = 120;
  auto specs = uniform_specs(BasisFamily::NakModified, 3, 2);
  GeneratedGrid g = novak_ritter_generate(rastrigin_like, config, specs);
  CHECK(g.grid.size() == 120);
  CHECK(g.values.size() == 120);

  // Boundaryless basis: all levels >= 1.
  for (std::size_t k = 0; k < g.grid.size(); ++k) {
    for (int t = 0; t < 2; ++t) CHECK(g.grid[k].level[t] >= 1);
  }

  // Deterministic: a second run yields the identical grid.
  GeneratedGrid h = novak_ritter_generate(rastrigin_like, config, specs);
  REQUIRE(h.grid.size() == g.grid.size());
  for (std::size_t k = 0; k < g.grid.size(); ++k) CHECK(h.grid[k] == g.grid[k]);

  // Rank invariance: a strictly monotone transform refines the same points.
  GeneratedGrid e = novak_ritter_generate(
      [](const std::vector<double>& x) { return std::exp(rastrigin_like(x)); }, config, specs);
  for (std::size_t k = 0; k < g.grid.size(); ++k) CHECK(e.grid[k] == g.grid[k]);

  // Every refined child has its generating m-th order parent in the grid.
  for (std::size_t k = 0; k < g.grid.size(); ++k) {
    const LevelIndex& q = g.grid[k];
    if (q.level_sum() <= 3) continue;  // initial interior grid
    bool has_parent = false;
    for (int t = 0; t < 2 && !has_parent; ++t) {
      for (int m = 1; m <= q.level[t] - 1 && !has_parent; ++m) {
        LevelIndex parent = q;
        parent.level[t] -= m;
        std::int64_t scale = ipow2(m);
        for (std::int64_t ip : {(q.index[t] - 1) / scale, (q.index[t] + 1) / scale}) {
          parent.index[t] = ip;
          if (ip >= 1 && ip % 2 == 1 && ip < ipow2(parent.level[t]) && g.grid.contains(parent)) {
            auto children = mth_order_children(parent, t, m);
            for (const auto& c : children) has_parent = has_parent || (c == q);
          }
        }
      }
    }
    CHECK(has_parent);
  }

  // The evaluation budget is respected exactly.
  std::size_t calls = 0;
  GeneratedGrid counted = novak_ritter_generate(
      [&calls](const std::vector<double>& x) {
        ++calls;
        return rastrigin_like(x);
      },
      config, specs);
  CHECK(calls == config.max_points);
  CHECK(counted.grid.size() == config.max_points);
}

TEST_CASE("surrogate pipeline recovers the minimizer of its own surrogate") {
  // Build an interpolant of a convex cubic-degree polynomial, then feed its
  // evaluation back as the objective; the pipeline must find the minimizer.
  SparseGrid grid = regular_grid(4, 2);
  TensorBasis nak(uniform_specs(BasisFamily::NotAKnot, 3, 2));
  auto poly = [](const std::vector<double>& x) {
    double u = x[0] - 0.62, v = x[1] - 0.37;
    return u * u + 0.8 * v * v + 0.2 * u * v + 0.05 * u * u * u;
  };
  std::vector<double> values(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) values[k] = poly(grid.coordinates(k));
  Interpolant target = Interpolant::fit(grid, nak, SurplusVector(values));

  OptimizationProblem p;
  p.dim = 2;
  p.objective = [&target](const std::vector<double>& x) { return target.evaluate(x); };

  RefinementConfig config;
  config.max_points = 300;
  auto result = optimize_surrogate(p, config, uniform_specs(BasisFamily::NotAKnot, 3, 2), 17);
  CHECK(std::abs(result.result.x_best[0] - 0.62) <= 1e-5);
  CHECK(std::abs(result.result.x_best[1] - 0.37) <= 1e-5);
  CHECK(result.result.evaluations <= config.max_points + 8);
}

TEST_CASE("pipeline result is never worse than the best grid value") {
  TestProblem gop = make_problem("GoP", 2);
  OptimizationProblem p;
  p.dim = 2;
  p.objective = [&gop](const std::vector<double>& x) { return gop.objective(x); };
  RefinementConfig config;
  config.max_points = 250;
  auto result = optimize_surrogate(p, config, uniform_specs(BasisFamily::NakModified, 3, 2), 3);
  double grid_best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < result.surrogate.grid().size(); ++k) {
    grid_best = std::min(grid_best, result.surrogate.surpluses().data.empty()
                                        ? grid_best
                                        : gop.objective(result.surrogate.grid().coordinates(k)));
  }
  CHECK(result.result.f_best <= grid_best + 1e-12);
}
