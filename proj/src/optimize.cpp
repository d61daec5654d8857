#include "sgopt/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "sgopt/hierarchize.hpp"

namespace sgopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool inside_cube(const std::vector<double>& x) {
  for (double c : x) {
    if (!(c >= 0.0 && c <= 1.0)) return false;
  }
  return true;
}

void clamp_cube(std::vector<double>& x) {
  for (double& c : x) c = std::min(std::max(c, 0.0), 1.0);
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

// Budgeted objective on the unit cube: +infinity outside (not counted),
// best-so-far tracking over every counted evaluation.
class Evaluator {
 public:
  Evaluator(const OptimizationProblem& problem, std::size_t budget)
      : problem_(problem), budget_(budget) {}

  double operator()(const std::vector<double>& x) {
    if (!inside_cube(x)) return kInf;
    if (count_ >= budget_) return kInf;  // budget exhausted: stop attracting
    double value = problem_.objective(x);
    ++count_;
    if (problem_.on_evaluation) problem_.on_evaluation(count_, x, value);
    if (value < best_f_) {
      best_f_ = value;
      best_x_ = x;
    }
    return value;
  }

  bool exhausted() const { return count_ >= budget_; }
  std::size_t count() const { return count_; }
  double best_f() const { return best_f_; }
  const std::vector<double>& best_x() const { return best_x_; }
  std::size_t budget() const { return budget_; }

 private:
  const OptimizationProblem& problem_;
  std::size_t budget_;
  std::size_t count_ = 0;
  double best_f_ = kInf;
  std::vector<double> best_x_;
};

std::vector<double> cube_center(int d) { return std::vector<double>(d, 0.5); }

// Brent-style line minimization of g on [0, hi] for the exact-line-search
// option (golden section with parabolic steps).
double brent_line_min(const std::function<double(double)>& g, double hi, int iterations = 80) {
  const double gr = 0.3819660112501051;
  double a = 0.0, b = hi;
  double x = a + gr * (b - a), w = x, v = x;
  double fx = g(x), fw = fx, fv = fx;
  double d = 0.0, e = 0.0;
  for (int it = 0; it < iterations; ++it) {
    double m = 0.5 * (a + b);
    double tol = 1e-13 * (std::abs(x) + 1e-10);
    if (std::abs(x - m) + 0.5 * (b - a) <= 2 * tol) break;
    double p = 0.0, q = 0.0, r = 0.0;
    bool parabolic = false;
    if (std::abs(e) > tol) {
      r = (x - w) * (fx - fv);
      q = (x - v) * (fx - fw);
      p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      if (std::abs(p) < std::abs(0.5 * q * e) && p > q * (a - x) && p < q * (b - x)) {
        parabolic = true;
        e = d;
        d = p / q;
      }
    }
    if (!parabolic) {
      e = (x < m) ? (b - x) : (a - x);
      d = gr * e;
    }
    double u = x + ((std::abs(d) >= tol) ? d : (d > 0 ? tol : -tol));
    double fu = g(u);
    if (fu <= fx) {
      if (u < x) b = x; else a = x;
      v = w; fv = fw;
      w = x; fw = fx;
      x = u; fx = fu;
    } else {
      if (u < x) a = u; else b = u;
      if (fu <= fw || w == x) {
        v = w; fv = fw;
        w = u; fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u; fv = fu;
      }
    }
  }
  return x;
}

}  // namespace

Method parse_method(const std::string& name) {
  static const std::map<std::string, Method> table = {
      {"gradient-descent", Method::GradientDescent},
      {"nlcg", Method::Nlcg},
      {"bfgs", Method::Bfgs},
      {"rprop", Method::Rprop},
      {"nelder-mead", Method::NelderMead},
      {"differential-evolution", Method::DifferentialEvolution},
  };
  auto it = table.find(name);
  if (it == table.end()) throw DomainError("unknown optimization method: " + name);
  return it->second;
}

LineSearchResult armijo_line_search(const ObjectiveFn& f, const std::vector<double>& x,
                                    const std::vector<double>& direction, double f_x,
                                    double directional_derivative, double initial_step, double c1,
                                    double backtrack, int max_backtracks) {
  if (initial_step <= 0.0) throw DomainError("armijo_line_search: initial step must be positive");
  double step = initial_step;
  std::vector<double> trial(x.size());
  for (int k = 0; k < max_backtracks; ++k) {
    for (std::size_t t = 0; t < x.size(); ++t) trial[t] = x[t] + step * direction[t];
    if (f(trial) <= f_x + c1 * step * directional_derivative) return {step, true};
    step *= backtrack;
  }
  return {step, false};
}

// ---------------------------------------------------------------------------
// Unconstrained methods
// ---------------------------------------------------------------------------

namespace {

struct DescentState {
  std::vector<double> x;
  double fx;
  std::vector<double> grad;
};

// Shared skeleton of the line-search methods; `direction` proposes a search
// direction from the current state and may update internal memory.
std::size_t descent_loop(Evaluator& f, const GradientFn& gradient, DescentState& s,
                         bool exact_line,
                         const std::function<std::vector<double>(const DescentState&)>& direction) {
  double step = 0.25;
  std::size_t accepted = 0;
  while (!f.exhausted()) {
    std::vector<double> dir = direction(s);
    double gdot = 0.0;
    for (std::size_t t = 0; t < dir.size(); ++t) gdot += dir[t] * s.grad[t];
    if (gdot >= 0.0) {  // not a descent direction: steepest descent restart
      double gn = norm2(s.grad);
      if (gn < 1e-14) break;
      for (std::size_t t = 0; t < dir.size(); ++t) dir[t] = -s.grad[t] / gn;
      gdot = -gn;
    }
    double taken;
    if (exact_line) {
      // Bracket the step so the whole segment stays in the cube.
      double hi = std::numeric_limits<double>::infinity();
      for (std::size_t t = 0; t < s.x.size(); ++t) {
        if (dir[t] > 0.0) hi = std::min(hi, (1.0 - s.x[t]) / dir[t]);
        if (dir[t] < 0.0) hi = std::min(hi, (0.0 - s.x[t]) / dir[t]);
      }
      if (!(hi > 0.0) || !std::isfinite(hi)) break;
      auto g = [&](double a) {
        std::vector<double> trial(s.x.size());
        for (std::size_t t = 0; t < s.x.size(); ++t) trial[t] = s.x[t] + a * dir[t];
        return f(trial);
      };
      taken = brent_line_min(g, hi);
    } else {
      ObjectiveFn fn = [&f](const std::vector<double>& x) { return f(x); };
      LineSearchResult ls = armijo_line_search(fn, s.x, dir, s.fx, gdot, step);
      taken = ls.step;
      if (!ls.ok) break;
      step = std::min(2.0 * taken, 1.0);
    }
    std::vector<double> next(s.x.size());
    for (std::size_t t = 0; t < s.x.size(); ++t) next[t] = s.x[t] + taken * dir[t];
    clamp_cube(next);
    double fn_next = f(next);
    if (!(fn_next < s.fx - 1e-15 * (1.0 + std::abs(s.fx)))) break;
    s.x = std::move(next);
    s.fx = fn_next;
    s.grad = gradient(s.x);
    ++accepted;
  }
  return accepted;
}

std::size_t run_gradient_descent(Evaluator& f, const GradientFn& gradient, std::vector<double> x0,
                          bool exact_line) {
  DescentState s{std::move(x0), 0.0, {}};
  s.fx = f(s.x);
  if (!std::isfinite(s.fx)) return 0;
  s.grad = gradient(s.x);
  return descent_loop(f, gradient, s, exact_line, [](const DescentState& state) {
    std::vector<double> dir(state.grad.size());
    double gn = norm2(state.grad);
    if (gn < 1e-300) return dir;
    for (std::size_t t = 0; t < dir.size(); ++t) dir[t] = -state.grad[t] / gn;
    return dir;
  });
}

std::size_t run_nlcg(Evaluator& f, const GradientFn& gradient, std::vector<double> x0, bool exact_line) {
  DescentState s{std::move(x0), 0.0, {}};
  s.fx = f(s.x);
  if (!std::isfinite(s.fx)) return 0;
  s.grad = gradient(s.x);
  std::vector<double> prev_grad = s.grad;
  std::vector<double> prev_dir(s.grad.size(), 0.0);
  int since_restart = 0;
  const int d = static_cast<int>(s.x.size());
  return descent_loop(f, gradient, s, exact_line, [&](const DescentState& state) {
    std::vector<double> dir(state.grad.size());
    double beta = 0.0;
    if (since_restart > 0 && since_restart % d != 0) {
      // Polak-Ribiere+ coefficient.
      double num = 0.0, den = 0.0;
      for (std::size_t t = 0; t < dir.size(); ++t) {
        num += state.grad[t] * (state.grad[t] - prev_grad[t]);
        den += prev_grad[t] * prev_grad[t];
      }
      beta = (den > 0.0) ? std::max(0.0, num / den) : 0.0;
    }
    for (std::size_t t = 0; t < dir.size(); ++t) dir[t] = -state.grad[t] + beta * prev_dir[t];
    prev_grad = state.grad;
    prev_dir = dir;
    ++since_restart;
    return dir;
  });
}

std::size_t run_bfgs(Evaluator& f, const GradientFn& gradient, std::vector<double> x0, bool exact_line) {
  const int d = static_cast<int>(x0.size());
  DescentState s{std::move(x0), 0.0, {}};
  s.fx = f(s.x);
  if (!std::isfinite(s.fx)) return 0;
  s.grad = gradient(s.x);
  std::vector<double> h(static_cast<std::size_t>(d) * d, 0.0);
  for (int t = 0; t < d; ++t) h[static_cast<std::size_t>(t) * d + t] = 1.0;
  std::vector<double> prev_x = s.x, prev_grad = s.grad;
  bool have_prev = false;
  return descent_loop(f, gradient, s, exact_line, [&](const DescentState& state) {
    if (have_prev) {
      std::vector<double> sv(d), yv(d);
      for (int t = 0; t < d; ++t) {
        sv[t] = state.x[t] - prev_x[t];
        yv[t] = state.grad[t] - prev_grad[t];
      }
      double sy = 0.0;
      for (int t = 0; t < d; ++t) sy += sv[t] * yv[t];
      if (sy > 1e-12 * norm2(sv) * norm2(yv)) {
        // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
        double rho = 1.0 / sy;
        std::vector<double> hy(d, 0.0);
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) hy[i] += h[static_cast<std::size_t>(i) * d + j] * yv[j];
        }
        double yhy = 0.0;
        for (int t = 0; t < d; ++t) yhy += yv[t] * hy[t];
        for (int i = 0; i < d; ++i) {
          for (int j = 0; j < d; ++j) {
            h[static_cast<std::size_t>(i) * d + j] +=
                -rho * (sv[i] * hy[j] + hy[i] * sv[j]) + rho * rho * yhy * sv[i] * sv[j] +
                rho * sv[i] * sv[j];
          }
        }
      }
    }
    prev_x = state.x;
    prev_grad = state.grad;
    have_prev = true;
    std::vector<double> dir(d, 0.0);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) dir[i] -= h[static_cast<std::size_t>(i) * d + j] * state.grad[j];
    }
    double n = norm2(dir);
    if (n > 0.0) {
      for (double& c : dir) c /= n;
    }
    return dir;
  });
}

void run_rprop(Evaluator& f, const GradientFn& gradient, std::vector<double> x0) {
  const int d = static_cast<int>(x0.size());
  std::vector<double> x = std::move(x0);
  double fx = f(x);
  if (!std::isfinite(fx)) return;
  std::vector<double> grad = gradient(x);
  std::vector<double> step(d, 0.05), prev_sign(d, 0.0);
  const double eta_plus = 1.2, eta_minus = 0.5, step_min = 1e-12, step_max = 0.5;
  while (!f.exhausted()) {
    std::vector<double> next = x;
    for (int t = 0; t < d; ++t) {
      double sign = (grad[t] > 0.0) ? 1.0 : (grad[t] < 0.0 ? -1.0 : 0.0);
      if (sign * prev_sign[t] > 0.0) {
        step[t] = std::min(step[t] * eta_plus, step_max);
      } else if (sign * prev_sign[t] < 0.0) {
        step[t] = std::max(step[t] * eta_minus, step_min);
        sign = 0.0;  // iRprop-: skip the update after a sign change
      }
      prev_sign[t] = sign;
      next[t] = std::min(std::max(next[t] - sign * step[t], 0.0), 1.0);
    }
    double fn = f(next);
    if (fn < fx) {
      x = std::move(next);
      fx = fn;
    }
    grad = gradient(x);
    double total = 0.0;
    for (double st : step) total += st;
    if (total < 1e-11) break;
  }
}

void run_nelder_mead(Evaluator& f, std::vector<double> x0, std::size_t local_budget) {
  const int d = static_cast<int>(x0.size());
  const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
  std::size_t start_count = f.count();

  std::vector<std::vector<double>> simplex;
  std::vector<double> values;
  simplex.push_back(x0);
  values.push_back(f(x0));
  for (int t = 0; t < d; ++t) {
    std::vector<double> v = x0;
    v[t] += (v[t] + 0.1 <= 1.0) ? 0.1 : -0.1;
    simplex.push_back(v);
    values.push_back(f(v));
  }

  auto order = [&]() {
    std::vector<std::size_t> idx(simplex.size());
    for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<std::vector<double>> s2;
    std::vector<double> v2;
    for (std::size_t k : idx) {
      s2.push_back(simplex[k]);
      v2.push_back(values[k]);
    }
    simplex = std::move(s2);
    values = std::move(v2);
  };

  while (!f.exhausted() && f.count() - start_count < local_budget) {
    order();
    // Convergence: simplex collapsed.
    double spread = 0.0;
    for (int t = 0; t < d; ++t) {
      double lo = simplex[0][t], hi = simplex[0][t];
      for (const auto& v : simplex) {
        lo = std::min(lo, v[t]);
        hi = std::max(hi, v[t]);
      }
      spread = std::max(spread, hi - lo);
    }
    if (spread < 1e-11 && std::isfinite(values[0])) break;

    std::vector<double> centroid(d, 0.0);
    for (std::size_t k = 0; k + 1 < simplex.size(); ++k) {
      for (int t = 0; t < d; ++t) centroid[t] += simplex[k][t];
    }
    for (int t = 0; t < d; ++t) centroid[t] /= d;

    auto blend = [&](double w) {
      std::vector<double> v(d);
      for (int t = 0; t < d; ++t) v[t] = centroid[t] + w * (centroid[t] - simplex.back()[t]);
      return v;
    };

    std::vector<double> reflected = blend(alpha);
    double fr = f(reflected);
    if (fr < values[0]) {
      std::vector<double> expanded = blend(gamma);
      double fe = f(expanded);
      if (fe < fr) {
        simplex.back() = expanded;
        values.back() = fe;
      } else {
        simplex.back() = reflected;
        values.back() = fr;
      }
    } else if (fr < values[values.size() - 2]) {
      simplex.back() = reflected;
      values.back() = fr;
    } else {
      bool outer = fr < values.back();
      std::vector<double> contracted = blend(outer ? rho : -rho);
      double fc = f(contracted);
      if (fc < std::min(fr, values.back())) {
        simplex.back() = contracted;
        values.back() = fc;
      } else {
        for (std::size_t k = 1; k < simplex.size(); ++k) {
          for (int t = 0; t < d; ++t) {
            simplex[k][t] = simplex[0][t] + sigma * (simplex[k][t] - simplex[0][t]);
          }
          values[k] = f(simplex[k]);
        }
      }
    }
  }
}

void run_differential_evolution(Evaluator& f, int d, std::uint64_t seed, std::size_t budget) {
  const int pop_size = std::min(10 * d, 40);
  const double weight = 0.5, crossover = 0.9;
  RandomStream rng(seed, 0xde);
  std::size_t start_count = f.count();

  std::vector<std::vector<double>> pop(pop_size, std::vector<double>(d));
  std::vector<double> values(pop_size);
  for (int k = 0; k < pop_size; ++k) {
    for (int t = 0; t < d; ++t) pop[k][t] = rng.next_double();
    values[k] = f(pop[k]);
  }
  while (!f.exhausted() && f.count() - start_count < budget) {
    for (int k = 0; k < pop_size && !f.exhausted(); ++k) {
      int r1, r2, r3;
      do { r1 = static_cast<int>(rng.below(pop_size)); } while (r1 == k);
      do { r2 = static_cast<int>(rng.below(pop_size)); } while (r2 == k || r2 == r1);
      do { r3 = static_cast<int>(rng.below(pop_size)); } while (r3 == k || r3 == r1 || r3 == r2);
      std::vector<double> trial = pop[k];
      int forced = static_cast<int>(rng.below(d));
      for (int t = 0; t < d; ++t) {
        if (t == forced || rng.next_double() < crossover) {
          trial[t] = pop[r1][t] + weight * (pop[r2][t] - pop[r3][t]);
          trial[t] = std::min(std::max(trial[t], 0.0), 1.0);
        }
      }
      double ft = f(trial);
      if (ft <= values[k]) {
        pop[k] = std::move(trial);
        values[k] = ft;
      }
    }
  }
}

OptimizerResult finish(const Evaluator& f, const OptimizationProblem& problem) {
  OptimizerResult out;
  out.evaluations = f.count();
  out.f_best = f.best_f();
  out.x_best = f.best_x();
  out.converged = std::isfinite(out.f_best);
  if (problem.constraints && !out.x_best.empty()) {
    std::vector<double> g = problem.constraints(out.x_best);
    for (double v : g) out.violation = std::max(out.violation, std::max(v, 0.0));
  }
  return out;
}

}  // namespace

OptimizerResult minimize_unconstrained(const OptimizationProblem& problem, Method method,
                                       std::size_t budget, std::uint64_t seed,
                                       const UnconstrainedOptions& options) {
  if (problem.dim < 1 || !problem.objective) {
    throw DomainError("minimize_unconstrained: invalid problem");
  }
  const bool needs_gradient = (method == Method::GradientDescent || method == Method::Nlcg ||
                               method == Method::Bfgs || method == Method::Rprop);
  if (needs_gradient && !problem.gradient) {
    throw DomainError("minimize_unconstrained: method requires a gradient");
  }
  std::size_t minimum = 2;
  if (method == Method::NelderMead) minimum = problem.dim + 2;
  if (method == Method::DifferentialEvolution) {
    minimum = static_cast<std::size_t>(std::min(10 * problem.dim, 40));
  }
  if (budget < minimum) {
    throw DomainError("minimize_unconstrained: budget below the method minimum of " +
                      std::to_string(minimum));
  }

  Evaluator f(problem, budget);
  std::vector<double> x0 = options.initial_point.value_or(cube_center(problem.dim));
  clamp_cube(x0);

  std::size_t iterations = 0;
  switch (method) {
    case Method::GradientDescent:
      iterations = run_gradient_descent(f, problem.gradient, x0, options.exact_line_search);
      break;
    case Method::Nlcg:
      iterations = run_nlcg(f, problem.gradient, x0, options.exact_line_search);
      break;
    case Method::Bfgs:
      iterations = run_bfgs(f, problem.gradient, x0, options.exact_line_search);
      break;
    case Method::Rprop:
      run_rprop(f, problem.gradient, x0);
      break;
    case Method::NelderMead:
      run_nelder_mead(f, x0, budget);
      break;
    case Method::DifferentialEvolution:
      run_differential_evolution(f, problem.dim, seed, budget);
      break;
  }
  OptimizerResult result = finish(f, problem);
  result.iterations = iterations;
  return result;
}

// ---------------------------------------------------------------------------
// Constrained methods
// ---------------------------------------------------------------------------

FeasiblePointResult find_feasible_point(const ConstraintFn& constraints, int dim,
                                        std::uint64_t seed) {
  if (!constraints || dim < 1) throw DomainError("find_feasible_point: invalid arguments");
  auto worst = [&](const std::vector<double>& x) {
    double m = -kInf;
    for (double v : constraints(x)) m = std::max(m, v);
    return m;
  };

  // Constraint evaluations are free; minimize the worst constraint with a
  // few Nelder-Mead starts.
  OptimizationProblem aux;
  aux.dim = dim;
  aux.objective = worst;
  FeasiblePointResult best;
  best.x = cube_center(dim);
  best.slack = std::max(worst(best.x), 0.0);
  best.feasible = worst(best.x) <= 0.0;
  if (best.feasible) return best;

  RandomStream rng(seed, 0xfea51b1e);
  double best_worst = kInf;
  for (int start = 0; start < 8; ++start) {
    UnconstrainedOptions options;
    std::vector<double> x0(dim);
    if (start == 0) {
      x0 = cube_center(dim);
    } else {
      for (double& c : x0) c = rng.next_double();
    }
    options.initial_point = x0;
    OptimizerResult r = minimize_unconstrained(aux, Method::NelderMead, 4000, seed, options);
    if (r.f_best < best_worst) {
      best_worst = r.f_best;
      best.x = r.x_best;
    }
    if (best_worst < 0.0) break;
  }
  best.slack = std::max(best_worst, 0.0);
  best.feasible = best_worst <= 0.0;
  return best;
}

OptimizerResult minimize_constrained(const OptimizationProblem& problem, ConstrainedMethod method,
                                     std::size_t budget, std::uint64_t seed) {
  if (!problem.constraints || problem.num_constraints == 0) {
    // Unconstrained delegation.
    Method inner = problem.gradient ? Method::Bfgs : Method::NelderMead;
    return minimize_unconstrained(problem, inner, budget, seed);
  }
  const int d = problem.dim;
  const int mg = problem.num_constraints;

  Evaluator f(problem, budget);
  ObjectiveFn counted = [&f](const std::vector<double>& x) { return f(x); };

  std::vector<double> x = cube_center(d);
  if (method == ConstrainedMethod::LogBarrier) {
    FeasiblePointResult start = find_feasible_point(problem.constraints, d, seed);
    if (!start.feasible || start.slack > 0.0) {
      bool strictly = true;
      for (double v : problem.constraints(start.x)) strictly = strictly && (v < 0.0);
      if (!strictly) {
        throw DomainError("minimize_constrained: log-barrier needs a strictly feasible start "
                          "(remaining slack " + std::to_string(start.slack) + ")");
      }
    }
    x = start.x;
  }

  std::vector<double> lambda(mg, 0.0);
  double mu = 1.0;
  const int outer_iterations = 10;

  auto violation_of = [&](const std::vector<double>& xv) {
    double m = 0.0;
    for (double v : problem.constraints(xv)) m = std::max(m, std::max(v, 0.0));
    return m;
  };

  // Best candidate: feasible (within tolerance) with smallest f wins;
  // otherwise the smallest violation.
  std::vector<double> best_x = x;
  double best_f = kInf, best_violation = kInf;
  auto consider = [&](const std::vector<double>& xv) {
    if (!inside_cube(xv)) return;
    double v = violation_of(xv);
    double fv = f(xv);
    if (!std::isfinite(fv)) return;
    const double tol = 1e-8;
    bool feasible = v <= tol, best_feasible = best_violation <= tol;
    bool better = best_feasible ? (feasible && fv < best_f)
                                : (feasible || v < best_violation ||
                                   (v <= best_violation && fv < best_f));
    if (better) {
      best_x = xv;
      best_f = fv;
      best_violation = v;
    }
  };

  auto auxiliary = [&](const std::vector<double>& xv) -> double {
    double base = counted(xv);
    if (!std::isfinite(base)) return base;
    std::vector<double> g = problem.constraints(xv);
    switch (method) {
      case ConstrainedMethod::SquaredPenalty: {
        double pen = 0.0;
        for (double v : g) pen += std::max(v, 0.0) * std::max(v, 0.0);
        return base + mu * pen;
      }
      case ConstrainedMethod::LogBarrier: {
        double barrier = 0.0;
        for (double v : g) {
          if (v >= 0.0) return kInf;
          barrier -= std::log(-v);
        }
        return base + mu * barrier;
      }
      case ConstrainedMethod::AugmentedLagrangian: {
        double pen = 0.0, lin = 0.0;
        for (int i = 0; i < mg; ++i) {
          if (lambda[i] > 0.0) pen += std::max(g[i], 0.0) * std::max(g[i], 0.0);
          lin += lambda[i] * g[i];
        }
        return base + mu * pen + lin;
      }
    }
    return base;
  };

  // Gradient of the auxiliary via the problem gradient plus central finite
  // differences of the (cheap) constraints.
  GradientFn aux_gradient;
  if (problem.gradient) {
    aux_gradient = [&, d, mg](const std::vector<double>& xv) {
      std::vector<double> grad = problem.gradient(xv);
      std::vector<double> g = problem.constraints(xv);
      const double h = 1e-7;
      for (int t = 0; t < d; ++t) {
        std::vector<double> xp = xv, xm = xv;
        xp[t] = std::min(xp[t] + h, 1.0);
        xm[t] = std::max(xm[t] - h, 0.0);
        std::vector<double> gp = problem.constraints(xp);
        std::vector<double> gm = problem.constraints(xm);
        double width = xp[t] - xm[t];
        if (width <= 0.0) continue;
        for (int i = 0; i < mg; ++i) {
          double dg = (gp[i] - gm[i]) / width;
          switch (method) {
            case ConstrainedMethod::SquaredPenalty:
              grad[t] += mu * 2.0 * std::max(g[i], 0.0) * dg;
              break;
            case ConstrainedMethod::LogBarrier:
              if (g[i] < 0.0) grad[t] += mu * (-dg / g[i]);
              break;
            case ConstrainedMethod::AugmentedLagrangian:
              if (lambda[i] > 0.0) grad[t] += mu * 2.0 * std::max(g[i], 0.0) * dg;
              grad[t] += lambda[i] * dg;
              break;
          }
        }
      }
      return grad;
    };
  }

  consider(x);
  RandomStream rng(seed, 0xc0);
  const std::size_t inner_budget = std::max<std::size_t>(budget / (2 * outer_iterations), 50);
  double previous_violation = kInf;

  for (int outer = 0; outer < outer_iterations && !f.exhausted(); ++outer) {
    OptimizationProblem aux;
    aux.dim = d;
    aux.objective = auxiliary;
    aux.gradient = aux_gradient;

    const std::size_t floor_budget = static_cast<std::size_t>(d) + 2;
    std::size_t remaining = f.budget() - f.count();
    if (remaining <= floor_budget) break;
    UnconstrainedOptions options;
    options.initial_point = x;
    std::uint64_t inner_seed = seed ^ (0x517cc1b727220a95ULL * (outer + 1));
    OptimizerResult inner = minimize_unconstrained(
        aux, aux_gradient ? Method::Bfgs : Method::NelderMead,
        std::max(std::min(inner_budget, remaining), floor_budget), inner_seed, options);
    if (!inner.x_best.empty()) x = inner.x_best;
    // A Nelder-Mead polish from a random point keeps penalty methods from
    // stalling in a local pocket of the auxiliary.
    remaining = f.budget() - f.count();
    if (remaining > floor_budget) {
      UnconstrainedOptions alt;
      std::vector<double> x0(d);
      for (double& c : x0) c = rng.next_double();
      alt.initial_point = x0;
      OptimizerResult other = minimize_unconstrained(
          aux, Method::NelderMead,
          std::max(std::min(inner_budget / 2 + d + 2, remaining), floor_budget),
          inner_seed ^ 0x9e37ULL, alt);
      if (!other.x_best.empty() && auxiliary(other.x_best) < auxiliary(x)) x = other.x_best;
    }
    consider(x);

    std::vector<double> g = problem.constraints(x);
    double v = violation_of(x);
    switch (method) {
      case ConstrainedMethod::SquaredPenalty:
        if (v > 1e-10) mu *= 10.0;
        break;
      case ConstrainedMethod::LogBarrier:
        mu /= 10.0;
        break;
      case ConstrainedMethod::AugmentedLagrangian:
        for (int i = 0; i < mg; ++i) lambda[i] = std::max(0.0, lambda[i] + 2.0 * mu * g[i]);
        // Raise mu only when the violation stagnates.
        if (v > 0.25 * previous_violation && v > 1e-10) mu *= 10.0;
        break;
    }
    previous_violation = v;
    if (v <= 1e-10 && method != ConstrainedMethod::LogBarrier && outer >= 2) break;
  }

  OptimizerResult out;
  out.x_best = best_x;
  out.f_best = best_f;
  out.evaluations = f.count();
  out.violation = best_violation;
  out.converged = std::isfinite(best_f);
  out.penalty_parameter = mu;
  return out;
}

// ---------------------------------------------------------------------------
// Novak-Ritter generation and the surrogate pipeline
// ---------------------------------------------------------------------------

double novak_ritter_criterion(std::size_t rank, int level_sum, int degree, double gamma) {
  return std::pow(static_cast<double>(rank) + 1.0, gamma) *
         std::pow(static_cast<double>(level_sum + degree + 1), 1.0 - gamma);
}

GeneratedGrid novak_ritter_generate(const ObjectiveFn& f, const RefinementConfig& config,
                                    const std::vector<BasisSpec>& specs) {
  if (config.gamma < 0.0 || config.gamma > 1.0) {
    throw DomainError("novak_ritter_generate: gamma must be in [0, 1]");
  }
  const int d = static_cast<int>(specs.size());
  TensorBasis basis(specs);
  const bool interior = basis.boundaryless();
  int level0 = config.initial_level;
  if (level0 < 0) level0 = interior ? d + 1 : 1;

  GeneratedGrid out{interior ? regular_grid_interior(level0, d) : regular_grid(level0, d), {}};
  SparseGrid& grid = out.grid;
  if (grid.size() == 0) throw DomainError("novak_ritter_generate: empty initial grid");
  if (config.max_points < grid.size()) {
    throw DomainError("novak_ritter_generate: max_points below the initial grid size");
  }
  out.values.reserve(config.max_points);
  for (std::size_t k = 0; k < grid.size(); ++k) out.values.push_back(f(grid.coordinates(k)));

  while (grid.size() < config.max_points) {
    // Ranks: number of grid values not larger than the own value.
    const std::size_t n = grid.size();
    std::vector<std::size_t> idx(n);
    for (std::size_t k = 0; k < n; ++k) idx[k] = k;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return out.values[a] < out.values[b]; });
    std::vector<std::size_t> rank(n);
    for (std::size_t pos = 0; pos < n; ++pos) {
      // Equal values share the highest place among them.
      std::size_t end = pos;
      while (end + 1 < n && out.values[idx[end + 1]] == out.values[idx[pos]]) ++end;
      for (std::size_t k = pos; k <= end; ++k) rank[idx[k]] = end + 1;
      pos = end;
    }

    std::size_t selected = 0;
    double best = kInf;
    for (std::size_t k = 0; k < n; ++k) {
      double value = novak_ritter_criterion(rank[k], grid[k].level_sum(),
                                            grid.refinement_degree(k), config.gamma);
      if (value < best) {
        best = value;
        selected = k;
      }
    }

    const LevelIndex point = grid[selected];
    grid.increment_refinement_degree(selected);
    for (int t = 0; t < d && grid.size() < config.max_points; ++t) {
      // Left/right child separately: each gets the smallest order that is new.
      int directions = (point.level[t] == 0) ? 1 : 2;
      for (int side = 0; side < directions && grid.size() < config.max_points; ++side) {
        for (int m = 1; m <= 62; ++m) {
          auto children = mth_order_children(point, t, m);
          const LevelIndex& child = children[std::min<std::size_t>(side, children.size() - 1)];
          if (!grid.contains(child)) {
            grid.insert(child);
            out.values.push_back(f(grid.coordinates(grid.size() - 1)));
            break;
          }
        }
      }
    }
  }
  return out;
}

namespace {

std::size_t multistart_count(int d) { return std::min<std::size_t>(10 * d, 100); }

}  // namespace

SurrogateOptimizationResult optimize_surrogate(const OptimizationProblem& problem,
                                               const RefinementConfig& config,
                                               const std::vector<BasisSpec>& specs,
                                               std::uint64_t seed) {
  if (problem.dim != static_cast<int>(specs.size())) {
    throw DomainError("optimize_surrogate: spec dimension mismatch");
  }
  const int d = problem.dim;

  Evaluator f(problem, config.max_points + 8);
  ObjectiveFn counted = [&f](const std::vector<double>& x) { return f(x); };

  GeneratedGrid generated = novak_ritter_generate(counted, config, specs);
  Interpolant surrogate = Interpolant::fit(std::move(generated.grid), TensorBasis(specs),
                                           SurplusVector(generated.values));

  const SparseGrid& grid = surrogate.grid();
  auto violation_of = [&](const std::vector<double>& xv) {
    if (!problem.constraints) return 0.0;
    double m = 0.0;
    for (double v : problem.constraints(xv)) m = std::max(m, std::max(v, 0.0));
    return m;
  };

  // Best grid point (feasibility first on constrained problems).
  std::size_t best_idx = 0;
  double best_value = kInf, best_vio = kInf;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    double v = problem.constraints ? violation_of(grid.coordinates(k)) : 0.0;
    double val = generated.values[k];
    bool better = (v < best_vio - 1e-12) || (std::abs(v - best_vio) <= 1e-12 && val < best_value);
    if (better) {
      best_idx = k;
      best_value = val;
      best_vio = v;
    }
  }
  std::vector<double> x0 = grid.coordinates(best_idx);

  OptimizationProblem s_problem;
  s_problem.dim = d;
  s_problem.objective = [&surrogate](const std::vector<double>& x) { return surrogate.evaluate(x); };
  s_problem.gradient = [&surrogate](const std::vector<double>& x) { return surrogate.gradient(x); };
  s_problem.constraints = problem.constraints;
  s_problem.num_constraints = problem.num_constraints;

  std::vector<std::vector<double>> candidates = {x0};

  if (!problem.constraints) {
    // Local gradient-based runs from the best grid point.
    std::vector<double> x1;
    double f1 = kInf;
    for (Method method : {Method::GradientDescent, Method::Nlcg, Method::Bfgs, Method::Rprop}) {
      UnconstrainedOptions options;
      options.initial_point = x0;
      OptimizerResult r = minimize_unconstrained(s_problem, method, config.local_budget, seed,
                                                 options);
      if (r.f_best < f1) {
        f1 = r.f_best;
        x1 = r.x_best;
      }
    }
    if (!x1.empty()) candidates.push_back(x1);

    // Global methods plus multi-start gradient descent on the surrogate.
    std::vector<double> x2;
    double f2 = kInf;
    for (Method method : {Method::NelderMead, Method::DifferentialEvolution}) {
      UnconstrainedOptions options;
      options.initial_point = x0;
      OptimizerResult r = minimize_unconstrained(s_problem, method, config.global_budget,
                                                 seed ^ 0x9e3779b9ULL, options);
      if (r.f_best < f2) {
        f2 = r.f_best;
        x2 = r.x_best;
      }
    }
    const std::size_t starts = multistart_count(d);
    const std::size_t per_start = std::max<std::size_t>(config.multistart_budget / starts, 32);
    for (std::size_t s = 0; s < starts; ++s) {
      RandomStream rng(seed, 0x5747ULL + s);
      UnconstrainedOptions options;
      std::vector<double> xs(d);
      for (double& c : xs) c = rng.next_double();
      options.initial_point = xs;
      for (Method method : {Method::GradientDescent, Method::Bfgs}) {
        OptimizerResult r = minimize_unconstrained(s_problem, method, per_start,
                                                   seed ^ (s + 1), options);
        if (r.f_best < f2) {
          f2 = r.f_best;
          x2 = r.x_best;
        }
      }
    }
    if (!x2.empty()) candidates.push_back(x2);
  } else {
    OptimizerResult r = minimize_constrained(s_problem, ConstrainedMethod::AugmentedLagrangian,
                                             200000, seed);
    if (!r.x_best.empty()) candidates.push_back(r.x_best);
  }

  // Re-evaluate the candidates on the true objective.
  std::vector<double> final_x = x0;
  double final_f = best_value, final_vio = best_vio;
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    double v = violation_of(candidates[c]);
    double value = f(candidates[c]);
    bool better;
    if (problem.constraints) {
      const double tol = 1e-6;
      bool cand_ok = v <= tol, cur_ok = final_vio <= tol;
      better = cur_ok ? (cand_ok && value < final_f)
                      : (cand_ok || v < final_vio);
    } else {
      better = value < final_f;
    }
    if (better) {
      final_x = candidates[c];
      final_f = value;
      final_vio = v;
    }
  }

  SurrogateOptimizationResult out{OptimizerResult{}, std::move(surrogate)};
  out.result.x_best = final_x;
  out.result.f_best = final_f;
  out.result.evaluations = f.count();
  out.result.violation = final_vio;
  out.result.converged = std::isfinite(final_f);
  return out;
}

}  // namespace sgopt
