#ifndef SGOPT_TESTFNS_HPP
#define SGOPT_TESTFNS_HPP

#include <functional>
#include <string>
#include <vector>

#include "sgopt/common.hpp"

namespace sgopt {

/// A benchmark problem rescaled to the unit cube, with optional constraints
/// (feasible iff g(x) <= 0) and displacement support.
class TestProblem {
 public:
  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  int num_constraints() const { return num_constraints_; }
  bool has_constraints() const { return num_constraints_ > 0; }

  /// Objective on [0,1]^d; with a displacement a the call evaluates the
  /// translated function x -> f(x - a).
  double objective(const std::vector<double>& x) const;
  std::vector<double> constraints(const std::vector<double>& x) const;

  /// Location of the global optimum in unit-cube coordinates (displacement
  /// included) and the optimal value (invariant under displacement).
  std::vector<double> optimum() const;
  double optimal_value() const { return optimal_value_; }

  const std::vector<double>& displacement() const { return displacement_; }
  const std::vector<bool>& displacement_safe() const { return displacement_safe_; }

  friend TestProblem make_problem(const std::string& name, int d);
  friend TestProblem displaced(const TestProblem& problem, const std::vector<double>& a);
  friend TestProblem displaced_random(const TestProblem& problem, std::uint64_t seed);

 private:
  std::vector<double> unscale(const std::vector<double>& x) const;

  std::string name_;
  int dim_ = 0;
  int num_constraints_ = 0;
  std::vector<double> lower_, upper_;  // unscaled domain
  std::function<double(const std::vector<double>&)> unscaled_objective_;
  std::function<std::vector<double>(const std::vector<double>&)> unscaled_constraints_;
  std::vector<double> optimum_unscaled_;
  double optimal_value_ = 0.0;
  std::vector<bool> displacement_safe_;
  std::vector<double> displacement_;  // in unit-cube coordinates
};

/// Bra02, GoP, Sch06 (d = 2), Ack, Alp02, Sch22 (any d), G08 (d = 2),
/// G04Sq (d = 5).
TestProblem make_problem(const std::string& name, int d);

/// Translated copy: objective x -> f(x - a), optimum shifted by a.
/// Displacement-unsafe components of a are forced to zero.
TestProblem displaced(const TestProblem& problem, const std::vector<double>& a);

/// Seeded Gaussian displacement (mean 0, sigma 0.01 per component).
TestProblem displaced_random(const TestProblem& problem, std::uint64_t seed);

std::vector<std::string> problem_registry();

}  // namespace sgopt

#endif
