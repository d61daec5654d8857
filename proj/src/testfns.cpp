#include "sgopt/testfns.hpp"

#include <algorithm>
#include <cmath>

namespace sgopt {

namespace {

constexpr double kPi = 3.14159265358979323846;

}  // namespace

std::vector<double> TestProblem::unscale(const std::vector<double>& x) const {
  std::vector<double> xb(dim_);
  for (int t = 0; t < dim_; ++t) {
    xb[t] = lower_[t] + (upper_[t] - lower_[t]) * (x[t] - displacement_[t]);
  }
  return xb;
}

double TestProblem::objective(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != dim_) throw DomainError("TestProblem: dimension mismatch");
  return unscaled_objective_(unscale(x));
}

std::vector<double> TestProblem::constraints(const std::vector<double>& x) const {
  if (!has_constraints()) return {};
  return unscaled_constraints_(unscale(x));
}

std::vector<double> TestProblem::optimum() const {
  std::vector<double> x(dim_);
  for (int t = 0; t < dim_; ++t) {
    x[t] = (optimum_unscaled_[t] - lower_[t]) / (upper_[t] - lower_[t]) + displacement_[t];
  }
  return x;
}

TestProblem displaced(const TestProblem& problem, const std::vector<double>& a) {
  if (static_cast<int>(a.size()) != problem.dim()) {
    throw DomainError("displaced: dimension mismatch");
  }
  TestProblem out = problem;
  for (int t = 0; t < problem.dim(); ++t) {
    out.displacement_[t] += problem.displacement_safe_[t] ? a[t] : 0.0;
  }
  return out;
}

TestProblem displaced_random(const TestProblem& problem, std::uint64_t seed) {
  RandomStream rng(seed, 0x64697370);
  std::vector<double> a(problem.dim());
  for (double& v : a) v = 0.01 * rng.normal();
  return displaced(problem, a);
}

std::vector<std::string> problem_registry() {
  return {"Bra02", "GoP", "Sch06", "Ack", "Alp02", "Sch22", "G08", "G04Sq"};
}

TestProblem make_problem(const std::string& name, int d) {
  TestProblem p;
  p.name_ = name;

  auto fixed_dim = [&](int expected) {
    if (d != expected) {
      throw DomainError("make_problem: " + name + " requires d = " + std::to_string(expected));
    }
  };

  if (name == "Bra02") {
    fixed_dim(2);
    p.dim_ = 2;
    p.lower_ = {-5.0, -5.0};
    p.upper_ = {15.0, 15.0};
    p.unscaled_objective_ = [](const std::vector<double>& x) {
      double a = -51.0 * x[0] * x[0] / (40.0 * kPi * kPi) + 5.0 * x[0] / kPi + x[1] - 6.0;
      return a * a + (10.0 - 5.0 / (4.0 * kPi)) * std::cos(x[0]) * std::cos(x[1]) +
             std::log(x[0] * x[0] + x[1] * x[1] + 1.0) + 10.0;
    };
    p.optimum_unscaled_ = {-3.196988424804, 12.52625788532};
    p.optimal_value_ = 5.558914403894;
  } else if (name == "GoP") {
    fixed_dim(2);
    p.dim_ = 2;
    p.lower_ = {-2.0, -2.0};
    p.upper_ = {2.0, 2.0};
    p.unscaled_objective_ = [](const std::vector<double>& x) {
      double x1 = x[0], x2 = x[1];
      double u = x1 + x2 + 1.0;
      double v = 2.0 * x1 - 3.0 * x2;
      double f1 = 1.0 + u * u * (19.0 - 14.0 * x1 + 3.0 * x1 * x1 - 14.0 * x2 +
                                 6.0 * x1 * x2 + 3.0 * x2 * x2);
      double f2 = 30.0 + v * v * (18.0 - 32.0 * x1 + 12.0 * x1 * x1 + 48.0 * x2 -
                                  36.0 * x1 * x2 + 27.0 * x2 * x2);
      return 1e-4 * f1 * f2;
    };
    p.optimum_unscaled_ = {0.0, -1.0};
    p.optimal_value_ = 3e-4;
  } else if (name == "Sch06") {
    fixed_dim(2);
    p.dim_ = 2;
    p.lower_ = {-6.0, -6.0};
    p.upper_ = {4.0, 4.0};
    p.unscaled_objective_ = [](const std::vector<double>& x) {
      return std::max(std::abs(x[0] + 2.0 * x[1] - 7.0), std::abs(2.0 * x[0] + x[1] - 5.0));
    };
    p.optimum_unscaled_ = {1.0, 3.0};
    p.optimal_value_ = 0.0;
  } else if (name == "Ack") {
    if (d < 1) throw DomainError("make_problem: Ack requires d >= 1");
    p.dim_ = d;
    p.lower_.assign(d, 1.5);
    p.upper_.assign(d, 6.5);
    p.unscaled_objective_ = [d](const std::vector<double>& x) {
      double norm = 0.0, cosines = 0.0;
      for (double v : x) {
        norm += v * v;
        cosines += std::cos(2.0 * kPi * v);
      }
      return -20.0 * std::exp(-std::sqrt(norm) / (5.0 * std::sqrt(static_cast<double>(d)))) -
             std::exp(cosines / d) + 20.0 + std::exp(1.0);
    };
    p.optimum_unscaled_.assign(d, 1.974451986484);
    p.optimal_value_ = 6.559645375628;
  } else if (name == "Alp02") {
    if (d < 1) throw DomainError("make_problem: Alp02 requires d >= 1");
    p.dim_ = d;
    p.lower_.assign(d, 2.0);
    p.upper_.assign(d, 10.0);
    p.unscaled_objective_ = [](const std::vector<double>& x) {
      double prod = 1.0;
      for (double v : x) prod *= std::sqrt(v) * std::sin(v);
      return -prod;
    };
    p.optimum_unscaled_.assign(d, 7.9170526846662071);
    p.optimal_value_ = -std::pow(2.8081311800070049, d);
  } else if (name == "Sch22") {
    if (d < 1) throw DomainError("make_problem: Sch22 requires d >= 1");
    p.dim_ = d;
    p.lower_.assign(d, -3.0);
    p.upper_.assign(d, 7.0);
    p.unscaled_objective_ = [](const std::vector<double>& x) {
      double sum = 0.0, prod = 1.0;
      for (double v : x) {
        sum += std::abs(v);
        prod *= std::abs(v);
      }
      return sum + prod;
    };
    p.optimum_unscaled_.assign(d, 0.0);
    p.optimal_value_ = 0.0;
  } else if (name == "G08") {
    fixed_dim(2);
    p.dim_ = 2;
    p.lower_ = {0.5, 3.0};
    p.upper_ = {2.5, 6.0};
    p.unscaled_objective_ = [](const std::vector<double>& x) {
      double s1 = std::sin(2.0 * kPi * x[0]);
      return -(s1 * s1 * s1 * std::sin(2.0 * kPi * x[1])) /
             (x[0] * x[0] * x[0] * (x[0] + x[1]));
    };
    p.num_constraints_ = 2;
    p.unscaled_constraints_ = [](const std::vector<double>& x) {
      return std::vector<double>{x[0] * x[0] - x[1] + 1.0,
                                 1.0 - x[0] + (x[1] - 4.0) * (x[1] - 4.0)};
    };
    p.optimum_unscaled_ = {1.227971358337, 4.245373366474};
    p.optimal_value_ = -0.09582504141804;
  } else if (name == "G04Sq") {
    fixed_dim(5);
    p.dim_ = 5;
    p.lower_ = {78.0, 33.0, 27.0, 27.0, 27.0};
    p.upper_ = {102.0, 45.0, 45.0, 45.0, 45.0};
    p.unscaled_objective_ = [](const std::vector<double>& x) {
      double g04 = 5.3578547 * x[2] * x[2] + 0.8356891 * x[0] * x[4] + 37.293239 * x[0] - 10120.0;
      return g04 * g04;
    };
    p.num_constraints_ = 6;
    p.unscaled_constraints_ = [](const std::vector<double>& x) {
      double u = 85334.407 + 5.6858 * x[1] * x[4] + 0.6262 * x[0] * x[3] - 2.2053 * x[2] * x[4];
      double v = 80512.49 + 7.1317 * x[1] * x[4] + 2.9955 * x[0] * x[1] + 2.1813 * x[2] * x[2];
      double w = 9300.961 + 4.7026 * x[2] * x[4] + 1.2547 * x[0] * x[2] + 1.9085 * x[2] * x[3];
      return std::vector<double>{1e-3 * (u - 92000.0), 1e-3 * (-u),
                                 1e-3 * (v - 110000.0), 1e-3 * (-v + 90000.0),
                                 1e-3 * (w - 25000.0), 1e-3 * (-w + 20000.0)};
    };
    p.optimum_unscaled_ = {78.0, 33.0, 29.995256025682, 45.0, 36.775812905788};
    p.optimal_value_ = 43.590737882363;
  } else {
    throw DomainError("make_problem: unknown problem " + name);
  }

  p.displacement_.assign(p.dim_, 0.0);
  p.displacement_safe_.assign(p.dim_, true);
  if (name == "G04Sq") {
    // The optimum sits on the domain boundary in these components; shifting
    // them would move it out of the cube.
    p.displacement_safe_ = {false, false, true, false, true};
  }
  return p;
}

}  // namespace sgopt
