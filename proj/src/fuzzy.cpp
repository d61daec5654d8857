#include "sgopt/fuzzy.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace sgopt {

// ---------------------------------------------------------------------------
// Fuzzy intervals
// ---------------------------------------------------------------------------

FuzzyInterval FuzzyInterval::triangular(double a, double b, double c) {
  if (!(a <= b && b <= c) || a == c) throw DomainError("triangular: require a <= b <= c, a < c");
  FuzzyInterval out;
  out.kind_ = Kind::Triangular;
  out.params_ = {a, b, c};
  return out;
}

FuzzyInterval FuzzyInterval::trapezoidal(double a, double b, double c, double d) {
  if (!(a <= b && b <= c && c <= d) || a == d) {
    throw DomainError("trapezoidal: require a <= b <= c <= d, a < d");
  }
  FuzzyInterval out;
  out.kind_ = Kind::Trapezoidal;
  out.params_ = {a, b, c, d};
  return out;
}

FuzzyInterval FuzzyInterval::quasi_gaussian(double mean, double sigma, double support_multiple) {
  if (sigma <= 0.0 || support_multiple <= 0.0) {
    throw DomainError("quasi_gaussian: sigma and support multiple must be positive");
  }
  FuzzyInterval out;
  out.kind_ = Kind::QuasiGaussian;
  out.params_ = {mean, sigma, support_multiple};
  return out;
}

FuzzyInterval FuzzyInterval::piecewise_linear(std::vector<std::pair<double, double>> points) {
  if (points.size() < 2) throw DomainError("piecewise_linear: need at least two points");
  double peak = 0.0;
  bool rising_done = false;
  for (std::size_t k = 0; k < points.size(); ++k) {
    if (k > 0 && points[k].first < points[k - 1].first) {
      throw DomainError("piecewise_linear: x values must be non-decreasing");
    }
    if (points[k].second < -1e-12 || points[k].second > 1.0 + 1e-12) {
      throw DomainError("piecewise_linear: memberships must lie in [0, 1]");
    }
    points[k].second = std::min(std::max(points[k].second, 0.0), 1.0);
    peak = std::max(peak, points[k].second);
    if (k > 0) {
      if (points[k].second < points[k - 1].second - 1e-12) rising_done = true;
      if (rising_done && points[k].second > points[k - 1].second + 1e-12) {
        throw DomainError("piecewise_linear: membership must be quasiconcave");
      }
    }
  }
  if (std::abs(peak - 1.0) > 1e-9) {
    throw DomainError("piecewise_linear: membership must be normalized (peak 1)");
  }
  FuzzyInterval out;
  out.kind_ = Kind::PiecewiseLinear;
  out.points_ = std::move(points);
  return out;
}

double FuzzyInterval::membership(double x) const {
  switch (kind_) {
    case Kind::Triangular: {
      double a = params_[0], b = params_[1], c = params_[2];
      if (x < a || x > c) return 0.0;
      if (x < b) return (x - a) / (b - a);
      if (x > b) return (c - x) / (c - b);
      return 1.0;
    }
    case Kind::Trapezoidal: {
      double a = params_[0], b = params_[1], c = params_[2], d = params_[3];
      if (x < a || x > d) return 0.0;
      if (x < b) return (x - a) / (b - a);
      if (x > c) return (d - x) / (d - c);
      return 1.0;
    }
    case Kind::QuasiGaussian: {
      double mean = params_[0], sigma = params_[1], k = params_[2];
      if (std::abs(x - mean) > k * sigma) return 0.0;
      double z = (x - mean) / (2.0 * sigma);
      return std::exp(-z * z);
    }
    case Kind::PiecewiseLinear: {
      if (x < points_.front().first || x > points_.back().first) return 0.0;
      for (std::size_t k = 1; k < points_.size(); ++k) {
        if (x <= points_[k].first) {
          double x0 = points_[k - 1].first, x1 = points_[k].first;
          if (x1 == x0) return std::max(points_[k - 1].second, points_[k].second);
          double w = (x - x0) / (x1 - x0);
          return (1.0 - w) * points_[k - 1].second + w * points_[k].second;
        }
      }
      return points_.back().second;
    }
  }
  return 0.0;
}

std::pair<double, double> FuzzyInterval::alpha_cut(double alpha) const {
  if (alpha < 0.0 || alpha > 1.0) throw DomainError("alpha_cut: alpha must be in [0, 1]");
  switch (kind_) {
    case Kind::Triangular: {
      double a = params_[0], b = params_[1], c = params_[2];
      return {a + alpha * (b - a), c - alpha * (c - b)};
    }
    case Kind::Trapezoidal: {
      double a = params_[0], b = params_[1], c = params_[2], d = params_[3];
      return {a + alpha * (b - a), d - alpha * (d - c)};
    }
    case Kind::QuasiGaussian: {
      double mean = params_[0], sigma = params_[1], k = params_[2];
      double half = k * sigma;
      if (alpha > 0.0) half = std::min(half, 2.0 * sigma * std::sqrt(-std::log(alpha)));
      return {mean - half, mean + half};
    }
    case Kind::PiecewiseLinear: {
      double threshold = std::max(alpha, 0.0);
      if (threshold == 0.0) return {points_.front().first, points_.back().first};
      double lo = points_.back().first, hi = points_.front().first;
      for (std::size_t k = 0; k < points_.size(); ++k) {
        if (points_[k].second >= threshold - 1e-15) {
          lo = std::min(lo, points_[k].first);
          hi = std::max(hi, points_[k].first);
        }
        if (k > 0) {
          double m0 = points_[k - 1].second, m1 = points_[k].second;
          // Crossing of the threshold within the segment.
          if ((m0 < threshold) != (m1 < threshold) && m1 != m0) {
            double w = (threshold - m0) / (m1 - m0);
            double x = points_[k - 1].first + w * (points_[k].first - points_[k - 1].first);
            lo = std::min(lo, x);
            hi = std::max(hi, x);
          }
        }
      }
      if (lo > hi) throw DomainError("alpha_cut: empty cut (membership not normalized)");
      return {lo, hi};
    }
  }
  return {0.0, 0.0};
}

std::vector<double> FuzzyInterval::breakpoints() const {
  switch (kind_) {
    case Kind::Triangular:
    case Kind::Trapezoidal:
      return params_;
    case Kind::QuasiGaussian: {
      double mean = params_[0], sigma = params_[1], k = params_[2];
      return {mean - k * sigma, mean, mean + k * sigma};
    }
    case Kind::PiecewiseLinear: {
      std::vector<double> out;
      for (const auto& [x, mu] : points_) out.push_back(x);
      return out;
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Extension principle
// ---------------------------------------------------------------------------

namespace {

// Box-constrained optimization of f over [lo, hi] (degenerate components are
// pinned) by optimizing over the unit cube of the free coordinates.
double optimize_over_box(const ObjectiveFn& f, const GradientFn& gradient,
                         const std::vector<double>& lo, const std::vector<double>& hi,
                         bool maximize, const ExtensionOptions& options, std::uint64_t stream,
                         std::vector<double>* arg = nullptr) {
  const int d = static_cast<int>(lo.size());
  std::vector<int> free_dims;
  std::vector<double> base(d);
  for (int t = 0; t < d; ++t) {
    base[t] = 0.5 * (lo[t] + hi[t]);
    if (hi[t] - lo[t] > 1e-14) free_dims.push_back(t);
  }

  auto embed = [&](const std::vector<double>& u) {
    std::vector<double> x = base;
    for (std::size_t j = 0; j < free_dims.size(); ++j) {
      int t = free_dims[j];
      x[t] = lo[t] + u[j] * (hi[t] - lo[t]);
    }
    return x;
  };

  if (free_dims.empty()) {
    double value = f(base);
    if (arg) *arg = base;
    return value;
  }

  OptimizationProblem problem;
  problem.dim = static_cast<int>(free_dims.size());
  double sign = maximize ? -1.0 : 1.0;
  problem.objective = [&](const std::vector<double>& u) { return sign * f(embed(u)); };
  if (gradient) {
    problem.gradient = [&](const std::vector<double>& u) {
      std::vector<double> g = gradient(embed(u));
      std::vector<double> out(free_dims.size());
      for (std::size_t j = 0; j < free_dims.size(); ++j) {
        int t = free_dims[j];
        out[j] = sign * g[t] * (hi[t] - lo[t]);
      }
      return out;
    };
  }

  double best = std::numeric_limits<double>::infinity();
  std::vector<double> best_u(free_dims.size(), 0.5);
  for (int s = 0; s < options.starts; ++s) {
    RandomStream rng(options.seed ^ stream, static_cast<std::uint64_t>(s));
    UnconstrainedOptions uo;
    std::vector<double> u0(free_dims.size());
    if (s == 0) {
      u0.assign(free_dims.size(), 0.5);
    } else {
      for (double& c : u0) c = rng.next_double();
    }
    uo.initial_point = u0;
    Method method = gradient ? Method::GradientDescent : Method::NelderMead;
    OptimizerResult r = minimize_unconstrained(problem, method, options.budget_per_start,
                                               options.seed ^ (stream + s), uo);
    if (r.f_best < best) {
      best = r.f_best;
      best_u = r.x_best;
    }
  }
  if (arg) *arg = embed(best_u);
  return sign * best;
}

ExtensionResult run_extension(const ObjectiveFn& f, const GradientFn& gradient,
                              const std::vector<FuzzyInterval>& inputs, int m,
                              const ExtensionOptions& options) {
  if (m < 1) throw DomainError("extension_principle: need at least one alpha segment");
  if (inputs.empty()) throw DomainError("extension_principle: no fuzzy inputs");
  const int d = static_cast<int>(inputs.size());

  ExtensionResult out;
  for (int j = 0; j <= m; ++j) {
    double alpha = static_cast<double>(j) / m;
    std::vector<double> lo(d), hi(d);
    for (int t = 0; t < d; ++t) {
      auto cut = inputs[t].alpha_cut(alpha);
      lo[t] = std::min(std::max(cut.first, 0.0), 1.0);
      hi[t] = std::min(std::max(cut.second, 0.0), 1.0);
      if (lo[t] > hi[t]) std::swap(lo[t], hi[t]);
    }
    double mn = optimize_over_box(f, gradient, lo, hi, false, options, 2 * j + 1);
    double mx = optimize_over_box(f, gradient, lo, hi, true, options, 2 * j + 2);
    out.alphas.push_back(alpha);
    out.lower.push_back(mn);
    out.upper.push_back(std::max(mx, mn));
  }

  // Piecewise linear membership through the cut bounds (ascending branch,
  // then the descending branch); tiny optimizer inversions are clamped so
  // the polyline stays quasiconcave.
  std::vector<std::pair<double, double>> points;
  double running = out.lower[0];
  for (int j = 0; j <= m; ++j) {
    running = std::max(running, out.lower[j]);
    points.emplace_back(running, out.alphas[j]);
  }
  running = out.upper[m];
  std::vector<std::pair<double, double>> down;
  for (int j = m; j >= 0; --j) {
    running = std::max(running, out.upper[j]);
    down.emplace_back(running, out.alphas[j]);
  }
  if (points.back().first > down.front().first) {
    double mid = 0.5 * (points.back().first + down.front().first);
    points.back().first = mid;
    down.front().first = mid;
  }
  points.insert(points.end(), down.begin(), down.end());
  out.output = FuzzyInterval::piecewise_linear(std::move(points));
  return out;
}

}  // namespace

ExtensionResult extension_principle(const ObjectiveFn& f, const std::vector<FuzzyInterval>& inputs,
                                    int m, const ExtensionOptions& options) {
  return run_extension(f, GradientFn{}, inputs, m, options);
}

ExtensionResult extension_principle(const Interpolant& surrogate,
                                    const std::vector<FuzzyInterval>& inputs, int m,
                                    const ExtensionOptions& options) {
  ObjectiveFn f = [&surrogate](const std::vector<double>& x) { return surrogate.evaluate(x); };
  GradientFn g = [&surrogate](const std::vector<double>& x) { return surrogate.gradient(x); };
  return run_extension(f, g, inputs, m, options);
}

// ---------------------------------------------------------------------------
// Fuzzy L2 error
// ---------------------------------------------------------------------------

double fuzzy_l2_error(const FuzzyInterval& reference, const FuzzyInterval& approx) {
  auto sup_r = reference.support();
  auto sup_a = approx.support();
  double lo = std::min(sup_r.first, sup_a.first);
  double hi = std::max(sup_r.second, sup_a.second);
  if (!(hi > lo)) throw DomainError("fuzzy_l2_error: degenerate union of supports");

  std::set<double> cuts = {lo, hi};
  for (double b : reference.breakpoints()) {
    if (b > lo && b < hi) cuts.insert(b);
  }
  for (double b : approx.breakpoints()) {
    if (b > lo && b < hi) cuts.insert(b);
  }
  std::vector<double> grid(cuts.begin(), cuts.end());

  // Refine segments so the Gaussian flanks are integrated accurately.
  std::vector<double> partition;
  const double max_len = (hi - lo) / 512.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    double a = grid[k], b = grid[k + 1];
    int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / max_len)));
    for (int j = 0; j < pieces; ++j) partition.push_back(a + (b - a) * j / pieces);
  }
  partition.push_back(hi);

  static const double nodes[4] = {-0.8611363115940526, -0.3399810435848563,
                                  0.3399810435848563, 0.8611363115940526};
  static const double weights[4] = {0.3478548451374538, 0.6521451548625461,
                                    0.6521451548625461, 0.3478548451374538};
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k + 1 < partition.size(); ++k) {
    double a = partition[k], b = partition[k + 1];
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int j = 0; j < 4; ++j) {
      double x = mid + half * nodes[j];
      double mr = reference.membership(x);
      double ma = approx.membership(x);
      num += weights[j] * half * (mr - ma) * (mr - ma);
      den += weights[j] * half * mr * mr;
    }
  }
  if (den <= 0.0) throw DomainError("fuzzy_l2_error: reference membership has zero norm");
  return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Fuzzy Novak-Ritter
// ---------------------------------------------------------------------------

GeneratedGrid fuzzy_novak_ritter(const ObjectiveFn& f, const FuzzyRefinementConfig& config,
                                 const std::vector<FuzzyInterval>& inputs, GeneratedGrid start) {
  const int d = start.grid.dim();
  if (static_cast<int>(inputs.size()) != d) {
    throw DomainError("fuzzy_novak_ritter: input count must match the grid dimension");
  }
  if (start.values.size() != start.grid.size()) {
    throw DomainError("fuzzy_novak_ritter: value count mismatch");
  }
  SparseGrid& grid = start.grid;
  std::vector<double>& values = start.values;

  while (grid.size() < config.max_points) {
    std::set<std::size_t> refine;
    for (int j = 0; j <= config.alpha_segments; ++j) {
      double alpha = static_cast<double>(j) / config.alpha_segments;
      std::vector<double> lo(d), hi(d);
      for (int t = 0; t < d; ++t) {
        auto cut = inputs[t].alpha_cut(alpha);
        double a = cut.first, b = cut.second;
        if (b - a < 0.05) {
          double mid = 0.5 * (a + b);
          a = mid - 0.025;
          b = mid + 0.025;
        }
        double width = b - a;
        a -= 0.05 * width;
        b += 0.05 * width;
        lo[t] = a;
        hi[t] = b;
      }
      // Feasible points within the (clipped) box.
      std::vector<std::size_t> members;
      for (std::size_t k = 0; k < grid.size(); ++k) {
        std::vector<double> x = grid.coordinates(k);
        bool in = true;
        for (int t = 0; t < d; ++t) {
          if (x[t] < lo[t] || x[t] > hi[t]) {
            in = false;
            break;
          }
        }
        if (in) members.push_back(k);
      }
      if (members.empty()) continue;
      std::vector<std::size_t> rank(members.size());
      for (std::size_t a = 0; a < members.size(); ++a) {
        std::size_t r = 0;
        for (std::size_t b = 0; b < members.size(); ++b) {
          if (values[members[b]] <= values[members[a]]) ++r;
        }
        rank[a] = r;
      }
      std::size_t best_min = members[0], best_max = members[0];
      double crit_min = std::numeric_limits<double>::infinity();
      double crit_max = std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < members.size(); ++a) {
        std::size_t k = members[a];
        double base = std::pow(static_cast<double>(grid[k].level_sum() +
                                                   grid.refinement_degree(k) + 1),
                               1.0 - config.gamma);
        double cmin = std::pow(static_cast<double>(rank[a]) + 1.0, config.gamma) * base;
        double cmax = std::pow(static_cast<double>(members.size() - rank[a]) + 2.0,
                               config.gamma) * base;
        if (cmin < crit_min) {
          crit_min = cmin;
          best_min = k;
        }
        if (cmax < crit_max) {
          crit_max = cmax;
          best_max = k;
        }
      }
      refine.insert(best_min);
      refine.insert(best_max);
    }
    if (refine.empty()) break;

    for (std::size_t k : refine) {
      const LevelIndex point = grid[k];
      grid.increment_refinement_degree(k);
      for (int t = 0; t < d; ++t) {
        int directions = (point.level[t] == 0) ? 1 : 2;
        for (int side = 0; side < directions; ++side) {
          for (int m = 1; m <= 62; ++m) {
            auto children = mth_order_children(point, t, m);
            const LevelIndex& child = children[std::min<std::size_t>(side, children.size() - 1)];
            if (!grid.contains(child)) {
              grid.insert(child);
              values.push_back(f(grid.coordinates(grid.size() - 1)));
              break;
            }
          }
        }
      }
    }
  }
  return start;
}

}  // namespace sgopt
