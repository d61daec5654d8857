#include "sgopt/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace sgopt {

Interpolant::Interpolant(SparseGrid grid, TensorBasis basis, SurplusVector surpluses)
    : grid_(std::move(grid)), basis_(std::move(basis)), surpluses_(std::move(surpluses)) {
  if (surpluses_.size() != grid_.size()) {
    throw DomainError("Interpolant: surplus count must match grid size");
  }
  if (basis_.dim() != grid_.dim()) throw DomainError("Interpolant: dimension mismatch");
}

Interpolant Interpolant::fit(SparseGrid grid, TensorBasis basis, SurplusVector values) {
  SurplusVector alpha = hierarchize_direct(grid, basis, values);
  return Interpolant(std::move(grid), std::move(basis), std::move(alpha));
}

void Interpolant::check_point(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != dim()) throw DomainError("Interpolant: dimension mismatch");
  for (double c : x) {
    if (!(c >= 0.0 && c <= 1.0)) {
      throw DomainError("Interpolant: point outside [0,1]^d (use extrapolated_evaluate)");
    }
  }
}

double Interpolant::evaluate(const std::vector<double>& x, int j) const {
  check_point(x);
  double sum = 0.0;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (basis_.supports(grid_[k], x)) {
      sum += surpluses_.at(k, j) * basis_.value(grid_[k], x);
    }
  }
  return sum;
}

void Interpolant::evaluate_all(const std::vector<double>& x, double* out) const {
  check_point(x);
  const int m = columns();
  std::fill(out, out + m, 0.0);
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (basis_.supports(grid_[k], x)) {
      double v = basis_.value(grid_[k], x);
      for (int j = 0; j < m; ++j) out[j] += surpluses_.at(k, j) * v;
    }
  }
}

std::vector<double> Interpolant::gradient(const std::vector<double>& x, int j) const {
  check_point(x);
  const int d = dim();
  std::vector<double> grad(d, 0.0), g(d);
  double v = 0.0;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (!basis_.supports(grid_[k], x)) continue;
    basis_.value_gradient(grid_[k], x, v, g);
    double a = surpluses_.at(k, j);
    for (int t = 0; t < d; ++t) grad[t] += a * g[t];
  }
  return grad;
}

void Interpolant::evaluate_with_gradients(const std::vector<double>& x, double* values,
                                          double* gradients) const {
  check_point(x);
  const int d = dim();
  const int m = columns();
  std::fill(values, values + m, 0.0);
  std::fill(gradients, gradients + static_cast<std::size_t>(m) * d, 0.0);
  std::vector<double> g(d);
  double v = 0.0;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (!basis_.supports(grid_[k], x)) continue;
    basis_.value_gradient(grid_[k], x, v, g);
    for (int j = 0; j < m; ++j) {
      double a = surpluses_.at(k, j);
      values[j] += a * v;
      for (int t = 0; t < d; ++t) gradients[static_cast<std::size_t>(j) * d + t] += a * g[t];
    }
  }
}

std::vector<double> Interpolant::hessian(const std::vector<double>& x, int j) const {
  check_point(x);
  const int d = dim();
  std::vector<double> hess(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<double> g(d), h(static_cast<std::size_t>(d) * d);
  double v = 0.0;
  for (std::size_t k = 0; k < grid_.size(); ++k) {
    if (!basis_.supports(grid_[k], x)) continue;
    basis_.value_gradient_hessian(grid_[k], x, v, g, h);
    double a = surpluses_.at(k, j);
    for (std::size_t e = 0; e < hess.size(); ++e) hess[e] += a * h[e];
  }
  return hess;
}

double Interpolant::extrapolated_evaluate(const std::vector<double>& x, ExtrapolationMode mode,
                                          int j) const {
  const int d = dim();
  if (static_cast<int>(x.size()) != d) throw DomainError("Interpolant: dimension mismatch");
  std::vector<double> inside(d);
  for (int t = 0; t < d; ++t) inside[t] = std::min(std::max(x[t], 0.0), 1.0);
  double value = evaluate(inside, j);
  if (mode == ExtrapolationMode::Constant) return value;
  std::vector<double> diff(d);
  for (int t = 0; t < d; ++t) diff[t] = x[t] - inside[t];
  std::vector<double> grad = gradient(inside, j);
  for (int t = 0; t < d; ++t) value += grad[t] * diff[t];
  if (mode == ExtrapolationMode::Linear) return value;
  std::vector<double> hess = hessian(inside, j);
  for (int t = 0; t < d; ++t) {
    for (int u = 0; u < d; ++u) {
      value += diff[t] * hess[static_cast<std::size_t>(t) * d + u] * diff[u];
    }
  }
  return value;
}

void Interpolant::save(const std::string& prefix) const {
  {
    std::ofstream out(prefix + ".grid");
    if (!out) throw DomainError("Interpolant::save: cannot open " + prefix + ".grid");
    grid_.save(out);
  }
  {
    std::ofstream out(prefix + ".surplus.csv");
    const int d = dim();
    for (int t = 0; t < d; ++t) out << "l" << (t + 1) << ",";
    for (int t = 0; t < d; ++t) out << "i" << (t + 1) << ",";
    for (int j = 0; j < columns(); ++j) out << "alpha" << (j > 0 ? std::to_string(j + 1) : "")
                                            << (j + 1 < columns() ? "," : "");
    out << "\n";
    char buf[32];
    for (std::size_t k = 0; k < grid_.size(); ++k) {
      for (int t = 0; t < d; ++t) out << grid_[k].level[t] << ",";
      for (int t = 0; t < d; ++t) out << grid_[k].index[t] << ",";
      for (int j = 0; j < columns(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", surpluses_.at(k, j));
        out << buf << (j + 1 < columns() ? "," : "\n");
      }
    }
  }
  {
    std::ofstream out(prefix + ".spec");
    for (int t = 0; t < dim(); ++t) {
      out << family_name(basis_.spec(t).family) << " " << basis_.spec(t).degree << "\n";
    }
  }
}

Interpolant Interpolant::load(const std::string& prefix) {
  std::ifstream grid_in(prefix + ".grid");
  if (!grid_in) throw DomainError("Interpolant::load: cannot open " + prefix + ".grid");
  SparseGrid grid = SparseGrid::load(grid_in);

  std::vector<BasisSpec> specs;
  {
    std::ifstream in(prefix + ".spec");
    if (!in) throw DomainError("Interpolant::load: cannot open " + prefix + ".spec");
    std::string family;
    int degree;
    while (in >> family >> degree) {
      BasisSpec spec;
      spec.family = parse_family(family);
      spec.degree = degree;
      spec.allow_degree_above_5 = true;
      specs.push_back(spec);
    }
  }
  if (static_cast<int>(specs.size()) != grid.dim()) {
    throw DomainError("Interpolant::load: spec dimension mismatch");
  }

  std::ifstream in(prefix + ".surplus.csv");
  if (!in) throw DomainError("Interpolant::load: cannot open " + prefix + ".surplus.csv");
  std::string header;
  std::getline(in, header);
  int columns = 1 + static_cast<int>(std::count(header.begin(), header.end(), ',')) -
                2 * grid.dim();
  if (columns < 1) throw DomainError("Interpolant::load: malformed surplus header");
  SurplusVector surpluses;
  surpluses.columns = columns;
  surpluses.data.assign(grid.size() * columns, 0.0);
  std::string line;
  std::size_t k = 0;
  while (std::getline(in, line) && k < grid.size()) {
    if (line.empty()) continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    LevelIndex p;
    p.level.resize(grid.dim());
    p.index.resize(grid.dim());
    for (int t = 0; t < grid.dim(); ++t) row >> p.level[t];
    for (int t = 0; t < grid.dim(); ++t) row >> p.index[t];
    auto pos = grid.find(p);
    if (!pos) throw DomainError("Interpolant::load: surplus row for unknown grid point");
    for (int j = 0; j < columns; ++j) row >> surpluses.at(*pos, j);
    ++k;
  }
  if (k != grid.size()) throw DomainError("Interpolant::load: surplus row count mismatch");
  return Interpolant(std::move(grid), TensorBasis(std::move(specs)), std::move(surpluses));
}

// ---------------------------------------------------------------------------
// SPD surrogate
// ---------------------------------------------------------------------------

std::vector<double> cholesky_upper(const std::vector<double>& a, int m) {
  if (static_cast<int>(a.size()) != m * m) throw DomainError("cholesky_upper: size mismatch");
  std::vector<double> lower(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      double sum = a[static_cast<std::size_t>(i) * m + j];
      for (int k = 0; k < j; ++k) {
        sum -= lower[static_cast<std::size_t>(i) * m + k] * lower[static_cast<std::size_t>(j) * m + k];
      }
      if (i == j) {
        if (sum <= 0.0) {
          throw SolverError("cholesky: non-positive pivot " + std::to_string(sum) +
                            " at row " + std::to_string(i));
        }
        lower[static_cast<std::size_t>(i) * m + j] = std::sqrt(sum);
      } else {
        lower[static_cast<std::size_t>(i) * m + j] =
            sum / lower[static_cast<std::size_t>(j) * m + j];
      }
    }
  }
  // R = L^T so that a = R^T R.
  std::vector<double> upper(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      upper[static_cast<std::size_t>(j) * m + i] = lower[static_cast<std::size_t>(i) * m + j];
    }
  }
  return upper;
}

namespace {

int triangle_count(int m) { return m * (m + 1) / 2; }

int triangle_index(int i, int j, int m) {
  // Upper-triangular (i <= j) entries in row-major order.
  return i * m - i * (i - 1) / 2 + (j - i);
}

}  // namespace

SpdSurrogate SpdSurrogate::build(SparseGrid grid, TensorBasis basis,
                                 const std::vector<double>& samples, int m) {
  const std::size_t n = grid.size();
  if (samples.size() != n * static_cast<std::size_t>(m) * m) {
    throw DomainError("SpdSurrogate::build: sample count mismatch");
  }
  SurplusVector values;
  values.columns = triangle_count(m);
  values.data.assign(n * values.columns, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> sample(samples.begin() + k * m * m, samples.begin() + (k + 1) * m * m);
    // Symmetry check before factoring.
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < i; ++j) {
        double diff = std::abs(sample[static_cast<std::size_t>(i) * m + j] -
                               sample[static_cast<std::size_t>(j) * m + i]);
        if (diff > 1e-10 * (1.0 + std::abs(sample[static_cast<std::size_t>(i) * m + j]))) {
          throw DomainError("SpdSurrogate::build: sample at grid point " + std::to_string(k) +
                            " is not symmetric");
        }
      }
    }
    std::vector<double> upper;
    try {
      upper = cholesky_upper(sample, m);
    } catch (const SolverError& err) {
      throw SolverError("SpdSurrogate::build: sample at grid point " + std::to_string(k) +
                        " is not positive definite (" + err.what() + ")");
    }
    for (int i = 0; i < m; ++i) {
      for (int j = i; j < m; ++j) {
        values.at(k, triangle_index(i, j, m)) = upper[static_cast<std::size_t>(i) * m + j];
      }
    }
  }
  Interpolant factors = Interpolant::fit(std::move(grid), std::move(basis), std::move(values));
  return SpdSurrogate(m, std::move(factors));
}

std::vector<double> SpdSurrogate::evaluate(const std::vector<double>& x) const {
  const int m = m_;
  std::vector<double> entries(triangle_count(m));
  factors_.evaluate_all(x, entries.data());
  std::vector<double> r(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      r[static_cast<std::size_t>(i) * m + j] = entries[triangle_index(i, j, m)];
    }
  }
  std::vector<double> e(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      double sum = 0.0;
      for (int k = 0; k < m; ++k) {
        sum += r[static_cast<std::size_t>(k) * m + i] * r[static_cast<std::size_t>(k) * m + j];
      }
      e[static_cast<std::size_t>(i) * m + j] = sum;
      e[static_cast<std::size_t>(j) * m + i] = sum;
    }
  }
  return e;
}

std::vector<double> SpdSurrogate::derivative(const std::vector<double>& x, int t) const {
  const int m = m_;
  const int cols = triangle_count(m);
  std::vector<double> values(cols), gradients(static_cast<std::size_t>(cols) * factors_.dim());
  factors_.evaluate_with_gradients(x, values.data(), gradients.data());
  std::vector<double> r(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<double> dr(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      int c = triangle_index(i, j, m);
      r[static_cast<std::size_t>(i) * m + j] = values[c];
      dr[static_cast<std::size_t>(i) * m + j] =
          gradients[static_cast<std::size_t>(c) * factors_.dim() + t];
    }
  }
  std::vector<double> out(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      double sum = 0.0;
      for (int k = 0; k < m; ++k) {
        sum += r[static_cast<std::size_t>(k) * m + i] * dr[static_cast<std::size_t>(k) * m + j] +
               dr[static_cast<std::size_t>(k) * m + i] * r[static_cast<std::size_t>(k) * m + j];
      }
      out[static_cast<std::size_t>(i) * m + j] = sum;
      out[static_cast<std::size_t>(j) * m + i] = sum;
    }
  }
  return out;
}

}  // namespace sgopt
