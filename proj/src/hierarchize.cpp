#include "sgopt/hierarchize.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>
#include <map>
#include <sstream>
#include <unordered_map>

#include "sgopt/linalg.hpp"

namespace sgopt {

std::vector<std::size_t> sorted_order(const SparseGrid& grid) {
  std::vector<std::size_t> perm(grid.size());
  for (std::size_t k = 0; k < perm.size(); ++k) perm[k] = k;
  std::sort(perm.begin(), perm.end(), [&](std::size_t a, std::size_t b) {
    return level_sum_lex_less(grid[a], grid[b]);
  });
  return perm;
}

std::vector<double> assemble_matrix(const SparseGrid& grid, const TensorBasis& basis,
                                    const std::vector<std::size_t>& perm) {
  const std::size_t n = grid.size();
  if (n == 0) throw DomainError("assemble_matrix: empty grid");
  std::vector<double> a(n * n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> x = grid.coordinates(perm[r]);
    for (std::size_t c = 0; c < n; ++c) {
      const LevelIndex& q = grid[perm[c]];
      if (basis.supports(q, x)) {
        a[r * n + c] = basis.value(q, x);
      }
    }
  }
  return a;
}

std::vector<double> assemble_matrix(const SparseGrid& grid, const TensorBasis& basis) {
  return assemble_matrix(grid, basis, sorted_order(grid));
}

std::vector<double> dehierarchize(const SparseGrid& grid, const TensorBasis& basis,
                                  const std::vector<double>& surpluses) {
  const std::size_t n = grid.size();
  std::vector<double> values(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<double> x = grid.coordinates(r);
    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
      if (surpluses[c] != 0.0 && basis.supports(grid[c], x)) {
        sum += surpluses[c] * basis.value(grid[c], x);
      }
    }
    values[r] = sum;
  }
  return values;
}

SurplusVector hierarchize_direct(const SparseGrid& grid, const TensorBasis& basis,
                                 const SurplusVector& values) {
  const std::size_t n = grid.size();
  if (values.size() != n) throw DomainError("hierarchize_direct: value count mismatch");
  const int m = values.columns;
  std::vector<std::size_t> perm = sorted_order(grid);
  std::vector<double> a = assemble_matrix(grid, basis, perm);
  std::vector<double> rhs(n * m);
  for (std::size_t r = 0; r < n; ++r) {
    for (int j = 0; j < m; ++j) rhs[r * m + j] = values.at(perm[r], j);
  }
  std::vector<double> sol = solve_dense_multi(a, static_cast<int>(n), rhs, m);
  SurplusVector out;
  out.columns = m;
  out.data.assign(n * m, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    for (int j = 0; j < m; ++j) out.at(perm[r], j) = sol[r * m + j];
  }
  return out;
}

std::vector<Pole> poles(const SparseGrid& grid, int t) {
  if (t < 0 || t >= grid.dim()) throw DomainError("poles: dimension out of range");
  std::map<std::pair<std::vector<int>, std::vector<std::int64_t>>, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const LevelIndex& p = grid[k];
    std::vector<int> level = p.level;
    std::vector<std::int64_t> index = p.index;
    level.erase(level.begin() + t);
    index.erase(index.begin() + t);
    groups[{std::move(level), std::move(index)}].push_back(k);
  }
  std::vector<Pole> out;
  out.reserve(groups.size());
  for (auto& [key, members] : groups) {
    Pole pole;
    pole.dimension = t;
    pole.members = std::move(members);
    std::sort(pole.members.begin(), pole.members.end(), [&](std::size_t a, std::size_t b) {
      return point_coordinate_1d(grid[a].level[t], grid[a].index[t]) <
             point_coordinate_1d(grid[b].level[t], grid[b].index[t]);
    });
    out.push_back(std::move(pole));
  }
  return out;
}

std::vector<double> unidirectional_principle(const SparseGrid& grid,
                                             const std::vector<int>& order,
                                             const PoleOperator& op,
                                             const std::vector<double>& values) {
  if (values.size() != grid.size()) throw DomainError("unidirectional_principle: size mismatch");
  std::vector<int> dims = order;
  if (dims.empty()) {
    dims.resize(grid.dim());
    for (int t = 0; t < grid.dim(); ++t) dims[t] = t;
  }
  std::vector<double> y = values;
  for (int t : dims) {
    for (const Pole& pole : poles(grid, t)) {
      std::vector<int> levels(pole.members.size());
      std::vector<std::int64_t> indices(pole.members.size());
      std::vector<double> data(pole.members.size());
      for (std::size_t k = 0; k < pole.members.size(); ++k) {
        levels[k] = grid[pole.members[k]].level[t];
        indices[k] = grid[pole.members[k]].index[t];
        data[k] = y[pole.members[k]];
      }
      op(t, levels, indices, data);
      for (std::size_t k = 0; k < pole.members.size(); ++k) y[pole.members[k]] = data[k];
    }
  }
  return y;
}

namespace {

PoleOperator basis_pole_operator(const TensorBasis& basis, PoleOperation op) {
  return [&basis, op](int t, const std::vector<int>& levels,
                      const std::vector<std::int64_t>& indices, std::vector<double>& data) {
    const std::size_t n = levels.size();
    if (n == 1 && op == PoleOperation::Hierarchize) {
      double diag = basis.axis(t).value(levels[0], indices[0],
                                        point_coordinate_1d(levels[0], indices[0]));
      if (diag == 0.0) throw SolverError("unidirectional principle: singular 1-point pole");
      data[0] /= diag;
      return;
    }
    std::vector<double> a(n * n, 0.0);
    for (std::size_t r = 0; r < n; ++r) {
      double x = point_coordinate_1d(levels[r], indices[r]);
      for (std::size_t c = 0; c < n; ++c) {
        a[r * n + c] = basis.axis(t).value(levels[c], indices[c], x);
      }
    }
    if (op == PoleOperation::Hierarchize) {
      try {
        data = solve_dense(a, static_cast<int>(n), data);
      } catch (const SolverError& err) {
        std::ostringstream msg;
        msg << "unidirectional principle: singular pole system in dimension " << t << " ("
            << err.what() << ")";
        throw SolverError(msg.str(), err.condition_estimate());
      }
    } else {
      std::vector<double> product(n, 0.0);
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) product[r] += a[r * n + c] * data[c];
      }
      data = std::move(product);
    }
  };
}

}  // namespace

std::vector<double> unidirectional_principle(const SparseGrid& grid, const TensorBasis& basis,
                                             const std::vector<double>& values,
                                             const std::vector<int>& order, PoleOperation op,
                                             bool check_chains) {
  if (check_chains) {
    auto violation = find_chain_violation(grid, basis, order);
    if (violation) {
      throw DomainError("unidirectional principle: grid violates the chain condition");
    }
  }
  return unidirectional_principle(grid, order, basis_pole_operator(basis, op), values);
}

bool admits_hierarchical_splitting(const BasisSpec& spec) {
  switch (spec.family) {
    case BasisFamily::NotAKnot:
    case BasisFamily::CcNotAKnot:
    case BasisFamily::FundamentalNak:
    case BasisFamily::WfsNak:
      return true;
    case BasisFamily::Uniform:
    case BasisFamily::ClenshawCurtis:
    case BasisFamily::Fundamental:
    case BasisFamily::WeaklyFundamental:
      return spec.degree == 1;
    default:
      return false;
  }
}

namespace {

std::vector<std::vector<int>> levels_with_sum(int d, int sum) {
  std::vector<std::vector<int>> out;
  if (sum < 0) return out;
  std::vector<int> level(d, 0);
  std::function<void(int, int)> rec = [&](int t, int rest) {
    if (t == d - 1) {
      level[t] = rest;
      out.push_back(level);
      return;
    }
    for (int l = 0; l <= rest; ++l) {
      level[t] = l;
      rec(t + 1, rest - l);
    }
  };
  rec(0, sum);
  return out;
}

std::vector<int> identity_order(int d) {
  std::vector<int> order(d);
  for (int t = 0; t < d; ++t) order[t] = t;
  return order;
}

}  // namespace

SurplusVector hierarchize_combination(int n, int d, const TensorBasis& basis,
                                      const SurplusVector& values) {
  for (int t = 0; t < d; ++t) {
    if (!admits_hierarchical_splitting(basis.spec(t))) {
      throw DomainError(
          "hierarchize_combination: the combination technique needs a basis with the "
          "hierarchical splitting on [0, 1] (hat functions or a not-a-knot family); got " +
          family_name(basis.spec(t).family) + " of degree " +
          std::to_string(basis.spec(t).degree));
    }
  }
  SparseGrid grid = regular_grid(n, d);
  if (values.size() != grid.size() || values.columns != 1) {
    throw DomainError("hierarchize_combination: value count mismatch");
  }
  std::vector<double> y(grid.size(), 0.0);
  for (int q = 0; q <= std::min(d - 1, n); ++q) {
    double coeff = ((q % 2 == 0) ? 1.0 : -1.0) * static_cast<double>(binomial(d - 1, q));
    for (const auto& level : levels_with_sum(d, n - q)) {
      SparseGrid fg = full_grid(level);
      std::vector<double> u(fg.size());
      std::vector<std::size_t> where(fg.size());
      for (std::size_t k = 0; k < fg.size(); ++k) {
        auto pos = grid.find(fg[k]);
        where[k] = *pos;
        u[k] = values.data[*pos];
      }
      std::vector<double> alpha =
          unidirectional_principle(fg, basis, u, identity_order(d), PoleOperation::Hierarchize);
      for (std::size_t k = 0; k < fg.size(); ++k) y[where[k]] += coeff * alpha[k];
    }
  }
  return SurplusVector(std::move(y));
}

SurplusVector hierarchize_residual(const LevelSet& levels, const TensorBasis& basis,
                                   const SurplusVector& values) {
  if (!levels.is_downward_closed()) {
    throw DomainError("hierarchize_residual: level set is not downward closed");
  }
  const int d = basis.dim();
  SparseGrid grid = grid_from_level_set(levels, d);
  if (values.size() != grid.size() || values.columns != 1) {
    throw DomainError("hierarchize_residual: value count mismatch");
  }

  auto actives = levels.maximal_levels();
  std::sort(actives.begin(), actives.end(), [](const auto& a, const auto& b) {
    int sa = 0, sb = 0;
    for (int v : a) sa += v;
    for (int v : b) sb += v;
    if (sa != sb) return sa > sb;
    return a < b;
  });

  std::vector<double> residual = values.data;
  std::vector<double> y(grid.size(), 0.0);
  for (const auto& active : actives) {
    SparseGrid fg = full_grid(active);
    std::vector<double> u(fg.size());
    std::vector<std::size_t> where(fg.size());
    for (std::size_t k = 0; k < fg.size(); ++k) {
      auto pos = grid.find(fg[k]);
      where[k] = *pos;
      u[k] = residual[*pos];
    }
    std::vector<double> alpha =
        unidirectional_principle(fg, basis, u, identity_order(d), PoleOperation::Hierarchize);
    for (std::size_t k = 0; k < fg.size(); ++k) y[where[k]] += alpha[k];
    // Subtract the interpolated residual at every grid point.
    for (std::size_t r = 0; r < grid.size(); ++r) {
      std::vector<double> x = grid.coordinates(r);
      double sum = 0.0;
      for (std::size_t k = 0; k < fg.size(); ++k) {
        if (alpha[k] != 0.0 && basis.supports(fg[k], x)) {
          sum += alpha[k] * basis.value(fg[k], x);
        }
      }
      residual[r] -= sum;
    }
  }
  return SurplusVector(std::move(y));
}

SurplusVector hierarchize_bfs(const SparseGrid& grid, const TensorBasis& basis,
                              const SurplusVector& values) {
  if (values.size() != grid.size() || values.columns != 1) {
    throw DomainError("hierarchize_bfs: value count mismatch");
  }
  const int d = grid.dim();
  std::vector<double> y = values.data;

  std::vector<bool> processed(grid.size(), false);
  std::deque<std::size_t> queue;
  // Initial set: the 2^d corners.
  LevelIndex corner;
  corner.level.assign(d, 0);
  corner.index.assign(d, 0);
  for (std::int64_t mask = 0; mask < ipow2(d); ++mask) {
    for (int t = 0; t < d; ++t) corner.index[t] = (mask >> t) & 1;
    auto pos = grid.find(corner);
    if (!pos) throw DomainError("hierarchize_bfs: grid must contain all corners");
    queue.push_back(*pos);
    processed[*pos] = true;
  }

  while (!queue.empty()) {
    std::size_t cur = queue.front();
    queue.pop_front();
    const LevelIndex& pc = grid[cur];
    for (std::size_t k = 0; k < grid.size(); ++k) {
      if (k == cur) continue;
      const LevelIndex& pk = grid[k];
      bool affected = true;
      for (int t = 0; t < d; ++t) {
        if (!(pc.level[t] < pk.level[t] ||
              (pc.level[t] == pk.level[t] && pc.index[t] == pk.index[t]))) {
          affected = false;
          break;
        }
      }
      if (affected) {
        std::vector<double> x = grid.coordinates(k);
        if (basis.supports(pc, x)) y[k] -= y[cur] * basis.value(pc, x);
      }
    }
    for (const LevelIndex& child : direct_children(pc)) {
      auto pos = grid.find(child);
      if (pos && !processed[*pos]) {
        queue.push_back(*pos);
        processed[*pos] = true;
      }
    }
  }

  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!processed[k]) {
      std::ostringstream msg;
      msg << "hierarchize_bfs: grid point not reachable from the corners: levels (";
      for (int t = 0; t < d; ++t) msg << grid[k].level[t] << (t + 1 < d ? "," : ")");
      msg << " indices (";
      for (int t = 0; t < d; ++t) msg << grid[k].index[t] << (t + 1 < d ? "," : ")");
      throw DomainError(msg.str());
    }
  }
  return SurplusVector(std::move(y));
}

IterativeRefinementResult hierarchize_iterative_refinement(const SparseGrid& grid,
                                                           const TensorBasis& basis,
                                                           const SurplusVector& values,
                                                           double tol, int max_iter) {
  if (values.size() != grid.size() || values.columns != 1) {
    throw DomainError("hierarchize_iterative_refinement: value count mismatch");
  }
  auto norm = [](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  };
  const std::vector<int> order = identity_order(grid.dim());
  std::vector<double> y(grid.size(), 0.0);
  std::vector<double> r = values.data;
  const double limit = 1e6 * std::max(norm(r), 1.0);
  for (int iter = 0; iter <= max_iter; ++iter) {
    double rn = norm(r);
    if (!std::isfinite(rn) || rn > limit) {
      throw SolverError("iterative refinement diverged after " + std::to_string(iter) +
                        " iterations (residual " + std::to_string(rn) + ")");
    }
    if (rn <= tol) {
      IterativeRefinementResult out;
      out.surpluses = SurplusVector(std::move(y));
      out.iterations = iter;
      return out;
    }
    if (iter == max_iter) break;
    std::vector<double> z =
        unidirectional_principle(grid, basis, r, order, PoleOperation::Hierarchize);
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += z[k];
    std::vector<double> az = dehierarchize(grid, basis, z);
    for (std::size_t k = 0; k < r.size(); ++k) r[k] -= az[k];
  }
  throw SolverError("iterative refinement did not reach tolerance " + std::to_string(tol) +
                    " within " + std::to_string(max_iter) + " iterations");
}

namespace {

// Basis values below this threshold count as structural zeros when deciding
// which chains the unidirectional principle needs.
constexpr double kChainValueEps = 1e-10;

std::vector<int> reversed_order(const std::vector<int>& order, int d) {
  std::vector<int> rev = order;
  if (rev.empty()) {
    rev.resize(d);
    for (int t = 0; t < d; ++t) rev[t] = t;
  }
  std::reverse(rev.begin(), rev.end());
  return rev;
}

}  // namespace

SparseGrid chain_closure(const SparseGrid& grid, const TensorBasis& basis,
                         const std::vector<int>& order) {
  const int d = grid.dim();
  std::vector<int> rev = reversed_order(order, d);

  SparseGrid closed(d);
  for (std::size_t k = 0; k < grid.size(); ++k) closed.insert(grid[k]);

  bool added = true;
  while (added) {
    added = false;
    const std::size_t count = closed.size();
    for (std::size_t c1 = 0; c1 < count; ++c1) {
      const LevelIndex& from = closed[c1];
      for (std::size_t c2 = 0; c2 < count; ++c2) {
        if (c1 == c2) continue;
        std::vector<double> x = closed.coordinates(c2);
        if (!basis.supports(from, x)) continue;
        if (std::abs(basis.value(from, x)) <= kChainValueEps) continue;
        // Insert the chain points from `from` to `to` w.r.t. the reversed order.
        LevelIndex cur = from;
        const LevelIndex& to = closed[c2];
        for (int j = 0; j < d; ++j) {
          cur.level[rev[j]] = to.level[rev[j]];
          cur.index[rev[j]] = to.index[rev[j]];
          if (!closed.contains(cur)) {
            closed.insert(cur);
            added = true;
          }
        }
      }
    }
  }
  return closed;
}

std::optional<std::pair<LevelIndex, LevelIndex>> find_chain_violation(
    const SparseGrid& grid, const TensorBasis& basis, const std::vector<int>& order) {
  const int d = grid.dim();
  std::vector<int> rev = reversed_order(order, d);
  for (std::size_t c1 = 0; c1 < grid.size(); ++c1) {
    for (std::size_t c2 = 0; c2 < grid.size(); ++c2) {
      if (c1 == c2) continue;
      std::vector<double> x = grid.coordinates(c2);
      if (!basis.supports(grid[c1], x)) continue;
      if (std::abs(basis.value(grid[c1], x)) <= kChainValueEps) continue;
      LevelIndex cur = grid[c1];
      for (int j = 0; j < d; ++j) {
        cur.level[rev[j]] = grid[c2].level[rev[j]];
        cur.index[rev[j]] = grid[c2].index[rev[j]];
        if (!grid.contains(cur)) return std::make_pair(grid[c1], grid[c2]);
      }
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Hermite hierarchization
// ---------------------------------------------------------------------------

namespace {

// Two-point Hermite interpolation: given derivatives 0..m-1 at a and b,
// builds the unique polynomial of degree <= 2m-1 and returns its derivatives
// 0..m-1 at x.
class HermiteSegment {
 public:
  HermiteSegment(double a, const double* fa, double b, const double* fb, int m) {
    // Newton form with confluent nodes (a m times, then b m times).
    const int n = 2 * m;
    nodes_.resize(n);
    std::vector<double> table(n);
    for (int j = 0; j < m; ++j) {
      nodes_[j] = a;
      nodes_[m + j] = b;
    }
    // Divided differences with repeated nodes: table[i] holds f[z_i..z_{i+k}].
    std::vector<std::vector<double>> dd(n);
    double factorial = 1.0;
    for (int k = 0; k < n; ++k) dd[k].resize(n - k);
    for (int i = 0; i < n; ++i) dd[0][i] = (i < m) ? fa[0] : fb[0];
    for (int k = 1; k < n; ++k) {
      factorial *= k;
      for (int i = 0; i + k < n; ++i) {
        if (nodes_[i] == nodes_[i + k]) {
          dd[k][i] = ((i < m) ? fa[k] : fb[k]) / factorial;
        } else {
          dd[k][i] = (dd[k - 1][i + 1] - dd[k - 1][i]) / (nodes_[i + k] - nodes_[i]);
        }
      }
    }
    // Convert Newton form to monomials in (x - a).
    coeff_.assign(n, 0.0);
    std::vector<double> basis_poly = {1.0};  // product of (x - z_j), in (x - a) powers
    for (int k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < basis_poly.size(); ++j) coeff_[j] += dd[k][0] * basis_poly[j];
      if (k + 1 < n) {
        // multiply basis_poly by ((x - a) - (z_k - a))
        std::vector<double> next(basis_poly.size() + 1, 0.0);
        double shift = nodes_[k] - a;
        for (std::size_t j = 0; j < basis_poly.size(); ++j) {
          next[j] -= shift * basis_poly[j];
          next[j + 1] += basis_poly[j];
        }
        basis_poly = std::move(next);
      }
    }
    origin_ = a;
  }

  double derivative(int q, double x) const {
    double u = x - origin_;
    double r = 0.0;
    for (int k = static_cast<int>(coeff_.size()) - 1; k >= q; --k) {
      double factor = 1.0;
      for (int s = 0; s < q; ++s) factor *= (k - s);
      r = r * u + factor * coeff_[k];
    }
    return r;
  }

 private:
  double origin_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> coeff_;
};

}  // namespace

void hermite_pole_solve(const Basis1d& basis, const std::vector<int>& levels,
                        const std::vector<std::int64_t>& indices, std::vector<double>& data) {
  const int p = basis.degree();
  const int m = (p + 1) / 2;  // tracked derivative orders 0..m-1
  const std::size_t n = levels.size();

  int max_level = 0;
  for (int l : levels) max_level = std::max(max_level, l);

  // Positions at the finest dyadic resolution.
  auto position = [&](std::size_t k) { return indices[k] << (max_level - levels[k]); };

  std::unordered_map<std::int64_t, std::vector<double>> state;  // pos -> derivatives of f_l
  std::vector<std::vector<std::size_t>> by_level(max_level + 1);
  for (std::size_t k = 0; k < n; ++k) by_level[levels[k]].push_back(k);
  for (auto& level_pts : by_level) {
    std::sort(level_pts.begin(), level_pts.end(),
              [&](std::size_t a, std::size_t b) { return position(a) < position(b); });
  }

  std::vector<double> y(n, 0.0);

  // Level 0: the linear interpolant of the two boundary values.
  if (by_level[0].size() != 2) {
    throw DomainError("hermite hierarchization: pole must contain both level-0 endpoints");
  }
  {
    std::size_t k0 = by_level[0][0], k1 = by_level[0][1];
    double f0 = data[k0], f1 = data[k1];
    y[k0] = f0;
    y[k1] = f1;
    std::vector<double> s0(m, 0.0), s1(m, 0.0);
    s0[0] = f0;
    s1[0] = f1;
    if (m > 1) {
      s0[1] = f1 - f0;
      s1[1] = f1 - f0;
    }
    state[position(k0)] = std::move(s0);
    state[position(k1)] = std::move(s1);
  }

  std::vector<std::size_t> settled = by_level[0];  // all points of level <= current
  for (int level = 1; level <= max_level; ++level) {
    const auto& pts = by_level[level];
    if (pts.empty()) continue;
    const std::int64_t step = std::int64_t{1} << (max_level - level);

    // Residuals against the Hermite prediction of the current interpolant.
    std::vector<double> resid(pts.size());
    std::vector<std::vector<double>> predicted(pts.size());
    for (std::size_t r = 0; r < pts.size(); ++r) {
      std::int64_t pos = position(pts[r]);
      auto left = state.find(pos - step);
      auto right = state.find(pos + step);
      if (left == state.end() || right == state.end()) {
        throw DomainError("hermite hierarchization: missing parent in adaptive pole");
      }
      double xl = std::ldexp(static_cast<double>(pos - step), -max_level);
      double xr = std::ldexp(static_cast<double>(pos + step), -max_level);
      double x = std::ldexp(static_cast<double>(pos), -max_level);
      HermiteSegment segment(xl, left->second.data(), xr, right->second.data(), m);
      std::vector<double> pred(m);
      for (int q = 0; q < m; ++q) pred[q] = segment.derivative(q, x);
      resid[r] = data[pts[r]] - pred[0];
      predicted[r] = std::move(pred);
    }

    std::vector<std::int64_t> pt_positions(pts.size());
    for (std::size_t c = 0; c < pts.size(); ++c) pt_positions[c] = position(pts[c]);

    // Banded collocation system of the level-`level` basis functions.
    BandMatrix mat(static_cast<int>(pts.size()), p, p);
    for (std::size_t r = 0; r < pts.size(); ++r) {
      double x = std::ldexp(static_cast<double>(pt_positions[r]), -max_level);
      std::size_t c_lo = (r > static_cast<std::size_t>(p)) ? r - p : 0;
      std::size_t c_hi = std::min(pts.size() - 1, r + p);
      for (std::size_t c = c_lo; c <= c_hi; ++c) {
        mat.at(static_cast<int>(r), static_cast<int>(c)) = basis.value(level, indices[pts[c]], x);
      }
    }
    std::vector<double> level_surpluses = mat.solve(std::move(resid));
    for (std::size_t c = 0; c < pts.size(); ++c) y[pts[c]] = level_surpluses[c];

    // Update tracked derivatives at the new points and all settled points;
    // only level functions within p index steps contribute.
    auto add_level_contribution = [&](std::int64_t pos, std::vector<double>& s) {
      double x = std::ldexp(static_cast<double>(pos), -max_level);
      std::int64_t reach = static_cast<std::int64_t>(p) * step;
      auto first = std::lower_bound(pt_positions.begin(), pt_positions.end(), pos - reach + 1);
      for (std::size_t c = static_cast<std::size_t>(first - pt_positions.begin());
           c < pts.size() && pt_positions[c] < pos + reach; ++c) {
        for (int q = 0; q < m; ++q) {
          s[q] += level_surpluses[c] * basis.derivative(level, indices[pts[c]], q, x);
        }
      }
    };
    for (std::size_t r = 0; r < pts.size(); ++r) {
      std::vector<double> s = std::move(predicted[r]);
      add_level_contribution(position(pts[r]), s);
      state[position(pts[r])] = std::move(s);
    }
    for (std::size_t k : settled) {
      add_level_contribution(position(k), state[position(k)]);
    }
    settled.insert(settled.end(), pts.begin(), pts.end());
  }

  data = std::move(y);
}

SurplusVector hierarchize_hermite(const SparseGrid& grid, const TensorBasis& basis,
                                  const SurplusVector& values, const std::vector<int>& order) {
  if (values.size() != grid.size() || values.columns != 1) {
    throw DomainError("hierarchize_hermite: value count mismatch");
  }
  PoleOperator op = [&basis](int t, const std::vector<int>& levels,
                             const std::vector<std::int64_t>& indices, std::vector<double>& data) {
    hermite_pole_solve(basis.axis(t), levels, indices, data);
  };
  return SurplusVector(unidirectional_principle(grid, order, op, values.data));
}

}  // namespace sgopt
