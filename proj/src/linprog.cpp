#include "exactreg/linprog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "exactreg/error.hpp"

namespace exactreg::linprog {

namespace {

constexpr double kPivotTol = 1e-11;
constexpr double kCostTol = 1e-10;
constexpr double kValueTol = 1e-9;

enum class Status { Optimal, Infeasible, Unbounded };

struct StandardResult {
  Status status = Status::Infeasible;
  Vec y;
  std::vector<int> basis;  // basic original columns (artificial-free after phase 1)
  int redundant_rows = 0;
  double value = 0.0;
};

// Dense tableau for  min c.y  s.t.  M y = r, y >= 0.
class Tableau {
 public:
  Tableau(const Mat& M, const Vec& r) : rows_(static_cast<int>(M.rows())), cols_(static_cast<int>(M.cols())) {
    T_ = Mat::Zero(rows_ + 1, cols_ + rows_ + 1);
    for (int i = 0; i < rows_; ++i) {
      const double sign = r(i) < 0 ? -1.0 : 1.0;
      T_.row(i).head(cols_) = sign * M.row(i);
      T_(i, cols_ + i) = 1.0;
      T_(i, rhs_col()) = sign * r(i);
    }
    basis_.resize(rows_);
    std::iota(basis_.begin(), basis_.end(), cols_);
    active_.assign(rows_, true);
  }

  // Phase 1: drive the artificials to zero. Returns false if infeasible.
  bool phase_one(double scale) {
    T_.row(rows_).setZero();
    for (int i = 0; i < rows_; ++i) {
      T_.row(rows_).head(cols_) -= T_.row(i).head(cols_);
      T_(rows_, rhs_col()) -= T_(i, rhs_col());
    }
    if (run(cols_ + rows_) == Status::Unbounded) {
      throw Error(ErrorKind::NumericalFailure, "phase one reported unbounded");
    }
    if (-T_(rows_, rhs_col()) > 1e-9 * scale) return false;

    // Pivot remaining zero-level artificials out; rows that cannot be pivoted are redundant.
    for (int i = 0; i < rows_; ++i) {
      if (basis_[i] < cols_) continue;
      int enter = -1;
      for (int j = 0; j < cols_; ++j) {
        if (std::abs(T_(i, j)) > 1e-9) {
          enter = j;
          break;
        }
      }
      if (enter >= 0) {
        pivot(i, enter);
      } else {
        active_[i] = false;
      }
    }
    return true;
  }

  Status phase_two(const Vec& c) {
    T_.row(rows_).setZero();
    T_.row(rows_).head(cols_) = c.transpose();
    for (int i = 0; i < rows_; ++i) {
      if (!active_[i]) continue;
      const double cb = c(basis_[i]);
      if (cb != 0.0) T_.row(rows_) -= cb * T_.row(i);
    }
    return run(cols_);
  }

  StandardResult result(Status status) const {
    StandardResult out;
    out.status = status;
    out.y = Vec::Zero(cols_);
    for (int i = 0; i < rows_; ++i) {
      if (!active_[i]) {
        ++out.redundant_rows;
        continue;
      }
      out.basis.push_back(basis_[i]);
      out.y(basis_[i]) = T_(i, rhs_col());
    }
    out.value = -T_(rows_, rhs_col());
    return out;
  }

 private:
  int rhs_col() const { return cols_ + rows_; }

  void pivot(int row, int col) {
    T_.row(row) /= T_(row, col);
    for (int i = 0; i <= rows_; ++i) {
      if (i == row) continue;
      const double f = T_(i, col);
      if (f != 0.0) T_.row(i) -= f * T_.row(row);
    }
    basis_[row] = col;
  }

  // Bland's rule over columns [0, limit).
  Status run(int limit) {
    const int max_iter = 50 * (rows_ + cols_ + 10);
    for (int iter = 0; iter < max_iter; ++iter) {
      int enter = -1;
      for (int j = 0; j < limit; ++j) {
        if (T_(rows_, j) < -kCostTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return Status::Optimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows_; ++i) {
        if (!active_[i] || T_(i, enter) <= kPivotTol) continue;
        const double ratio = T_(i, rhs_col()) / T_(i, enter);
        if (ratio < best - 1e-14 || (std::abs(ratio - best) <= 1e-14 && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) return Status::Unbounded;
      pivot(leave, enter);
    }
    throw Error(ErrorKind::NumericalFailure, "simplex iteration cap exceeded");
  }

  int rows_;
  int cols_;
  Mat T_;
  std::vector<int> basis_;
  std::vector<bool> active_;
};

StandardResult solve_standard(const Mat& M, const Vec& r, const Vec& c) {
  Tableau tab(M, r);
  if (!tab.phase_one(1.0 + r.lpNorm<Eigen::Infinity>())) {
    StandardResult out;
    out.status = Status::Infeasible;
    return out;
  }
  return tab.result(tab.phase_two(c));
}

// Farkas alternative: A x <= b is infeasible iff some y >= 0 has A^T y = 0, b.y < 0.
bool primal_infeasible(const Mat& A, const Vec& b) {
  const auto m = A.rows();
  const auto n = A.cols();
  Mat M(n + 1, m);
  M.topRows(n) = A.transpose();
  M.row(n).setOnes();
  Vec r = Vec::Zero(n + 1);
  r(n) = 1.0;
  const StandardResult res = solve_standard(M, r, b);
  return res.status == Status::Optimal && res.value < -kValueTol;
}

}  // namespace

LPSolution solve_simplex(const Mat& A, const Vec& b, const Vec& cost) {
  const auto m = A.rows();
  const auto n = A.cols();
  if (n < 1 || n > 64) throw Error(ErrorKind::InvalidDimension, "simplex supports 1 <= n <= 64");
  if (m > 512) throw Error(ErrorKind::InvalidDimension, "simplex supports m <= 512");
  if (b.size() != m || cost.size() != n) throw Error(ErrorKind::InvalidInput, "dimension mismatch");
  if (!cost.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite cost");

  // Dual:  min b.y  s.t.  A^T y = -cost,  y >= 0.  A dual basis B names n
  // constraints whose equalities pin down the primal vertex.
  const StandardResult dual = solve_standard(A.transpose(), -cost, b);
  if (dual.status == Status::Unbounded) throw Error(ErrorKind::Infeasible, "A x <= b is infeasible");
  if (dual.status == Status::Infeasible) {
    if (primal_infeasible(A, b)) throw Error(ErrorKind::Infeasible, "A x <= b is infeasible");
    throw Error(ErrorKind::Unbounded, "objective is unbounded below");
  }
  if (dual.redundant_rows > 0) {
    throw Error(ErrorKind::Unbounded, "constraint matrix has rank < n; feasible region is unbounded");
  }

  Mat AB(n, n);
  Vec bB(n);
  for (Index k = 0; k < n; ++k) {
    AB.row(k) = A.row(dual.basis[static_cast<std::size_t>(k)]);
    bB(k) = b(dual.basis[static_cast<std::size_t>(k)]);
  }
  LPSolution sol;
  sol.point = AB.fullPivLu().solve(bB);
  sol.value = cost.dot(sol.point);
  const Vec slack = b - A * sol.point;
  for (Index i = 0; i < m; ++i) {
    if (std::abs(slack(i)) <= kGeomTol) sol.active_set.push_back(static_cast<int>(i));
  }
  sol.unique = std::all_of(dual.basis.begin(), dual.basis.end(),
                           [&](int j) { return dual.y(j) > kValueTol; });
  return sol;
}

LPSolution solve_simplex(const geometry::Polytope& P, const Vec& cost) {
  return solve_simplex(P.constraint_matrix(), P.rhs(), cost);
}

LPSolution solve_hypercube(const Vec& g) {
  LPSolution sol;
  sol.point.resize(g.size());
  for (Index j = 0; j < g.size(); ++j) {
    if (g(j) == 0.0) throw Error(ErrorKind::Tie, "zero cost component " + std::to_string(j));
    sol.point(j) = g(j) > 0 ? 1.0 : -1.0;
    sol.active_set.push_back(static_cast<int>(g(j) > 0 ? 2 * j : 2 * j + 1));
  }
  sol.value = -g.lpNorm<1>();
  sol.unique = true;
  return sol;
}

LPSolution solve_vertex_scan(const std::vector<Vec>& vertices, const Vec& cost) {
  if (vertices.empty()) throw Error(ErrorKind::InvalidInput, "empty vertex list");
  double best = std::numeric_limits<double>::infinity();
  double second = std::numeric_limits<double>::infinity();
  std::size_t arg = 0;
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    const double v = cost.dot(vertices[k]);
    if (v < best) {
      second = best;
      best = v;
      arg = k;
    } else if (v < second) {
      second = v;
    }
  }
  LPSolution sol;
  sol.point = vertices[arg];
  sol.value = best;
  sol.unique = second > best + kValueTol;
  return sol;
}

namespace {

// Kuhn's augmenting-path matching restricted to allowed edges.
bool try_augment(int row, const std::vector<std::vector<int>>& adj, std::vector<int>& col_match,
                 std::vector<char>& seen) {
  for (int col : adj[static_cast<std::size_t>(row)]) {
    if (seen[static_cast<std::size_t>(col)]) continue;
    seen[static_cast<std::size_t>(col)] = 1;
    if (col_match[static_cast<std::size_t>(col)] < 0 ||
        try_augment(col_match[static_cast<std::size_t>(col)], adj, col_match, seen)) {
      col_match[static_cast<std::size_t>(col)] = row;
      return true;
    }
  }
  return false;
}

bool has_perfect_matching(const std::vector<std::vector<int>>& adj, const std::vector<int>& rows, int d) {
  std::vector<int> col_match(static_cast<std::size_t>(d), -1);
  for (int r : rows) {
    std::vector<char> seen(static_cast<std::size_t>(d), 0);
    if (!try_augment(r, adj, col_match, seen)) return false;
  }
  return true;
}

}  // namespace

Assignment solve_assignment(const Mat& C) {
  const auto d = static_cast<int>(C.rows());
  if (C.cols() != d || d < 1) throw Error(ErrorKind::InvalidInput, "cost matrix must be square and nonempty");
  if (d > 64) throw Error(ErrorKind::InvalidDimension, "assignment supports d <= 64");
  if (!C.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite cost entry");

  // Hungarian method with row/column potentials (1-indexed internals).
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(d + 1, 0.0), v(d + 1, 0.0), minv(d + 1);
  std::vector<int> p(d + 1, 0), way(d + 1, 0);
  std::vector<char> used(d + 1);
  for (int i = 1; i <= d; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= d; ++j) {
        if (used[j]) continue;
        const double cur = C(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= d; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  // Every optimal assignment lives on the tight edges of an optimal dual;
  // pick the lexicographically smallest perfect matching among them.
  const double tight_tol = 1e-9 * std::max(1.0, C.cwiseAbs().maxCoeff());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (C(i, j) - u[i + 1] - v[j + 1] <= tight_tol) adj[static_cast<std::size_t>(i)].push_back(j);
    }
  }
  Assignment out;
  out.permutation.assign(static_cast<std::size_t>(d), -1);
  std::vector<char> col_taken(static_cast<std::size_t>(d), 0);
  for (int i = 0; i < d; ++i) {
    bool placed = false;
    for (int j : adj[static_cast<std::size_t>(i)]) {
      if (col_taken[static_cast<std::size_t>(j)]) continue;
      std::vector<std::vector<int>> rest(static_cast<std::size_t>(d));
      std::vector<int> rows;
      for (int r = i + 1; r < d; ++r) {
        rows.push_back(r);
        for (int c : adj[static_cast<std::size_t>(r)]) {
          if (!col_taken[static_cast<std::size_t>(c)] && c != j) rest[static_cast<std::size_t>(r)].push_back(c);
        }
      }
      if (has_perfect_matching(rest, rows, d)) {
        out.permutation[static_cast<std::size_t>(i)] = j;
        col_taken[static_cast<std::size_t>(j)] = 1;
        placed = true;
        break;
      }
    }
    if (!placed) throw Error(ErrorKind::NumericalFailure, "tight graph lost its perfect matching");
  }
  for (int i = 0; i < d; ++i) out.value += C(i, out.permutation[static_cast<std::size_t>(i)]);
  return out;
}

double optimal_value(const geometry::Polytope& P, const Vec& cost) {
  using geometry::Family;
  if (cost.size() != P.ambient_dim()) throw Error(ErrorKind::InvalidInput, "cost has wrong dimension");
  switch (P.family()) {
    case Family::Hypercube:
      return -cost.lpNorm<1>();
    case Family::Birkhoff: {
      const int d = *P.birkhoff_side();
      const Mat C = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
          cost.data(), d, d);
      return solve_assignment(C).value;
    }
    default:
      if (P.has_h_form()) return solve_simplex(P, cost).value;
      if (P.vertex_list()) return solve_vertex_scan(*P.vertex_list(), cost).value;
      throw Error(ErrorKind::Precondition, "polytope has no solve oracle");
  }
}

bool is_vertex_optimal(const geometry::Polytope& P, const Vec& z, const Vec& cost) {
  if (z.size() != P.ambient_dim()) throw Error(ErrorKind::InvalidInput, "vertex has wrong dimension");
  return cost.dot(z) <= optimal_value(P, cost) + kValueTol;
}

}  // namespace exactreg::linprog
