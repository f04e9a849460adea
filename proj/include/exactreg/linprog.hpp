#pragma once

#include <vector>

#include "exactreg/geometry.hpp"
#include "exactreg/types.hpp"

namespace exactreg::linprog {

struct LPSolution {
  Vec point;
  double value = 0.0;  // cost . point
  IndexSet active_set;
  // Heuristic: every basic multiplier is strictly positive, so no
  // alternative optimum was seen at the returned basis.
  bool unique = false;
};

/// minimize cost . x subject to A x <= b, by a dense two-phase simplex on the
/// dual with Bland's rule. Returns a basic optimal solution.
LPSolution solve_simplex(const Mat& A, const Vec& b, const Vec& cost);
LPSolution solve_simplex(const geometry::Polytope& P, const Vec& cost);

/// Closed form on [-1,1]^n for cost -g: point sign(g), value -||g||_1.
/// Throws Error(Tie) if some g_j == 0.
LPSolution solve_hypercube(const Vec& g);

/// Minimum over an explicit vertex list.
LPSolution solve_vertex_scan(const std::vector<Vec>& vertices, const Vec& cost);

struct Assignment {
  std::vector<int> permutation;  // row i -> column permutation[i]
  double value = 0.0;            // sum_i C(i, permutation[i]), summed in row order
};

/// Minimum-cost perfect assignment (Hungarian method). Among optimal
/// permutations the lexicographically smallest is returned.
Assignment solve_assignment(const Mat& C);

/// True iff cost . z <= min_{x in P} cost . x + 1e-9. The hypercube uses the
/// closed-form optimum, Birkhoff an assignment re-solve, everything else the
/// simplex (or a vertex scan when no H-form exists).
bool is_vertex_optimal(const geometry::Polytope& P, const Vec& z, const Vec& cost);

/// Optimal value of min cost . x over P via the same oracle selection.
double optimal_value(const geometry::Polytope& P, const Vec& cost);

}  // namespace exactreg::linprog
