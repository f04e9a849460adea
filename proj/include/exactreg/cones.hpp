#pragma once

#include "exactreg/geometry.hpp"
#include "exactreg/types.hpp"

namespace exactreg::cones {

using geometry::Cone;

/// Projection of w onto the dual cone V* = cone(rows of S), plus the two
/// distances appearing in the shifted-cone bounds.
struct DualProjection {
  Vec projection;            // proj_{V*} w
  double distance = 0.0;     // dist(w, V*)
  double distance_neg = 0.0; // dist(w, -V*)
};

/// S x >= -tol componentwise.
bool cone_contains(const Cone& C, const Vec& x, double tol = kGeomTol);

/// Nonnegative least squares  min_{lambda >= 0} || E lambda - w ||  by the
/// Lawson-Hanson active-set method. At most 10 * cols(E) active-set
/// iterations; throws Error(NumericalFailure) past the cap.
Vec nnls(const Mat& E, const Vec& w, double tol = 1e-10);

DualProjection project_dual_cone(const Cone& C, const Vec& w);

/// w~ = S^{-1} (S w)_+ for a cone with square invertible S.
Vec representer_vector(const Cone& C, const Vec& w);

/// Singular values of A in descending order (one-sided Jacobi).
Vec singular_values(const Mat& A);

/// sigma_1(S) / sigma_n(S). Throws Error(Degeneracy) for non-square or
/// singular S.
double cone_condition_number(const Cone& C);

/// Largest eps with S (g - eps v) >= 0, given S g >= 0. Returns +inf when no
/// facet is ever crossed.
double exact_threshold_closed_form(const Cone& C, const Vec& g, const Vec& v);

}  // namespace exactreg::cones
