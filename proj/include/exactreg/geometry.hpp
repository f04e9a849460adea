#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string_view>
#include <vector>

#include "exactreg/types.hpp"

namespace exactreg::geometry {

enum class Family { Hypercube, Inscribed, Birkhoff, Generic };

std::string_view to_string(Family family);
Family family_from_string(std::string_view name);

// Vertex lists are only materialized up to this many vertices; larger
// families answer through the implicit vertex(k) oracle.
inline constexpr std::uint64_t kMaxMaterializedVertices = 1'000'000;

/// Feasible region {x : A x <= b} of a linear program, tagged with the
/// family it was built from.
///
/// Instances are immutable. Inscribed polytopes in more than four
/// dimensions carry only their vertex list (no H-form); constraint
/// accessors throw for them.
class Polytope {
 public:
  /// Builds a polytope from an explicit H-form. Listed vertices must be
  /// feasible within kGeomTol.
  static Polytope from_h_form(Family family, Mat A, Vec b,
                              std::optional<std::vector<Vec>> vertices = std::nullopt,
                              std::optional<int> birkhoff_side = std::nullopt);

  Family family() const { return family_; }
  int ambient_dim() const { return n_; }
  bool has_h_form() const { return has_h_form_; }
  int num_constraints() const;
  const Mat& constraint_matrix() const;
  const Vec& rhs() const;
  const std::optional<std::vector<Vec>>& vertex_list() const { return vertices_; }
  std::optional<int> birkhoff_side() const { return birkhoff_side_; }

  /// Number of vertices if it fits in 64 bits (hypercube n <= 63,
  /// Birkhoff d <= 20, or a listed vertex set).
  std::optional<std::uint64_t> vertex_count() const;

  /// k-th vertex: bit i of k set means coordinate i is -1 for the
  /// hypercube; k-th permutation in lexicographic order for Birkhoff.
  Vec vertex(std::uint64_t k) const;

 private:
  Polytope() = default;

  friend Polytope make_hypercube(int n);
  friend Polytope make_birkhoff(int d);
  friend Polytope make_inscribed(const std::vector<Vec>& points);

  Family family_ = Family::Generic;
  int n_ = 0;
  bool has_h_form_ = false;
  Mat A_;
  Vec b_;
  std::optional<std::vector<Vec>> vertices_;
  std::optional<int> birkhoff_side_;
};

/// Unit cube [-1, 1]^n. Rows are interleaved: row 2i is +e_i, row 2i+1 is -e_i.
Polytope make_hypercube(int n);

/// Doubly stochastic d x d matrices, flattened row-major into R^{d*d}.
/// Row sums, then column sums (each as a <=/>= pair), then X >= 0.
Polytope make_birkhoff(int d);

/// Convex hull of points lying on a common centered sphere.
Polytope make_inscribed(const std::vector<Vec>& points);

struct VertexInfo {
  Vec point;
  IndexSet active_set;
  bool nondegenerate = false;
};

/// Active set J(z) and nondegeneracy of a feasible point. Requires an H-form.
VertexInfo vertex_info(const Polytope& P, const Vec& z);

/// Polyhedral cone {y : S y >= 0} given by unit inward facet normals (rows of S).
class Cone {
 public:
  /// Rows must already have unit norm within kGeomTol.
  explicit Cone(Mat normals);

  /// Normalizes each row; zero rows are rejected.
  static Cone from_directions(const Mat& rows);

  const Mat& normals() const { return S_; }
  int ambient_dim() const { return static_cast<int>(S_.cols()); }
  int num_facets() const { return static_cast<int>(S_.rows()); }
  bool square_invertible() const { return square_invertible_; }

 private:
  Mat S_;
  bool square_invertible_ = false;
};

/// Normal cone at a nondegenerate vertex: the rows of S are the normalized
/// columns of A_J^{-1}.
Cone vertex_normal_cone(const Polytope& P, const VertexInfo& z);

/// Normal cone of the hypercube at sign vector z: the orthant diag(z).
Cone hypercube_vertex_cone(const Vec& z);

struct EdgeClass {
  int axis = 0;                  // edge direction e_axis
  std::uint64_t multiplicity = 0;  // number of edges parallel to e_axis
  double gamma_rel = 0.0;        // relative measure of each edge's normal cone
};

struct HypercubeEdges {
  std::uint64_t count = 0;
  std::vector<EdgeClass> classes;
};

HypercubeEdges hypercube_edges(int n);

/// Plain-text H-form: header `polytope <family> n=<n> m=<m>`, then one line
/// per constraint holding the row of A followed by b (17 significant digits).
void write_polytope(std::ostream& out, const Polytope& P);
Polytope read_polytope(std::istream& in);

}  // namespace exactreg::geometry
