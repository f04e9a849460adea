#include "exactreg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "exactreg/error.hpp"
#include "exactreg/numfmt.hpp"

namespace exactreg::geometry {

std::string_view to_string(Family family) {
  switch (family) {
    case Family::Hypercube: return "hypercube";
    case Family::Inscribed: return "inscribed";
    case Family::Birkhoff: return "birkhoff";
    case Family::Generic: return "generic";
  }
  return "generic";
}

Family family_from_string(std::string_view name) {
  if (name == "hypercube") return Family::Hypercube;
  if (name == "inscribed") return Family::Inscribed;
  if (name == "birkhoff") return Family::Birkhoff;
  if (name == "generic") return Family::Generic;
  throw Error(ErrorKind::InvalidInput, "unknown polytope family '" + std::string(name) + "'");
}

namespace {

void check_vertices_feasible(const Mat& A, const Vec& b, const std::vector<Vec>& vertices) {
  for (std::size_t k = 0; k < vertices.size(); ++k) {
    if (vertices[k].size() != A.cols()) {
      throw Error(ErrorKind::InvalidInput, "vertex " + std::to_string(k) + " has wrong dimension");
    }
    const Vec slack = b - A * vertices[k];
    if (slack.size() > 0 && slack.minCoeff() < -kGeomTol) {
      throw Error(ErrorKind::InvalidInput, "vertex " + std::to_string(k) + " violates A z <= b");
    }
  }
}

std::uint64_t factorial(int d) {
  std::uint64_t f = 1;
  for (int i = 2; i <= d; ++i) f *= static_cast<std::uint64_t>(i);
  return f;
}

// k-th permutation of {0..d-1} in lexicographic order (factorial number system).
std::vector<int> nth_permutation(int d, std::uint64_t k) {
  std::vector<int> pool(d);
  std::iota(pool.begin(), pool.end(), 0);
  std::vector<int> perm;
  perm.reserve(d);
  for (int i = d; i >= 1; --i) {
    const std::uint64_t block = factorial(i - 1);
    const auto pick = static_cast<std::size_t>(k / block);
    k %= block;
    perm.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return perm;
}

Vec hypercube_vertex(int n, std::uint64_t k) {
  Vec z(n);
  for (int i = 0; i < n; ++i) z(i) = ((k >> i) & 1U) ? -1.0 : 1.0;
  return z;
}

Vec birkhoff_vertex(int d, std::uint64_t k) {
  const std::vector<int> perm = nth_permutation(d, k);
  Vec x = Vec::Zero(static_cast<Index>(d) * d);
  for (int i = 0; i < d; ++i) x(i * d + perm[i]) = 1.0;
  return x;
}

}  // namespace

Polytope Polytope::from_h_form(Family family, Mat A, Vec b,
                               std::optional<std::vector<Vec>> vertices,
                               std::optional<int> birkhoff_side) {
  if (A.cols() < 1) throw Error(ErrorKind::InvalidDimension, "ambient dimension must be >= 1");
  if (A.rows() != b.size()) throw Error(ErrorKind::InvalidInput, "A and b row counts differ");
  if (!A.allFinite() || !b.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite H-form entry");
  if (family == Family::Birkhoff) {
    if (!birkhoff_side) {
      const auto d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(A.cols()))));
      if (static_cast<Index>(d) * d != A.cols()) {
        throw Error(ErrorKind::InvalidDimension, "birkhoff ambient dimension must be a square");
      }
      birkhoff_side = d;
    } else if (static_cast<Index>(*birkhoff_side) * *birkhoff_side != A.cols()) {
      throw Error(ErrorKind::InvalidDimension, "birkhoff side does not match ambient dimension");
    }
  }
  if (vertices) check_vertices_feasible(A, b, *vertices);

  Polytope P;
  P.family_ = family;
  P.n_ = static_cast<int>(A.cols());
  P.has_h_form_ = true;
  P.A_ = std::move(A);
  P.b_ = std::move(b);
  P.vertices_ = std::move(vertices);
  P.birkhoff_side_ = birkhoff_side;
  return P;
}

int Polytope::num_constraints() const {
  return has_h_form_ ? static_cast<int>(A_.rows()) : 0;
}

const Mat& Polytope::constraint_matrix() const {
  if (!has_h_form_) throw Error(ErrorKind::Precondition, "polytope has no H-form");
  return A_;
}

const Vec& Polytope::rhs() const {
  if (!has_h_form_) throw Error(ErrorKind::Precondition, "polytope has no H-form");
  return b_;
}

std::optional<std::uint64_t> Polytope::vertex_count() const {
  switch (family_) {
    case Family::Hypercube:
      if (n_ <= 63) return std::uint64_t{1} << n_;
      return std::nullopt;
    case Family::Birkhoff:
      if (*birkhoff_side_ <= 20) return factorial(*birkhoff_side_);
      return std::nullopt;
    default:
      if (vertices_) return vertices_->size();
      return std::nullopt;
  }
}

Vec Polytope::vertex(std::uint64_t k) const {
  const auto count = vertex_count();
  if (count && k >= *count) throw Error(ErrorKind::InvalidInput, "vertex index out of range");
  switch (family_) {
    case Family::Hypercube: return hypercube_vertex(n_, k);
    case Family::Birkhoff: return birkhoff_vertex(*birkhoff_side_, k);
    default:
      if (!vertices_) throw Error(ErrorKind::Precondition, "polytope has no vertex oracle");
      return (*vertices_)[k];
  }
}

Polytope make_hypercube(int n) {
  if (n < 1 || n > 64) throw Error(ErrorKind::InvalidDimension, "hypercube needs 1 <= n <= 64");
  Polytope P;
  P.family_ = Family::Hypercube;
  P.n_ = n;
  P.has_h_form_ = true;
  P.A_ = Mat::Zero(2 * n, n);
  for (int i = 0; i < n; ++i) {
    P.A_(2 * i, i) = 1.0;
    P.A_(2 * i + 1, i) = -1.0;
  }
  P.b_ = Vec::Ones(2 * n);
  if (n <= 63 && (std::uint64_t{1} << n) <= kMaxMaterializedVertices) {
    std::vector<Vec> vs;
    vs.reserve(std::size_t{1} << n);
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << n); ++k) vs.push_back(hypercube_vertex(n, k));
    P.vertices_ = std::move(vs);
  }
  return P;
}

Polytope make_birkhoff(int d) {
  if (d < 2 || d > 16) throw Error(ErrorKind::InvalidDimension, "birkhoff needs 2 <= d <= 16");
  const int n = d * d;
  const int m = 4 * d + n;
  Polytope P;
  P.family_ = Family::Birkhoff;
  P.n_ = n;
  P.birkhoff_side_ = d;
  P.has_h_form_ = true;
  P.A_ = Mat::Zero(m, n);
  P.b_ = Vec::Zero(m);
  int row = 0;
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      P.A_(row, i * d + j) = 1.0;
      P.A_(row + 1, i * d + j) = -1.0;
    }
    P.b_(row) = 1.0;
    P.b_(row + 1) = -1.0;
    row += 2;
  }
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i < d; ++i) {
      P.A_(row, i * d + j) = 1.0;
      P.A_(row + 1, i * d + j) = -1.0;
    }
    P.b_(row) = 1.0;
    P.b_(row + 1) = -1.0;
    row += 2;
  }
  for (int k = 0; k < n; ++k) P.A_(row + k, k) = -1.0;

  if (d <= 8) {
    const std::uint64_t count = factorial(d);
    std::vector<Vec> vs;
    vs.reserve(count);
    for (std::uint64_t k = 0; k < count; ++k) vs.push_back(birkhoff_vertex(d, k));
    P.vertices_ = std::move(vs);
  }
  return P;
}

namespace {

struct Facet {
  Vec normal;
  double offset;
};

// Brute-force facet enumeration: every n-subset of points spanning a
// hyperplane with all points on one side yields a facet.
std::vector<Facet> enumerate_facets(const std::vector<Vec>& pts, int n) {
  const auto K = static_cast<int>(pts.size());
  std::vector<Facet> facets;
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);

  auto already_known = [&](const Vec& a, double b) {
    return std::any_of(facets.begin(), facets.end(), [&](const Facet& f) {
      return (f.normal - a).norm() <= 1e-9 && std::abs(f.offset - b) <= 1e-9 * std::max(1.0, std::abs(b));
    });
  };

  while (true) {
    Vec a;
    if (n == 1) {
      a = Vec::Ones(1);
    } else {
      Mat D(n - 1, n);
      for (int r = 1; r < n; ++r) D.row(r - 1) = (pts[idx[r]] - pts[idx[0]]).transpose();
      Eigen::FullPivLU<Mat> lu(D);
      lu.setThreshold(1e-10);
      const Mat ker = lu.kernel();
      if (ker.cols() == 1) a = ker.col(0).normalized();
    }
    if (a.size() == n) {
      const double b = a.dot(pts[idx[0]]);
      double lo = 0.0, hi = 0.0;
      for (const Vec& p : pts) {
        const double s = a.dot(p) - b;
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
      const double scale = 1e-9 * std::max(1.0, std::abs(b));
      if (hi <= scale && lo < -scale) {
        if (!already_known(a, b)) facets.push_back({a, b});
      } else if (lo >= -scale && hi > scale) {
        if (!already_known(-a, -b)) facets.push_back({-a, -b});
      }
    }
    // next combination
    int i = n - 1;
    while (i >= 0 && idx[i] == K - n + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
  return facets;
}

}  // namespace

Polytope make_inscribed(const std::vector<Vec>& points) {
  if (points.size() < 2) throw Error(ErrorKind::InvalidInput, "need at least 2 points");
  const auto n = static_cast<int>(points.front().size());
  if (n < 1) throw Error(ErrorKind::InvalidDimension, "points must have dimension >= 1");
  for (const Vec& p : points) {
    if (p.size() != n) throw Error(ErrorKind::InvalidInput, "points have mixed dimensions");
    if (!p.allFinite()) throw Error(ErrorKind::InvalidInput, "non-finite point");
  }
  if (points.size() < static_cast<std::size_t>(n) + 1) {
    throw Error(ErrorKind::InvalidInput, "need at least n+1 points");
  }
  const double rho = points.front().norm();
  for (const Vec& p : points) {
    if (std::abs(p.norm() - rho) > 1e-9 * std::max(1.0, rho)) {
      throw Error(ErrorKind::NotInscribed, "points do not share a common norm");
    }
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if ((points[i] - points[j]).norm() <= 1e-9 * std::max(1.0, rho)) {
        throw Error(ErrorKind::InvalidInput, "duplicate points");
      }
    }
  }
  Mat diffs(n, static_cast<Index>(points.size()) - 1);
  for (std::size_t k = 1; k < points.size(); ++k) diffs.col(static_cast<Index>(k) - 1) = points[k] - points[0];
  Eigen::FullPivLU<Mat> lu(diffs);
  lu.setThreshold(1e-10);
  if (lu.rank() < n) throw Error(ErrorKind::InvalidInput, "points are not affinely spanning");

  Polytope P;
  P.family_ = Family::Inscribed;
  P.n_ = n;
  P.vertices_ = points;
  if (n <= 4) {
    const auto facets = enumerate_facets(points, n);
    P.A_.resize(static_cast<Index>(facets.size()), n);
    P.b_.resize(static_cast<Index>(facets.size()));
    for (std::size_t f = 0; f < facets.size(); ++f) {
      P.A_.row(static_cast<Index>(f)) = facets[f].normal.transpose();
      P.b_(static_cast<Index>(f)) = facets[f].offset;
    }
    P.has_h_form_ = true;
  }
  return P;
}

VertexInfo vertex_info(const Polytope& P, const Vec& z) {
  const Mat& A = P.constraint_matrix();
  const Vec& b = P.rhs();
  if (z.size() != P.ambient_dim()) throw Error(ErrorKind::InvalidInput, "point has wrong dimension");
  const Vec slack = b - A * z;
  VertexInfo info;
  info.point = z;
  for (Index i = 0; i < slack.size(); ++i) {
    if (slack(i) < -kGeomTol) throw Error(ErrorKind::InvalidInput, "point is infeasible");
    if (slack(i) <= kGeomTol) info.active_set.push_back(static_cast<int>(i));
  }
  if (static_cast<int>(info.active_set.size()) == P.ambient_dim()) {
    Mat AJ(P.ambient_dim(), P.ambient_dim());
    for (std::size_t r = 0; r < info.active_set.size(); ++r) AJ.row(static_cast<Index>(r)) = A.row(info.active_set[r]);
    Eigen::FullPivLU<Mat> lu(AJ);
    lu.setThreshold(1e-10);
    info.nondegenerate = lu.isInvertible();
  }
  return info;
}

Cone::Cone(Mat normals) : S_(std::move(normals)) {
  if (S_.cols() < 1) throw Error(ErrorKind::InvalidDimension, "cone needs ambient dimension >= 1");
  for (Index i = 0; i < S_.rows(); ++i) {
    if (std::abs(S_.row(i).norm() - 1.0) > kGeomTol) {
      throw Error(ErrorKind::InvalidInput, "cone normal " + std::to_string(i) + " is not unit length");
    }
  }
  if (S_.rows() == S_.cols()) {
    Eigen::FullPivLU<Mat> lu(S_);
    lu.setThreshold(1e-12);
    square_invertible_ = lu.isInvertible();
  }
}

Cone Cone::from_directions(const Mat& rows) {
  Mat S = rows;
  for (Index i = 0; i < S.rows(); ++i) {
    const double nrm = S.row(i).norm();
    if (!(nrm > 0.0)) throw Error(ErrorKind::InvalidInput, "zero cone direction");
    S.row(i) /= nrm;
  }
  return Cone(std::move(S));
}

Cone vertex_normal_cone(const Polytope& P, const VertexInfo& z) {
  if (!z.nondegenerate) throw Error(ErrorKind::Degeneracy, "normal cone needs a nondegenerate vertex");
  const Mat& A = P.constraint_matrix();
  const int n = P.ambient_dim();
  Mat AJ(n, n);
  for (int r = 0; r < n; ++r) AJ.row(r) = A.row(z.active_set[static_cast<std::size_t>(r)]);
  const Mat inv = AJ.fullPivLu().inverse();
  return Cone::from_directions(inv.transpose());
}

Cone hypercube_vertex_cone(const Vec& z) {
  for (Index i = 0; i < z.size(); ++i) {
    if (std::abs(z(i)) != 1.0) throw Error(ErrorKind::InvalidInput, "not a sign vector");
  }
  return Cone(Mat(z.asDiagonal()));
}

HypercubeEdges hypercube_edges(int n) {
  if (n < 1 || n > 20) throw Error(ErrorKind::InvalidDimension, "hypercube edges need 1 <= n <= 20");
  const std::uint64_t per_axis = std::uint64_t{1} << (n - 1);
  HypercubeEdges edges;
  edges.count = static_cast<std::uint64_t>(n) * per_axis;
  for (int i = 0; i < n; ++i) edges.classes.push_back({i, per_axis, std::ldexp(1.0, -(n - 1))});
  return edges;
}

void write_polytope(std::ostream& out, const Polytope& P) {
  const Mat& A = P.constraint_matrix();
  const Vec& b = P.rhs();
  out << "polytope " << to_string(P.family()) << " n=" << P.ambient_dim() << " m=" << A.rows() << '\n';
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) out << format_double(A(i, j)) << ' ';
    out << format_double(b(i)) << '\n';
  }
}

Polytope read_polytope(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidInput, "empty polytope stream");
  std::istringstream header(line);
  std::string tag, family, n_field, m_field;
  header >> tag >> family >> n_field >> m_field;
  if (tag != "polytope" || n_field.rfind("n=", 0) != 0 || m_field.rfind("m=", 0) != 0) {
    throw Error(ErrorKind::InvalidInput, "bad polytope header: '" + line + "'");
  }
  const int n = std::stoi(n_field.substr(2));
  const int m = std::stoi(m_field.substr(2));
  if (n < 1 || m < 0) throw Error(ErrorKind::InvalidDimension, "bad polytope dimensions");
  Mat A(m, n);
  Vec b(m);
  for (int i = 0; i < m; ++i) {
    if (!std::getline(in, line)) throw Error(ErrorKind::InvalidInput, "truncated polytope stream");
    std::istringstream row(line);
    std::string tok;
    for (int j = 0; j <= n; ++j) {
      if (!(row >> tok)) throw Error(ErrorKind::InvalidInput, "short row " + std::to_string(i));
      const double v = parse_double(tok);
      if (j < n) A(i, j) = v; else b(i) = v;
    }
    if (row >> tok) throw Error(ErrorKind::InvalidInput, "long row " + std::to_string(i));
  }
  return Polytope::from_h_form(family_from_string(family), std::move(A), std::move(b));
}

}  // namespace exactreg::geometry
