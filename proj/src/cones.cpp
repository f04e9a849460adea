#include "exactreg/cones.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "exactreg/error.hpp"

namespace exactreg::cones {

bool cone_contains(const Cone& C, const Vec& x, double tol) {
  if (x.size() != C.ambient_dim()) throw Error(ErrorKind::InvalidInput, "point has wrong dimension");
  const Mat& S = C.normals();
  for (Index i = 0; i < S.rows(); ++i) {
    if (S.row(i).dot(x) < -tol) return false;
  }
  return true;
}

Vec nnls(const Mat& E, const Vec& w, double tol) {
  const auto n = E.rows();
  const auto l = E.cols();
  if (w.size() != n) throw Error(ErrorKind::InvalidInput, "nnls dimension mismatch");
  Vec lambda = Vec::Zero(l);
  if (l == 0) return lambda;

  std::vector<bool> passive(static_cast<std::size_t>(l), false);
  const int cap = 10 * static_cast<int>(l);
  int iterations = 0;
  const double scale = std::max(1.0, w.norm()) * std::max(1.0, E.norm());

  auto solve_passive = [&](Vec& z) {
    std::vector<Index> cols;
    for (Index j = 0; j < l; ++j) {
      if (passive[static_cast<std::size_t>(j)]) cols.push_back(j);
    }
    z = Vec::Zero(l);
    if (cols.empty()) return;
    Mat Ep(n, static_cast<Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) Ep.col(static_cast<Index>(k)) = E.col(cols[k]);
    const Vec zp = Ep.colPivHouseholderQr().solve(w);
    for (std::size_t k = 0; k < cols.size(); ++k) z(cols[k]) = zp(static_cast<Index>(k));
  };

  while (true) {
    const Vec grad = E.transpose() * (w - E * lambda);
    Index t = -1;
    double best = tol * scale;
    for (Index j = 0; j < l; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && grad(j) > best) {
        best = grad(j);
        t = j;
      }
    }
    if (t < 0) return lambda;
    if (++iterations > cap) {
      std::ostringstream msg;
      msg << "nnls exceeded " << cap << " iterations";
      throw Error(ErrorKind::NumericalFailure, msg.str());
    }
    passive[static_cast<std::size_t>(t)] = true;

    Vec z;
    solve_passive(z);
    if (z(t) <= 0.0) {
      // The entering column cannot improve the residual in floating point.
      return lambda;
    }
    while (true) {
      bool feasible = true;
      for (Index j = 0; j < l; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      }
      if (feasible) break;
      double alpha = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < l; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          alpha = std::min(alpha, lambda(j) / (lambda(j) - z(j)));
        }
      }
      lambda += alpha * (z - lambda);
      for (Index j = 0; j < l; ++j) {
        if (passive[static_cast<std::size_t>(j)] && lambda(j) <= 1e-15 * scale) {
          passive[static_cast<std::size_t>(j)] = false;
          lambda(j) = 0.0;
        }
      }
      if (++iterations > cap) {
        std::ostringstream msg;
        msg << "nnls exceeded " << cap << " iterations";
        throw Error(ErrorKind::NumericalFailure, msg.str());
      }
      solve_passive(z);
    }
    lambda = z;
  }
}

namespace {

double dual_distance(const Mat& E, const Vec& w, Vec* projection) {
  Vec lambda;
  try {
    lambda = nnls(E, w);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NumericalFailure) throw;
    const Vec sv = singular_values(E);
    std::ostringstream msg;
    msg << "dual-cone projection failed; cond(S) = " << sv(0) / sv(sv.size() - 1);
    throw Error(ErrorKind::NumericalFailure, msg.str());
  }
  const Vec proj = E * lambda;
  if (projection) *projection = proj;
  return (proj - w).norm();
}

}  // namespace

DualProjection project_dual_cone(const Cone& C, const Vec& w) {
  if (w.size() != C.ambient_dim()) throw Error(ErrorKind::InvalidInput, "shift has wrong dimension");
  if (C.num_facets() > 128) throw Error(ErrorKind::InvalidDimension, "dual projection supports <= 128 normals");
  const Mat E = C.normals().transpose();
  DualProjection out;
  out.distance = dual_distance(E, w, &out.projection);
  out.distance_neg = dual_distance(E, -w, nullptr);
  return out;
}

Vec representer_vector(const Cone& C, const Vec& w) {
  if (!C.square_invertible()) throw Error(ErrorKind::Degeneracy, "representer needs square invertible S");
  if (w.size() != C.ambient_dim()) throw Error(ErrorKind::InvalidInput, "vector has wrong dimension");
  const Mat& S = C.normals();
  const Vec clipped = (S * w).cwiseMax(0.0);
  return S.fullPivLu().solve(clipped);
}

Vec singular_values(const Mat& A) {
  Mat U = A.rows() >= A.cols() ? A : Mat(A.transpose());
  const auto k = U.cols();
  constexpr double eps = 1e-15;
  for (int sweep = 0; sweep < 80; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p < k - 1; ++p) {
      for (Index q = p + 1; q < k; ++q) {
        const double alpha = U.col(p).squaredNorm();
        const double beta = U.col(q).squaredNorm();
        const double gamma = U.col(p).dot(U.col(q));
        if (std::abs(gamma) <= eps * std::sqrt(alpha * beta) || gamma == 0.0) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        const Vec up = U.col(p);
        U.col(p) = c * up - s * U.col(q);
        U.col(q) = s * up + c * U.col(q);
      }
    }
    if (!rotated) break;
  }
  Vec sv(k);
  for (Index j = 0; j < k; ++j) sv(j) = U.col(j).norm();
  std::sort(sv.data(), sv.data() + sv.size(), std::greater<>());
  return sv;
}

double cone_condition_number(const Cone& C) {
  if (C.num_facets() != C.ambient_dim()) throw Error(ErrorKind::Degeneracy, "condition number needs square S");
  if (C.ambient_dim() > 64) throw Error(ErrorKind::InvalidDimension, "condition number supports n <= 64");
  const Vec sv = singular_values(C.normals());
  const double smax = sv(0);
  const double smin = sv(sv.size() - 1);
  if (!(smin > 1e-14 * smax)) throw Error(ErrorKind::Degeneracy, "S is singular");
  return smax / smin;
}

double exact_threshold_closed_form(const Cone& C, const Vec& g, const Vec& v) {
  if (!C.square_invertible()) throw Error(ErrorKind::Degeneracy, "closed-form threshold needs square invertible S");
  if (!cone_contains(C, g)) throw Error(ErrorKind::Precondition, "cost is outside the cone");
  if (v.size() != C.ambient_dim()) throw Error(ErrorKind::InvalidInput, "shift has wrong dimension");
  const Vec Sg = C.normals() * g;
  const Vec Sv = C.normals() * v;
  double eps = kInf;
  for (Index i = 0; i < Sv.size(); ++i) {
    if (Sv(i) > 0.0) eps = std::min(eps, std::max(0.0, Sg(i)) / Sv(i));
  }
  return eps;
}

}  // namespace exactreg::cones
