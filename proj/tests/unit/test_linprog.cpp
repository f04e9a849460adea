#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "doctest.h"

#include "exactreg/error.hpp"
#include "exactreg/geometry.hpp"
#include "exactreg/linprog.hpp"

using namespace exactreg;
using namespace exactreg::linprog;
using geometry::make_birkhoff;
using geometry::make_hypercube;
using geometry::make_inscribed;

namespace {

Vec gaussian(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = N(rng);
  return v;
}

std::vector<Vec> sphere_points(int n, int k, std::mt19937_64& rng) {
  std::vector<Vec> pts;
  for (int i = 0; i < k; ++i) pts.push_back(gaussian(n, rng).normalized());
  return pts;
}

double brute_vertex_min(const std::vector<Vec>& V, const Vec& c) {
  double best = INFINITY;
  for (const auto& v : V) best = std::min(best, c.dot(v));
  return best;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an exception");
  return ErrorKind::Contract;
}

}  // namespace

TEST_SUITE("linprog") {
  TEST_CASE("square, maximize x1 + x2") {
    const auto s = solve_simplex(make_hypercube(2), (Vec(2) << -1, -1).finished());
    CHECK(s.point.isApprox((Vec(2) << 1, 1).finished()));
    CHECK(s.value == doctest::Approx(-2.0));
    CHECK(s.unique);
  }

  TEST_CASE("square, edge of optima is not unique") {
    const auto s = solve_simplex(make_hypercube(2), (Vec(2) << -1, 0).finished());
    CHECK(s.value == doctest::Approx(-1.0));
    CHECK_FALSE(s.unique);
  }

  TEST_CASE("simplex matches the vertex scan on random polygons and polytopes") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 40; ++trial) {
      const int n = 2 + trial % 3;
      const auto P = make_inscribed(sphere_points(n, n + 4 + trial % 5, rng));
      for (int k = 0; k < 5; ++k) {
        const Vec c = gaussian(n, rng);
        const auto s = solve_simplex(P, c);
        CHECK(std::abs(s.value - brute_vertex_min(*P.vertex_list(), c)) <= 1e-8);
        CHECK(std::abs(s.value - c.dot(s.point)) <= 1e-9);
        CHECK(((P.constraint_matrix() * s.point - P.rhs()).array() <= 1e-9).all());
        CHECK(is_vertex_optimal(P, s.point, c));
        CHECK(std::abs(solve_vertex_scan(*P.vertex_list(), c).value - s.value) <= 1e-8);
      }
    }
  }

  TEST_CASE("simplex matches the vertex scan on hypercubes") {
    std::mt19937_64 rng(2);
    for (int n = 1; n <= 8; ++n) {
      const auto P = make_hypercube(n);
      const Vec c = gaussian(n, rng);
      CHECK(std::abs(solve_simplex(P, c).value - brute_vertex_min(*P.vertex_list(), c)) <= 1e-8);
    }
  }

  TEST_CASE("hypercube closed form") {
    const auto s = solve_hypercube((Vec(2) << 1.5, -0.2).finished());
    CHECK(s.point == (Vec(2) << 1, -1).finished());
    CHECK(s.value == doctest::Approx(-1.7));
    const auto t = solve_hypercube((Vec(1) << -3.0).finished());
    CHECK(t.point(0) == -1.0);
    CHECK(t.value == -3.0);
    CHECK(kind_of([] { solve_hypercube((Vec(2) << 1.0, 0.0).finished()); }) == ErrorKind::Tie);
  }

  TEST_CASE("hypercube closed form agrees with the simplex for n=6") {
    std::mt19937_64 rng(3);
    const auto P = make_hypercube(6);
    for (int k = 0; k < 20; ++k) {
      const Vec g = gaussian(6, rng);
      const auto a = solve_hypercube(g);
      const auto b = solve_simplex(P, -g);
      CHECK(a.point.isApprox(b.point));
      CHECK(std::abs(a.value - b.value) <= 1e-9);
    }
  }

  TEST_CASE("assignment examples") {
    Mat C(2, 2);
    C << 1, 2, 3, 1;
    auto a = solve_assignment(C);
    CHECK(a.permutation == std::vector<int>{0, 1});
    CHECK(a.value == 2.0);
    Mat D(3, 3);
    D << 4, 1, 3, 2, 0, 5, 3, 2, 2;
    a = solve_assignment(D);
    CHECK(a.permutation == std::vector<int>{1, 0, 2});
    CHECK(a.value == 5.0);
    a = solve_assignment(Mat::Zero(4, 4));
    CHECK(a.permutation == std::vector<int>{0, 1, 2, 3});
    CHECK(a.value == 0.0);
  }

  TEST_CASE("assignment ties resolve to the lexicographically smallest optimum") {
    Mat C(3, 3);
    C << 1, 0, 0, 0, 1, 0, 0, 0, 1;  // every permutation with no fixed point costs 0
    const auto a = solve_assignment(C);
    CHECK(a.permutation == std::vector<int>{1, 2, 0});
    CHECK(a.value == 0.0);
  }

  TEST_CASE("assignment rejects non-finite entries") {
    Mat C = Mat::Zero(2, 2);
    C(0, 1) = NAN;
    CHECK(kind_of([&] { solve_assignment(C); }) == ErrorKind::InvalidInput);
    C(0, 1) = INFINITY;
    CHECK(kind_of([&] { solve_assignment(C); }) == ErrorKind::InvalidInput);
  }

  TEST_CASE("assignment equals the permutation scan exactly for d <= 7") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> N;
    for (int d = 1; d <= 7; ++d) {
      for (int rep = 0; rep < 4; ++rep) {
        Mat C(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) C(i, j) = N(rng);
        std::vector<int> perm(static_cast<std::size_t>(d));
        std::iota(perm.begin(), perm.end(), 0);
        double best = INFINITY;
        std::vector<int> arg;
        do {
          double v = 0.0;
          for (int i = 0; i < d; ++i) v += C(i, perm[static_cast<std::size_t>(i)]);
          if (v < best) {
            best = v;
            arg = perm;
          }
        } while (std::next_permutation(perm.begin(), perm.end()));
        const auto a = solve_assignment(C);
        CHECK(a.value == best);
        CHECK(a.permutation == arg);
      }
    }
  }

  TEST_CASE("assignment agrees with the simplex on the Birkhoff H-form") {
    std::mt19937_64 rng(5);
    for (int d = 2; d <= 4; ++d) {
      const auto P = make_birkhoff(d);
      for (int rep = 0; rep < 5; ++rep) {
        const Vec g = gaussian(d * d, rng);
        Mat C(d, d);
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) C(i, j) = -g(i * d + j);
        const double via_lp = solve_simplex(P, -g).value;
        CHECK(std::abs(solve_assignment(C).value - via_lp) <= 1e-8);
        CHECK(std::abs(optimal_value(P, -g) - via_lp) <= 1e-8);
      }
    }
  }

  TEST_CASE("optimality test on the hypercube follows the orthant rule") {
    const auto P = make_hypercube(2);
    const Vec g = (Vec(2) << 1.5, -0.2).finished();
    const Vec z = (Vec(2) << 1, -1).finished();
    CHECK(is_vertex_optimal(P, z, -(g - 0.1 * z)));
    CHECK_FALSE(is_vertex_optimal(P, z, -(g - 0.3 * z)));
  }

  TEST_CASE("optimality test on the 2x2 Birkhoff polytope") {
    const auto P = make_birkhoff(2);
    const Vec G = (Vec(4) << 1, 0, 0, 1).finished();
    const Vec Z = G;  // identity permutation
    CHECK(is_vertex_optimal(P, Z, -(G - 0.5 * Z)));
    CHECK_FALSE(is_vertex_optimal(P, Z, -(G - 1.5 * Z)));
  }

  TEST_CASE("a solved vertex is always optimal for its own cost") {
    std::mt19937_64 rng(6);
    for (int d = 2; d <= 5; ++d) {
      const auto P = make_birkhoff(d);
      const Vec g = gaussian(d * d, rng);
      const auto s = solve_simplex(P, -g);
      CHECK(is_vertex_optimal(P, s.point, -g));
    }
  }

  TEST_CASE("infeasible and unbounded programs") {
    Mat A(2, 1);
    A << 1, -1;
    CHECK(kind_of([&] { solve_simplex(A, (Vec(2) << -1, -1).finished(), (Vec(1) << 1).finished()); }) ==
          ErrorKind::Infeasible);
    Mat B(1, 1);
    B << -1;
    CHECK(kind_of([&] { solve_simplex(B, (Vec(1) << 0).finished(), (Vec(1) << -1).finished()); }) ==
          ErrorKind::Unbounded);
  }
}
