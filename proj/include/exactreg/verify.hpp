#pragma once

#include <cstdint>
#include <vector>

#include "exactreg/bounds.hpp"
#include "exactreg/gaussmc.hpp"

namespace exactreg::verify {

using bounds::Json;

// Monte-Carlo checks of the cone bounds. Each check allows 4 standard errors
// of slack on the Monte-Carlo side.
inline constexpr double kSigmaSlack = 4.0;

/// Random simplicial cone in R^d: Gaussian rows, normalized. Draws whose
/// condition number exceeds max_cond are redrawn.
geometry::Cone random_simplicial_cone(int d, std::uint64_t seed, double max_cond = 1e3);

struct ConeBoundsConfig {
  int dim_lo = 2;
  int dim_hi = 6;
  int cones = 100;
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double max_shift = 2.0;
};

struct ConeCase {
  int index = 0;
  int dim = 0;
  double w_norm = 0.0;
  mc::ShiftEstimates mc;
  bounds::BoundReport full;
  bounds::BoundReport simple;
  double sigma_lower = 0.0;  // combined standard error against the lower bound
  double sigma_upper = 0.0;
  bool ok = false;
};

struct ConeBoundsSummary {
  std::vector<ConeCase> cases;
  int passed = 0;
  // Halfplane {x1 >= 0} in R^2 shifted by (1, 0): Phi(-1) against the full bounds.
  double halfplane_value = 0.0;
  double halfplane_lower = 0.0;
  double halfplane_upper = 0.0;
  bool halfplane_ok = false;

  bool ok() const { return halfplane_ok && passed == static_cast<int>(cases.size()); }
  Json to_json() const;
};

/// gamma(V + w) against the full and simple shifted-cone bounds, with
/// gamma(V) itself estimated from the same sample.
ConeBoundsSummary verify_cone_bounds(const ConeBoundsConfig& cfg);

struct MarginConfig {
  std::vector<int> dims{2, 3, 4};
  std::vector<double> eps{0.05, 0.1};
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct MarginCell {
  int n = 0;
  double eps = 0.0;
  mc::MCEstimate estimate;
  double exact = 0.0;  // 2^{-n} - (1 - Phi(eps))^n
  double lower = 0.0;
  double upper = 0.0;
  bool ok = false;
};

struct MarginSummary {
  std::vector<MarginCell> cells;
  bool ok() const;
  Json to_json() const;
};

/// Margin of the orthant (hypercube normal cone at z = 1) under w = eps z.
MarginSummary verify_margin(const MarginConfig& cfg);

struct RepresenterConfig {
  int cases = 20;
  int dim_lo = 2;
  int dim_hi = 5;
  std::uint64_t samples = 100'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double boundary_band = 1e-7;
};

struct RepresenterCase {
  int dim = 0;
  double kappa = 0.0;
  double w_norm = 0.0;
  double w_tilde_norm = 0.0;
  std::uint64_t margin_hits = 0;
  std::uint64_t near_boundary = 0;
  std::uint64_t disagreements = 0;
  bool ok = false;
};

struct RepresenterSummary {
  std::vector<RepresenterCase> cases;
  bool ok() const;
  Json to_json() const;
};

/// M(C, w) == M(C, w~) away from facets, and ||w~|| <= kappa ||w||.
RepresenterSummary verify_representer(const RepresenterConfig& cfg);

Json estimate_json(const mc::MCEstimate& e);

}  // namespace exactreg::verify
