#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "exactreg/cones.hpp"
#include "exactreg/types.hpp"

namespace exactreg::bounds {

using Json = nlohmann::ordered_json;

/// Evaluated bound. Probability-valued bounds are clamped to [0, 1]; the
/// unclamped displays are kept in raw_lower / raw_upper.
struct BoundReport {
  std::string name;
  std::optional<double> lower;
  std::optional<double> upper;
  std::optional<double> raw_lower;
  std::optional<double> raw_upper;
  std::vector<std::pair<std::string, double>> inputs;

  double input(const std::string& key) const;
  Json to_json() const;
};

/// Non-finite numbers become the strings "inf", "-inf", "nan".
Json json_number(double x);

/// exp(x) evaluated as +inf once x exceeds ln(1e308).
double safe_exp(double x);

double clamp_probability(double p);

// gamma(V + w) bounds. Full form uses proj/dist to the dual cone; the simple
// form replaces them by ||w||.
BoundReport shifted_cone_bounds(double gamma_v, const Vec& w, const cones::DualProjection& dual, int d, bool simple);

// gamma(T cap [T + w]) bounds for an in-cone shift w (or a representer w~).
// With kappa set the lower bound uses kappa * ||w|| in place of ||w||.
BoundReport inner_cone_bounds(double gamma_t, const Vec& w, const cones::DualProjection& dual, int n,
                              std::optional<double> kappa = std::nullopt);

/// upper = 1 - exp(-eps^2 B^2 / 2 - eps B sqrt(n)); also reports the
/// linearization and the expected-threshold lower bound (1 - e^{-4n}) / (2 B sqrt(n)).
BoundReport membership_failure_bound(double eps, double B, int n);
double membership_expected_threshold(double B, int n);

struct PhaseTransition {
  double eps_lo = 0.0;
  double eps_hi = kInf;
};
PhaseTransition phase_transition_thresholds(double delta, int n, double grad_norm_max, double grad_norm_min);

struct FacetTerm {
  double gamma_rel = 0.0;
  double s_dot_w = 0.0;
};
double margin_F(const std::vector<FacetTerm>& facets);

enum class MarginCertificate { None, Membership, Representer };

/// upper = 2 F exp(sqrt(n-1) ||w||). The lower bound needs a certificate:
/// Membership uses ||w||, Representer uses ||w~||. Asking for a lower bound
/// without one throws Error(Contract).
BoundReport margin_bounds(double F, double w_norm, int n, MarginCertificate cert, bool want_lower,
                          std::optional<double> w_tilde_norm = std::nullopt);

struct EdgeTerm {
  double gamma_rel = 0.0;
  double abs_s_dot_p = 0.0;
  double multiplicity = 1.0;
};
std::vector<EdgeTerm> hypercube_edge_terms(const Vec& p);
BoundReport linear_polytope_bound(const std::vector<EdgeTerm>& edges, double eps, double p_norm, int n);

enum class BinfVariant { LowerProp, SphereUpper, MarginUpper, LinearRepresenterUpper, LinearMarginUpper };
std::string_view to_string(BinfVariant v);
BinfVariant binf_variant_from_string(std::string_view name);
inline constexpr BinfVariant kAllBinfVariants[] = {BinfVariant::LowerProp, BinfVariant::SphereUpper,
                                                   BinfVariant::MarginUpper, BinfVariant::LinearRepresenterUpper,
                                                   BinfVariant::LinearMarginUpper};

BoundReport binf_bounds(double eps, int n, BinfVariant variant, const std::optional<Vec>& p = std::nullopt);

/// Birkhoff displays with n = d^2: upper = 1 - exp(-eps^2 sqrt(n)/2 - eps n^{3/4}).
BoundReport birkhoff_bounds(double eps, int d);
double birkhoff_expected_threshold(int d);

/// Delta / (2 B D).
double gap_based_bound(double delta, double B, double D);

/// 2 min_j |g_j|.
double hypercube_gap(const Vec& g);

}  // namespace exactreg::bounds
