#include "exactreg/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "exactreg/error.hpp"

namespace exactreg::bounds {

namespace {

const double kLogMax = std::log(1e308);
const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

// a * exp(x) without overflowing through exp alone.
double scaled_exp(double a, double x) {
  if (a == 0.0) return 0.0;
  if (a < 0.0) return -scaled_exp(-a, x);
  return safe_exp(std::log(a) + x);
}

void check_probability(double p, const char* what) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidInput, std::string(what) + " must lie in [0, 1]");
}

void check_dim(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidDimension, "dimension must be >= 1");
}

void check_eps(double eps) {
  if (!(eps >= 0.0)) throw Error(ErrorKind::InvalidInput, "eps must be >= 0");
}

void set_lower(BoundReport& r, double raw) {
  r.raw_lower = raw;
  r.lower = clamp_probability(raw);
}

void set_upper(BoundReport& r, double raw) {
  r.raw_upper = raw;
  r.upper = clamp_probability(raw);
}

}  // namespace

double BoundReport::input(const std::string& key) const {
  for (const auto& [k, v] : inputs)
    if (k == key) return v;
  throw Error(ErrorKind::InvalidInput, "bound report has no input '" + key + "'");
}

Json json_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

Json BoundReport::to_json() const {
  Json j;
  j["name"] = name;
  j["lower"] = lower ? json_number(*lower) : Json(nullptr);
  j["upper"] = upper ? json_number(*upper) : Json(nullptr);
  j["raw_lower"] = raw_lower ? json_number(*raw_lower) : Json(nullptr);
  j["raw_upper"] = raw_upper ? json_number(*raw_upper) : Json(nullptr);
  Json in = Json::object();
  for (const auto& [k, v] : inputs) in[k] = json_number(v);
  j["inputs"] = in;
  return j;
}

double safe_exp(double x) {
  if (std::isnan(x)) return x;
  if (x > kLogMax) return kInf;
  return std::exp(x);
}

double clamp_probability(double p) {
  if (std::isnan(p)) return p;
  return std::clamp(p, 0.0, 1.0);
}

BoundReport shifted_cone_bounds(double gamma_v, const Vec& w, const cones::DualProjection& dual, int d, bool simple) {
  check_probability(gamma_v, "gamma(V)");
  check_dim(d);
  const double wn = w.norm();
  const double sd = std::sqrt(static_cast<double>(d));
  BoundReport r;
  r.name = simple ? "shifted_cone_simple" : "shifted_cone";
  if (simple) {
    set_lower(r, scaled_exp(gamma_v, -0.5 * wn * wn - wn * sd));
    set_upper(r, scaled_exp(gamma_v, wn * sd));
  } else {
    const double pn = dual.projection.size() ? dual.projection.norm() : 0.0;
    set_lower(r, scaled_exp(gamma_v, -0.5 * wn * wn - dual.distance_neg * sd));
    set_upper(r, scaled_exp(gamma_v, -0.5 * pn * pn + dual.distance * sd));
    r.inputs = {{"proj_norm", pn}, {"dist", dual.distance}, {"dist_neg", dual.distance_neg}};
  }
  r.inputs.insert(r.inputs.begin(), {{"gamma_v", gamma_v}, {"w_norm", wn}, {"d", d}});
  return r;
}

BoundReport inner_cone_bounds(double gamma_t, const Vec& w, const cones::DualProjection& dual, int n,
                              std::optional<double> kappa) {
  check_probability(gamma_t, "gamma(T)");
  check_dim(n);
  const double wn = w.norm();
  const double lower_norm = kappa ? *kappa * wn : wn;
  const double sn = std::sqrt(static_cast<double>(n));
  const double pn = dual.projection.size() ? dual.projection.norm() : 0.0;
  BoundReport r;
  r.name = "inner_cone";
  set_lower(r, scaled_exp(gamma_t, -0.5 * lower_norm * lower_norm - lower_norm * sn));
  set_upper(r, scaled_exp(gamma_t, -0.5 * pn * pn + dual.distance * sn));
  r.inputs = {{"gamma_t", gamma_t}, {"w_norm", wn}, {"n", n}, {"proj_norm", pn}, {"dist", dual.distance}};
  if (kappa) r.inputs.emplace_back("kappa", *kappa);
  return r;
}

BoundReport membership_failure_bound(double eps, double B, int n) {
  check_eps(eps);
  check_dim(n);
  if (!(B > 0.0)) throw Error(ErrorKind::InvalidInput, "B must be > 0");
  const double lin = 0.5 * eps * eps * B * B + eps * B * std::sqrt(static_cast<double>(n));
  BoundReport r;
  r.name = "membership_failure";
  set_upper(r, -std::expm1(-lin));
  r.inputs = {{"eps", eps}, {"B", B}, {"n", n}, {"linearized", lin},
              {"expected_threshold_lower", membership_expected_threshold(B, n)}};
  return r;
}

double membership_expected_threshold(double B, int n) {
  check_dim(n);
  if (!(B > 0.0)) throw Error(ErrorKind::InvalidInput, "B must be > 0");
  return -std::expm1(-4.0 * n) / (2.0 * B * std::sqrt(static_cast<double>(n)));
}

PhaseTransition phase_transition_thresholds(double delta, int n, double grad_norm_max, double grad_norm_min) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error(ErrorKind::InvalidInput, "delta must lie in (0, 1)");
  check_dim(n);
  if (!(grad_norm_max > 0.0)) throw Error(ErrorKind::InvalidInput, "max gradient norm must be > 0");
  if (grad_norm_min < 0.0) throw Error(ErrorKind::InvalidInput, "min gradient norm must be >= 0");
  PhaseTransition t;
  t.eps_lo = delta / (2.0 * std::sqrt(static_cast<double>(n)) * grad_norm_max);
  t.eps_hi = grad_norm_min == 0.0 ? kInf : std::sqrt(2.0 * std::log(1.0 / delta)) / grad_norm_min;
  return t;
}

double margin_F(const std::vector<FacetTerm>& facets) {
  double sum = 0.0;
  for (const auto& f : facets) {
    check_probability(f.gamma_rel, "gamma_rel");
    sum += f.gamma_rel * std::max(0.0, f.s_dot_w);
  }
  return sum * kInvSqrt2Pi;
}

BoundReport margin_bounds(double F, double w_norm, int n, MarginCertificate cert, bool want_lower,
                          std::optional<double> w_tilde_norm) {
  if (!(F >= 0.0)) throw Error(ErrorKind::InvalidInput, "F must be >= 0");
  check_dim(n);
  const double root = std::sqrt(static_cast<double>(n - 1));
  BoundReport r;
  r.name = "margin";
  set_upper(r, scaled_exp(2.0 * F, root * w_norm));
  r.inputs = {{"F", F}, {"w_norm", w_norm}, {"n", n}};
  if (want_lower) {
    double norm = w_norm;
    switch (cert) {
      case MarginCertificate::None:
        throw Error(ErrorKind::Contract, "margin lower bound needs a membership or representer certificate");
      case MarginCertificate::Membership:
        break;
      case MarginCertificate::Representer:
        if (!w_tilde_norm) throw Error(ErrorKind::MissingInput, "representer certificate needs ||w~||");
        norm = *w_tilde_norm;
        r.inputs.emplace_back("w_tilde_norm", norm);
        break;
    }
    set_lower(r, scaled_exp(F, -root * norm - 0.5 * norm * norm));
  }
  return r;
}

std::vector<EdgeTerm> hypercube_edge_terms(const Vec& p) {
  const int n = static_cast<int>(p.size());
  check_dim(n);
  // Same closed form as geometry::hypercube_edges, without its n <= 20 cap.
  const double gamma_rel = std::ldexp(1.0, -(n - 1));
  const double multiplicity = std::ldexp(1.0, n - 1);
  std::vector<EdgeTerm> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back({gamma_rel, std::abs(p(i)), multiplicity});
  return out;
}

BoundReport linear_polytope_bound(const std::vector<EdgeTerm>& edges, double eps, double p_norm, int n) {
  check_eps(eps);
  check_dim(n);
  double sum = 0.0;
  for (const auto& e : edges) sum += e.multiplicity * e.gamma_rel * e.abs_s_dot_p;
  BoundReport r;
  r.name = "linear_polytope";
  set_upper(r, scaled_exp(eps * std::numbers::e * kInvSqrt2Pi * sum, eps * std::sqrt(static_cast<double>(n - 1)) * p_norm));
  r.inputs = {{"eps", eps}, {"p_norm", p_norm}, {"n", n}, {"edge_sum", sum}};
  return r;
}

std::string_view to_string(BinfVariant v) {
  switch (v) {
    case BinfVariant::LowerProp: return "binf_lower_prop";
    case BinfVariant::SphereUpper: return "binf_sphere_upper";
    case BinfVariant::MarginUpper: return "binf_margin_upper";
    case BinfVariant::LinearRepresenterUpper: return "binf_linear_representer_upper";
    case BinfVariant::LinearMarginUpper: return "binf_linear_margin_upper";
  }
  return "unknown";
}

BinfVariant binf_variant_from_string(std::string_view name) {
  for (BinfVariant v : kAllBinfVariants)
    if (to_string(v) == name) return v;
  throw Error(ErrorKind::InvalidInput, "unknown bound variant '" + std::string(name) + "'");
}

BoundReport binf_bounds(double eps, int n, BinfVariant variant, const std::optional<Vec>& p) {
  check_eps(eps);
  check_dim(n);
  const double nn = static_cast<double>(n);
  BoundReport r;
  r.name = std::string(to_string(variant));
  r.inputs = {{"eps", eps}, {"n", nn}};
  const bool linear = variant == BinfVariant::LinearRepresenterUpper || variant == BinfVariant::LinearMarginUpper;
  if (linear) {
    if (!p) throw Error(ErrorKind::MissingInput, r.name + " needs the linear regularizer p");
    if (p->size() != n) throw Error(ErrorKind::InvalidInput, "p has wrong dimension");
  }
  switch (variant) {
    case BinfVariant::LowerProp: {
      const double c = std::sqrt(2.0 / (std::numbers::pi * std::numbers::e));
      set_lower(r, -std::expm1(-c * nn * eps));
      const double small_limit = std::sqrt(std::numbers::pi * std::numbers::e / 2.0) / (2.0 * nn);
      r.inputs.emplace_back("small_eps_branch", nn * eps / std::sqrt(2.0 * std::numbers::pi * std::numbers::e));
      r.inputs.emplace_back("small_eps_limit", small_limit);
      break;
    }
    case BinfVariant::SphereUpper:
      set_upper(r, eps * nn + 0.5 * eps * eps * nn);
      break;
    case BinfVariant::MarginUpper:
      set_upper(r, scaled_exp(4.0 * kInvSqrt2Pi * eps * nn, eps * nn));
      break;
    case BinfVariant::LinearRepresenterUpper: {
      const double pn = p->norm();
      set_upper(r, eps * pn * std::sqrt(nn) + 0.5 * eps * eps * pn * pn);
      r.inputs.emplace_back("p_norm", pn);
      break;
    }
    case BinfVariant::LinearMarginUpper: {
      const double pn = p->norm();
      const double p1 = p->lpNorm<1>();
      set_upper(r, scaled_exp(eps * p1 * kInvSqrt2Pi, eps * std::sqrt(nn - 1.0) * pn));
      r.inputs.emplace_back("p_norm", pn);
      r.inputs.emplace_back("p_l1", p1);
      break;
    }
  }
  return r;
}

BoundReport birkhoff_bounds(double eps, int d) {
  check_eps(eps);
  if (d < 2) throw Error(ErrorKind::InvalidDimension, "Birkhoff side must be >= 2");
  const double n = static_cast<double>(d) * d;
  BoundReport r;
  r.name = "birkhoff_prob";
  set_upper(r, -std::expm1(-0.5 * eps * eps * std::sqrt(n) - eps * std::pow(n, 0.75)));
  r.inputs = {{"eps", eps}, {"d", d}, {"n", n}, {"expected_threshold_lower", birkhoff_expected_threshold(d)}};
  return r;
}

double birkhoff_expected_threshold(int d) {
  if (d < 2) throw Error(ErrorKind::InvalidDimension, "Birkhoff side must be >= 2");
  const double n = static_cast<double>(d) * d;
  return -std::expm1(-4.0 * n) / (2.0 * std::pow(n, 0.75));
}

double gap_based_bound(double delta, double B, double D) {
  if (!(delta >= 0.0)) throw Error(ErrorKind::InvalidInput, "gap must be >= 0");
  if (!(B > 0.0 && D > 0.0)) throw Error(ErrorKind::InvalidInput, "B and D must be > 0");
  return delta / (2.0 * B * D);
}

double hypercube_gap(const Vec& g) {
  if (g.size() == 0) throw Error(ErrorKind::InvalidDimension, "empty cost");
  return 2.0 * g.cwiseAbs().minCoeff();
}

}  // namespace exactreg::bounds
