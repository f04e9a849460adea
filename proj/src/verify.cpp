#include "exactreg/verify.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "exactreg/cones.hpp"
#include "exactreg/error.hpp"

namespace exactreg::verify {

namespace {

double unit_uniform(std::uint64_t seed) {
  return (static_cast<double>(mc::mix64(seed) >> 11) + 0.5) * 0x1.0p-53;
}

Vec random_shift(int d, std::uint64_t seed, double max_norm) {
  const Vec dir = mc::GaussianStream(seed, d).at(0);
  return dir / dir.norm() * (max_norm * unit_uniform(seed ^ 0x5bd1e995ULL));
}

void check_range(int lo, int hi) {
  if (lo < 1 || hi < lo) throw Error(ErrorKind::InvalidInput, "bad dimension range");
}

Json report_json(const bounds::BoundReport& r) { return r.to_json(); }

}  // namespace

Json estimate_json(const mc::MCEstimate& e) {
  Json j;
  j["p_hat"] = e.p_hat;
  j["hits"] = e.hits;
  j["n_samples"] = e.n_samples;
  j["ci_low"] = e.ci_low;
  j["ci_high"] = e.ci_high;
  j["seed"] = e.seed;
  return j;
}

geometry::Cone random_simplicial_cone(int d, std::uint64_t seed, double max_cond) {
  if (d < 1) throw Error(ErrorKind::InvalidDimension, "cone dimension must be >= 1");
  const mc::GaussianStream stream(seed, d * d);
  for (std::uint64_t k = 0; k < 1000; ++k) {
    const Vec raw = stream.at(k);
    Mat rows(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) rows(i, j) = raw(i * d + j);
    auto cone = geometry::Cone::from_directions(rows);
    if (!cone.square_invertible()) continue;
    if (cones::cone_condition_number(cone) <= max_cond) return cone;
  }
  throw Error(ErrorKind::NumericalFailure, "could not draw a well-conditioned cone");
}

Json ConeBoundsSummary::to_json() const {
  Json j;
  j["cases"] = cases.size();
  j["passed"] = passed;
  j["halfplane"] = {{"value", halfplane_value}, {"lower", halfplane_lower}, {"upper", halfplane_upper},
                    {"ok", halfplane_ok}};
  Json list = Json::array();
  for (const auto& c : cases) {
    Json e;
    e["index"] = c.index;
    e["dim"] = c.dim;
    e["w_norm"] = c.w_norm;
    e["gamma_v"] = estimate_json(c.mc.cone);
    e["gamma_shifted"] = estimate_json(c.mc.shifted);
    e["full"] = report_json(c.full);
    e["simple"] = report_json(c.simple);
    e["sigma_lower"] = c.sigma_lower;
    e["sigma_upper"] = c.sigma_upper;
    e["ok"] = c.ok;
    list.push_back(std::move(e));
  }
  j["details"] = std::move(list);
  j["ok"] = ok();
  return j;
}

ConeBoundsSummary verify_cone_bounds(const ConeBoundsConfig& cfg) {
  check_range(cfg.dim_lo, cfg.dim_hi);
  if (cfg.cones < 1) throw Error(ErrorKind::InvalidInput, "need at least one cone");
  ConeBoundsSummary out;

  {
    Mat S(1, 2);
    S << 1.0, 0.0;
    const geometry::Cone half(S);
    const Vec w = Vec::Unit(2, 0);
    const auto r = bounds::shifted_cone_bounds(0.5, w, cones::project_dual_cone(half, w), 2, false);
    out.halfplane_value = mc::normal_cdf(-1.0);
    out.halfplane_lower = *r.lower;
    out.halfplane_upper = *r.upper;
    out.halfplane_ok = *r.lower <= out.halfplane_value && out.halfplane_value <= *r.upper;
  }

  const int span = cfg.dim_hi - cfg.dim_lo + 1;
  for (int c = 0; c < cfg.cones; ++c) {
    const std::uint64_t case_seed = mc::derive_seed(cfg.seed, {static_cast<std::uint64_t>(c)});
    ConeCase cc;
    cc.index = c;
    cc.dim = cfg.dim_lo + c % span;
    const auto cone = random_simplicial_cone(cc.dim, mc::derive_seed(case_seed, {1}));
    const Vec w = random_shift(cc.dim, mc::derive_seed(case_seed, {2}), cfg.max_shift);
    cc.w_norm = w.norm();
    cc.mc = mc::mc_shift_estimates(cone, w, {cfg.samples, mc::derive_seed(case_seed, {3}), cfg.threads});
    const auto dual = cones::project_dual_cone(cone, w);
    const double gv = cc.mc.cone.p_hat;
    cc.full = bounds::shifted_cone_bounds(gv, w, dual, cc.dim, false);
    cc.simple = bounds::shifted_cone_bounds(gv, w, dual, cc.dim, true);

    const double se_shift = cc.mc.shifted.std_error();
    const double se_cone = cc.mc.cone.std_error();
    const double p = cc.mc.shifted.p_hat;
    bool ok = true;
    for (const auto* r : {&cc.full, &cc.simple}) {
      // Bounds are linear in gamma(V), so its error scales by the same factor.
      const double lf = gv > 0.0 ? *r->raw_lower / gv : 0.0;
      const double uf = gv > 0.0 ? *r->raw_upper / gv : 0.0;
      const double sl = std::hypot(se_shift, lf * se_cone);
      const double su = std::hypot(se_shift, std::isfinite(uf) ? uf * se_cone : 0.0);
      ok = ok && p >= *r->lower - kSigmaSlack * sl && p <= *r->upper + kSigmaSlack * su;
      if (r == &cc.full) {
        cc.sigma_lower = sl;
        cc.sigma_upper = su;
      }
    }
    cc.ok = ok;
    out.passed += ok ? 1 : 0;
    out.cases.push_back(std::move(cc));
  }
  return out;
}

bool MarginSummary::ok() const {
  return std::all_of(cells.begin(), cells.end(), [](const MarginCell& c) { return c.ok; });
}

Json MarginSummary::to_json() const {
  Json list = Json::array();
  for (const auto& c : cells) {
    list.push_back({{"n", c.n},
                    {"eps", c.eps},
                    {"estimate", estimate_json(c.estimate)},
                    {"exact", c.exact},
                    {"lower", c.lower},
                    {"upper", c.upper},
                    {"ok", c.ok}});
  }
  return {{"cells", list}, {"ok", ok()}};
}

MarginSummary verify_margin(const MarginConfig& cfg) {
  MarginSummary out;
  for (int n : cfg.dims) {
    if (n < 2 || n > 20) throw Error(ErrorKind::InvalidDimension, "margin check supports 2 <= n <= 20");
    const Vec z = Vec::Ones(n);
    const auto cone = geometry::hypercube_vertex_cone(z);
    const double gamma_rel = geometry::hypercube_edges(n).classes.front().gamma_rel;
    for (double eps : cfg.eps) {
      MarginCell cell;
      cell.n = n;
      cell.eps = eps;
      const Vec w = eps * z;
      const std::uint64_t seed = mc::derive_seed(cfg.seed, {static_cast<std::uint64_t>(n), std::bit_cast<std::uint64_t>(eps)});
      cell.estimate = mc::mc_margin_measure(cone, w, {cfg.samples, seed, cfg.threads});
      cell.exact = std::ldexp(1.0, -n) - std::pow(mc::normal_cdf(-eps), n);
      std::vector<bounds::FacetTerm> facets;
      for (int i = 0; i < n; ++i) facets.push_back({gamma_rel, cone.normals().row(i).dot(w)});
      const double F = bounds::margin_F(facets);
      const auto r = bounds::margin_bounds(F, w.norm(), n, bounds::MarginCertificate::Membership, true);
      cell.lower = *r.lower;
      cell.upper = *r.upper;
      const double slack = kSigmaSlack * cell.estimate.std_error();
      cell.ok = cell.lower <= cell.estimate.p_hat + slack && cell.estimate.p_hat - slack <= cell.upper &&
                cell.lower <= cell.exact && cell.exact <= cell.upper;
      out.cells.push_back(cell);
    }
  }
  return out;
}

bool RepresenterSummary::ok() const {
  return std::all_of(cases.begin(), cases.end(), [](const RepresenterCase& c) { return c.ok; });
}

Json RepresenterSummary::to_json() const {
  Json list = Json::array();
  for (const auto& c : cases) {
    list.push_back({{"dim", c.dim},
                    {"kappa", c.kappa},
                    {"w_norm", c.w_norm},
                    {"w_tilde_norm", c.w_tilde_norm},
                    {"margin_hits", c.margin_hits},
                    {"near_boundary", c.near_boundary},
                    {"disagreements", c.disagreements},
                    {"ok", c.ok}});
  }
  return {{"cases", list}, {"ok", ok()}};
}

RepresenterSummary verify_representer(const RepresenterConfig& cfg) {
  check_range(cfg.dim_lo, cfg.dim_hi);
  RepresenterSummary out;
  const int span = cfg.dim_hi - cfg.dim_lo + 1;
  for (int c = 0; c < cfg.cases; ++c) {
    const std::uint64_t case_seed = mc::derive_seed(cfg.seed, {static_cast<std::uint64_t>(c)});
    RepresenterCase rc;
    rc.dim = cfg.dim_lo + c % span;
    const int d = rc.dim;
    const auto cone = random_simplicial_cone(d, mc::derive_seed(case_seed, {1}));
    const Vec w = random_shift(d, mc::derive_seed(case_seed, {2}), 2.0);
    const Vec wt = cones::representer_vector(cone, w);
    rc.kappa = cones::cone_condition_number(cone);
    rc.w_norm = w.norm();
    rc.w_tilde_norm = wt.norm();
    const Mat& S = cone.normals();
    const Vec Sw = S * w;
    const Vec Swt = S * wt;
    const bool exact_clip = (Swt - Sw.cwiseMax(0.0)).cwiseAbs().maxCoeff() <= 1e-9;
    const bool norm_ok = rc.w_tilde_norm <= rc.kappa * rc.w_norm * (1.0 + 1e-12) + 1e-15;

    const double band = cfg.boundary_band;
    const auto counts = mc::sample_counts(d, {cfg.samples, mc::derive_seed(case_seed, {3}), cfg.threads}, 3,
                                          [&](const double* x, std::uint64_t* cnt) {
      const Eigen::Map<const Vec> xv(x, d);
      const Vec sx = S * xv;
      const Vec a = sx - Sw;
      const Vec b = sx - Swt;
      const double closest =
          std::min({sx.cwiseAbs().minCoeff(), a.cwiseAbs().minCoeff(), b.cwiseAbs().minCoeff()});
      if (closest < band) {
        ++cnt[1];
        return;
      }
      const bool in_c = sx.minCoeff() >= 0.0;
      const bool m1 = in_c && a.minCoeff() < 0.0;
      const bool m2 = in_c && b.minCoeff() < 0.0;
      if (m1) ++cnt[0];
      if (m1 != m2) ++cnt[2];
    });
    rc.margin_hits = counts[0];
    rc.near_boundary = counts[1];
    rc.disagreements = counts[2];
    rc.ok = exact_clip && norm_ok && rc.disagreements == 0;
    out.cases.push_back(rc);
  }
  return out;
}

}  // namespace exactreg::verify
