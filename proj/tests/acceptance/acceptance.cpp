// One PASS/FAIL line per acceptance criterion. Tolerances and sample sizes
// are fixed here; the exit status is nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "exactreg/bounds.hpp"
#include "exactreg/experiments.hpp"
#include "exactreg/gaussmc.hpp"
#include "exactreg/geometry.hpp"
#include "exactreg/linprog.hpp"
#include "exactreg/verify.hpp"

using namespace exactreg;
namespace ex = exactreg::experiments;

namespace {

constexpr std::uint64_t kSeed = 20240607;
constexpr unsigned kThreads = 0;  // all cores

// C1
constexpr int kConeCount = 100;
constexpr std::uint64_t kConeSamples = 1'000'000;
constexpr double kConeMaxShift = 2.0;
constexpr double kConeRuntimeLimit = 300.0;

// C2 / C3
const std::vector<int> kHypercubeSizes{4, 16, 64};
constexpr int kHypercubeEps = 8;
constexpr double kHypercubeEpsMin = 1e-3;
constexpr double kHypercubeEpsMax = 1.0;
constexpr int kHypercubeTrials = 1000;
constexpr double kExactLawCoverage = 0.95;

// C4
const std::vector<int> kBirkhoffSides{3, 4, 5};
constexpr int kBirkhoffTrials = 20;
constexpr int kBirkhoffEps = 12;
constexpr double kLevelSetLow = 0.25;
constexpr double kLevelSetHigh = 0.75;
constexpr double kBirkhoffRuntimeLimit = 600.0;

// C5
constexpr int kConsistencyDraws = 1000;
constexpr double kConsistencyTol = 1e-6;
constexpr int kHalfNormalTrials = 10'000;
constexpr double kHalfNormalSigmas = 3.0;

// C7
constexpr std::uint64_t kFanDraws = 100'000;
constexpr double kFanSigmas = 4.0;

// C9
constexpr int kGapDraws = 1000;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double bound_value(const ex::GridCell& c, const std::string& name) {
  for (const auto& [k, v] : c.bounds)
    if (k == name) return v;
  return std::nan("");
}

ex::GridConfig hypercube_grid(const std::string& regularizer, const std::string& p_mode) {
  ex::GridConfig c;
  c.model = "hypercube";
  c.sizes = kHypercubeSizes;
  c.regularizer = regularizer;
  c.p_mode = p_mode;
  c.eps_min = kHypercubeEpsMin;
  c.eps_max = kHypercubeEpsMax;
  c.eps_points = kHypercubeEps;
  c.trials = kHypercubeTrials;
  c.seed = kSeed;
  c.seed_set = true;
  c.threads = kThreads;
  return c;
}

Outcome shifted_cone_sandwich() {
  const auto t0 = std::chrono::steady_clock::now();
  verify::ConeBoundsConfig cfg;
  cfg.dim_lo = 2;
  cfg.dim_hi = 6;
  cfg.cones = kConeCount;
  cfg.samples = kConeSamples;
  cfg.max_shift = kConeMaxShift;
  cfg.seed = kSeed;
  cfg.threads = kThreads;
  const auto s = verify::verify_cone_bounds(cfg);
  const double secs = seconds_since(t0);
  const bool in_box = std::abs(s.halfplane_lower - 0.0738) <= 2e-4 && std::abs(s.halfplane_upper - 0.3033) <= 1e-4;
  return {s.ok() && in_box && secs < kConeRuntimeLimit,
          fmt("%d/%zu cones inside [lower-4sd, upper+4sd]; halfplane %.6f in [%.4f, %.4f]; %.1f s", s.passed,
              s.cases.size(), s.halfplane_value, s.halfplane_lower, s.halfplane_upper, secs)};
}

struct HypercubeRuns {
  ex::GridResult quadratic;
  ex::GridResult linear_uniform;
};

Outcome hypercube_exact_law(const HypercubeRuns& runs) {
  int inside = 0;
  const int total = static_cast<int>(runs.quadratic.cells.size());
  double worst = 0.0;
  for (const auto& c : runs.quadratic.cells) {
    const double exact = bound_value(c, "exact_failure");
    const double direct = 1.0 - std::pow(2.0 * (1.0 - mc::normal_cdf(c.eps)), c.n);
    if (std::abs(exact - direct) > 1e-12) return {false, fmt("exact law mismatch at n=%d eps=%g", c.n, c.eps)};
    if (exact >= c.ci_low && exact <= c.ci_high) {
      ++inside;
    } else {
      worst = std::max(worst, std::min(std::abs(exact - c.ci_low), std::abs(exact - c.ci_high)));
    }
  }
  const double frac = static_cast<double>(inside) / total;
  return {frac >= kExactLawCoverage,
          fmt("exact law inside the Wilson 95%% interval in %d/%d cells (%.1f%%); largest miss %.3g", inside, total,
              100 * frac, worst)};
}

Outcome binf_bracketing(const HypercubeRuns& runs) {
  int checks = 0, bad = 0;
  std::string first;
  auto expect = [&](bool ok, const ex::GridCell& c, const char* what) {
    ++checks;
    if (!ok) {
      ++bad;
      if (first.empty()) first = fmt(" (first: %s at n=%d eps=%g)", what, c.n, c.eps);
    }
  };
  for (const auto& c : runs.quadratic.cells) {
    expect(bound_value(c, "binf_lower_prop") <= c.ci_high, c, "lower_prop");
    expect(bound_value(c, "binf_sphere_upper") >= c.ci_low, c, "sphere_upper");
    expect(bound_value(c, "binf_margin_upper") >= c.ci_low, c, "margin_upper");
  }
  for (const auto& c : runs.linear_uniform.cells) {
    expect(bound_value(c, "binf_linear_representer_upper") >= c.ci_low, c, "linear_representer_upper");
    expect(bound_value(c, "binf_linear_margin_upper") >= c.ci_low, c, "linear_margin_upper");
  }
  // Sparse p = sqrt(n) e_1: the l1 form against the sqrt(n)||p|| form, on
  // cells where the latter is informative (< 1).
  int sparse_checks = 0, sparse_bad = 0;
  const auto eps_grid = ex::log_spaced(kHypercubeEpsMin, kHypercubeEpsMax, kHypercubeEps);
  for (int n : kHypercubeSizes) {
    const Vec p = ex::draw_linear_p(n, "sparse", kSeed);
    for (double eps : eps_grid) {
      const double sqrt_form = *bounds::binf_bounds(eps, n, bounds::BinfVariant::LinearRepresenterUpper, p).raw_upper;
      if (sqrt_form >= 1.0) continue;
      const double l1_form = *bounds::binf_bounds(eps, n, bounds::BinfVariant::LinearMarginUpper, p).raw_upper;
      ++sparse_checks;
      if (l1_form > sqrt_form) ++sparse_bad;
    }
  }
  return {bad == 0 && sparse_bad == 0 && sparse_checks > 0,
          fmt("%d/%d bracketing checks hold%s; sparse p: l1 form <= sqrt(n) form in %d/%d informative cells",
              checks - bad, checks, first.c_str(), sparse_checks - sparse_bad, sparse_checks)};
}

Outcome birkhoff_reproduction() {
  const auto t0 = std::chrono::steady_clock::now();
  ex::GridConfig c;
  c.model = "birkhoff";
  c.sizes = kBirkhoffSides;
  c.eps_min = 1e-3;
  c.eps_max = 1.0;
  c.eps_points = kBirkhoffEps;
  c.trials = kBirkhoffTrials;
  c.seed = kSeed;
  c.seed_set = true;
  c.threads = kThreads;
  const auto res = ex::run_grid(c);
  bool ok = true;
  std::ostringstream detail;
  for (const auto& cell : res.cells) {
    if (bound_value(cell, "birkhoff_prob") < cell.ci_low) {
      ok = false;
      detail << fmt("bound below CI at n=%d eps=%g; ", cell.n, cell.eps);
    }
  }
  for (std::size_t r = 0; r < kBirkhoffSides.size(); ++r) {
    const int d = kBirkhoffSides[r];
    const auto model = ex::Model::birkhoff(d);
    const double n = static_cast<double>(d) * d;
    const double eps_ls = 2.0 / std::pow(n, 0.75);
    int failures = 0;
    for (int i = 0; i < kBirkhoffTrials; ++i) {
      const Vec g = ex::run_er_trial(model, ex::Regularizer::quadratic(), {}, kSeed, static_cast<std::uint64_t>(i)).g;
      const Vec z = ex::solve_p0(model, g);
      failures += ex::er_holds(model, ex::Regularizer::quadratic(), g, z, eps_ls) ? 0 : 1;
    }
    const double p_ls = static_cast<double>(failures) / kBirkhoffTrials;
    const auto& th = res.thresholds[r];
    const bool row_ok = p_ls >= kLevelSetLow && p_ls <= kLevelSetHigh && th.mean_eps_bar >= th.bound_lower;
    ok = ok && row_ok;
    detail << fmt("d=%d: p_fail(eps=%.4f)=%.2f, mean eps_bar %.4f vs bound %.4f; ", d, eps_ls, p_ls, th.mean_eps_bar,
                  th.bound_lower);
  }
  const double secs = seconds_since(t0);
  ok = ok && secs < kBirkhoffRuntimeLimit;
  detail << fmt("%.1f s", secs);
  return {ok, detail.str()};
}

Outcome threshold_consistency() {
  double worst = 0.0;
  for (int k = 0; k < kConsistencyDraws; ++k) {
    const auto model = ex::Model::hypercube(1 + k % 16);
    const auto t = ex::run_er_trial(model, ex::Regularizer::quadratic(), {}, kSeed, static_cast<std::uint64_t>(k));
    const double bis = ex::threshold_bisection(model, ex::Regularizer::quadratic(), t.g, t.z, ex::eps_search_limit(model));
    worst = std::max(worst, std::abs(bis - t.eps_bar));
  }
  const auto m = ex::estimate_threshold_expectation(ex::Model::hypercube(1), ex::Regularizer::quadratic(),
                                                    kHalfNormalTrials, kSeed, kThreads);
  const double target = std::sqrt(2.0 / std::numbers::pi);
  const double z = std::abs(m.mean - target) / m.std_error;
  return {worst <= kConsistencyTol && z <= kHalfNormalSigmas,
          fmt("max |closed - bisection| = %.2e over %d draws; n=1 mean %.5f vs %.5f (%.2f sd)", worst,
              kConsistencyDraws, m.mean, target, z)};
}

Outcome margin_machinery() {
  verify::MarginConfig mc;
  mc.seed = kSeed;
  mc.threads = kThreads;
  const auto margin = verify::verify_margin(mc);
  verify::RepresenterConfig rc;
  rc.seed = kSeed;
  rc.threads = kThreads;
  const auto rep = verify::verify_representer(rc);
  int margin_ok = 0, rep_ok = 0;
  std::uint64_t disagreements = 0;
  for (const auto& c : margin.cells) margin_ok += c.ok ? 1 : 0;
  for (const auto& c : rep.cases) {
    rep_ok += c.ok ? 1 : 0;
    disagreements += c.disagreements;
  }
  return {margin.ok() && rep.ok(),
          fmt("margin cells bracketed %d/%zu; representer cases %d/%zu, %llu interior disagreements", margin_ok,
              margin.cells.size(), rep_ok, rep.cases.size(), static_cast<unsigned long long>(disagreements))};
}

Outcome normal_fan() {
  const int n = 3;
  const auto P = geometry::make_hypercube(n);
  const mc::GaussianStream stream(mc::derive_seed(kSeed, {7}), n);
  std::vector<std::uint64_t> wins(8, 0);
  for (std::uint64_t k = 0; k < kFanDraws; ++k) {
    const Vec z = linprog::solve_hypercube(stream.at(k)).point;
    std::uint64_t id = 0;
    for (int j = 0; j < n; ++j) id |= (z(j) < 0 ? 1u : 0u) << j;
    ++wins[id];
  }
  const double sd = std::sqrt(0.125 * 0.875 / static_cast<double>(kFanDraws));
  double worst = 0.0;
  for (auto w : wins) worst = std::max(worst, std::abs(static_cast<double>(w) / kFanDraws - 0.125) / sd);
  double total = 0.0, var = 0.0;
  for (std::uint64_t v = 0; v < 8; ++v) {
    const auto e = mc::mc_cone_measure(geometry::hypercube_vertex_cone(P.vertex(v)), Vec::Zero(n),
                                       {kFanDraws, mc::derive_seed(kSeed, {8, v}), kThreads});
    total += e.p_hat;
    var += e.std_error() * e.std_error();
  }
  const double sum_dev = std::abs(total - 1.0) / std::sqrt(var);
  return {worst <= kFanSigmas && sum_dev <= kFanSigmas,
          fmt("worst vertex-win deviation %.2f sd; cone measures sum to %.5f (%.2f sd)", worst, total, sum_dev)};
}

Outcome entropic_control() {
  ex::GridConfig c;
  c.model = "simplex";
  c.regularizer = "entropy";
  c.sizes = {2, 5, 10};
  c.eps_min = 1e-6;
  c.eps_max = 10.0;
  c.eps_points = 8;
  c.trials = 200;
  c.seed = kSeed;
  c.seed_set = true;
  c.threads = kThreads;
  const auto res = ex::run_grid(c);
  int ones = 0;
  for (const auto& cell : res.cells) ones += cell.p_fail == 1.0 ? 1 : 0;
  return {ones == static_cast<int>(res.cells.size()),
          fmt("p_fail = 1 in %d/%zu cells (eps in [1e-6, 10])", ones, res.cells.size())};
}

Outcome gap_looseness() {
  std::vector<double> mean_ratio;
  int violations = 0;
  for (int n : {4, 16}) {
    const auto model = ex::Model::hypercube(n);
    const double B = std::sqrt(static_cast<double>(n));
    const double D = 2.0 * B;
    double sum = 0.0;
    for (int k = 0; k < kGapDraws; ++k) {
      const auto t = ex::run_er_trial(model, ex::Regularizer::quadratic(), {}, kSeed, static_cast<std::uint64_t>(k));
      const double gb = bounds::gap_based_bound(bounds::hypercube_gap(t.g), B, D);
      if (!(gb < t.eps_bar)) ++violations;
      sum += t.eps_bar / gb;
    }
    mean_ratio.push_back(sum / kGapDraws);
  }
  return {violations == 0 && mean_ratio[1] > mean_ratio[0],
          fmt("%d violations; mean eps_bar/bound %.3f (n=4) -> %.3f (n=16)", violations, mean_ratio[0],
              mean_ratio[1])};
}

}  // namespace

int main() {
  const HypercubeRuns runs{ex::run_grid(hypercube_grid("quadratic", "uniform")),
                           ex::run_grid(hypercube_grid("linear", "uniform"))};
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"C1 shifted-cone sandwich", shifted_cone_sandwich},
      {"C2 hypercube exact law", [&] { return hypercube_exact_law(runs); }},
      {"C3 B-infinity bound bracketing", [&] { return binf_bracketing(runs); }},
      {"C4 Birkhoff reproduction", birkhoff_reproduction},
      {"C5 threshold consistency", threshold_consistency},
      {"C6 margin machinery", margin_machinery},
      {"C7 normal-fan statistics", normal_fan},
      {"C8 entropic negative control", entropic_control},
      {"C9 gap-bound looseness", gap_looseness},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
