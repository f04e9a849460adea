#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"

#include "exactreg/bounds.hpp"
#include "exactreg/error.hpp"
#include "exactreg/experiments.hpp"
#include "exactreg/numfmt.hpp"
#include "exactreg/verify.hpp"

namespace exactreg::cli {

namespace {

using Json = bounds::Json;
namespace ex = experiments;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

unsigned resolve_thread_flag(const std::optional<unsigned>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("EXACTREG_THREADS")) {
    try {
      std::size_t pos = 0;
      const long v = std::stol(env, &pos);
      if (pos == std::string(env).size() && v >= 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw UsageError(std::string("EXACTREG_THREADS must be a non-negative integer, got '") + env + "'");
  }
  return 0;
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, const std::string& command) {
  if (!seed) throw UsageError(command + ": --seed is required");
  return *seed;
}

void emit(std::ostream& out, const Json& j) { out << j.dump(2) << "\n"; }

bool is_upper_bound(const std::string& name) {
  return name == "binf_sphere_upper" || name == "binf_margin_upper" || name == "binf_linear_representer_upper" ||
         name == "binf_linear_margin_upper" || name == "membership_failure" || name == "birkhoff_prob" ||
         name == "linear_polytope";
}

bool is_lower_bound(const std::string& name) { return name == "binf_lower_prop"; }

}  // namespace

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      std::size_t p1 = 0;
      std::size_t p2 = 0;
      const std::string a = text.substr(0, dots);
      const std::string b = text.substr(dots + 2);
      const int lo = std::stoi(a, &p1);
      const int hi = std::stoi(b, &p2);
      if (p1 != a.size() || p2 != b.size() || hi < lo) throw std::invalid_argument(text);
      for (int v = lo; v <= hi; ++v) out.push_back(v);
      return out;
    }
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      std::size_t p = 0;
      out.push_back(std::stoi(item, &p));
      if (p != item.size()) throw std::invalid_argument(item);
    }
  } catch (const std::exception&) {
    throw UsageError("bad integer list '" + text + "' (use a..b or a,b,c)");
  }
  if (out.empty()) throw UsageError("empty integer list");
  return out;
}

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(parse_double(item));
    } catch (const Error&) {
      throw UsageError("bad number '" + item + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw UsageError("empty number list");
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact regularization of linear programs: bounds, Monte-Carlo checks and experiments", "exactreg"};
  app.require_subcommand(1, 1);

  std::optional<unsigned> threads;
  std::optional<std::uint64_t> seed;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "worker threads (0 = all cores; default $EXACTREG_THREADS or 0)");
    sub->add_option("--seed", seed, "master seed");
  };

  std::string dims = "2..6";
  int cones = 100;
  std::uint64_t samples = 1'000'000;
  double max_shift = 2.0;
  auto* cone_cmd = app.add_subcommand("verify-cone-bounds", "shifted-cone bounds against Monte-Carlo measures");
  add_common(cone_cmd);
  cone_cmd->add_option("--dims", dims, "dimension range, e.g. 2..6")->capture_default_str();
  cone_cmd->add_option("--cones", cones, "number of random simplicial cones")->capture_default_str();
  cone_cmd->add_option("--samples", samples, "Monte-Carlo samples per cone")->capture_default_str();
  cone_cmd->add_option("--max-shift", max_shift, "largest ||w||")->capture_default_str();

  std::string margin_dims = "2,3,4";
  std::string margin_eps = "0.05,0.1";
  std::uint64_t margin_samples = 1'000'000;
  auto* margin_cmd = app.add_subcommand("verify-margin", "hypercube margin measures against the margin bounds");
  add_common(margin_cmd);
  margin_cmd->add_option("--dims", margin_dims)->capture_default_str();
  margin_cmd->add_option("--eps", margin_eps)->capture_default_str();
  margin_cmd->add_option("--samples", margin_samples)->capture_default_str();

  std::string rep_dims = "2..5";
  int rep_cases = 20;
  std::uint64_t rep_samples = 100'000;
  auto* rep_cmd = app.add_subcommand("verify-representer", "margin equivalence of w and its representer");
  add_common(rep_cmd);
  rep_cmd->add_option("--dims", rep_dims)->capture_default_str();
  rep_cmd->add_option("--cases", rep_cases)->capture_default_str();
  rep_cmd->add_option("--samples", rep_samples)->capture_default_str();

  std::string config_path;
  std::optional<std::string> out_dir;
  auto* grid_cmd = app.add_subcommand("er-grid", "run an (n, eps) grid and write grid.csv, thresholds.csv, meta.json");
  add_common(grid_cmd);
  grid_cmd->add_option("--config", config_path, "key=value config file")->required();
  grid_cmd->add_option("--out-dir", out_dir, "overrides out_dir from the config");

  std::string th_model = "hypercube";
  std::string th_sizes = "1,2,4,8,16";
  int th_trials = 1000;
  std::string th_reg = "quadratic";
  std::string th_pmode = "uniform";
  auto* th_cmd = app.add_subcommand("thresholds", "mean regularization threshold against its lower bound");
  add_common(th_cmd);
  th_cmd->add_option("--model", th_model)->check(CLI::IsMember({"hypercube", "birkhoff", "simplex"}))->capture_default_str();
  th_cmd->add_option("--sizes", th_sizes, "n for hypercube/simplex, d for birkhoff")->capture_default_str();
  th_cmd->add_option("--trials", th_trials)->capture_default_str();
  th_cmd->add_option("--regularizer", th_reg)->check(CLI::IsMember({"quadratic", "linear", "entropy"}))->capture_default_str();
  th_cmd->add_option("--p-mode", th_pmode)->check(CLI::IsMember({"uniform", "sparse"}))->capture_default_str();

  std::string bt_model = "binf";
  std::optional<int> bt_n;
  std::optional<int> bt_d;
  double bt_eps = 0.0;
  std::string bt_pmode = "sparse";
  auto* bt_cmd = app.add_subcommand("bounds-table", "evaluate every closed-form bound for one cell");
  bt_cmd->add_option("--model", bt_model)->check(CLI::IsMember({"binf", "birkhoff"}))->capture_default_str();
  bt_cmd->add_option("--n", bt_n, "dimension (binf)");
  bt_cmd->add_option("--d", bt_d, "side (birkhoff)");
  bt_cmd->add_option("--eps", bt_eps)->required();
  bt_cmd->add_option("--p-mode", bt_pmode, "linear regularizer: sparse (sqrt(n) e_1) or uniform (needs --seed)")
      ->check(CLI::IsMember({"uniform", "sparse"}))
      ->capture_default_str();
  bt_cmd->add_option("--seed", seed, "seed for --p-mode uniform");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const Stopwatch clock;
    const unsigned nthreads = resolve_thread_flag(threads);
    Json j;
    bool ok = true;

    if (*cone_cmd) {
      const auto range = parse_int_list(dims);
      verify::ConeBoundsConfig cfg;
      cfg.dim_lo = range.front();
      cfg.dim_hi = range.back();
      cfg.cones = cones;
      cfg.samples = samples;
      cfg.seed = require_seed(seed, "verify-cone-bounds");
      cfg.threads = nthreads;
      cfg.max_shift = max_shift;
      const auto summary = verify::verify_cone_bounds(cfg);
      j["command"] = "verify-cone-bounds";
      j["seed"] = cfg.seed;
      j["samples"] = cfg.samples;
      j["result"] = summary.to_json();
      ok = summary.ok();
    } else if (*margin_cmd) {
      verify::MarginConfig cfg;
      cfg.dims = parse_int_list(margin_dims);
      cfg.eps = parse_real_list(margin_eps);
      cfg.samples = margin_samples;
      cfg.seed = require_seed(seed, "verify-margin");
      cfg.threads = nthreads;
      const auto summary = verify::verify_margin(cfg);
      j["command"] = "verify-margin";
      j["seed"] = cfg.seed;
      j["result"] = summary.to_json();
      ok = summary.ok();
    } else if (*rep_cmd) {
      const auto range = parse_int_list(rep_dims);
      verify::RepresenterConfig cfg;
      cfg.dim_lo = range.front();
      cfg.dim_hi = range.back();
      cfg.cases = rep_cases;
      cfg.samples = rep_samples;
      cfg.seed = require_seed(seed, "verify-representer");
      cfg.threads = nthreads;
      const auto summary = verify::verify_representer(cfg);
      j["command"] = "verify-representer";
      j["seed"] = cfg.seed;
      j["result"] = summary.to_json();
      ok = summary.ok();
    } else if (*grid_cmd) {
      auto cfg = ex::load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (out_dir) cfg.out_dir = *out_dir;
      cfg.threads = nthreads;
      const auto result = ex::run_grid(cfg);
      ex::emit_results(result, cfg.out_dir);
      Json violations = Json::array();
      for (const auto& c : result.cells) {
        for (const auto& [name, value] : c.bounds) {
          const bool bad = (is_upper_bound(name) && value < c.ci_low) || (is_lower_bound(name) && value > c.ci_high);
          if (bad) violations.push_back({{"n", c.n}, {"eps", c.eps}, {"bound", name}, {"value", value},
                                         {"p_fail", c.p_fail}, {"ci_low", c.ci_low}, {"ci_high", c.ci_high}});
        }
      }
      for (const auto& t : result.thresholds) {
        if (!std::isnan(t.bound_lower) && t.ci_high < t.bound_lower) {
          violations.push_back({{"n", t.n}, {"bound", "expected_threshold"}, {"value", t.bound_lower},
                                {"mean_eps_bar", t.mean_eps_bar}, {"ci_high", t.ci_high}});
        }
      }
      j["command"] = "er-grid";
      j["out_dir"] = cfg.out_dir;
      j["model"] = cfg.model;
      j["seed"] = cfg.seed;
      j["cells"] = result.cells.size();
      j["violations"] = violations;
      ok = violations.empty();
    } else if (*th_cmd) {
      const auto sizes = parse_int_list(th_sizes);
      const std::uint64_t s = require_seed(seed, "thresholds");
      Json rows = Json::array();
      for (int size : sizes) {
        const ex::Model model = th_model == "hypercube" ? ex::Model::hypercube(size)
                                : th_model == "birkhoff" ? ex::Model::birkhoff(size)
                                                         : ex::Model::simplex(size);
        if ((th_reg == "entropy") != (th_model == "simplex"))
          throw UsageError("the entropy regularizer is defined on the simplex model only");
        const ex::Regularizer reg = th_reg == "quadratic" ? ex::Regularizer::quadratic()
                                    : th_reg == "linear" ? ex::Regularizer::linear(ex::draw_linear_p(model.dim(), th_pmode, s))
                                                         : ex::Regularizer::simplex_entropy();
        const auto m = ex::estimate_threshold_expectation(model, reg, th_trials, s, nthreads);
        double bound = std::nan("");
        if (reg.kind == ex::RegKind::Quadratic && model.kind() == ex::ModelKind::Hypercube)
          bound = bounds::membership_expected_threshold(std::sqrt(model.dim()), model.dim());
        if (reg.kind == ex::RegKind::Quadratic && model.kind() == ex::ModelKind::Birkhoff)
          bound = bounds::birkhoff_expected_threshold(size);
        const bool row_ok = std::isnan(bound) || m.ci_high >= bound;
        ok = ok && row_ok;
        rows.push_back({{"model", model.id()}, {"size", size}, {"n", model.dim()}, {"mean_eps_bar", m.mean},
                        {"ci_low", m.ci_low}, {"ci_high", m.ci_high}, {"std_error", m.std_error},
                        {"capped", m.infinite}, {"bound_lower", bounds::json_number(bound)}, {"ok", row_ok}});
      }
      j["command"] = "thresholds";
      j["seed"] = s;
      j["trials"] = th_trials;
      j["rows"] = rows;
    } else if (*bt_cmd) {
      Json reports = Json::array();
      if (bt_model == "binf") {
        if (!bt_n) throw UsageError("bounds-table --model binf needs --n");
        const int n = *bt_n;
        std::optional<std::uint64_t> pseed;
        if (bt_pmode == "uniform") pseed = require_seed(seed, "bounds-table --p-mode uniform");
        const Vec p = ex::draw_linear_p(n, bt_pmode, pseed.value_or(0));
        for (auto v : bounds::kAllBinfVariants) reports.push_back(bounds::binf_bounds(bt_eps, n, v, p).to_json());
        reports.push_back(bounds::linear_polytope_bound(bounds::hypercube_edge_terms(p), bt_eps, p.norm(), n).to_json());
        reports.push_back(bounds::membership_failure_bound(bt_eps, std::sqrt(n), n).to_json());
        j["p_mode"] = bt_pmode;
        if (pseed) j["seed"] = *pseed;
      } else {
        if (!bt_d) throw UsageError("bounds-table --model birkhoff needs --d");
        const int d = *bt_d;
        reports.push_back(bounds::birkhoff_bounds(bt_eps, d).to_json());
        reports.push_back(bounds::membership_failure_bound(bt_eps, std::sqrt(d), d * d).to_json());
      }
      j["command"] = "bounds-table";
      j["model"] = bt_model;
      j["eps"] = bt_eps;
      j["bounds"] = reports;
    }
    j["ok"] = ok;
    emit(out, j);
    err << "exactreg: " << app.get_subcommands().front()->get_name() << " finished in " << clock.seconds()
        << " s (threads=" << nthreads << ")\n";
    return ok ? kOk : kVerificationFailed;
  } catch (const UsageError& e) {
    err << "exactreg: " << e.what() << "\n\n" << app.help();
    return kUsage;
  } catch (const Error& e) {
    err << "exactreg: " << e.what() << "\n";
    switch (e.kind()) {
      case ErrorKind::Config:
      case ErrorKind::InvalidInput:
      case ErrorKind::InvalidDimension:
      case ErrorKind::MissingInput:
      case ErrorKind::Io:
        return kUsage;
      default:
        return kVerificationFailed;
    }
  }
}

}  // namespace exactreg::cli
