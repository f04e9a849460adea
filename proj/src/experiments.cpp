#include "exactreg/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "exactreg/bounds.hpp"
#include "exactreg/cones.hpp"
#include "exactreg/error.hpp"
#include "exactreg/gaussmc.hpp"
#include "exactreg/linprog.hpp"
#include "exactreg/numfmt.hpp"
#include "exactreg/parallel.hpp"

#ifndef EXACTREG_VERSION
#define EXACTREG_VERSION "unknown"
#endif

namespace exactreg::experiments {

namespace {

constexpr double kValueTol = 1e-9;
constexpr double kZ95 = 1.959963984540054;
constexpr std::uint64_t kLinearPLabel = 0x6c696e656172ULL;

Mat reshape_square(const Vec& g, int d) {
  Mat G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = g(i * d + j);
  return G;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

[[noreturn]] void config_error(int line, const std::string& msg) {
  throw Error(ErrorKind::Config, "line " + std::to_string(line) + ": " + msg);
}

long long parse_int(const std::string& text, int line, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    config_error(line, "'" + key + "' expects an integer, got '" + text + "'");
  }
}

double parse_real(const std::string& text, int line, const std::string& key) {
  try {
    return parse_double(text);
  } catch (const Error&) {
    config_error(line, "'" + key + "' expects a number, got '" + text + "'");
  }
}

Regularizer regularizer_for(const GridConfig& cfg, int n) {
  if (cfg.regularizer == "quadratic") return Regularizer::quadratic();
  if (cfg.regularizer == "linear") return Regularizer::linear(draw_linear_p(n, cfg.p_mode, cfg.seed));
  return Regularizer::simplex_entropy();
}

Model model_for(const GridConfig& cfg, int size) {
  if (cfg.model == "hypercube") return Model::hypercube(size);
  if (cfg.model == "birkhoff") return Model::birkhoff(size);
  return Model::simplex(size);
}

// Probability 1 - (2(1 - Phi(eps)))^n that some |g_j| < eps.
double hypercube_exact_failure(double eps, int n) {
  return -std::expm1(n * std::log(std::erfc(eps / std::numbers::sqrt2)));
}

std::vector<std::pair<std::string, double>> attach_bounds(const GridConfig& cfg, const Model& model,
                                                          const Regularizer& reg, double eps) {
  std::vector<std::pair<std::string, double>> out;
  const int n = model.dim();
  if (model.kind() == ModelKind::Hypercube) {
    if (reg.kind == RegKind::Quadratic) {
      out.emplace_back("exact_failure", hypercube_exact_failure(eps, n));
      out.emplace_back("binf_lower_prop", *bounds::binf_bounds(eps, n, bounds::BinfVariant::LowerProp).lower);
      out.emplace_back("binf_sphere_upper", *bounds::binf_bounds(eps, n, bounds::BinfVariant::SphereUpper).upper);
      out.emplace_back("binf_margin_upper", *bounds::binf_bounds(eps, n, bounds::BinfVariant::MarginUpper).upper);
      out.emplace_back("membership_failure", *bounds::membership_failure_bound(eps, std::sqrt(n), n).upper);
    } else {
      const std::optional<Vec> p = reg.p;
      out.emplace_back("binf_linear_representer_upper",
                       *bounds::binf_bounds(eps, n, bounds::BinfVariant::LinearRepresenterUpper, p).upper);
      out.emplace_back("binf_linear_margin_upper",
                       *bounds::binf_bounds(eps, n, bounds::BinfVariant::LinearMarginUpper, p).upper);
      out.emplace_back("linear_polytope",
                       *bounds::linear_polytope_bound(bounds::hypercube_edge_terms(reg.p), eps, reg.p.norm(), n).upper);
    }
    out.emplace_back("level_set_eps", 1.0 / n);
  } else if (model.kind() == ModelKind::Birkhoff) {
    out.emplace_back("birkhoff_prob", *bounds::birkhoff_bounds(eps, model.size()).upper);
    out.emplace_back("level_set_eps", 2.0 / std::pow(static_cast<double>(n), 0.75));
  }
  (void)cfg;
  return out;
}

double threshold_bound(const Model& model, const Regularizer& reg) {
  if (model.kind() == ModelKind::Hypercube && reg.kind == RegKind::Quadratic) {
    return bounds::membership_expected_threshold(std::sqrt(model.dim()), model.dim());
  }
  if (model.kind() == ModelKind::Birkhoff && reg.kind == RegKind::Quadratic) {
    return bounds::birkhoff_expected_threshold(model.size());
  }
  return std::numeric_limits<double>::quiet_NaN();
}

void open_for_write(std::ofstream& f, const std::filesystem::path& path) {
  f.open(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
}

std::vector<std::string> read_csv_header(std::istream& in, const char* expected) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidInput, "missing CSV header");
  if (line != expected) throw Error(ErrorKind::InvalidInput, "unexpected CSV header '" + line + "'");
  return split(line, ',');
}

}  // namespace

std::optional<Vec> Regularizer::subgradient(const Vec& z) const {
  switch (kind) {
    case RegKind::Quadratic: return z;
    case RegKind::Linear: return p;
    case RegKind::SimplexEntropy: return std::nullopt;
  }
  return std::nullopt;
}

std::string_view to_string(RegKind kind) {
  switch (kind) {
    case RegKind::Quadratic: return "quadratic";
    case RegKind::Linear: return "linear";
    case RegKind::SimplexEntropy: return "entropy";
  }
  return "unknown";
}

Model Model::hypercube(int n) {
  if (n < 1) throw Error(ErrorKind::InvalidDimension, "hypercube needs n >= 1");
  Model m;
  m.kind_ = ModelKind::Hypercube;
  m.size_ = n;
  return m;
}

Model Model::birkhoff(int d) {
  Model m;
  m.kind_ = ModelKind::Birkhoff;
  m.polytope_ = geometry::make_birkhoff(d);
  m.size_ = d;
  return m;
}

Model Model::simplex(int n) {
  if (n < 2) throw Error(ErrorKind::InvalidDimension, "simplex needs n >= 2");
  Model m;
  m.kind_ = ModelKind::Simplex;
  m.size_ = n;
  return m;
}

Model Model::inscribed(geometry::Polytope P) {
  Model m;
  m.kind_ = ModelKind::Inscribed;
  m.size_ = P.ambient_dim();
  m.polytope_ = std::move(P);
  return m;
}

int Model::dim() const { return kind_ == ModelKind::Birkhoff ? size_ * size_ : size_; }

std::string Model::id() const {
  switch (kind_) {
    case ModelKind::Hypercube: return "hypercube";
    case ModelKind::Birkhoff: return "birkhoff";
    case ModelKind::Simplex: return "simplex";
    case ModelKind::Inscribed: return "inscribed";
  }
  return "unknown";
}

double eps_search_limit(const Model& model) { return 10.0 * std::sqrt(static_cast<double>(model.dim())); }

Vec solve_p0(const Model& model, const Vec& g) {
  if (g.size() != model.dim()) throw Error(ErrorKind::InvalidInput, "cost has wrong dimension");
  switch (model.kind()) {
    case ModelKind::Hypercube:
      return linprog::solve_hypercube(g).point;
    case ModelKind::Birkhoff: {
      const int d = model.size();
      const auto a = linprog::solve_assignment(-reshape_square(g, d));
      Vec z = Vec::Zero(d * d);
      for (int i = 0; i < d; ++i) z(i * d + a.permutation[static_cast<std::size_t>(i)]) = 1.0;
      return z;
    }
    case ModelKind::Simplex: {
      Index k = 0;
      g.maxCoeff(&k);
      Vec z = Vec::Zero(g.size());
      z(k) = 1.0;
      return z;
    }
    case ModelKind::Inscribed: {
      const auto& P = *model.polytope();
      if (P.vertex_list()) return linprog::solve_vertex_scan(*P.vertex_list(), -g).point;
      return linprog::solve_simplex(P, -g).point;
    }
  }
  throw Error(ErrorKind::InvalidInput, "unknown model");
}

std::string vertex_id(const Model& model, const Vec& z) {
  std::string id;
  switch (model.kind()) {
    case ModelKind::Hypercube:
      for (Index j = 0; j < z.size(); ++j) id += z(j) > 0 ? '+' : '-';
      return id;
    case ModelKind::Birkhoff: {
      const int d = model.size();
      for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
          if (z(i * d + j) > 0.5) id += (i ? "-" : "") + std::to_string(j);
        }
      }
      return id;
    }
    case ModelKind::Simplex: {
      Index k = 0;
      z.maxCoeff(&k);
      return "e" + std::to_string(k);
    }
    case ModelKind::Inscribed: {
      const auto& list = model.polytope()->vertex_list();
      if (list) {
        for (std::size_t k = 0; k < list->size(); ++k)
          if (((*list)[k] - z).norm() <= kGeomTol) return "v" + std::to_string(k);
      }
      return "v?";
    }
  }
  return id;
}

bool er_holds(const Model& model, const Regularizer& reg, const Vec& g, const Vec& z, double eps) {
  if (eps < 0.0) throw Error(ErrorKind::InvalidInput, "eps must be >= 0");
  const auto v = reg.subgradient(z);
  if (!v) return eps == 0.0;
  const Vec h = g - eps * *v;
  switch (model.kind()) {
    case ModelKind::Hypercube: {
      // value(z) - optimum = 2 * sum of |h_j| over coordinates with the wrong sign.
      double excess = 0.0;
      for (Index j = 0; j < h.size(); ++j)
        if (z(j) * h(j) < 0.0) excess += 2.0 * std::abs(h(j));
      return excess <= kValueTol;
    }
    case ModelKind::Simplex:
      return h.maxCoeff() <= h.dot(z) + kValueTol;
    case ModelKind::Birkhoff:
    case ModelKind::Inscribed:
      return linprog::is_vertex_optimal(*model.polytope(), z, -h);
  }
  return false;
}

std::optional<double> threshold_closed_form(const Model& model, const Regularizer& reg, const Vec& g, const Vec& z) {
  const auto v = reg.subgradient(z);
  if (!v) return 0.0;
  switch (model.kind()) {
    case ModelKind::Hypercube: {
      // S = diag(z): crossing facet j at eps = z_j g_j / (z_j v_j).
      double eps = kInf;
      for (Index j = 0; j < g.size(); ++j) {
        const double sv = z(j) * (*v)(j);
        if (sv > 0.0) eps = std::min(eps, std::max(0.0, z(j) * g(j)) / sv);
      }
      return eps;
    }
    case ModelKind::Simplex: {
      Index k = 0;
      z.maxCoeff(&k);
      double eps = kInf;
      for (Index i = 0; i < g.size(); ++i) {
        const double dv = (*v)(k) - (*v)(i);
        if (i != k && dv > 0.0) eps = std::min(eps, std::max(0.0, g(k) - g(i)) / dv);
      }
      return eps;
    }
    case ModelKind::Inscribed: {
      const auto& P = *model.polytope();
      if (!P.has_h_form()) return std::nullopt;
      const auto info = geometry::vertex_info(P, z);
      if (!info.nondegenerate) return std::nullopt;
      return cones::exact_threshold_closed_form(geometry::vertex_normal_cone(P, info), g, *v);
    }
    case ModelKind::Birkhoff:
      return std::nullopt;
  }
  return std::nullopt;
}

double threshold_bisection(const Model& model, const Regularizer& reg, const Vec& g, const Vec& z, double eps_max,
                           double tol, int max_iter) {
  if (!reg.subgradient(z)) return 0.0;
  if (er_holds(model, reg, g, z, eps_max)) return kInf;
  double lo = 0.0;
  double hi = eps_max;
  for (int it = 0; it < max_iter && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (er_holds(model, reg, g, z, mid)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

TrialRecord run_er_trial_with_cost(const Model& model, const Regularizer& reg, const std::vector<double>& eps_list,
                                   const Vec& g) {
  TrialRecord r;
  r.g = g;
  r.z = solve_p0(model, g);
  r.vertex_id = vertex_id(model, r.z);
  r.eps = eps_list;
  r.er_success.reserve(eps_list.size());
  for (double eps : eps_list) r.er_success.push_back(er_holds(model, reg, g, r.z, eps));
  const auto closed = threshold_closed_form(model, reg, g, r.z);
  r.eps_bar = closed ? *closed : threshold_bisection(model, reg, g, r.z, eps_search_limit(model));
  return r;
}

TrialRecord run_er_trial(const Model& model, const Regularizer& reg, const std::vector<double>& eps_list,
                         std::uint64_t master_seed, std::uint64_t index) {
  const int dim = model.dim();
  const std::uint64_t seed = mc::derive_seed(master_seed, {static_cast<std::uint64_t>(dim), index});
  const mc::GaussianStream stream(seed, dim);
  int resamples = 0;
  Vec g = stream.at(0);
  while ((g.array() == 0.0).any()) {
    ++resamples;
    g = stream.at(static_cast<std::uint64_t>(resamples));
  }
  TrialRecord r = run_er_trial_with_cost(model, reg, eps_list, g);
  r.seed = seed;
  r.trial_index = index;
  r.resamples = resamples;
  return r;
}

MeanEstimate mean_threshold(const std::vector<double>& eps_bars, double cap) {
  MeanEstimate m;
  if (eps_bars.empty()) throw Error(ErrorKind::InvalidInput, "no thresholds to average");
  const double count = static_cast<double>(eps_bars.size());
  double sum = 0.0;
  for (double e : eps_bars) {
    if (std::isinf(e)) ++m.infinite;
    sum += std::min(e, cap);
  }
  m.mean = sum / count;
  double ss = 0.0;
  for (double e : eps_bars) ss += (std::min(e, cap) - m.mean) * (std::min(e, cap) - m.mean);
  m.std_error = eps_bars.size() > 1 ? std::sqrt(ss / (count - 1.0) / count) : 0.0;
  m.ci_low = m.mean - kZ95 * m.std_error;
  m.ci_high = m.mean + kZ95 * m.std_error;
  return m;
}

MeanEstimate estimate_threshold_expectation(const Model& model, const Regularizer& reg, int n_trials,
                                            std::uint64_t seed, unsigned threads) {
  if (n_trials < 10) throw Error(ErrorKind::Precondition, "threshold expectation needs at least 10 trials");
  std::vector<double> bars(static_cast<std::size_t>(n_trials));
  parallel_for(bars.size(), threads, [&](std::size_t i) {
    bars[i] = run_er_trial(model, reg, {}, seed, i).eps_bar;
  });
  return mean_threshold(bars, eps_search_limit(model));
}

Vec draw_linear_p(int n, const std::string& p_mode, std::uint64_t master_seed) {
  if (n < 1) throw Error(ErrorKind::InvalidDimension, "p needs n >= 1");
  const double radius = std::sqrt(static_cast<double>(n));
  if (p_mode == "sparse") {
    Vec p = Vec::Zero(n);
    p(0) = radius;
    return p;
  }
  if (p_mode != "uniform") throw Error(ErrorKind::InvalidInput, "unknown p_mode '" + p_mode + "'");
  const mc::GaussianStream stream(mc::derive_seed(master_seed, {static_cast<std::uint64_t>(n), kLinearPLabel}), n);
  Vec p = stream.at(0);
  return radius * p / p.norm();
}

GridConfig parse_config(std::istream& in) {
  GridConfig cfg;
  bool saw_d = false;
  bool saw_n = false;
  int d_line = 0;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) config_error(line_no, "expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (value.empty()) config_error(line_no, "empty value for '" + key + "'");
    if (key == "model") {
      if (value != "hypercube" && value != "birkhoff" && value != "simplex")
        config_error(line_no, "model must be hypercube, birkhoff or simplex");
      cfg.model = value;
    } else if (key == "d" || key == "n_list") {
      cfg.sizes.clear();
      for (const auto& item : split(value, ',')) {
        if (item.empty()) config_error(line_no, "empty entry in '" + key + "'");
        cfg.sizes.push_back(static_cast<int>(parse_int(item, line_no, key)));
      }
      (key == "d" ? saw_d : saw_n) = true;
      d_line = line_no;
    } else if (key == "regularizer") {
      if (value != "quadratic" && value != "linear" && value != "entropy")
        config_error(line_no, "regularizer must be quadratic, linear or entropy");
      cfg.regularizer = value;
    } else if (key == "p_mode") {
      if (value != "uniform" && value != "sparse") config_error(line_no, "p_mode must be uniform or sparse");
      cfg.p_mode = value;
    } else if (key == "eps_min") {
      cfg.eps_min = parse_real(value, line_no, key);
    } else if (key == "eps_max") {
      cfg.eps_max = parse_real(value, line_no, key);
    } else if (key == "eps_points") {
      cfg.eps_points = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(parse_int(value, line_no, key));
    } else if (key == "seed") {
      const long long s = parse_int(value, line_no, key);
      if (s < 0) config_error(line_no, "seed must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(s);
      cfg.seed_set = true;
    } else if (key == "out_dir") {
      cfg.out_dir = value;
    } else {
      config_error(line_no, "unknown key '" + key + "'");
    }
  }
  if (!cfg.seed_set) config_error(line_no, "missing required key 'seed'");
  if (saw_d && saw_n) config_error(d_line, "give either d or n_list, not both");
  if (cfg.model == "birkhoff" && saw_n) config_error(d_line, "birkhoff takes d, not n_list");
  if (cfg.model != "birkhoff" && saw_d) config_error(d_line, cfg.model + " takes n_list, not d");
  if (cfg.sizes.empty()) config_error(line_no, "missing sizes (d or n_list)");
  for (int s : cfg.sizes) {
    if (cfg.model == "birkhoff" && (s < 2 || s > 16)) config_error(d_line, "d must lie in [2, 16]");
    if (cfg.model == "hypercube" && s < 1) config_error(d_line, "n must be >= 1");
    if (cfg.model == "simplex" && s < 2) config_error(d_line, "simplex n must be >= 2");
  }
  if ((cfg.regularizer == "entropy") != (cfg.model == "simplex"))
    config_error(line_no, "the entropy regularizer is defined on the simplex model only");
  if (cfg.regularizer == "linear" && cfg.model != "hypercube")
    config_error(line_no, "the linear regularizer is supported on the hypercube only");
  if (!(cfg.eps_min > 0.0) || !(cfg.eps_max >= cfg.eps_min) || std::isinf(cfg.eps_max))
    config_error(line_no, "need 0 < eps_min <= eps_max < inf");
  if (cfg.eps_points < 1) config_error(line_no, "eps_points must be >= 1");
  if (cfg.trials < 1) config_error(line_no, "trials must be >= 1");
  return cfg;
}

GridConfig load_config(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorKind::Io, "cannot open config '" + path.string() + "'");
  try {
    return parse_config(f);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + std::string(e.what()).substr(to_string(e.kind()).size() + 2));
  }
}

std::vector<double> log_spaced(double lo, double hi, int points) {
  if (points < 1 || !(lo > 0.0) || !(hi >= lo)) throw Error(ErrorKind::InvalidInput, "bad log-spaced range");
  std::vector<double> out(static_cast<std::size_t>(points));
  if (points == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (points - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

GridResult run_grid(const GridConfig& config) {
  GridResult res;
  res.config = config;
  res.eps_grid = log_spaced(config.eps_min, config.eps_max, config.eps_points);
  if (config.model == "birkhoff") {
    res.level_set = "eps*n^0.75=2";
  } else if (config.model == "hypercube") {
    res.level_set = "eps*n=1";
  }
  for (int size : config.sizes) {
    const Model model = model_for(config, size);
    const Regularizer reg = regularizer_for(config, model.dim());
    const int n = model.dim();
    res.n_grid.push_back(n);
    std::vector<TrialRecord> trials(static_cast<std::size_t>(config.trials));
    parallel_for(trials.size(), config.threads, [&](std::size_t i) {
      trials[i] = run_er_trial(model, reg, res.eps_grid, config.seed, i);
    });
    for (std::size_t k = 0; k < res.eps_grid.size(); ++k) {
      GridCell cell;
      cell.model = model.id();
      cell.n = n;
      cell.eps = res.eps_grid[k];
      cell.trials = config.trials;
      for (const auto& t : trials) cell.failures += t.er_success[k] ? 0 : 1;
      cell.p_fail = static_cast<double>(cell.failures) / cell.trials;
      const auto iv = mc::wilson_interval(static_cast<std::uint64_t>(cell.failures),
                                          static_cast<std::uint64_t>(cell.trials));
      cell.ci_low = iv.low;
      cell.ci_high = iv.high;
      cell.bounds = attach_bounds(config, model, reg, cell.eps);
      res.cells.push_back(std::move(cell));
    }
    std::vector<double> bars;
    bars.reserve(trials.size());
    for (const auto& t : trials) bars.push_back(t.eps_bar);
    ThresholdRow row;
    row.model = model.id();
    row.n = n;
    if (bars.size() >= 2) {
      const auto m = mean_threshold(bars, eps_search_limit(model));
      row.mean_eps_bar = m.mean;
      row.ci_low = m.ci_low;
      row.ci_high = m.ci_high;
    } else {
      row.mean_eps_bar = row.ci_low = row.ci_high = std::min(bars.front(), eps_search_limit(model));
    }
    row.bound_lower = threshold_bound(model, reg);
    res.thresholds.push_back(row);
    res.eps_bars.push_back(std::move(bars));
  }
  return res;
}

void write_grid_csv(std::ostream& out, const std::vector<GridCell>& cells) {
  out << "model,n,eps,trials,failures,p_fail,ci_low,ci_high,bound_name,bound_value\n";
  for (const auto& c : cells) {
    const std::string prefix = c.model + "," + std::to_string(c.n) + "," + format_double(c.eps) + "," +
                               std::to_string(c.trials) + "," + std::to_string(c.failures) + "," +
                               format_double(c.p_fail) + "," + format_double(c.ci_low) + "," + format_double(c.ci_high);
    if (c.bounds.empty()) {
      out << prefix << ",,\n";
      continue;
    }
    for (const auto& [name, value] : c.bounds) out << prefix << "," << name << "," << format_double(value) << "\n";
  }
}

void write_thresholds_csv(std::ostream& out, const std::vector<ThresholdRow>& rows) {
  out << "model,n,mean_eps_bar,ci_low,ci_high,bound_lower\n";
  for (const auto& r : rows) {
    out << r.model << "," << r.n << "," << format_double(r.mean_eps_bar) << "," << format_double(r.ci_low) << ","
        << format_double(r.ci_high) << "," << format_double(r.bound_lower) << "\n";
  }
}

std::vector<GridCell> read_grid_csv(std::istream& in) {
  read_csv_header(in, "model,n,eps,trials,failures,p_fail,ci_low,ci_high,bound_name,bound_value");
  std::vector<GridCell> cells;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 10) throw Error(ErrorKind::InvalidInput, "grid.csv line " + std::to_string(line_no) + ": expected 10 fields");
    GridCell c;
    c.model = f[0];
    c.n = std::stoi(f[1]);
    c.eps = parse_double(f[2]);
    c.trials = std::stoi(f[3]);
    c.failures = std::stoi(f[4]);
    c.p_fail = parse_double(f[5]);
    c.ci_low = parse_double(f[6]);
    c.ci_high = parse_double(f[7]);
    const bool same = !cells.empty() && cells.back().model == c.model && cells.back().n == c.n &&
                      cells.back().eps == c.eps && cells.back().trials == c.trials &&
                      cells.back().failures == c.failures && !cells.back().bounds.empty() && !f[8].empty();
    if (!same) cells.push_back(c);
    if (!f[8].empty()) cells.back().bounds.emplace_back(f[8], parse_double(f[9]));
  }
  return cells;
}

std::vector<ThresholdRow> read_thresholds_csv(std::istream& in) {
  read_csv_header(in, "model,n,mean_eps_bar,ci_low,ci_high,bound_lower");
  std::vector<ThresholdRow> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 6) throw Error(ErrorKind::InvalidInput, "thresholds.csv: expected 6 fields");
    rows.push_back({f[0], std::stoi(f[1]), parse_double(f[2]), parse_double(f[3]), parse_double(f[4]),
                    parse_double(f[5])});
  }
  return rows;
}

void emit_results(const GridResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
  {
    std::ofstream f;
    open_for_write(f, dir / "grid.csv");
    write_grid_csv(f, result.cells);
    if (!f) throw Error(ErrorKind::Io, "write failed for '" + (dir / "grid.csv").string() + "'");
  }
  {
    std::ofstream f;
    open_for_write(f, dir / "thresholds.csv");
    write_thresholds_csv(f, result.thresholds);
    if (!f) throw Error(ErrorKind::Io, "write failed for '" + (dir / "thresholds.csv").string() + "'");
  }
  const auto& c = result.config;
  nlohmann::ordered_json meta;
  meta["tool"] = "exactreg";
  meta["version"] = EXACTREG_VERSION;
  meta["seed"] = c.seed;
  nlohmann::ordered_json cfg;
  cfg["model"] = c.model;
  cfg[c.model == "birkhoff" ? "d" : "n_list"] = c.sizes;
  cfg["regularizer"] = c.regularizer;
  cfg["p_mode"] = c.p_mode;
  cfg["eps_min"] = c.eps_min;
  cfg["eps_max"] = c.eps_max;
  cfg["eps_points"] = c.eps_points;
  cfg["trials"] = c.trials;
  cfg["seed"] = c.seed;
  cfg["out_dir"] = c.out_dir;
  meta["config"] = cfg;
  meta["eps_grid"] = result.eps_grid;
  meta["n_grid"] = result.n_grid;
  meta["level_set"] = result.level_set;
  std::ofstream f;
  open_for_write(f, dir / "meta.json");
  f << meta.dump(2) << "\n";
  if (!f) throw Error(ErrorKind::Io, "write failed for '" + (dir / "meta.json").string() + "'");
}

}  // namespace exactreg::experiments
