#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "exactreg/geometry.hpp"
#include "exactreg/types.hpp"

namespace exactreg::experiments {

enum class RegKind { Quadratic, Linear, SimplexEntropy };

struct Regularizer {
  RegKind kind = RegKind::Quadratic;
  Vec p;  // only for Linear

  static Regularizer quadratic() { return {RegKind::Quadratic, {}}; }
  static Regularizer linear(Vec p) { return {RegKind::Linear, std::move(p)}; }
  static Regularizer simplex_entropy() { return {RegKind::SimplexEntropy, {}}; }

  /// Subgradient at a vertex: z for the quadratic, p for the linear one,
  /// nothing for the entropy (its gradient blows up at every vertex).
  std::optional<Vec> subgradient(const Vec& z) const;
};

std::string_view to_string(RegKind kind);

enum class ModelKind { Hypercube, Birkhoff, Simplex, Inscribed };

/// Feasible region of a trial. `size` is n for the hypercube and simplex,
/// d for Birkhoff (ambient dimension d^2).
class Model {
 public:
  static Model hypercube(int n);
  static Model birkhoff(int d);
  static Model simplex(int n);
  static Model inscribed(geometry::Polytope P);

  ModelKind kind() const { return kind_; }
  int size() const { return size_; }
  int dim() const;
  std::string id() const;
  const std::optional<geometry::Polytope>& polytope() const { return polytope_; }

 private:
  ModelKind kind_ = ModelKind::Hypercube;
  int size_ = 0;
  std::optional<geometry::Polytope> polytope_;
};

struct TrialRecord {
  std::uint64_t seed = 0;
  std::uint64_t trial_index = 0;
  Vec g;
  Vec z;
  std::string vertex_id;
  std::vector<double> eps;
  std::vector<bool> er_success;
  double eps_bar = 0.0;
  int resamples = 0;  // draws rejected for a zero component
};

/// Largest eps searched by bisection; beyond it the threshold is reported
/// as +inf.
double eps_search_limit(const Model& model);

/// z* of P_0 for cost g (maximize g . x).
Vec solve_p0(const Model& model, const Vec& g);

/// Canonical encoding of a vertex: sign string, permutation, or index.
std::string vertex_id(const Model& model, const Vec& z);

/// ER(eps): z stays optimal for the cost -(g - eps v), v the subgradient at z.
bool er_holds(const Model& model, const Regularizer& reg, const Vec& g, const Vec& z, double eps);

/// Closed-form threshold, when the normal cone at z is available.
std::optional<double> threshold_closed_form(const Model& model, const Regularizer& reg, const Vec& g, const Vec& z);

/// Bisection on [0, eps_max] for the ER boundary, to absolute tolerance `tol`
/// in at most `max_iter` halvings. +inf if ER still holds at eps_max.
double threshold_bisection(const Model& model, const Regularizer& reg, const Vec& g, const Vec& z, double eps_max,
                           double tol = 1e-6, int max_iter = 60);

/// Draws g from the per-trial seed derive_seed(master, {dim, index}),
/// resampling draws with a zero component.
TrialRecord run_er_trial(const Model& model, const Regularizer& reg, const std::vector<double>& eps_list,
                         std::uint64_t master_seed, std::uint64_t index);

/// Same as run_er_trial for a given cost vector.
TrialRecord run_er_trial_with_cost(const Model& model, const Regularizer& reg, const std::vector<double>& eps_list,
                                   const Vec& g);

struct MeanEstimate {
  double mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double std_error = 0.0;
  int infinite = 0;  // draws capped at eps_search_limit
};

/// Mean of the per-draw thresholds with a normal-approximation 95% interval.
/// Infinite thresholds are capped at eps_search_limit(model).
MeanEstimate mean_threshold(const std::vector<double>& eps_bars, double cap);
MeanEstimate estimate_threshold_expectation(const Model& model, const Regularizer& reg, int n_trials,
                                            std::uint64_t seed, unsigned threads = 1);

/// Linear regularizer for a grid row: uniform on sqrt(n) S^{n-1}, or the
/// sparse vector sqrt(n) e_1.
Vec draw_linear_p(int n, const std::string& p_mode, std::uint64_t master_seed);

struct GridConfig {
  std::string model = "hypercube";  // hypercube | birkhoff | simplex
  std::vector<int> sizes;           // n_list, or d for birkhoff
  std::string regularizer = "quadratic";
  std::string p_mode = "uniform";  // uniform | sparse
  double eps_min = 1e-3;
  double eps_max = 1.0;
  int eps_points = 12;
  int trials = 20;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
  unsigned threads = 1;
};

/// key=value lines; '#' starts a comment. Unknown keys, bad values and a
/// missing seed raise Error(Config) naming the line.
GridConfig parse_config(std::istream& in);
GridConfig load_config(const std::filesystem::path& path);

std::vector<double> log_spaced(double lo, double hi, int points);

struct GridCell {
  std::string model;
  int n = 0;
  double eps = 0.0;
  int trials = 0;
  int failures = 0;
  double p_fail = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<std::pair<std::string, double>> bounds;
};

struct ThresholdRow {
  std::string model;
  int n = 0;
  double mean_eps_bar = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double bound_lower = 0.0;  // nan when no bound applies
};

struct GridResult {
  GridConfig config;
  std::vector<double> eps_grid;
  std::vector<int> n_grid;
  std::vector<GridCell> cells;
  std::vector<ThresholdRow> thresholds;
  std::vector<std::vector<double>> eps_bars;  // per n-row, per trial
  std::string level_set;                      // e.g. "eps*n^0.75=2"
};

GridResult run_grid(const GridConfig& config);

/// grid.csv, thresholds.csv and meta.json under `dir` (created if missing).
void emit_results(const GridResult& result, const std::filesystem::path& dir);
void write_grid_csv(std::ostream& out, const std::vector<GridCell>& cells);
void write_thresholds_csv(std::ostream& out, const std::vector<ThresholdRow>& rows);
std::vector<GridCell> read_grid_csv(std::istream& in);
std::vector<ThresholdRow> read_thresholds_csv(std::istream& in);

}  // namespace exactreg::experiments
