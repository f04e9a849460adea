#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "exactreg/geometry.hpp"
#include "exactreg/types.hpp"

namespace exactreg::mc {

using geometry::Cone;

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Hash of a master seed with a sequence of integer labels.
std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels);

/// Standard normal CDF.
double normal_cdf(double x);

/// Quantile of the standard normal; u must lie in (0, 1). Rational
/// approximation refined by one Halley step (CDF error well below 1e-12).
double inverse_normal_cdf(double u);

/// Counter-based stream of standard normal vectors: vector k is a pure
/// function of (seed, dim, k).
class GaussianStream {
 public:
  GaussianStream(std::uint64_t seed, int dim);

  int dim() const { return dim_; }
  std::uint64_t seed() const { return seed_; }

  Vec at(std::uint64_t k) const;
  void fill(std::uint64_t k, double* out) const;

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  int dim_;
};

/// Wilson score interval at 95% (z = 1.959963984540054).
struct Interval {
  double low = 0.0;
  double high = 1.0;
};
Interval wilson_interval(std::uint64_t hits, std::uint64_t trials);

struct MCEstimate {
  double p_hat = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t n_samples = 0;
  double ci_low = 0.0;
  double ci_high = 1.0;
  std::uint64_t seed = 0;

  /// Binomial standard error sqrt(p(1-p)/N).
  double std_error() const;
};

MCEstimate make_estimate(std::uint64_t hits, std::uint64_t samples, std::uint64_t seed);

struct McConfig {
  std::uint64_t samples = 10'000;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // 0 = hardware concurrency
};

// Samples are grouped into fixed-size shards; shard s draws from
// GaussianStream(derive_seed(seed, {s}), dim). Counts are integers, so the
// result is bit-identical for any thread count.
inline constexpr std::uint64_t kShardSize = std::uint64_t{1} << 16;

using SampleVisitor = std::function<void(const double* x, std::uint64_t* counters)>;

/// Draws cfg.samples Gaussian vectors and lets `visit` bump any of
/// `num_counters` counters per sample. Returns the summed counters.
std::vector<std::uint64_t> sample_counts(int dim, const McConfig& cfg, int num_counters, const SampleVisitor& visit);

/// gamma(C + w): fraction of samples x with x - w in C.
MCEstimate mc_cone_measure(const Cone& C, const Vec& w, const McConfig& cfg);

/// Relative Gaussian measure of facet i: samples are projected onto the
/// hyperplane orthogonal to s^i and tested for membership in C.
MCEstimate mc_facet_relative_measure(const Cone& C, int facet, const McConfig& cfg);

/// gamma(C \ [C + w]).
MCEstimate mc_margin_measure(const Cone& C, const Vec& w, const McConfig& cfg);

/// gamma(C cap [C + w]).
MCEstimate mc_inner_cone_measure(const Cone& C, const Vec& w, const McConfig& cfg);

/// The four measures above (with w = 0 for `cone`) from one shared sample.
struct ShiftEstimates {
  MCEstimate cone;
  MCEstimate shifted;
  MCEstimate inner;
  MCEstimate margin;
};
ShiftEstimates mc_shift_estimates(const Cone& C, const Vec& w, const McConfig& cfg);

}  // namespace exactreg::mc
