#include "exactreg/gaussmc.hpp"

#include <array>
#include <cmath>
#include <numbers>

#include "exactreg/error.hpp"
#include "exactreg/parallel.hpp"

namespace exactreg::mc {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr double kWilsonZ = 1.959963984540054;
constexpr std::uint64_t kMinSamples = 1000;

void require_samples(const McConfig& cfg) {
  if (cfg.samples < kMinSamples) {
    throw Error(ErrorKind::Precondition, "Monte-Carlo estimates need at least 1000 samples");
  }
}

// Row-major copy of S for tight membership loops.
struct Membership {
  explicit Membership(const Cone& C)
      : rows(C.num_facets()), cols(C.ambient_dim()), S(static_cast<std::size_t>(rows * cols)) {
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) S[static_cast<std::size_t>(i * cols + j)] = C.normals()(i, j);
  }

  // S (x - shift) >= -tol
  bool contains(const double* x, const double* shift, double tol = kGeomTol) const {
    for (int i = 0; i < rows; ++i) {
      const double* s = &S[static_cast<std::size_t>(i * cols)];
      double acc = 0.0;
      for (int j = 0; j < cols; ++j) acc += s[j] * (x[j] - (shift ? shift[j] : 0.0));
      if (acc < -tol) return false;
    }
    return true;
  }

  int rows;
  int cols;
  std::vector<double> S;
};

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> labels) {
  std::uint64_t h = mix64(seed + kGolden);
  for (std::uint64_t label : labels) h = mix64(h ^ mix64(label + 0x632BE59BD9B4E019ULL));
  return h;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double inverse_normal_cdf(double u) {
  if (!(u > 0.0 && u < 1.0)) throw Error(ErrorKind::InvalidInput, "normal quantile needs 0 < u < 1");
  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                           1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                           6.680131188771972e+01, -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                           -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                           3.754408661907416e+00};
  constexpr double p_low = 0.02425;
  double x;
  if (u < p_low) {
    const double q = std::sqrt(-2.0 * std::log(u));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (u <= 1.0 - p_low) {
    const double q = u - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log(1.0 - u));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  // Halley refinement.
  const double e = normal_cdf(x) - u;
  const double step = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
  return x - step / (1.0 + 0.5 * x * step);
}

GaussianStream::GaussianStream(std::uint64_t seed, int dim) : seed_(seed), key_(mix64(seed ^ 0xD1B54A32D192ED03ULL)), dim_(dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidDimension, "stream dimension must be >= 1");
}

void GaussianStream::fill(std::uint64_t k, double* out) const {
  const std::uint64_t base = k * static_cast<std::uint64_t>(dim_);
  for (int j = 0; j < dim_; ++j) {
    const std::uint64_t bits = mix64(key_ + (base + static_cast<std::uint64_t>(j) + 1) * kGolden);
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    out[j] = inverse_normal_cdf(u);
  }
}

Vec GaussianStream::at(std::uint64_t k) const {
  Vec x(dim_);
  fill(k, x.data());
  return x;
}

Interval wilson_interval(std::uint64_t hits, std::uint64_t trials) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = kWilsonZ * kWilsonZ;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = kWilsonZ / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  Interval iv{std::max(0.0, center - half), std::min(1.0, center + half)};
  // Guard the ordering against rounding at p = 0 or 1.
  iv.low = std::min(iv.low, p);
  iv.high = std::max(iv.high, p);
  return iv;
}

double MCEstimate::std_error() const {
  if (n_samples == 0) return 0.0;
  return std::sqrt(p_hat * (1.0 - p_hat) / static_cast<double>(n_samples));
}

MCEstimate make_estimate(std::uint64_t hits, std::uint64_t samples, std::uint64_t seed) {
  MCEstimate e;
  e.hits = hits;
  e.n_samples = samples;
  e.seed = seed;
  e.p_hat = samples ? static_cast<double>(hits) / static_cast<double>(samples) : 0.0;
  const Interval iv = wilson_interval(hits, samples);
  e.ci_low = iv.low;
  e.ci_high = iv.high;
  return e;
}

std::vector<std::uint64_t> sample_counts(int dim, const McConfig& cfg, int num_counters, const SampleVisitor& visit) {
  const std::uint64_t shards = (cfg.samples + kShardSize - 1) / kShardSize;
  std::vector<std::vector<std::uint64_t>> per_shard(shards, std::vector<std::uint64_t>(static_cast<std::size_t>(num_counters), 0));
  parallel_for(static_cast<std::size_t>(shards), cfg.threads, [&](std::size_t s) {
    const GaussianStream stream(derive_seed(cfg.seed, {s}), dim);
    const std::uint64_t begin = s * kShardSize;
    const std::uint64_t end = std::min(cfg.samples, begin + kShardSize);
    std::vector<double> x(static_cast<std::size_t>(dim));
    auto& counts = per_shard[s];
    for (std::uint64_t k = 0; k < end - begin; ++k) {
      stream.fill(k, x.data());
      visit(x.data(), counts.data());
    }
  });
  std::vector<std::uint64_t> total(static_cast<std::size_t>(num_counters), 0);
  for (const auto& counts : per_shard)
    for (int c = 0; c < num_counters; ++c) total[static_cast<std::size_t>(c)] += counts[static_cast<std::size_t>(c)];
  return total;
}

MCEstimate mc_cone_measure(const Cone& C, const Vec& w, const McConfig& cfg) {
  require_samples(cfg);
  if (w.size() != C.ambient_dim()) throw Error(ErrorKind::InvalidInput, "shift has wrong dimension");
  const Membership mem(C);
  const auto counts = sample_counts(C.ambient_dim(), cfg, 1, [&](const double* x, std::uint64_t* c) {
    if (mem.contains(x, w.data())) ++c[0];
  });
  return make_estimate(counts[0], cfg.samples, cfg.seed);
}

MCEstimate mc_facet_relative_measure(const Cone& C, int facet, const McConfig& cfg) {
  require_samples(cfg);
  if (facet < 0 || facet >= C.num_facets()) throw Error(ErrorKind::InvalidInput, "facet index out of range");
  const Membership mem(C);
  const Vec s = C.normals().row(facet).transpose();
  const int n = C.ambient_dim();
  const auto counts = sample_counts(n, cfg, 1, [&](const double* x, std::uint64_t* c) {
    double dot = 0.0;
    for (int j = 0; j < n; ++j) dot += x[j] * s(j);
    double proj[64];
    std::vector<double> heap;
    double* y = proj;
    if (n > 64) {
      heap.resize(static_cast<std::size_t>(n));
      y = heap.data();
    }
    for (int j = 0; j < n; ++j) y[j] = x[j] - dot * s(j);
    if (mem.contains(y, nullptr)) ++c[0];
  });
  return make_estimate(counts[0], cfg.samples, cfg.seed);
}

ShiftEstimates mc_shift_estimates(const Cone& C, const Vec& w, const McConfig& cfg) {
  require_samples(cfg);
  if (w.size() != C.ambient_dim()) throw Error(ErrorKind::InvalidInput, "shift has wrong dimension");
  const Membership mem(C);
  const auto counts = sample_counts(C.ambient_dim(), cfg, 3, [&](const double* x, std::uint64_t* c) {
    const bool in_cone = mem.contains(x, nullptr);
    const bool in_shift = mem.contains(x, w.data());
    if (in_cone) ++c[0];
    if (in_shift) ++c[1];
    if (in_cone && in_shift) ++c[2];
  });
  ShiftEstimates out;
  out.cone = make_estimate(counts[0], cfg.samples, cfg.seed);
  out.shifted = make_estimate(counts[1], cfg.samples, cfg.seed);
  out.inner = make_estimate(counts[2], cfg.samples, cfg.seed);
  out.margin = make_estimate(counts[0] - counts[2], cfg.samples, cfg.seed);
  return out;
}

MCEstimate mc_margin_measure(const Cone& C, const Vec& w, const McConfig& cfg) {
  return mc_shift_estimates(C, w, cfg).margin;
}

MCEstimate mc_inner_cone_measure(const Cone& C, const Vec& w, const McConfig& cfg) {
  return mc_shift_estimates(C, w, cfg).inner;
}

}  // namespace exactreg::mc
