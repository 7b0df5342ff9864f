#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>

namespace cogmac {

// Stream tags used to derive named sub-streams from the master seed, so that
// e.g. adding users never perturbs the environment draw (common random numbers).
enum class StreamTag : std::uint64_t {
  kEnvironment = 0x01,
  kTheta = 0x02,
  kUser = 0x03,
  kContention = 0x04,
  kStrategy = 0x05,
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

/// mt19937_64 wrapper with hand-rolled draw helpers so that outputs depend only
/// on the engine stream, not on library-specific distribution internals.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return u01() < p; }

  /// Uniform integer in [0, n), n >= 1. Rejection sampling, no modulo bias.
  int uniform_int(int n) {
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v;
    do {
      v = gen_();
    } while (v >= limit);
    return static_cast<int>(v % bound);
  }

  /// Draw an index proportional to the (nonnegative, not necessarily
  /// normalized) weights. The caller guarantees a positive total.
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = u01() * total;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 gen_;
};

/// Derive a named sub-stream from the master seed and a tag path
/// (e.g. {kUser, replication, user_id}).
inline Rng substream(std::uint64_t master, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = detail::splitmix64(master);
  for (std::uint64_t p : path) s = detail::splitmix64(s ^ detail::splitmix64(p + 0x632be59bd9b4e019ULL));
  return Rng(s);
}

inline Rng substream(std::uint64_t master, StreamTag tag, std::uint64_t a = 0, std::uint64_t b = 0) {
  return substream(master, {static_cast<std::uint64_t>(tag), a, b});
}

// --- sampling helpers ------------------------------------------------------

/// Gamma(shape, 1) via Marsaglia-Tsang squeeze; shape < 1 handled by boosting.
inline double sample_gamma(Rng& rng, double shape) {
  if (shape < 1.0) {
    const double u = rng.u01();
    return sample_gamma(rng, shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      // Box-Muller normal from two uniforms; avoids std::normal_distribution
      // so the draw sequence is engine-defined only.
      const double u1 = rng.u01();
      const double u2 = rng.u01();
      x = std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(6.283185307179586477 * u2);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.u01();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

inline double sample_beta(Rng& rng, double a, double b) {
  const double x = sample_gamma(rng, a);
  const double y = sample_gamma(rng, b);
  return x / (x + y);
}

}  // namespace cogmac
