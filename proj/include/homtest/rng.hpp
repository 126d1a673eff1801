#pragma once

#include <cmath>
#include <cstdint>

namespace homtest {

// Counter-based pseudorandom stream built on splitmix64. Every stream is
// derived from a master seed plus a list of stream labels, so any pulse or
// trial can be regenerated in isolation, independent of execution order or
// worker count.
class RandomStream {
 public:
  explicit RandomStream(uint64_t seed) : state_(mix(seed ^ kGolden)) {}

  // Derive a child stream keyed by a label. Children with different labels
  // are statistically independent of each other and of the parent.
  RandomStream child(uint64_t label) const {
    RandomStream r(0);
    r.state_ = mix(mix(state_ ^ kGolden) + mix(label ^ 0x9e3779b97f4a7c15ULL));
    return r;
  }

  uint64_t next_u64() {
    state_ += kGolden;
    return mix(state_);
  }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via polar Box-Muller; caches the second variate.
  double gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_ = v * f;
    has_cached_ = true;
    return u * f;
  }

  double gaussian(double mean, double stddev) {
    return mean + stddev * gaussian();
  }

  // Poisson variate by inversion; adequate for the mean photon numbers used
  // here (restarts from a fresh uniform for mean > 30 via normal approx).
  int poisson(double mean) {
    if (mean <= 0.0) return 0;
    if (mean > 30.0) {
      const int n = static_cast<int>(std::lround(gaussian(mean, std::sqrt(mean))));
      return n < 0 ? 0 : n;
    }
    const double l = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > l);
    return k - 1;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // UniformRandomBitGenerator interface.
  using result_type = uint64_t;
  static constexpr uint64_t min() { return 0; }
  static constexpr uint64_t max() { return ~0ULL; }
  uint64_t operator()() { return next_u64(); }

 private:
  static constexpr uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static uint64_t mix(uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  uint64_t state_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace homtest
