#pragma once

// Shared oracles for the test suites. Everything here recomputes expected
// values along an independent route (quadrature, explicit sampling, or
// eigendecompositions) from the closed forms under test.

#include <cmath>
#include <numbers>
#include <utility>

#include "homtest/coherent.hpp"
#include "homtest/quadrature.hpp"
#include "homtest/rng.hpp"

namespace homtest::testing {

struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

// Average coincidence_prob over uniformly sampled relative phases.
// Kahan-compensated sums keep the roundoff floor far below the tolerance
// even when the integrand is phase-independent (zero sampling variance).
inline McEstimate mc_phase_average_coincidence(double mu_a, double mu_b,
                                               double overlap_angle, int n,
                                               uint64_t seed) {
  RandomStream rng(seed);
  double sum = 0.0, comp = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double p = coincidence_prob({mu_a, mu_b, theta, overlap_angle});
    const double y = p - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    sum_sq += p * p;
  }
  McEstimate e;
  e.mean = sum / n;
  const double var = std::max(0.0, sum_sq / n - e.mean * e.mean);
  e.stderr_ = std::sqrt(var / n);
  return e;
}

// Photon-sampling estimate of the coincidence probability at fixed phase:
// draw Poisson photon numbers at the two output ports and count both-fired.
inline McEstimate mc_photon_coincidence(const PulsePair& pair, int n,
                                        uint64_t seed) {
  RandomStream rng(seed);
  const auto [mu_c, mu_d] = mean_output_photons(pair);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    if (rng.poisson(mu_c) >= 1 && rng.poisson(mu_d) >= 1) ++hits;
  }
  McEstimate e;
  e.mean = static_cast<double>(hits) / n;
  e.stderr_ = std::sqrt(e.mean * (1.0 - e.mean) / n);
  return e;
}

// Photon-sampling estimate of the visibility: phase-randomized coincidence
// rate against the no-interference singles product.
inline McEstimate mc_visibility(double mu, double overlap_angle, int n,
                                uint64_t seed) {
  RandomStream rng(seed);
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const auto [mu_c, mu_d] =
        mean_output_photons({mu, mu, theta, overlap_angle});
    if (rng.poisson(mu_c) >= 1 && rng.poisson(mu_d) >= 1) ++hits;
  }
  const double p = static_cast<double>(hits) / n;
  const double p_se = std::sqrt(p * (1.0 - p) / n);
  const double singles = 1.0 - std::exp(-mu);
  McEstimate e;
  e.mean = 1.0 - p / (singles * singles);
  e.stderr_ = p_se / (singles * singles);
  return e;
}

// Quadrature of the integral definition of I0.
inline double quad_bessel_i0(double z, int n = 256) {
  return phase_average([z](double t) { return std::exp(z * std::cos(t)); }, n);
}

// Quadrature of the phase average of the coincidence probability.
inline double quad_phase_average_coincidence(double mu_a, double mu_b,
                                             double overlap_angle) {
  return phase_average(
      [&](double theta) {
        return coincidence_prob({mu_a, mu_b, theta, overlap_angle});
      },
      128);
}

}  // namespace homtest::testing
