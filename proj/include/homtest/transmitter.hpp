#pragma once

#include <complex>
#include <string>
#include <utility>

#include "homtest/rng.hpp"

namespace homtest {

// Time-bin signal states: the four encoded states plus the unmodulated
// double-pulse used as the interference reference.
enum class Bb84State { X0, X1, Y0, Y1, Unmodulated };

std::string to_string(Bb84State s);
Bb84State bb84_from_string(const std::string& name);

// Gain-switched laser description. Durations in ps, frequencies in THz unless
// noted; intensity_variance is the relative variance of the per-pulse energy.
struct LaserModel {
  double pulse_duration_ps = 30.0;   // intensity FWHM
  double chirp = 4.0;                // linear chirp parameter
  double timing_jitter_ps = 0.5;     // std dev of per-pulse emission offset
  double intensity_variance = 7e-4;  // relative variance of per-pulse energy
  double center_frequency_thz = 193.4;
  double center_freq_jitter_ghz = 68.0;  // std dev of per-pulse center scatter

  void validate() const;
};

// One emitted double-pulse: complex amplitude per time bin plus the per-pulse
// random draws that make pulses distinguishable in practice.
struct EmittedPulse {
  Bb84State state = Bb84State::Unmodulated;
  std::complex<double> amp_bin0;
  std::complex<double> amp_bin1;
  double global_phase = 0.0;      // radians, uniform per pulse
  double emission_offset_ps = 0.0;
  double intensity_scale = 1.0;
  double center_freq_offset_ghz = 0.0;

  double total_mean_photons() const;
};

// Deterministic part of the encoding: per-bin amplitudes sqrt(mu/2) e^{i phi}
// times {1, c} with c in {+1, -1, +i, -i}; the unmodulated state keeps c = +1.
EmittedPulse encode_bb84(Bb84State state, double mu, double phi);

// Encoding plus the stochastic per-pulse draws (phase, timing, intensity,
// center-frequency scatter) from the given stream.
EmittedPulse sample_pulse(const LaserModel& laser, Bb84State state, double mu,
                          RandomStream& rng);

// Overlap of two equal-width Gaussian intensity envelopes whose peaks differ
// by d: erfc(|d| / (2 sqrt2 sigma)) with sigma from the FWHM.
double timing_overlap(double d_ps, double tau_p_ps);

// Expected timing overlap under Gaussian peak jitter of std s:
// (2/pi) arctan(2 sigma / s). Equals the jitter average of timing_overlap.
double jitter_factor(double tau_p_ps, double jitter_std_ps);

// Leading-order mean and variance of the visibility prefactor
// 2 mu_a mu_b / (mu_a + mu_b)^2 under independent relative intensity
// fluctuations of variance s_I^2 on each pulse.
std::pair<double, double> intensity_factor_stats(double intensity_variance);

// Spectral density of a linearly chirped Gaussian pulse at detuning nu from
// the carrier, normalized to 1 at the peak.
double chirped_spectrum(double nu_thz, double tau_p_ps, double chirp);

// FWHM of that spectrum: (2 ln2 / pi) sqrt(1 + a^2) / tau_p.
double spectral_fwhm_thz(double tau_p_ps, double chirp);

// Normalized coincidence profile of the interference dip at delay t from the
// dip center: 1 - exp(-4 ln2 (1+a^2) t^2 / tau_p^2) / 2.
double hom_dip_profile(double t_ps, double tau_p_ps, double chirp);

// Gaussian width of the dip implied by (tau_p, a).
double dip_sigma_ps(double tau_p_ps, double chirp);

// Invert the dip width to the chirp parameter. Throws a domain error when the
// dip is wider than the transform limit allows.
double chirp_from_dip(double tau_p_ps, double sigma_dip_ps);

// Squared mode overlap of two identically chirped pulses offset in time by
// delta_t; this is the delay dependence behind hom_dip_profile.
double delay_overlap(double delta_t_ps, double tau_p_ps, double chirp);

// Squared spectral overlap of two pulses whose center frequencies differ by
// delta_nu (GHz), for the chirped-Gaussian spectrum of (tau_p, a).
double spectral_overlap(double delta_nu_ghz, double tau_p_ps, double chirp);

// Effective center-frequency scatter (GHz std per pulse) after a Gaussian
// bandpass of the given FWHM; narrowing the filter suppresses the scatter.
double filtered_freq_scatter_ghz(double scatter_ghz, double filter_fwhm_ghz);

// One sampled squared overlap cos^2(Theta) for a pulse pair: the product of a
// spectral factor (per-pulse center-frequency scatter through the bandpass)
// and a timing factor (chirped-pulse overlap at the jittered relative delay).
double effective_overlap(const LaserModel& laser, double filter_fwhm_ghz,
                         RandomStream& rng);

// Deterministic form used by the detection chain: squared overlap for a known
// center-frequency difference and relative delay.
double effective_overlap_at(const LaserModel& laser, double filter_fwhm_ghz,
                            double delta_nu_ghz, double relative_delay_ps);

}  // namespace homtest
