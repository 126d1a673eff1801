#include "homtest/transmitter.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homtest {

namespace {

constexpr double kLn2 = std::numbers::ln2;

// Intensity-FWHM to Gaussian-sigma conversion.
double sigma_from_fwhm(double fwhm) { return fwhm / (2.0 * std::sqrt(2.0 * kLn2)); }

}  // namespace

std::string to_string(Bb84State s) {
  switch (s) {
    case Bb84State::X0: return "X0";
    case Bb84State::X1: return "X1";
    case Bb84State::Y0: return "Y0";
    case Bb84State::Y1: return "Y1";
    case Bb84State::Unmodulated: return "unmodulated";
  }
  return "?";
}

Bb84State bb84_from_string(const std::string& name) {
  if (name == "X0") return Bb84State::X0;
  if (name == "X1") return Bb84State::X1;
  if (name == "Y0") return Bb84State::Y0;
  if (name == "Y1") return Bb84State::Y1;
  if (name == "unmodulated" || name == "U") return Bb84State::Unmodulated;
  throw std::invalid_argument("unknown signal state name: " + name);
}

void LaserModel::validate() const {
  if (pulse_duration_ps <= 0.0) {
    throw std::invalid_argument("LaserModel: pulse duration must be > 0");
  }
  if (timing_jitter_ps < 0.0 || center_freq_jitter_ghz < 0.0) {
    throw std::invalid_argument("LaserModel: jitters must be >= 0");
  }
  if (intensity_variance < 0.0 || intensity_variance >= 1.0) {
    throw std::invalid_argument("LaserModel: intensity variance must be in [0, 1)");
  }
}

double EmittedPulse::total_mean_photons() const {
  return std::norm(amp_bin0) + std::norm(amp_bin1);
}

EmittedPulse encode_bb84(Bb84State state, double mu, double phi) {
  if (mu < 0.0) throw std::invalid_argument("encode_bb84: mu must be >= 0");
  const std::complex<double> base =
      std::sqrt(0.5 * mu) * std::complex<double>(std::cos(phi), std::sin(phi));
  std::complex<double> c{1.0, 0.0};
  switch (state) {
    case Bb84State::X0:
    case Bb84State::Unmodulated: c = {1.0, 0.0}; break;
    case Bb84State::X1: c = {-1.0, 0.0}; break;
    case Bb84State::Y0: c = {0.0, 1.0}; break;
    case Bb84State::Y1: c = {0.0, -1.0}; break;
  }
  EmittedPulse pulse;
  pulse.state = state;
  pulse.amp_bin0 = base;
  pulse.amp_bin1 = base * c;
  pulse.global_phase = phi;
  return pulse;
}

EmittedPulse sample_pulse(const LaserModel& laser, Bb84State state, double mu,
                          RandomStream& rng) {
  laser.validate();
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  EmittedPulse pulse = encode_bb84(state, mu, phi);
  pulse.emission_offset_ps = rng.gaussian(0.0, laser.timing_jitter_ps);
  const double delta = rng.gaussian(0.0, std::sqrt(laser.intensity_variance));
  pulse.intensity_scale = std::max(0.0, 1.0 + delta);
  // The bin amplitudes carry the energy fluctuation, so the total mean photon
  // number of the pulse is mu times the recorded scale.
  const double amp_scale = std::sqrt(pulse.intensity_scale);
  pulse.amp_bin0 *= amp_scale;
  pulse.amp_bin1 *= amp_scale;
  pulse.center_freq_offset_ghz = rng.gaussian(0.0, laser.center_freq_jitter_ghz);
  return pulse;
}

double timing_overlap(double d_ps, double tau_p_ps) {
  if (tau_p_ps <= 0.0) throw std::invalid_argument("timing_overlap: tau_p > 0");
  const double sigma = sigma_from_fwhm(tau_p_ps);
  return std::erfc(std::abs(d_ps) / (2.0 * std::numbers::sqrt2 * sigma));
}

double jitter_factor(double tau_p_ps, double jitter_std_ps) {
  if (tau_p_ps <= 0.0) throw std::invalid_argument("jitter_factor: tau_p > 0");
  if (jitter_std_ps < 0.0) {
    throw std::invalid_argument("jitter_factor: jitter std must be >= 0");
  }
  if (jitter_std_ps == 0.0) return 1.0;
  const double sigma = sigma_from_fwhm(tau_p_ps);
  return 2.0 / std::numbers::pi * std::atan(2.0 * sigma / jitter_std_ps);
}

std::pair<double, double> intensity_factor_stats(double intensity_variance) {
  if (intensity_variance < 0.0) {
    throw std::invalid_argument("intensity_factor_stats: variance must be >= 0");
  }
  const double mean = 0.5 * (1.0 - 0.5 * intensity_variance);
  const double var = 0.25 * intensity_variance * intensity_variance;
  return {mean, var};
}

double spectral_fwhm_thz(double tau_p_ps, double chirp) {
  if (tau_p_ps <= 0.0) throw std::invalid_argument("spectral_fwhm: tau_p > 0");
  return (2.0 * kLn2 / std::numbers::pi) * std::sqrt(1.0 + chirp * chirp) /
         tau_p_ps;
}

double chirped_spectrum(double nu_thz, double tau_p_ps, double chirp) {
  if (tau_p_ps <= 0.0) throw std::invalid_argument("chirped_spectrum: tau_p > 0");
  const double tau_a = tau_p_ps / std::sqrt(2.0 * kLn2);
  const double arg = 2.0 * std::numbers::pi * std::numbers::pi * tau_a * tau_a *
                     nu_thz * nu_thz / (1.0 + chirp * chirp);
  return std::exp(-arg);
}

double hom_dip_profile(double t_ps, double tau_p_ps, double chirp) {
  return 1.0 - 0.5 * delay_overlap(t_ps, tau_p_ps, chirp);
}

double dip_sigma_ps(double tau_p_ps, double chirp) {
  return tau_p_ps / std::sqrt(8.0 * kLn2 * (1.0 + chirp * chirp));
}

double chirp_from_dip(double tau_p_ps, double sigma_dip_ps) {
  if (tau_p_ps <= 0.0 || sigma_dip_ps <= 0.0) {
    throw std::invalid_argument("chirp_from_dip: needs positive widths");
  }
  const double ratio = tau_p_ps * tau_p_ps /
                       (8.0 * kLn2 * sigma_dip_ps * sigma_dip_ps);
  if (ratio < 1.0 - 1e-9) {
    throw std::domain_error(
        "chirp_from_dip: dip wider than the transform limit allows");
  }
  return std::sqrt(std::max(0.0, ratio - 1.0));
}

double delay_overlap(double delta_t_ps, double tau_p_ps, double chirp) {
  if (tau_p_ps <= 0.0) throw std::invalid_argument("delay_overlap: tau_p > 0");
  const double arg = 4.0 * kLn2 * (1.0 + chirp * chirp) * delta_t_ps *
                     delta_t_ps / (tau_p_ps * tau_p_ps);
  return std::exp(-arg);
}

double spectral_overlap(double delta_nu_ghz, double tau_p_ps, double chirp) {
  // Two Gaussian spectra of equal width offset by delta_nu: the squared mode
  // overlap is exp(-delta_nu^2 / (4 sigma_nu^2)).
  const double sigma_nu_ghz =
      1e3 * sigma_from_fwhm(spectral_fwhm_thz(tau_p_ps, chirp));
  const double x = delta_nu_ghz / (2.0 * sigma_nu_ghz);
  return std::exp(-x * x);
}

double filtered_freq_scatter_ghz(double scatter_ghz, double filter_fwhm_ghz) {
  if (scatter_ghz < 0.0) {
    throw std::invalid_argument("filtered_freq_scatter: scatter must be >= 0");
  }
  if (filter_fwhm_ghz <= 0.0) return 0.0;
  const double fs = sigma_from_fwhm(filter_fwhm_ghz);
  // Gaussian bandpass times Gaussian scatter: the surviving scatter variance
  // is the parallel combination of the two.
  return scatter_ghz * fs / std::sqrt(scatter_ghz * scatter_ghz + fs * fs);
}

double effective_overlap_at(const LaserModel& laser, double filter_fwhm_ghz,
                            double delta_nu_ghz, double relative_delay_ps) {
  laser.validate();
  double dnu = delta_nu_ghz;
  if (laser.center_freq_jitter_ghz > 0.0) {
    const double shrink = filtered_freq_scatter_ghz(laser.center_freq_jitter_ghz,
                                                    filter_fwhm_ghz) /
                          laser.center_freq_jitter_ghz;
    dnu *= shrink;
  }
  return spectral_overlap(dnu, laser.pulse_duration_ps, laser.chirp) *
         delay_overlap(relative_delay_ps, laser.pulse_duration_ps, laser.chirp);
}

double effective_overlap(const LaserModel& laser, double filter_fwhm_ghz,
                         RandomStream& rng) {
  const double nu1 = rng.gaussian(0.0, laser.center_freq_jitter_ghz);
  const double nu2 = rng.gaussian(0.0, laser.center_freq_jitter_ghz);
  const double d1 = rng.gaussian(0.0, laser.timing_jitter_ps);
  const double d2 = rng.gaussian(0.0, laser.timing_jitter_ps);
  return effective_overlap_at(laser, filter_fwhm_ghz, nu2 - nu1, d2 - d1);
}

}  // namespace homtest
