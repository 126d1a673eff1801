#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "homtest/coherent.hpp"
#include "homtest/rng.hpp"
#include "homtest/transmitter.hpp"

namespace homtest {

struct DetectorModel {
  double efficiency = 0.63;
  double dark_rate_hz = 20.0;
  double recovery_time_ns = 10.0;
  double jitter_sigma_ps = 24.0;

  void validate() const;
};

struct TiaModel {
  double resolution_ps = 100.0;
  double jitter_ps = 28.0;
  double coincidence_window_ps = 200.0;

  void validate() const;
};

// Full apparatus description for one run. Durations in the units of the
// member names; delay offsets are the swept Michelson path-difference values
// relative to one clock cycle.
struct ExperimentConfig {
  double rep_period_ps = 800.0;
  double bin_separation_ps = 400.0;
  double thinning_interval_ns = 51.2;
  double mean_photons_per_pulse = 0.5;
  std::vector<double> delay_offsets_ps = {-26, -16, -6, -4, -2, 0,
                                          2,   4,   6,  16, 26};
  double duration_per_point_s = 30.0;
  int repeats = 5;
  std::vector<std::pair<Bb84State, Bb84State>> state_pairs = {
      {Bb84State::Unmodulated, Bb84State::Unmodulated},
      {Bb84State::X1, Bb84State::X0},
      {Bb84State::Y0, Bb84State::X0},
      {Bb84State::Y1, Bb84State::X0},
  };
  LaserModel laser;
  DetectorModel detector_c;
  DetectorModel detector_d;
  TiaModel tia;
  int z_basis_window = 0;  // which time bin the measurement gate selects

  double spectral_filter_fwhm_ghz = 100.0;
  double dip_center_ps = 1.05;   // Michelson calibration offset
  double arm_transmission = 1.0; // folded loss per interfering arm
  double z_gate_ps = 200.0;      // dark-count acceptance gate

  // Optional distinguishability defect: pairs containing this state get
  // their squared overlap scaled down, lowering that group's visibility.
  std::optional<Bb84State> defect_state;
  double defect_overlap_scale = 1.0;

  int64_t trials_per_point() const;
  void validate() const;
};

// Coincidence counts for one measurement group: counts[point][repeat], plus
// derived per-point mean and sample std across repeats. Normalization divides
// mean and std by the mean at the reference delay.
struct CoincidenceHistogram {
  std::string group;
  Bb84State state_a = Bb84State::Unmodulated;
  Bb84State state_b = Bb84State::Unmodulated;
  std::vector<double> tau_ps;
  std::vector<std::vector<int64_t>> counts;
  int64_t trials = 0;
  double tau_ref_ps = -26.0;
  bool normalized = false;
  std::vector<double> mean;
  std::vector<double> stddev;

  void recompute_stats();
  int point_count() const { return static_cast<int>(tau_ps.size()); }
  int repeat_count() const {
    return counts.empty() ? 0 : static_cast<int>(counts.front().size());
  }
};

// Map two emitted pulses meeting through the delay line onto the two-mode
// pulse-pair description: bin intensities from the measurement gate, phase
// difference from the per-pulse phases, overlap from spectra and timing.
PulsePair interfere_adjacent(const EmittedPulse& first,
                             const EmittedPulse& second, double tau_ps,
                             const ExperimentConfig& config);

struct ClickResult {
  bool click_c = false;
  bool click_d = false;
  double time_c_ps = 0.0;
  double time_d_ps = 0.0;
};

// Threshold-detector click sampling for one trial: Poisson click statistics
// with efficiency, dark counts in the gate, and jitter-smeared, quantized
// timestamps. Recovery suppression is handled by the caller via timestamps.
ClickResult sample_clicks(std::pair<double, double> port_means,
                          const DetectorModel& det_c, const DetectorModel& det_d,
                          const TiaModel& tia, double dark_prob,
                          RandomStream& rng);

// Simulate the full sweep for every configured state pair. Deterministic for
// a given (config, seed); points are simulated on a thread pool with
// per-point derived streams so the worker count never changes the result.
// workers = 0 uses the hardware concurrency.
std::vector<CoincidenceHistogram> run_experiment(const ExperimentConfig& config,
                                                 uint64_t seed,
                                                 unsigned workers = 0);

// Divide means and stds by the mean at the reference delay. Throws when the
// reference mean is zero or the reference point is missing.
CoincidenceHistogram normalize_histogram(const CoincidenceHistogram& h);

}  // namespace homtest
