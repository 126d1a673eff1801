#include "homtest/detection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <future>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace homtest {

namespace {

// Above this many trials per point the per-trial loop switches to a
// statistically equivalent binomial draw around a Monte-Carlo estimate of the
// mean coincidence probability (valid because thinned trials are
// independent). Dense configs where detector recovery matters keep the exact
// loop regardless.
constexpr int64_t kExactTrialCap = 2'000'000;
constexpr int64_t kEstimatorSamples = 200'000;

struct TrialOutcome {
  bool coincidence = false;
  bool click_c = false;
  bool click_d = false;
  double t_abs_c = 0.0;
  double t_abs_d = 0.0;
};

double quantize(double t_ps, double resolution_ps) {
  if (resolution_ps <= 0.0) return t_ps;
  return std::round(t_ps / resolution_ps) * resolution_ps;
}

}  // namespace

void DetectorModel::validate() const {
  if (efficiency < 0.0 || efficiency > 1.0) {
    throw std::invalid_argument("DetectorModel: efficiency must be in [0, 1]");
  }
  if (dark_rate_hz < 0.0 || recovery_time_ns < 0.0 || jitter_sigma_ps < 0.0) {
    throw std::invalid_argument("DetectorModel: times and rates must be >= 0");
  }
}

void TiaModel::validate() const {
  if (resolution_ps < 0.0 || jitter_ps < 0.0 || coincidence_window_ps <= 0.0) {
    throw std::invalid_argument("TiaModel: invalid timing parameters");
  }
}

int64_t ExperimentConfig::trials_per_point() const {
  return static_cast<int64_t>(duration_per_point_s / (thinning_interval_ns * 1e-9));
}

void ExperimentConfig::validate() const {
  laser.validate();
  detector_c.validate();
  detector_d.validate();
  tia.validate();
  if (delay_offsets_ps.empty()) {
    throw std::invalid_argument("ExperimentConfig: delay offset list is empty");
  }
  if (duration_per_point_s <= 0.0 || thinning_interval_ns <= 0.0) {
    throw std::invalid_argument("ExperimentConfig: durations must be > 0");
  }
  if (trials_per_point() < 1) {
    throw std::invalid_argument("ExperimentConfig: zero trials per point");
  }
  if (repeats < 1) {
    throw std::invalid_argument("ExperimentConfig: repeats must be >= 1");
  }
  if (state_pairs.empty()) {
    throw std::invalid_argument("ExperimentConfig: no state pairs configured");
  }
  if (mean_photons_per_pulse < 0.0) {
    throw std::invalid_argument("ExperimentConfig: mean photons must be >= 0");
  }
  if (z_basis_window != 0 && z_basis_window != 1) {
    throw std::invalid_argument("ExperimentConfig: z window selects bin 0 or 1");
  }
  if (arm_transmission <= 0.0 || arm_transmission > 1.0) {
    throw std::invalid_argument("ExperimentConfig: arm transmission in (0, 1]");
  }
  if (defect_overlap_scale < 0.0 || defect_overlap_scale > 1.0) {
    throw std::invalid_argument("ExperimentConfig: defect scale in [0, 1]");
  }
}

void CoincidenceHistogram::recompute_stats() {
  const int n = point_count();
  mean.assign(n, 0.0);
  stddev.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const auto& reps = counts[i];
    const int r = static_cast<int>(reps.size());
    double m = 0.0;
    for (int64_t c : reps) m += static_cast<double>(c);
    m /= r;
    mean[i] = m;
    if (r >= 2) {
      double ss = 0.0;
      for (int64_t c : reps) {
        const double d = static_cast<double>(c) - m;
        ss += d * d;
      }
      stddev[i] = std::sqrt(ss / (r - 1));
    }
  }
}

PulsePair interfere_adjacent(const EmittedPulse& first,
                             const EmittedPulse& second, double tau_ps,
                             const ExperimentConfig& config) {
  const auto bin_amp = [&](const EmittedPulse& p) {
    return config.z_basis_window == 0 ? p.amp_bin0 : p.amp_bin1;
  };
  const std::complex<double> a1 = bin_amp(first);
  const std::complex<double> a2 = bin_amp(second);

  PulsePair pair;
  pair.mu_a = std::norm(a1) * config.arm_transmission;
  pair.mu_b = std::norm(a2) * config.arm_transmission;
  pair.relative_phase = std::arg(a2) - std::arg(a1);

  const double relative_delay = (tau_ps - config.dip_center_ps) +
                                (second.emission_offset_ps -
                                 first.emission_offset_ps);
  const double delta_nu =
      second.center_freq_offset_ghz - first.center_freq_offset_ghz;
  double cos2 = effective_overlap_at(config.laser, config.spectral_filter_fwhm_ghz,
                                     delta_nu, relative_delay);
  if (config.defect_state &&
      (first.state == *config.defect_state ||
       second.state == *config.defect_state)) {
    cos2 *= config.defect_overlap_scale;
  }
  cos2 = std::clamp(cos2, 0.0, 1.0);
  pair.overlap_angle = std::acos(std::sqrt(cos2));
  return pair;
}

ClickResult sample_clicks(std::pair<double, double> port_means,
                          const DetectorModel& det_c, const DetectorModel& det_d,
                          const TiaModel& tia, double dark_prob,
                          RandomStream& rng) {
  ClickResult out;
  const double p_c = 1.0 - std::exp(-det_c.efficiency * port_means.first);
  const double p_d = 1.0 - std::exp(-det_d.efficiency * port_means.second);
  out.click_c = rng.bernoulli(1.0 - (1.0 - p_c) * (1.0 - dark_prob));
  out.click_d = rng.bernoulli(1.0 - (1.0 - p_d) * (1.0 - dark_prob));
  if (out.click_c) {
    out.time_c_ps = quantize(rng.gaussian(0.0, det_c.jitter_sigma_ps) +
                                 rng.gaussian(0.0, tia.jitter_ps),
                             tia.resolution_ps);
  }
  if (out.click_d) {
    out.time_d_ps = quantize(rng.gaussian(0.0, det_d.jitter_sigma_ps) +
                                 rng.gaussian(0.0, tia.jitter_ps),
                             tia.resolution_ps);
  }
  return out;
}

namespace {

double dark_prob_per_gate(const ExperimentConfig& cfg, const DetectorModel& det) {
  return det.dark_rate_hz * cfg.z_gate_ps * 1e-12;
}

TrialOutcome simulate_trial(const ExperimentConfig& cfg,
                            std::pair<Bb84State, Bb84State> states,
                            double tau_ps, int64_t trial_index,
                            const RandomStream& trial_base) {
  RandomStream rng_first = trial_base.child(1);
  RandomStream rng_second = trial_base.child(2);
  RandomStream rng_det = trial_base.child(3);

  const EmittedPulse p1 = sample_pulse(cfg.laser, states.first,
                                       cfg.mean_photons_per_pulse, rng_first);
  const EmittedPulse p2 = sample_pulse(cfg.laser, states.second,
                                       cfg.mean_photons_per_pulse, rng_second);
  const PulsePair pair = interfere_adjacent(p1, p2, tau_ps, cfg);
  const auto means = mean_output_photons(pair);

  const double base_time = trial_index * cfg.thinning_interval_ns * 1e3;
  ClickResult clicks = sample_clicks(means, cfg.detector_c, cfg.detector_d,
                                     cfg.tia,
                                     dark_prob_per_gate(cfg, cfg.detector_c),
                                     rng_det);
  TrialOutcome out;
  out.click_c = clicks.click_c;
  out.click_d = clicks.click_d;
  out.t_abs_c = base_time + clicks.time_c_ps;
  out.t_abs_d = base_time + clicks.time_d_ps;
  out.coincidence = clicks.click_c && clicks.click_d &&
                    std::abs(clicks.time_c_ps - clicks.time_d_ps) <=
                        cfg.tia.coincidence_window_ps;
  return out;
}

int64_t count_point_exact(const ExperimentConfig& cfg,
                          std::pair<Bb84State, Bb84State> states, double tau_ps,
                          int64_t trials, const RandomStream& point_stream) {
  int64_t coincidences = 0;
  double last_click_c = -1e18;
  double last_click_d = -1e18;
  const double recovery_c = cfg.detector_c.recovery_time_ns * 1e3;
  const double recovery_d = cfg.detector_d.recovery_time_ns * 1e3;
  for (int64_t t = 0; t < trials; ++t) {
    TrialOutcome o = simulate_trial(cfg, states, tau_ps, t,
                                    point_stream.child(static_cast<uint64_t>(t)));
    // Detector dead time: drop clicks arriving too soon after the previous
    // click on the same channel.
    if (o.click_c) {
      if (o.t_abs_c - last_click_c < recovery_c) {
        o.click_c = false;
      } else {
        last_click_c = o.t_abs_c;
      }
    }
    if (o.click_d) {
      if (o.t_abs_d - last_click_d < recovery_d) {
        o.click_d = false;
      } else {
        last_click_d = o.t_abs_d;
      }
    }
    if (o.click_c && o.click_d && o.coincidence) ++coincidences;
  }
  return coincidences;
}

// Large-N path: trials are independent, so the count is binomial in the mean
// per-trial coincidence probability, which is estimated from a fixed number
// of sampled trials. The window acceptance for the timestamp comparison is
// folded into the per-trial probability.
int64_t count_point_binomial(const ExperimentConfig& cfg,
                             std::pair<Bb84State, Bb84State> states,
                             double tau_ps, int64_t trials,
                             const RandomStream& point_stream) {
  RandomStream est = point_stream.child(0xabcdef);
  const double dark = dark_prob_per_gate(cfg, cfg.detector_c);
  double sum_p = 0.0;
  for (int64_t t = 0; t < kEstimatorSamples; ++t) {
    RandomStream trial_base = point_stream.child(static_cast<uint64_t>(t));
    RandomStream rng_first = trial_base.child(1);
    RandomStream rng_second = trial_base.child(2);
    RandomStream rng_det = trial_base.child(3);
    const EmittedPulse p1 = sample_pulse(cfg.laser, states.first,
                                         cfg.mean_photons_per_pulse, rng_first);
    const EmittedPulse p2 = sample_pulse(cfg.laser, states.second,
                                         cfg.mean_photons_per_pulse, rng_second);
    const PulsePair pair = interfere_adjacent(p1, p2, tau_ps, cfg);
    const auto [mu_c, mu_d] = mean_output_photons(pair);
    const double p_c = 1.0 - std::exp(-cfg.detector_c.efficiency * mu_c);
    const double p_d = 1.0 - std::exp(-cfg.detector_d.efficiency * mu_d);
    // Timestamp window acceptance, sampled alongside to keep TIA effects.
    const double dt = rng_det.gaussian(0.0, cfg.detector_c.jitter_sigma_ps) +
                      rng_det.gaussian(0.0, cfg.tia.jitter_ps) -
                      rng_det.gaussian(0.0, cfg.detector_d.jitter_sigma_ps) -
                      rng_det.gaussian(0.0, cfg.tia.jitter_ps);
    const double within =
        std::abs(quantize(dt, cfg.tia.resolution_ps)) <=
                cfg.tia.coincidence_window_ps
            ? 1.0
            : 0.0;
    sum_p += (1.0 - (1.0 - p_c) * (1.0 - dark)) *
             (1.0 - (1.0 - p_d) * (1.0 - dark)) * within;
  }
  const double p_mean = std::clamp(sum_p / kEstimatorSamples, 0.0, 1.0);
  // Binomial(N, p) by normal approximation; N p is large whenever this path
  // is taken with physically sensible configs.
  const double m = static_cast<double>(trials) * p_mean;
  const double sd = std::sqrt(m * (1.0 - p_mean));
  const double draw = est.gaussian(m, sd);
  return std::max<int64_t>(0, static_cast<int64_t>(std::llround(draw)));
}

}  // namespace

std::vector<CoincidenceHistogram> run_experiment(const ExperimentConfig& config,
                                                 uint64_t seed,
                                                 unsigned workers) {
  config.validate();
  const int64_t trials = config.trials_per_point();
  const bool recovery_matters =
      config.thinning_interval_ns <
      5.0 * std::max(config.detector_c.recovery_time_ns,
                     config.detector_d.recovery_time_ns);
  const bool exact = trials <= kExactTrialCap || recovery_matters;

  RandomStream master(seed);
  std::vector<CoincidenceHistogram> result;
  result.reserve(config.state_pairs.size());

  const int n_points = static_cast<int>(config.delay_offsets_ps.size());
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());

  for (size_t g = 0; g < config.state_pairs.size(); ++g) {
    const auto& pair = config.state_pairs[g];
    CoincidenceHistogram h;
    h.state_a = pair.first;
    h.state_b = pair.second;
    h.group = pair.first == Bb84State::Unmodulated &&
                      pair.second == Bb84State::Unmodulated
                  ? "unmodulated"
                  : to_string(pair.first) + "-" + to_string(pair.second);
    h.tau_ps = config.delay_offsets_ps;
    h.trials = trials;
    h.counts.assign(n_points, std::vector<int64_t>(config.repeats, 0));

    struct Job {
      int point;
      int repeat;
    };
    std::vector<Job> jobs;
    for (int i = 0; i < n_points; ++i) {
      for (int r = 0; r < config.repeats; ++r) jobs.push_back({i, r});
    }

    std::vector<std::future<void>> futures;
    std::atomic<size_t> next{0};
    auto worker = [&]() {
      for (;;) {
        const size_t k = next.fetch_add(1);
        if (k >= jobs.size()) return;
        const Job job = jobs[k];
        const RandomStream point_stream =
            master.child(g).child(job.point).child(job.repeat);
        const double tau = config.delay_offsets_ps[job.point];
        h.counts[job.point][job.repeat] =
            exact ? count_point_exact(config, pair, tau, trials, point_stream)
                  : count_point_binomial(config, pair, tau, trials,
                                         point_stream);
      }
    };
    for (unsigned w = 0; w < workers; ++w) {
      futures.push_back(std::async(std::launch::async, worker));
    }
    for (auto& f : futures) f.get();

    h.recompute_stats();
    result.push_back(std::move(h));
  }
  return result;
}

CoincidenceHistogram normalize_histogram(const CoincidenceHistogram& h) {
  CoincidenceHistogram out = h;
  if (out.mean.empty()) out.recompute_stats();
  int ref_index = -1;
  for (int i = 0; i < out.point_count(); ++i) {
    if (std::abs(out.tau_ps[i] - out.tau_ref_ps) < 1e-9) {
      ref_index = i;
      break;
    }
  }
  if (ref_index < 0) {
    throw std::invalid_argument("normalize_histogram: reference delay missing");
  }
  const double ref = out.mean[ref_index];
  if (ref <= 0.0) {
    throw std::domain_error("normalize_histogram: zero reference count");
  }
  for (int i = 0; i < out.point_count(); ++i) {
    out.mean[i] /= ref;
    out.stddev[i] /= ref;
  }
  out.normalized = true;
  return out;
}

}  // namespace homtest
