#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace homtest {

// Two weak coherent pulses meeting at a balanced beam splitter. The overlap
// angle describes how much of pulse b lives in the same mode as pulse a:
// 0 means perfect mode overlap, pi/2 means fully distinguishable.
struct PulsePair {
  double mu_a = 0.0;          // mean photon number at port a
  double mu_b = 0.0;          // mean photon number at port b
  double relative_phase = 0.0;
  double overlap_angle = 0.0;

  void validate() const;
};

// Coherent amplitudes at the two output ports, split into the matched mode
// (alpha) and the orthogonal mode (beta).
struct SplitterOutput {
  std::complex<double> alpha_c;
  std::complex<double> alpha_d;
  std::complex<double> beta_c;
  std::complex<double> beta_d;

  double total_energy() const;
};

// Relative amplitudes of a pulse over an indexed mode basis; unit norm.
struct ModeProfile {
  std::vector<std::complex<double>> amplitudes;

  void validate() const;
  double norm_sq() const;
};

// Modified Bessel function I0; power series below the crossover, asymptotic
// expansion above. Absolute/relative error below 1e-12 over the range used.
double bessel_i0(double z);

SplitterOutput splitter_transform(const PulsePair& p);

// Mean photon numbers (mu_c, mu_d) at the splitter outputs; their sum equals
// mu_a + mu_b.
std::pair<double, double> mean_output_photons(const PulsePair& p);

// Probability that exactly (m, n) photons emerge at the output ports.
double joint_photon_prob(int m, int n, const PulsePair& p);

// Probability that both threshold detectors click, at fixed relative phase.
double coincidence_prob(const PulsePair& p);

// Coincidence probability averaged over a uniformly random relative phase.
double phase_averaged_coincidence(double mu_a, double mu_b,
                                  double overlap_angle);

// Dip visibility for phase-randomized pulses; exact in the photon-number
// expansion. Throws for mu_a + mu_b == 0.
double hom_visibility_exact(double mu_a, double mu_b, double overlap_angle);

// Weak-pulse approximation 2 mu_a mu_b cos^2(Theta) / (mu_a + mu_b)^2, which
// is bounded by 1/2. cos2_theta is cos^2(Theta) directly, so callers can feed
// a sampled overlap for mixed states.
double hom_visibility_approx(double mu_a, double mu_b, double cos2_theta);

// Mean and variance of the approximate visibility when the squared overlap is
// a random variable with the given mean and variance.
std::pair<double, double> hom_visibility_mixed(double mu_a, double mu_b,
                                               double cos2_mean,
                                               double cos2_var);

// Outcome probabilities of the swap-style parity measurement. Parity is read
// at the output port fed by the antisymmetric combination, so identical
// inputs always yield outcome 0.
std::pair<double, double> swap_outcome_probs_wcp(const PulsePair& p);

// Overlap |<phi_a|psi_b>| of the two coherent pulse states.
double wcp_fidelity(const PulsePair& p);

// Phase-averaged squared overlap with the vacuum contribution removed; for
// weak pulses this approaches twice the approximate visibility.
double nonvacuum_fidelity_sq_avg(double mu_a, double mu_b,
                                 double overlap_angle);

}  // namespace homtest
