#include "homtest/coherent.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace homtest {

namespace {

constexpr double kSeriesCrossover = 15.0;

double bessel_i0_series(double z) {
  const double q = 0.25 * z * z;
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double bessel_i0_asymptotic(double z) {
  // I0(z) ~ e^z / sqrt(2 pi z) * sum_k a_k / z^k with
  // a_k = ((2k-1)!!)^2 / (k! 8^k). Summed until terms stop decreasing.
  double term = 1.0;
  double sum = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= odd * odd / (8.0 * k * z);
    if (std::abs(term) >= prev) break;
    sum += term;
    prev = std::abs(term);
  }
  return std::exp(z) / std::sqrt(2.0 * std::numbers::pi * z) * sum;
}

}  // namespace

double bessel_i0(double z) {
  const double az = std::abs(z);
  return az < kSeriesCrossover ? bessel_i0_series(az) : bessel_i0_asymptotic(az);
}

void PulsePair::validate() const {
  if (mu_a < 0.0 || mu_b < 0.0) {
    throw std::invalid_argument("PulsePair: mean photon numbers must be >= 0");
  }
  if (!(overlap_angle >= 0.0 && overlap_angle <= std::numbers::pi / 2 + 1e-12)) {
    throw std::invalid_argument("PulsePair: overlap angle must be in [0, pi/2]");
  }
}

double SplitterOutput::total_energy() const {
  return std::norm(alpha_c) + std::norm(alpha_d) + std::norm(beta_c) +
         std::norm(beta_d);
}

void ModeProfile::validate() const {
  if (std::abs(norm_sq() - 1.0) > 1e-12) {
    throw std::invalid_argument("ModeProfile: amplitudes must have unit norm");
  }
}

double ModeProfile::norm_sq() const {
  double s = 0.0;
  for (const auto& a : amplitudes) s += std::norm(a);
  return s;
}

SplitterOutput splitter_transform(const PulsePair& p) {
  p.validate();
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;
  const std::complex<double> phase{std::cos(p.relative_phase),
                                   std::sin(p.relative_phase)};
  const std::complex<double> b_matched =
      std::sqrt(p.mu_b) * phase * std::cos(p.overlap_angle);
  const std::complex<double> b_orth =
      std::sqrt(p.mu_b) * phase * std::sin(p.overlap_angle);
  const double a_amp = std::sqrt(p.mu_a);

  SplitterOutput out;
  out.alpha_c = inv_sqrt2 * (a_amp + b_matched);
  out.alpha_d = inv_sqrt2 * (a_amp - b_matched);
  out.beta_c = -inv_sqrt2 * b_orth;
  out.beta_d = inv_sqrt2 * b_orth;
  return out;
}

std::pair<double, double> mean_output_photons(const PulsePair& p) {
  p.validate();
  const double half = 0.5 * (p.mu_a + p.mu_b);
  const double cross = std::sqrt(p.mu_a * p.mu_b) *
                       std::cos(p.relative_phase) * std::cos(p.overlap_angle);
  return {half + cross, half - cross};
}

double joint_photon_prob(int m, int n, const PulsePair& p) {
  if (m < 0 || n < 0) {
    throw std::invalid_argument("joint_photon_prob: counts must be >= 0");
  }
  const auto [mu_c, mu_d] = mean_output_photons(p);
  double log_p = -(mu_c + mu_d);
  if (m > 0) log_p += m * std::log(mu_c) - std::lgamma(m + 1.0);
  if (n > 0) log_p += n * std::log(mu_d) - std::lgamma(n + 1.0);
  if ((m > 0 && mu_c == 0.0) || (n > 0 && mu_d == 0.0)) return 0.0;
  return std::exp(log_p);
}

double coincidence_prob(const PulsePair& p) {
  const auto [mu_c, mu_d] = mean_output_photons(p);
  return 1.0 - std::exp(-mu_c) - std::exp(-mu_d) +
         std::exp(-(p.mu_a + p.mu_b));
}

double phase_averaged_coincidence(double mu_a, double mu_b,
                                  double overlap_angle) {
  PulsePair{mu_a, mu_b, 0.0, overlap_angle}.validate();
  const double total = mu_a + mu_b;
  const double z = std::sqrt(mu_a * mu_b) * std::cos(overlap_angle);
  return 1.0 + std::exp(-total) - 2.0 * std::exp(-0.5 * total) * bessel_i0(z);
}

double hom_visibility_exact(double mu_a, double mu_b, double overlap_angle) {
  PulsePair{mu_a, mu_b, 0.0, overlap_angle}.validate();
  const double total = mu_a + mu_b;
  if (total <= 0.0) {
    throw std::domain_error("hom_visibility_exact: undefined for vacuum input");
  }
  const double z = std::sqrt(mu_a * mu_b) * std::cos(overlap_angle);
  const double singles = 1.0 - std::exp(-0.5 * total);
  return 2.0 * std::exp(-0.5 * total) * (bessel_i0(z) - 1.0) /
         (singles * singles);
}

double hom_visibility_approx(double mu_a, double mu_b, double cos2_theta) {
  if (mu_a < 0.0 || mu_b < 0.0 || mu_a + mu_b <= 0.0) {
    throw std::domain_error("hom_visibility_approx: needs mu_a + mu_b > 0");
  }
  if (cos2_theta < 0.0 || cos2_theta > 1.0) {
    throw std::invalid_argument("hom_visibility_approx: cos^2 overlap in [0,1]");
  }
  const double total = mu_a + mu_b;
  return 2.0 * mu_a * mu_b * cos2_theta / (total * total);
}

std::pair<double, double> hom_visibility_mixed(double mu_a, double mu_b,
                                               double cos2_mean,
                                               double cos2_var) {
  const double scale = hom_visibility_approx(mu_a, mu_b, 1.0);
  return {scale * cos2_mean, scale * scale * cos2_var};
}

std::pair<double, double> swap_outcome_probs_wcp(const PulsePair& p) {
  // The antisymmetric combination feeds the port whose mean photon number
  // carries the minus sign, so photon parity there reproduces the swap-test
  // statistics: identical inputs never produce outcome 1.
  const auto [mu_c, mu_d] = mean_output_photons(p);
  (void)mu_c;
  const double even = 0.5 * (1.0 + std::exp(-2.0 * mu_d));
  return {even, 1.0 - even};
}

double wcp_fidelity(const PulsePair& p) {
  p.validate();
  return std::exp(-0.5 * (p.mu_a + p.mu_b)) *
         std::exp(std::sqrt(p.mu_a * p.mu_b) * std::cos(p.relative_phase) *
                  std::cos(p.overlap_angle));
}

double nonvacuum_fidelity_sq_avg(double mu_a, double mu_b,
                                 double overlap_angle) {
  PulsePair{mu_a, mu_b, 0.0, overlap_angle}.validate();
  const double total = mu_a + mu_b;
  if (total <= 0.0) {
    throw std::domain_error(
        "nonvacuum_fidelity_sq_avg: undefined for vacuum input");
  }
  const double z = 2.0 * std::sqrt(mu_a * mu_b) * std::cos(overlap_angle);
  const double singles = 1.0 - std::exp(-0.5 * total);
  return std::exp(-total) * (bessel_i0(z) - 1.0) / (singles * singles);
}

}  // namespace homtest
