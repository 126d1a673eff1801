// Acceptance suite: every release-gating check, one line of output each.
// Each criterion states its tolerance inline and fails loudly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "homtest/certify.hpp"
#include "homtest/coherent.hpp"
#include "homtest/detection.hpp"
#include "homtest/quadrature.hpp"
#include "homtest/rng.hpp"
#include "homtest/states.hpp"
#include "homtest/stats.hpp"
#include "homtest/transmitter.hpp"
#include "support.hpp"

using namespace homtest;
using namespace homtest::testing;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << (detail.str().empty() ? "" : "; ") << "FAILED: " << what;
    }
  }
};

// --- criterion 1: closed form vs phase-sampling oracle ---------------------

void criterion_closed_form_vs_oracle(Outcome& out) {
  for (double mu : {0.05, 0.25, 0.5}) {
    for (double cap : {0.0, kPi / 6, kPi / 4, kPi / 2}) {
      const double closed = phase_averaged_coincidence(mu, mu, cap);
      const auto mc = mc_phase_average_coincidence(mu, mu, cap, 1000000,
                                                   1000 + int(mu * 100) +
                                                       int(cap * 100));
      const double tol = 3.0 * mc.stderr_ + 1e-12;
      std::ostringstream what;
      what << "mu=" << mu << " Theta=" << cap << ": |" << closed << " - "
           << mc.mean << "| > " << tol;
      out.require(std::abs(closed - mc.mean) <= tol, what.str());
    }
  }
}

// --- criterion 2: visibility bound and weak-pulse agreement ----------------

void criterion_visibility_bound(Outcome& out) {
  RandomStream rng(2);
  for (int i = 0; i < 20000; ++i) {
    const double v = hom_visibility_approx(rng.uniform(1e-9, 2.0),
                                           rng.uniform(1e-9, 2.0),
                                           rng.uniform(0.0, 1.0));
    if (v > 0.5 + 1e-12) {
      out.require(false, "approximate visibility exceeded 1/2");
      break;
    }
  }
  for (double mu : {0.002, 0.005, 0.01}) {
    for (double cap : {0.0, kPi / 6, kPi / 3}) {
      const double exact = hom_visibility_exact(mu, mu, cap);
      const double approx =
          hom_visibility_approx(mu, mu, std::pow(std::cos(cap), 2));
      std::ostringstream what;
      what << "mu=" << mu << ": |exact - approx| = " << std::abs(exact - approx);
      out.require(std::abs(exact - approx) < 1e-3, what.str());
    }
  }
  const double v25 = hom_visibility_exact(0.25, 0.25, 0.0);
  out.require(std::abs(v25 - 0.499) < 2e-3,
              "exact visibility at mu=0.25 is " + std::to_string(v25));
  const auto mc = mc_visibility(0.25, 0.0, 2000000, 77);
  out.require(std::abs(mc.mean - v25) < 3.0 * mc.stderr_,
              "photon-sampling oracle disagrees with the closed form");
}

// --- criterion 3: fidelity-visibility relation ------------------------------

void criterion_fidelity_visibility(Outcome& out) {
  for (double mu : {0.002, 0.005, 0.01}) {
    const double ratio = nonvacuum_fidelity_sq_avg(mu, mu, 0.0) /
                         hom_visibility_approx(mu, mu, 1.0);
    std::ostringstream what;
    what << "ratio at mu=" << mu << " is " << ratio;
    out.require(ratio >= 1.96 && ratio <= 2.04, what.str());
  }
}

// --- criterion 4: fit-parameter coverage at observed noise -----------------

void criterion_table_coverage(Outcome& out) {
  struct Row {
    const char* name;
    double std_v, std_t0, std_sigma;
  };
  // Reported uncertainties for each measurement group and the pooled fit.
  const std::vector<Row> group_rows = {{"unmodulated", 0.023, 0.21, 0.27},
                                       {"X1-X0", 0.042, 0.40, 0.39},
                                       {"Y0-X0", 0.022, 0.25, 0.23},
                                       {"Y1-X0", 0.042, 0.27, 0.28}};
  const Row whole_row = {"whole", 0.014, 0.12, 0.12};
  const double true_v = 0.283, true_t0 = 1.05, true_sigma = 3.12;
  const double noise = 0.012;
  const std::vector<double> grid = {-26, -16, -6, -4, -2, 0, 2, 4, 6, 16, 26};

  RandomStream rng(4000);
  const int reps = 100;
  std::vector<int> cover_v(5, 0), cover_t(5, 0), cover_s(5, 0);
  for (int rep = 0; rep < reps; ++rep) {
    std::vector<FitPoint> all;
    for (int g = 0; g < 4; ++g) {
      std::vector<FitPoint> pts;
      for (double t : grid) {
        const double z = (t - true_t0) / true_sigma;
        const double y =
            1.0 - true_v * std::exp(-0.5 * z * z) + noise * rng.gaussian();
        pts.push_back({t, y, noise});
      }
      const DipFit fit = fit_dip(pts);
      const auto vis = visibility_from_fit(fit);
      if (std::abs(vis.value - true_v) <= 2.0 * group_rows[g].std_v) ++cover_v[g];
      if (std::abs(fit.center - true_t0) <= 2.0 * group_rows[g].std_t0) ++cover_t[g];
      if (std::abs(fit.sigma - true_sigma) <= 2.0 * group_rows[g].std_sigma) ++cover_s[g];
      all.insert(all.end(), pts.begin(), pts.end());
    }
    const DipFit pooled = fit_dip(all);
    const auto vis = visibility_from_fit(pooled);
    if (std::abs(vis.value - true_v) <= 2.0 * whole_row.std_v) ++cover_v[4];
    if (std::abs(pooled.center - true_t0) <= 2.0 * whole_row.std_t0) ++cover_t[4];
    if (std::abs(pooled.sigma - true_sigma) <= 2.0 * whole_row.std_sigma) ++cover_s[4];
  }
  for (int k = 0; k < 5; ++k) {
    const char* name = k < 4 ? group_rows[k].name : whole_row.name;
    std::ostringstream what;
    what << name << " coverage V/t0/sigma = " << cover_v[k] << "/" << cover_t[k]
         << "/" << cover_s[k] << " of " << reps;
    out.require(cover_v[k] >= 90 && cover_t[k] >= 90 && cover_s[k] >= 90,
                what.str());
  }
}

// --- criterion 5: end-to-end verdict reproduction ---------------------------

ExperimentConfig acceptance_config() {
  ExperimentConfig cfg;  // stock apparatus
  cfg.duration_per_point_s = 0.0015;  // ~29k thinned trials per point
  cfg.arm_transmission = 1.0;
  return cfg;
}

void criterion_verdicts(Outcome& out) {
  const int runs = 50;
  int held = 0;
  for (int i = 0; i < runs; ++i) {
    const auto hists = run_experiment(acceptance_config(), 1000 + i);
    CertifyOptions opts;
    opts.seed = 9000 + i;
    const CertifyReport rep = certify(hists, opts);
    if (rep.verdict == Verdict::NotRejected) ++held;
  }
  {
    std::ostringstream what;
    what << "null verdicts held " << held << "/" << runs << " (need >= 45)";
    out.require(held >= 45, what.str());
    out.detail << "null held " << held << "/" << runs;
  }

  ExperimentConfig defect = acceptance_config();
  defect.defect_state = Bb84State::Y1;
  defect.defect_overlap_scale = 0.47;  // lowers that group's V by ~0.15
  int rejected = 0;
  for (int i = 0; i < runs; ++i) {
    const auto hists = run_experiment(defect, 2000 + i);
    CertifyOptions opts;
    opts.seed = 12000 + i;
    const CertifyReport rep = certify(hists, opts);
    if (rep.verdict == Verdict::Rejected) ++rejected;
  }
  {
    std::ostringstream what;
    what << "defect rejected " << rejected << "/" << runs << " (need >= 48)";
    out.require(rejected >= 48, what.str());
    out.detail << "; defect rejected " << rejected << "/" << runs;
  }

  // Power at the precision of a visibility-difference measurement on the
  // observed scale: 0.05 is detectable with roughly 80% probability.
  const double power = power_analysis(0.05, 0.0178, 0.05);
  std::ostringstream what;
  what << "power at dV=0.05 is " << power << " (need 0.80 +- 0.05)";
  out.require(power >= 0.75 && power <= 0.85, what.str());
  out.detail << "; power(0.05) = " << power;
}

// --- criterion 6: source diagnostics ----------------------------------------

void criterion_diagnostics(Outcome& out) {
  // Jitter factor across the pulse-duration / jitter grid, against a
  // quadrature oracle for the expectation of the envelope overlap.
  double lo = 1.0, hi = 0.0;
  for (double tau_p : {30.0, 40.0, 50.0}) {
    for (double s : {2.2, 4.0, 6.0}) {
      const double closed = jitter_factor(tau_p, s);
      lo = std::min(lo, closed);
      hi = std::max(hi, closed);
      const double quad = integrate(
                              [&](double d) {
                                const double pdf =
                                    std::exp(-0.5 * d * d / (s * s)) /
                                    (s * std::sqrt(2.0 * kPi));
                                return pdf * timing_overlap(d, tau_p);
                              },
                              -10.0 * s, 10.0 * s, 400);
      std::ostringstream what;
      what << "jitter factor vs quadrature at (" << tau_p << ", " << s
           << "): " << closed << " vs " << quad;
      out.require(std::abs(closed - quad) < 1e-3, what.str());
    }
  }
  out.require(std::abs(jitter_factor(30.0, 6.0) - 0.853) < 1e-3,
              "lower endpoint of the jitter range");
  out.require(lo <= 0.853 + 1e-3 && hi >= 0.960 - 1e-3,
              "grid does not span the expected 0.85-0.96 range");
  out.detail << "jitter factor in [" << lo << ", " << hi << "]";

  const double a30 = chirp_from_dip(30.0, std::sqrt(10.0));
  const double a50 = chirp_from_dip(50.0, std::sqrt(10.0));
  out.require(std::abs(a30 - 3.90) < 1e-2,
              "chirp at tau_p=30 is " + std::to_string(a30));
  out.require(std::abs(a50 - 6.64) < 1e-2,
              "chirp at tau_p=50 is " + std::to_string(a50));
  out.detail << "; chirp endpoints " << a30 << ", " << a50;
}

// --- criterion 7: state-algebra properties ----------------------------------

void criterion_state_algebra(Outcome& out) {
  RandomStream rng(700);
  int draws = 0;
  for (int d : {2, 4, 6, 8}) {
    for (int i = 0; i < 300; ++i) {
      const auto r1 = random_density_matrix(d, rng);
      const auto r2 = random_density_matrix(d, rng);
      const double tp = trace_product(r1, r2);
      if (tp > 1.0 + 1e-10) {
        out.require(false, "trace product exceeded unity");
        return;
      }
      const auto [lo, hi] = fidelity_bounds(r1, r2);
      const double f2 = std::pow(uhlmann_fidelity(r1, r2), 2);
      if (lo > f2 + 1e-10 || hi < f2 - 1e-10) {
        out.require(false, "fidelity bounds failed to bracket the oracle");
        return;
      }
      const auto u = random_unitary(d, rng);
      const UnitaryMatrix id(ComplexMatrix::Identity(d, d));
      if (modulated_trace_product(u, id, r1, r1) >
          trace_product(r1, r1) + 1e-10) {
        out.require(false, "modulated trace product exceeded the purity");
        return;
      }
      ++draws;
    }
  }
  out.detail << draws << " random draws";

  for (int d : {2, 3, 4, 8}) {
    for (int i = 0; i < 50; ++i) {
      const auto a = random_pure_state(d, rng);
      const auto b = random_pure_state(d, rng);
      const auto closed = swap_test_probs(a, b);
      const auto circuit = simulate_cswap(a, b);
      if (std::abs(closed.first - circuit.first) > 1e-12) {
        out.require(false, "circuit oracle disagrees with the closed form");
        return;
      }
    }
  }
}

// --- criterion 8: null calibration of both tests ----------------------------

void criterion_null_calibration(Outcome& out) {
  const std::vector<double> grid = {-26, -16, -6, -4, -2, 0, 2, 4, 6, 16, 26};
  const double noise = 0.0175;
  RandomStream rng(8);  // criterion index
  int lr_reject = 0;
  const int sims = 500;
  for (int s = 0; s < sims; ++s) {
    std::vector<std::vector<FitPoint>> data;
    std::vector<DipFit> fits;
    std::vector<FitPoint> all;
    for (int g = 0; g < 4; ++g) {
      std::vector<FitPoint> pts;
      for (double t : grid) {
        const double z = (t - 1.05) / 3.12;
        pts.push_back({t, 1.0 - 0.283 * std::exp(-0.5 * z * z) +
                              noise * rng.gaussian(),
                       noise});
      }
      fits.push_back(fit_dip(pts));
      all.insert(all.end(), pts.begin(), pts.end());
      data.push_back(std::move(pts));
    }
    const auto lr = likelihood_ratio_test(data, fits, fit_dip(all));
    if (lr.p_value < 0.05) ++lr_reject;
  }
  {
    std::ostringstream what;
    what << "LR type-I rate " << lr_reject << "/" << sims
         << " outside [15, 35]";
    out.require(lr_reject >= 15 && lr_reject <= 35, what.str());
    out.detail << "LR rejections " << lr_reject << "/500";
  }

  int anova_reject = 0;
  for (int s = 0; s < sims; ++s) {
    std::vector<std::vector<double>> groups(4, std::vector<double>());
    for (auto& g : groups) {
      for (int i = 0; i < 5; ++i) g.push_back(rng.gaussian(1.0, 0.25));
    }
    if (anova_oneway(groups).p_value < 0.05) ++anova_reject;
  }
  std::ostringstream what;
  what << "anova type-I rate " << anova_reject << "/" << sims
       << " outside [15, 35]";
  out.require(anova_reject >= 15 && anova_reject <= 35, what.str());
  out.detail << "; anova rejections " << anova_reject << "/500";
}

struct Criterion {
  std::string name;
  std::function<void(Outcome&)> fn;
  double time_limit_s;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"1 closed form vs sampling oracle", criterion_closed_form_vs_oracle, 60},
      {"2 visibility bound and weak-pulse limit", criterion_visibility_bound, 0},
      {"3 fidelity-visibility ratio", criterion_fidelity_visibility, 0},
      {"4 fit coverage at observed noise", criterion_table_coverage, 120},
      {"5 end-to-end verdict reproduction", criterion_verdicts, 0},
      {"6 source diagnostics", criterion_diagnostics, 0},
      {"7 state-algebra properties", criterion_state_algebra, 0},
      {"8 null calibration", criterion_null_calibration, 300},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    c.fn(out);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (c.time_limit_s > 0 && elapsed > c.time_limit_s) {
      out.pass = false;
      out.detail << "; exceeded the " << c.time_limit_s << " s budget";
    }
    std::printf("criterion %-42s %s  (%.1fs)%s%s\n", c.name.c_str(),
                out.pass ? "[PASS]" : "[FAIL]", elapsed,
                out.detail.str().empty() ? "" : "  -- ",
                out.detail.str().c_str());
    if (!out.pass) ++failures;
  }
  if (failures > 0) {
    std::printf("%d criterion(s) failed\n", failures);
    return 1;
  }
  std::printf("all acceptance criteria passed\n");
  return 0;
}
