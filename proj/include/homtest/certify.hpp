#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "homtest/detection.hpp"
#include "homtest/stats.hpp"

namespace homtest {

enum class Verdict { NotRejected, Rejected, Indeterminate, VisibilityOnly };

std::string to_string(Verdict v);
int exit_code(Verdict v);

struct GroupResult {
  std::string name;
  DipFit fit;
  VisibilityEstimate visibility;
  // Dip centers fitted per repeat; feed the position analysis of variance.
  std::vector<double> repeat_centers;
};

struct PairPower {
  std::string group_a;
  std::string group_b;
  double sigma_diff = 0.0;        // std of the visibility difference
  double power_at_005 = 0.0;      // power to detect a 0.05 difference
  double detectable_at_80 = 0.0;  // difference detectable with 80% power
};

struct CertifyReport {
  double alpha = 0.05;
  std::vector<GroupResult> groups;
  std::optional<GroupResult> pooled;  // single parameter set over all data
  std::optional<LrTestResult> lr;     // chi-square reference p-value
  std::optional<double> lr_p_calibrated;  // count-level bootstrap p-value
  int bootstrap_replicas = 0;
  std::optional<AnovaResult> anova;
  std::vector<PairPower> power;
  Verdict verdict = Verdict::VisibilityOnly;
  std::vector<std::string> notes;

  std::string to_text() const;
  std::string to_json() const;
};

struct CertifyOptions {
  double alpha = 0.05;
  int bootstrap_replicas = 199;
  // Seed for the bootstrap resampling; when unset it is derived from the
  // data so repeated runs on the same files agree.
  std::optional<uint64_t> seed;
};

// Full certification pipeline: normalize each histogram, fit per group and
// pooled, derive visibilities, run the likelihood-ratio test (chi-square and
// count-level bootstrap calibration), run the dip-position analysis of
// variance on per-repeat fits, and decide the verdict.
CertifyReport certify(const std::vector<CoincidenceHistogram>& histograms,
                      const CertifyOptions& options = {});

// Fit points (delay, normalized mean, normalized std across repeats) for one
// histogram; the standard weighting used throughout the pipeline.
std::vector<FitPoint> fit_points(const CoincidenceHistogram& normalized);

}  // namespace homtest
