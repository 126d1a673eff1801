#pragma once

#include <array>
#include <vector>

namespace homtest {

// One weighted data point of a normalized coincidence scan.
struct FitPoint {
  double t = 0.0;  // delay, ps
  double y = 0.0;  // normalized coincidence
  double s = 1.0;  // std of y, used as the fit weight
};

// Result of fitting y = 1 - (A exp(-(t-t0)^2 / (2 sigma^2)) + B).
struct DipFit {
  double amplitude = 0.0;   // A
  double center = 0.0;      // t0, ps
  double sigma = 0.0;       // dip width, ps
  double baseline = 0.0;    // B
  // Parameter covariance in (A, t0, sigma, B) order, from the inverse
  // weighted normal equations; the point stds are treated as absolute.
  std::array<std::array<double, 4>, 4> covariance{};
  double chi2 = 0.0;
  int n_points = 0;
  int iterations = 0;

  double std_amplitude() const;
  double std_center() const;
  double std_sigma() const;
  double std_baseline() const;
  double reduced_chi2() const;
  // Model value at delay t.
  double value(double t) const;
  // Dip amplitude indistinguishable from zero at two standard deviations.
  bool amplitude_indeterminate() const;
};

struct VisibilityEstimate {
  double value = 0.0;
  double stddev = 0.0;
  bool indeterminate = false;
};

struct LrTestResult {
  double statistic = 0.0;
  int degrees_of_freedom = 0;
  double p_value = 1.0;
};

struct AnovaResult {
  double f_statistic = 0.0;
  double p_value = 1.0;
  int df_between = 0;
  int df_within = 0;
  bool degenerate = false;  // zero within-group variance
};

// Weighted Levenberg-Marquardt fit of the dip model. Requires at least five
// points with positive stds. Throws on non-convergence or singular normal
// equations (flat data may converge with A near zero instead; callers should
// check amplitude_indeterminate()).
DipFit fit_dip(const std::vector<FitPoint>& points);

// Visibility 1 - (1-(A+B))/(1-B) with std from the A and B variances.
VisibilityEstimate visibility_from_fit(const DipFit& fit);

// Log-likelihood-ratio statistic between per-group fits and one pooled fit
// over the same data. Positive when the per-group model fits better; the
// p-value comes from the chi-square with 4 (groups - 1) degrees of freedom.
LrTestResult likelihood_ratio_test(
    const std::vector<std::vector<FitPoint>>& group_data,
    const std::vector<DipFit>& group_fits, const DipFit& pooled_fit);

// Chi-square survival function P(X >= x) with the given degrees of freedom.
double chi2_survival(double x, int df);

// F-distribution survival function.
double f_survival(double f, int df1, int df2);

// Classic one-way analysis of variance; every group needs >= 2 samples.
AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups);

// Probability that a two-sided Gaussian test at level alpha detects a true
// difference delta_v when the difference estimate has std std_v.
double power_analysis(double delta_v, double std_v, double alpha);

// Difference detectable with the requested power (inverse of the above).
double detectable_difference(double std_v, double alpha, double power);

}  // namespace homtest
