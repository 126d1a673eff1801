#include "homtest/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "homtest/special.hpp"

namespace homtest {

namespace {

constexpr int kMaxIterations = 200;
constexpr double kRelTol = 1e-12;

struct Model {
  // f(t) = A exp(-(t-t0)^2/(2 sigma^2)) + B, data model is y = 1 - f.
  static double predict(const double* p, double t) {
    const double z = (t - p[1]) / p[2];
    return 1.0 - (p[0] * std::exp(-0.5 * z * z) + p[3]);
  }

  static void jacobian_row(const double* p, double t, double* row) {
    const double dz = t - p[1];
    const double inv_s = 1.0 / p[2];
    const double e = std::exp(-0.5 * dz * dz * inv_s * inv_s);
    row[0] = -e;                                   // d/dA
    row[1] = -p[0] * e * dz * inv_s * inv_s;       // d/dt0
    row[2] = -p[0] * e * dz * dz * inv_s * inv_s * inv_s;  // d/dsigma
    row[3] = -1.0;                                 // d/dB
  }
};

double weighted_ssr(const std::vector<FitPoint>& pts, const double* p) {
  double ssr = 0.0;
  for (const auto& pt : pts) {
    const double r = (pt.y - Model::predict(p, pt.t)) / pt.s;
    ssr += r * r;
  }
  return ssr;
}

// Solve the symmetric 4x4 system M x = b by Gaussian elimination with
// partial pivoting. Returns false when singular.
bool solve4(std::array<std::array<double, 4>, 4> m, std::array<double, 4> b,
            std::array<double, 4>& x) {
  for (int col = 0; col < 4; ++col) {
    int pivot = col;
    for (int r = col + 1; r < 4; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[pivot][col])) pivot = r;
    }
    if (std::abs(m[pivot][col]) < 1e-300) return false;
    std::swap(m[col], m[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < 4; ++r) {
      const double f = m[r][col] / m[col][col];
      for (int c = col; c < 4; ++c) m[r][c] -= f * m[col][c];
      b[r] -= f * b[col];
    }
  }
  for (int r = 3; r >= 0; --r) {
    double v = b[r];
    for (int c = r + 1; c < 4; ++c) v -= m[r][c] * x[c];
    x[r] = v / m[r][r];
  }
  return true;
}

bool invert4(const std::array<std::array<double, 4>, 4>& m,
             std::array<std::array<double, 4>, 4>& inv) {
  for (int col = 0; col < 4; ++col) {
    std::array<double, 4> e{};
    e[col] = 1.0;
    std::array<double, 4> x{};
    if (!solve4(m, e, x)) return false;
    for (int r = 0; r < 4; ++r) inv[r][col] = x[r];
  }
  return true;
}

void build_normal_equations(const std::vector<FitPoint>& pts, const double* p,
                            std::array<std::array<double, 4>, 4>& jtj,
                            std::array<double, 4>& jtr) {
  jtj = {};
  jtr = {};
  double row[4];
  for (const auto& pt : pts) {
    Model::jacobian_row(p, pt.t, row);
    const double inv_s = 1.0 / pt.s;
    const double r = (pt.y - Model::predict(p, pt.t)) * inv_s;
    for (int i = 0; i < 4; ++i) {
      const double ji = row[i] * inv_s;
      jtr[i] += ji * r;
      for (int j = i; j < 4; ++j) {
        jtj[i][j] += ji * row[j] * inv_s;
      }
    }
  }
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < i; ++j) jtj[i][j] = jtj[j][i];
  }
}

}  // namespace

double DipFit::std_amplitude() const { return std::sqrt(std::max(0.0, covariance[0][0])); }
double DipFit::std_center() const { return std::sqrt(std::max(0.0, covariance[1][1])); }
double DipFit::std_sigma() const { return std::sqrt(std::max(0.0, covariance[2][2])); }
double DipFit::std_baseline() const { return std::sqrt(std::max(0.0, covariance[3][3])); }

double DipFit::reduced_chi2() const {
  return n_points > 4 ? chi2 / (n_points - 4) : std::numeric_limits<double>::quiet_NaN();
}

double DipFit::value(double t) const {
  const double p[4] = {amplitude, center, sigma, baseline};
  return Model::predict(p, t);
}

bool DipFit::amplitude_indeterminate() const {
  return std::abs(amplitude) < 2.0 * std_amplitude();
}

DipFit fit_dip(const std::vector<FitPoint>& points) {
  if (points.size() < 5) {
    throw std::invalid_argument("fit_dip: need at least 5 points");
  }
  for (const auto& pt : points) {
    if (!(pt.s > 0.0)) {
      throw std::invalid_argument("fit_dip: point stds must be > 0");
    }
  }

  // Initialization: amplitude and center from the sample minimum (first of
  // ties in t order), a few-ps width, flat baseline.
  double y_min = points.front().y;
  double t_min = points.front().t;
  std::vector<FitPoint> pts = points;
  std::sort(pts.begin(), pts.end(),
            [](const FitPoint& a, const FitPoint& b) { return a.t < b.t; });
  for (const auto& pt : pts) {
    if (pt.y < y_min) {
      y_min = pt.y;
      t_min = pt.t;
    }
  }
  double p[4] = {1.0 - y_min, t_min, 3.0, 0.0};
  if (p[0] <= 0.0) p[0] = 1e-3;

  double lambda = 1e-3;
  double ssr = weighted_ssr(pts, p);
  int iter = 0;
  bool converged = false;
  for (; iter < kMaxIterations; ++iter) {
    std::array<std::array<double, 4>, 4> jtj;
    std::array<double, 4> jtr;
    build_normal_equations(pts, p, jtj, jtr);

    bool stepped = false;
    for (int attempt = 0; attempt < 25; ++attempt) {
      auto damped = jtj;
      for (int i = 0; i < 4; ++i) damped[i][i] *= 1.0 + lambda;
      std::array<double, 4> step{};
      if (!solve4(damped, jtr, step)) {
        lambda *= 3.0;
        continue;
      }
      double trial[4] = {p[0] + step[0], p[1] + step[1], p[2] + step[2],
                         p[3] + step[3]};
      trial[2] = std::abs(trial[2]);
      if (trial[2] < 1e-9) trial[2] = 1e-9;
      const double trial_ssr = weighted_ssr(pts, trial);
      if (trial_ssr <= ssr) {
        const double improvement = ssr - trial_ssr;
        std::copy(trial, trial + 4, p);
        const bool done = improvement <= kRelTol * std::max(ssr, 1e-30);
        ssr = trial_ssr;
        lambda = std::max(lambda * 0.5, 1e-12);
        stepped = true;
        if (done) converged = true;
        break;
      }
      lambda *= 3.0;
    }
    if (converged) break;
    if (!stepped) {
      // No damping level produced progress: treat the current point as the
      // optimum (typically a flat-data fit pinned at A ~ 0).
      converged = true;
      break;
    }
  }
  if (!converged) {
    throw std::runtime_error("fit_dip: no convergence within iteration cap");
  }

  std::array<std::array<double, 4>, 4> jtj;
  std::array<double, 4> jtr;
  build_normal_equations(pts, p, jtj, jtr);
  std::array<std::array<double, 4>, 4> inv;
  if (!invert4(jtj, inv)) {
    throw std::runtime_error("fit_dip: singular normal equations (flat data?)");
  }

  DipFit fit;
  fit.amplitude = p[0];
  fit.center = p[1];
  fit.sigma = std::abs(p[2]);
  fit.baseline = p[3];
  fit.chi2 = ssr;
  fit.n_points = static_cast<int>(pts.size());
  fit.iterations = iter;
  // Covariance straight from the inverse weighted normal equations; the
  // weights are taken as absolute uncertainties of the points.
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) fit.covariance[i][j] = inv[i][j];
  }
  return fit;
}

VisibilityEstimate visibility_from_fit(const DipFit& fit) {
  if (fit.baseline >= 1.0) {
    throw std::domain_error("visibility_from_fit: baseline >= 1 (degenerate)");
  }
  VisibilityEstimate v;
  v.value = 1.0 - (1.0 - (fit.amplitude + fit.baseline)) / (1.0 - fit.baseline);
  v.stddev = std::sqrt(fit.std_amplitude() * fit.std_amplitude() +
                       fit.std_baseline() * fit.std_baseline());
  v.indeterminate = fit.amplitude_indeterminate();
  return v;
}

LrTestResult likelihood_ratio_test(
    const std::vector<std::vector<FitPoint>>& group_data,
    const std::vector<DipFit>& group_fits, const DipFit& pooled_fit) {
  if (group_data.size() != group_fits.size() || group_data.empty()) {
    throw std::invalid_argument("likelihood_ratio_test: group mismatch");
  }
  double lr = 0.0;
  for (size_t g = 0; g < group_data.size(); ++g) {
    for (const auto& pt : group_data[g]) {
      const double r_multi = (pt.y - group_fits[g].value(pt.t)) / pt.s;
      const double r_single = (pt.y - pooled_fit.value(pt.t)) / pt.s;
      lr += r_single * r_single - r_multi * r_multi;
    }
  }
  LrTestResult out;
  out.statistic = lr;
  out.degrees_of_freedom = 4 * (static_cast<int>(group_data.size()) - 1);
  out.p_value = out.degrees_of_freedom == 0
                    ? 1.0
                    : chi2_survival(std::max(0.0, lr), out.degrees_of_freedom);
  return out;
}

double chi2_survival(double x, int df) {
  if (df < 1) throw std::invalid_argument("chi2_survival: df must be >= 1");
  if (x <= 0.0) return 1.0;
  return gamma_q(0.5 * df, 0.5 * x);
}

double f_survival(double f, int df1, int df2) {
  if (df1 < 1 || df2 < 1) throw std::invalid_argument("f_survival: bad df");
  if (f <= 0.0) return 1.0;
  return incomplete_beta(0.5 * df2, 0.5 * df1, df2 / (df2 + df1 * f));
}

AnovaResult anova_oneway(const std::vector<std::vector<double>>& groups) {
  if (groups.size() < 2) {
    throw std::invalid_argument("anova_oneway: need at least 2 groups");
  }
  int n_total = 0;
  for (const auto& g : groups) {
    if (g.size() < 2) {
      throw std::invalid_argument("anova_oneway: every group needs >= 2 samples");
    }
    n_total += static_cast<int>(g.size());
  }
  double grand = 0.0;
  for (const auto& g : groups) {
    for (double v : g) grand += v;
  }
  grand /= n_total;

  double ss_between = 0.0;
  double ss_within = 0.0;
  for (const auto& g : groups) {
    double m = 0.0;
    for (double v : g) m += v;
    m /= g.size();
    ss_between += g.size() * (m - grand) * (m - grand);
    for (double v : g) ss_within += (v - m) * (v - m);
  }

  AnovaResult out;
  out.df_between = static_cast<int>(groups.size()) - 1;
  out.df_within = n_total - static_cast<int>(groups.size());
  if (ss_within <= 0.0) {
    out.degenerate = true;
    out.f_statistic = std::numeric_limits<double>::infinity();
    out.p_value = ss_between > 0.0 ? 0.0 : 1.0;
    return out;
  }
  out.f_statistic = (ss_between / out.df_between) / (ss_within / out.df_within);
  out.p_value = f_survival(out.f_statistic, out.df_between, out.df_within);
  return out;
}

double power_analysis(double delta_v, double std_v, double alpha) {
  if (!(std_v > 0.0)) throw std::invalid_argument("power_analysis: std_v > 0");
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw std::invalid_argument("power_analysis: alpha in (0, 1)");
  }
  const double z = normal_quantile(1.0 - 0.5 * alpha);
  const double shift = std::abs(delta_v) / std_v;
  return normal_cdf(shift - z) + normal_cdf(-shift - z);
}

double detectable_difference(double std_v, double alpha, double power) {
  if (!(power > 0.0 && power < 1.0)) {
    throw std::invalid_argument("detectable_difference: power in (0, 1)");
  }
  const double z_alpha = normal_quantile(1.0 - 0.5 * alpha);
  const double z_power = normal_quantile(power);
  return std_v * (z_alpha + z_power);
}

}  // namespace homtest
