#include "homtest/certify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "homtest/io.hpp"
#include "homtest/rng.hpp"

namespace homtest {

namespace {

std::vector<FitPoint> concat(const std::vector<std::vector<FitPoint>>& groups) {
  std::vector<FitPoint> all;
  for (const auto& g : groups) all.insert(all.end(), g.begin(), g.end());
  return all;
}

double observed_lr(const std::vector<std::vector<FitPoint>>& data,
                   const std::vector<DipFit>& fits, const DipFit& pooled) {
  double lr = 0.0;
  for (size_t g = 0; g < data.size(); ++g) {
    for (const auto& pt : data[g]) {
      const double rm = (pt.y - fits[g].value(pt.t)) / pt.s;
      const double rs = (pt.y - pooled.value(pt.t)) / pt.s;
      lr += rs * rs - rm * rm;
    }
  }
  return lr;
}

// Per-repeat dip centers: each repeat normalized by its own reference count
// and fitted with counting-statistics weights.
std::vector<double> repeat_centers(const CoincidenceHistogram& h) {
  std::vector<double> centers;
  int ref_index = -1;
  for (int i = 0; i < h.point_count(); ++i) {
    if (std::abs(h.tau_ps[i] - h.tau_ref_ps) < 1e-9) ref_index = i;
  }
  if (ref_index < 0) return centers;
  for (int r = 0; r < h.repeat_count(); ++r) {
    const double ref = static_cast<double>(h.counts[ref_index][r]);
    if (ref <= 0.0) continue;
    std::vector<FitPoint> pts;
    pts.reserve(h.point_count());
    for (int i = 0; i < h.point_count(); ++i) {
      const double c = static_cast<double>(h.counts[i][r]);
      pts.push_back({h.tau_ps[i], c / ref, std::sqrt(std::max(c, 1.0)) / ref});
    }
    try {
      centers.push_back(fit_dip(pts).center);
    } catch (const std::exception&) {
      // A failed repeat fit drops that repeat from the position analysis.
    }
  }
  return centers;
}

// Count-level parametric bootstrap of the likelihood-ratio statistic. Null
// data are regenerated from the pooled dip shape at each group's raw count
// scale, then pushed through the identical normalize/fit/LR pipeline, so the
// resulting p-value is calibrated for this exact procedure (including the
// repeat-std weighting and the shared normalization reference).
double bootstrap_lr_p(const std::vector<CoincidenceHistogram>& histograms,
                      const DipFit& pooled, double lr_obs, int replicas,
                      uint64_t seed) {
  struct GroupModel {
    std::vector<double> tau;
    std::vector<double> mean_counts;  // per point under the null
    int repeats = 0;
  };
  std::vector<GroupModel> models;
  for (const auto& h : histograms) {
    GroupModel m;
    m.tau = h.tau_ps;
    m.repeats = h.repeat_count();
    int ref_index = -1;
    for (int i = 0; i < h.point_count(); ++i) {
      if (std::abs(h.tau_ps[i] - h.tau_ref_ps) < 1e-9) ref_index = i;
    }
    if (ref_index < 0) {
      throw std::invalid_argument("certify: reference delay missing in group");
    }
    double ref_mean = 0.0;
    for (int64_t c : h.counts[ref_index]) ref_mean += static_cast<double>(c);
    ref_mean /= m.repeats;
    const double model_at_ref = pooled.value(h.tau_ref_ps);
    const double scale = ref_mean / model_at_ref;
    for (int i = 0; i < h.point_count(); ++i) {
      m.mean_counts.push_back(scale * pooled.value(h.tau_ps[i]));
    }
    models.push_back(std::move(m));
  }

  RandomStream rng(seed);
  int exceed = 0;
  for (int b = 0; b < replicas; ++b) {
    RandomStream rep = rng.child(static_cast<uint64_t>(b));
    std::vector<std::vector<FitPoint>> data;
    bool ok = true;
    for (size_t g = 0; g < models.size(); ++g) {
      const auto& m = models[g];
      CoincidenceHistogram h;
      h.tau_ps = m.tau;
      h.tau_ref_ps = histograms[g].tau_ref_ps;
      h.counts.assign(m.tau.size(), {});
      RandomStream grs = rep.child(g);
      for (size_t i = 0; i < m.tau.size(); ++i) {
        for (int r = 0; r < m.repeats; ++r) {
          h.counts[i].push_back(grs.poisson(m.mean_counts[i]));
        }
      }
      h.recompute_stats();
      try {
        data.push_back(fit_points(normalize_histogram(h)));
      } catch (const std::exception&) {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++exceed;  // unfittable replica counts against the null conservatively
      continue;
    }
    try {
      std::vector<DipFit> fits;
      for (const auto& d : data) fits.push_back(fit_dip(d));
      const DipFit pooled_b = fit_dip(concat(data));
      if (observed_lr(data, fits, pooled_b) >= lr_obs) ++exceed;
    } catch (const std::exception&) {
      ++exceed;
    }
  }
  return (1.0 + exceed) / (replicas + 1.0);
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::NotRejected: return "indistinguishability not rejected";
    case Verdict::Rejected: return "rejected";
    case Verdict::Indeterminate: return "indeterminate";
    case Verdict::VisibilityOnly: return "visibility only";
  }
  return "?";
}

int exit_code(Verdict v) {
  switch (v) {
    case Verdict::NotRejected: return 0;
    case Verdict::Rejected: return 2;
    case Verdict::Indeterminate: return 3;
    case Verdict::VisibilityOnly: return 0;
  }
  return 3;
}

std::vector<FitPoint> fit_points(const CoincidenceHistogram& normalized) {
  std::vector<FitPoint> pts;
  pts.reserve(normalized.point_count());
  const double root_r =
      std::sqrt(std::max(1, normalized.repeat_count()));
  for (int i = 0; i < normalized.point_count(); ++i) {
    // The repeat scatter divided by sqrt(repeats) is the uncertainty of the
    // plotted mean, which is what the weights should carry.
    double s = normalized.stddev[i] / root_r;
    // A zero sample std (identical repeats) would blow up the weight.
    if (s <= 0.0) s = 1e-6;
    pts.push_back({normalized.tau_ps[i], normalized.mean[i], s});
  }
  return pts;
}

CertifyReport certify(const std::vector<CoincidenceHistogram>& histograms,
                      const CertifyOptions& options) {
  if (histograms.empty()) {
    throw std::invalid_argument("certify: no histograms given");
  }
  CertifyReport report;
  report.alpha = options.alpha;

  std::vector<std::vector<FitPoint>> data;
  bool any_indeterminate = false;
  for (const auto& h : histograms) {
    const CoincidenceHistogram norm = normalize_histogram(h);
    GroupResult g;
    g.name = h.group.empty() ? ("group" + std::to_string(report.groups.size()))
                             : h.group;
    const auto pts = fit_points(norm);
    g.fit = fit_dip(pts);
    g.visibility = visibility_from_fit(g.fit);
    g.repeat_centers = repeat_centers(h);
    if (g.visibility.indeterminate) {
      any_indeterminate = true;
      report.notes.push_back("group " + g.name +
                             ": dip amplitude within 2 std of zero; visibility "
                             "is indeterminate");
    }
    data.push_back(pts);
    report.groups.push_back(std::move(g));
  }

  if (histograms.size() == 1) {
    report.verdict =
        any_indeterminate ? Verdict::Indeterminate : Verdict::VisibilityOnly;
    report.notes.push_back(
        "single group supplied: comparison tests skipped, visibility only");
    return report;
  }

  // Pooled fit with a single parameter set over all groups.
  GroupResult pooled;
  pooled.name = "whole";
  pooled.fit = fit_dip(concat(data));
  pooled.visibility = visibility_from_fit(pooled.fit);
  report.pooled = pooled;

  std::vector<DipFit> fits;
  for (const auto& g : report.groups) fits.push_back(g.fit);
  report.lr = likelihood_ratio_test(data, fits, pooled.fit);

  uint64_t seed;
  if (options.seed) {
    seed = *options.seed;
  } else {
    std::string key;
    for (const auto& h : histograms) {
      for (const auto& point : h.counts) {
        for (int64_t c : point) key += std::to_string(c) + ",";
      }
    }
    seed = std::stoull(fnv1a_hex(key).substr(0, 15), nullptr, 16);
  }
  report.bootstrap_replicas = options.bootstrap_replicas;
  report.lr_p_calibrated =
      bootstrap_lr_p(histograms, pooled.fit, report.lr->statistic,
                     options.bootstrap_replicas, seed);

  // Dip-position analysis of variance over per-repeat fits.
  std::vector<std::vector<double>> center_groups;
  bool anova_ok = true;
  for (const auto& g : report.groups) {
    if (g.repeat_centers.size() < 2) {
      anova_ok = false;
      report.notes.push_back("group " + g.name +
                             ": fewer than 2 usable repeats for the position "
                             "analysis");
      break;
    }
    center_groups.push_back(g.repeat_centers);
  }
  if (anova_ok) {
    report.anova = anova_oneway(center_groups);
    if (report.anova->degenerate) {
      report.notes.push_back(
          "position analysis degenerate: zero within-group variance");
    }
  }

  for (size_t i = 0; i < report.groups.size(); ++i) {
    for (size_t j = i + 1; j < report.groups.size(); ++j) {
      PairPower p;
      p.group_a = report.groups[i].name;
      p.group_b = report.groups[j].name;
      const double si = report.groups[i].visibility.stddev;
      const double sj = report.groups[j].visibility.stddev;
      p.sigma_diff = std::sqrt(si * si + sj * sj);
      if (p.sigma_diff > 0.0) {
        p.power_at_005 = power_analysis(0.05, p.sigma_diff, options.alpha);
        p.detectable_at_80 = detectable_difference(p.sigma_diff, options.alpha, 0.8);
      }
      report.power.push_back(p);
    }
  }

  if (any_indeterminate || !anova_ok || !report.anova ||
      report.anova->degenerate) {
    report.verdict = Verdict::Indeterminate;
    return report;
  }
  const double lr_p = *report.lr_p_calibrated;
  const bool pass = lr_p >= options.alpha && report.anova->p_value >= options.alpha;
  report.verdict = pass ? Verdict::NotRejected : Verdict::Rejected;
  return report;
}

std::string CertifyReport::to_text() const {
  std::ostringstream o;
  o << std::fixed;
  o << "HOM indistinguishability certification report\n";
  o << "==============================================\n\n";
  o << "fit table (per group, normalized coincidence dip)\n";
  o << std::setw(14) << "group" << std::setw(9) << "V" << std::setw(9)
    << "std(V)" << std::setw(10) << "t0[ps]" << std::setw(10) << "std(t0)"
    << std::setw(10) << "sig[ps]" << std::setw(10) << "std(sig)" << "\n";
  const auto row = [&](const GroupResult& g) {
    o << std::setw(14) << g.name << std::setprecision(3) << std::setw(9)
      << g.visibility.value << std::setw(9) << g.visibility.stddev
      << std::setw(10) << std::setprecision(2) << g.fit.center << std::setw(10)
      << g.fit.std_center() << std::setw(10) << g.fit.sigma << std::setw(10)
      << g.fit.std_sigma();
    if (g.visibility.indeterminate) o << "  [indeterminate]";
    o << "\n";
  };
  for (const auto& g : groups) row(g);
  if (pooled) row(*pooled);
  o << "\n";
  if (lr) {
    o << "likelihood-ratio test (per-group vs single parameter set)\n";
    o << "  statistic = " << std::setprecision(3) << lr->statistic
      << ", df = " << lr->degrees_of_freedom
      << ", chi-square p = " << std::setprecision(4) << lr->p_value << "\n";
    if (lr_p_calibrated) {
      o << "  calibrated p (count-level bootstrap, B = " << bootstrap_replicas
        << ") = " << *lr_p_calibrated << "\n";
    }
  }
  if (anova) {
    o << "dip-position one-way analysis of variance (per-repeat fits)\n";
    o << "  F = " << std::setprecision(3) << anova->f_statistic << " (df "
      << anova->df_between << ", " << anova->df_within
      << "), p = " << std::setprecision(4) << anova->p_value << "\n";
  }
  if (!power.empty()) {
    o << "power of pairwise visibility comparisons\n";
    for (const auto& p : power) {
      o << "  " << p.group_a << " vs " << p.group_b << ": std(dV) = "
        << std::setprecision(4) << p.sigma_diff << ", power at dV=0.05: "
        << std::setprecision(2) << p.power_at_005
        << ", detectable dV at 80% power: " << std::setprecision(3)
        << p.detectable_at_80 << "\n";
    }
  }
  o << "\nverdict (alpha = " << std::setprecision(3) << alpha
    << "): " << homtest::to_string(verdict) << "\n";
  for (const auto& n : notes) o << "note: " << n << "\n";
  return o.str();
}

std::string CertifyReport::to_json() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["verdict"] = homtest::to_string(verdict);
  j["exit_code"] = exit_code(verdict);
  auto group_json = [](const GroupResult& g) {
    nlohmann::json q;
    q["name"] = g.name;
    q["visibility"] = g.visibility.value;
    q["visibility_std"] = g.visibility.stddev;
    q["indeterminate"] = g.visibility.indeterminate;
    q["amplitude"] = g.fit.amplitude;
    q["center_ps"] = g.fit.center;
    q["center_std_ps"] = g.fit.std_center();
    q["sigma_ps"] = g.fit.sigma;
    q["sigma_std_ps"] = g.fit.std_sigma();
    q["baseline"] = g.fit.baseline;
    q["chi2"] = g.fit.chi2;
    q["n_points"] = g.fit.n_points;
    std::vector<std::vector<double>> cov(4, std::vector<double>(4));
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) cov[a][b] = g.fit.covariance[a][b];
    }
    q["covariance"] = cov;
    q["repeat_centers"] = g.repeat_centers;
    return q;
  };
  j["groups"] = nlohmann::json::array();
  for (const auto& g : groups) j["groups"].push_back(group_json(g));
  if (pooled) j["pooled"] = group_json(*pooled);
  if (lr) {
    j["likelihood_ratio"] = {{"statistic", lr->statistic},
                             {"df", lr->degrees_of_freedom},
                             {"p_chi2", lr->p_value}};
    if (lr_p_calibrated) {
      j["likelihood_ratio"]["p_calibrated"] = *lr_p_calibrated;
      j["likelihood_ratio"]["bootstrap_replicas"] = bootstrap_replicas;
    }
  }
  if (anova) {
    j["anova"] = {{"f", anova->f_statistic},
                  {"p", anova->p_value},
                  {"df_between", anova->df_between},
                  {"df_within", anova->df_within},
                  {"degenerate", anova->degenerate}};
  }
  j["power"] = nlohmann::json::array();
  for (const auto& p : power) {
    j["power"].push_back({{"group_a", p.group_a},
                          {"group_b", p.group_b},
                          {"sigma_diff", p.sigma_diff},
                          {"power_at_dv_005", p.power_at_005},
                          {"detectable_dv_at_80", p.detectable_at_80}});
  }
  j["notes"] = notes;
  return j.dump(2) + "\n";
}

}  // namespace homtest
