#include "cli.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "homtest/certify.hpp"
#include "homtest/coherent.hpp"
#include "homtest/detection.hpp"
#include "homtest/io.hpp"
#include "homtest/stats.hpp"
#include "homtest/transmitter.hpp"
#include "homtest/version.hpp"

namespace homtest::cli {

namespace {

namespace fs = std::filesystem;

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

fs::path default_out_dir() {
  if (const char* env = std::getenv("HOMTEST_OUT_DIR")) return fs::path(env);
  return fs::current_path();
}

int cmd_simulate(const std::string& config_path, uint64_t seed,
                 const std::string& out_dir) {
  ExperimentConfig config;
  if (!config_path.empty()) {
    try {
      config = load_config(config_path);
    } catch (const ConfigError& e) {
      std::cerr << config_path << ":" << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
  }

  const fs::path out = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
  RunManifest manifest;
  manifest.tool_version = kVersion;
  manifest.config_text = render_config(config);
  manifest.config_hash = fnv1a_hex(manifest.config_text);
  manifest.seed = seed;
  manifest.created_utc = now_utc();

  const auto histograms = run_experiment(config, seed);

  // Render everything before writing anything, so a failure leaves no
  // partial output set behind.
  std::vector<std::pair<fs::path, std::string>> files;
  for (const auto& h : histograms) {
    const fs::path p = out / ("hist_" + h.group + ".csv");
    files.emplace_back(p, histogram_to_csv(h, manifest.hash()));
    manifest.outputs.push_back(p.filename().string());
  }
  for (const auto& [path, data] : files) atomic_write(path, data);
  atomic_write(out / "manifest.json", manifest.to_json());

  for (const auto& [path, data] : files) std::cout << path.string() << "\n";
  std::cout << (out / "manifest.json").string() << "\n";
  return 0;
}

int cmd_certify(const std::vector<std::string>& files, double alpha,
                const std::string& out_dir, const std::string& format,
                std::optional<uint64_t> seed) {
  std::vector<CoincidenceHistogram> histograms;
  for (const auto& f : files) {
    histograms.push_back(load_histogram(f));
  }
  CertifyOptions opts;
  opts.alpha = alpha;
  opts.seed = seed;
  const CertifyReport report = certify(histograms, opts);

  const fs::path out = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
  atomic_write(out / "report.txt", report.to_text());
  atomic_write(out / "report.json", report.to_json());
  std::cout << (format == "structured" ? report.to_json() : report.to_text());
  return exit_code(report.verdict);
}

int cmd_fit(const std::string& file, const std::string& format) {
  const CoincidenceHistogram h = load_histogram(file);
  const auto pts = fit_points(normalize_histogram(h));
  const DipFit fit = fit_dip(pts);
  const VisibilityEstimate vis = visibility_from_fit(fit);
  if (format == "structured") {
    nlohmann::json j;
    j["group"] = h.group;
    j["visibility"] = vis.value;
    j["visibility_std"] = vis.stddev;
    j["indeterminate"] = vis.indeterminate;
    j["amplitude"] = fit.amplitude;
    j["amplitude_std"] = fit.std_amplitude();
    j["center_ps"] = fit.center;
    j["center_std_ps"] = fit.std_center();
    j["sigma_ps"] = fit.sigma;
    j["sigma_std_ps"] = fit.std_sigma();
    j["baseline"] = fit.baseline;
    j["baseline_std"] = fit.std_baseline();
    j["chi2"] = fit.chi2;
    j["n_points"] = fit.n_points;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "group " << h.group << "\n";
    std::cout << "V      = " << vis.value << " +- " << vis.stddev
              << (vis.indeterminate ? "  [indeterminate]" : "") << "\n";
    std::cout << "t0     = " << fit.center << " +- " << fit.std_center()
              << " ps\n";
    std::cout << "sigma  = " << fit.sigma << " +- " << fit.std_sigma()
              << " ps\n";
    std::cout << "A      = " << fit.amplitude << " +- " << fit.std_amplitude()
              << "\n";
    std::cout << "B      = " << fit.baseline << " +- " << fit.std_baseline()
              << "\n";
    std::cout << "chi2/dof = " << fit.reduced_chi2() << "\n";
  }
  return 0;
}

struct TheoryParams {
  double mu_a = 0.25;
  double mu_b = 0.25;
  double theta = 0.0;
  double overlap_angle = 0.0;
  double cos2 = 1.0;
  double tau_p = 30.0;
  double chirp = 4.0;
  double jitter = 2.2;
  double delay = 0.0;
  double nu = 0.0;
  double intensity_var = 7e-4;
  double sigma_dip = 3.12;
};

int cmd_theory(const std::string& op, TheoryParams p, const std::string& var,
               double from, double to, int steps) {
  using Eval = std::function<double(const TheoryParams&)>;
  const std::map<std::string, Eval> ops = {
      {"coincidence",
       [](const TheoryParams& q) {
         return coincidence_prob({q.mu_a, q.mu_b, q.theta, q.overlap_angle});
       }},
      {"phase-averaged",
       [](const TheoryParams& q) {
         return phase_averaged_coincidence(q.mu_a, q.mu_b, q.overlap_angle);
       }},
      {"visibility-exact",
       [](const TheoryParams& q) {
         return hom_visibility_exact(q.mu_a, q.mu_b, q.overlap_angle);
       }},
      {"visibility-approx",
       [](const TheoryParams& q) {
         return hom_visibility_approx(q.mu_a, q.mu_b, q.cos2);
       }},
      {"fidelity",
       [](const TheoryParams& q) {
         return wcp_fidelity({q.mu_a, q.mu_b, q.theta, q.overlap_angle});
       }},
      {"nonvacuum-fidelity",
       [](const TheoryParams& q) {
         return nonvacuum_fidelity_sq_avg(q.mu_a, q.mu_b, q.overlap_angle);
       }},
      {"dip-profile",
       [](const TheoryParams& q) {
         return hom_dip_profile(q.delay, q.tau_p, q.chirp);
       }},
      {"spectrum",
       [](const TheoryParams& q) {
         return chirped_spectrum(q.nu, q.tau_p, q.chirp);
       }},
      {"timing-overlap",
       [](const TheoryParams& q) { return timing_overlap(q.delay, q.tau_p); }},
      {"jitter-factor",
       [](const TheoryParams& q) { return jitter_factor(q.tau_p, q.jitter); }},
      {"chirp-from-dip",
       [](const TheoryParams& q) {
         return chirp_from_dip(q.tau_p, q.sigma_dip);
       }},
      {"intensity-factor",
       [](const TheoryParams& q) {
         return intensity_factor_stats(q.intensity_var).first;
       }},
  };
  const auto it = ops.find(op);
  if (it == ops.end()) {
    std::cerr << "unknown theory op '" << op << "'; available:";
    for (const auto& [name, fn] : ops) std::cerr << " " << name;
    std::cerr << "\n";
    return 1;
  }

  const std::map<std::string, double TheoryParams::*> fields = {
      {"mu-a", &TheoryParams::mu_a},
      {"mu-b", &TheoryParams::mu_b},
      {"theta", &TheoryParams::theta},
      {"Theta", &TheoryParams::overlap_angle},
      {"cos2", &TheoryParams::cos2},
      {"tau-p", &TheoryParams::tau_p},
      {"chirp", &TheoryParams::chirp},
      {"jitter", &TheoryParams::jitter},
      {"delay", &TheoryParams::delay},
      {"nu", &TheoryParams::nu},
      {"intensity-var", &TheoryParams::intensity_var},
      {"sigma-dip", &TheoryParams::sigma_dip},
  };

  std::cout.precision(12);
  if (var.empty()) {
    std::cout << op << "\t" << it->second(p) << "\n";
    if (op == "intensity-factor") {
      const auto [mean, var2] = intensity_factor_stats(p.intensity_var);
      std::cout << "variance\t" << var2 << "\n";
      std::cout << "# leading-order relative visibility reduction is "
                   "intensity_variance/2 = "
                << 0.5 * p.intensity_var << "\n";
    }
    return 0;
  }
  const bool both_mu = var == "mu";  // sweeps mu-a and mu-b together
  const auto f = fields.find(var);
  if (!both_mu && f == fields.end()) {
    std::cerr << "unknown sweep variable '" << var << "'\n";
    return 1;
  }
  if (steps < 2) {
    std::cerr << "--steps must be at least 2\n";
    return 1;
  }
  std::cout << var << "\t" << op << "\n";
  for (int i = 0; i < steps; ++i) {
    TheoryParams q = p;
    const double x = from + (to - from) * i / (steps - 1);
    if (both_mu) {
      q.mu_a = x;
      q.mu_b = x;
    } else {
      q.*(f->second) = x;
    }
    std::cout << x << "\t" << it->second(q) << "\n";
  }
  return 0;
}

int cmd_report(const std::string& file) {
  std::ifstream in(file);
  if (!in) {
    std::cerr << "cannot open report file: " << file << "\n";
    return 1;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  const nlohmann::json j = nlohmann::json::parse(buf.str());

  // Rebuild the human-readable rendering from the structured document.
  std::cout << "HOM indistinguishability certification report\n";
  std::cout << "==============================================\n\n";
  auto print_group = [](const nlohmann::json& g) {
    std::cout << "  " << g.at("name").get<std::string>() << ": V = "
              << g.at("visibility").get<double>() << " +- "
              << g.at("visibility_std").get<double>() << ", t0 = "
              << g.at("center_ps").get<double>() << " +- "
              << g.at("center_std_ps").get<double>() << " ps, sigma = "
              << g.at("sigma_ps").get<double>() << " +- "
              << g.at("sigma_std_ps").get<double>() << " ps\n";
  };
  for (const auto& g : j.at("groups")) print_group(g);
  if (j.contains("pooled")) print_group(j.at("pooled"));
  if (j.contains("likelihood_ratio")) {
    const auto& lr = j.at("likelihood_ratio");
    std::cout << "likelihood ratio: statistic = "
              << lr.at("statistic").get<double>() << ", df = "
              << lr.at("df").get<int>() << ", chi-square p = "
              << lr.at("p_chi2").get<double>();
    if (lr.contains("p_calibrated")) {
      std::cout << ", calibrated p = " << lr.at("p_calibrated").get<double>();
    }
    std::cout << "\n";
  }
  if (j.contains("anova")) {
    std::cout << "position anova: F = " << j.at("anova").at("f").get<double>()
              << ", p = " << j.at("anova").at("p").get<double>() << "\n";
  }
  std::cout << "verdict: " << j.at("verdict").get<std::string>() << "\n";
  for (const auto& n : j.value("notes", std::vector<std::string>{})) {
    std::cout << "note: " << n << "\n";
  }
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"HOM indistinguishability test toolkit for time-bin QKD "
               "transmitters"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  // simulate
  auto* sim = app.add_subcommand(
      "simulate", "run the coincidence-scan simulation and write histograms");
  std::string sim_config;
  uint64_t sim_seed = 1;
  std::string sim_out;
  sim->add_option("--config", sim_config, "configuration file (defaults used when omitted)");
  sim->add_option("--seed", sim_seed, "master seed")->default_val(1);
  sim->add_option("--out", sim_out, "output directory");

  // certify
  auto* cert = app.add_subcommand(
      "certify", "fit histogram files and run the certification tests");
  std::vector<std::string> cert_files;
  double cert_alpha = 0.05;
  std::string cert_out;
  std::string cert_format = "text";
  uint64_t cert_seed = 0;
  bool cert_seed_set = false;
  cert->add_option("files", cert_files, "histogram files")->required();
  cert->add_option("--alpha", cert_alpha, "significance level")->default_val(0.05);
  cert->add_option("--out", cert_out, "output directory");
  cert->add_option("--format", cert_format, "text or structured")
      ->check(CLI::IsMember({"text", "structured"}));
  cert->add_option("--seed", cert_seed, "bootstrap seed (derived from data when omitted)")
      ->each([&](const std::string&) { cert_seed_set = true; });

  // fit
  auto* fit = app.add_subcommand("fit", "fit a single histogram file");
  std::string fit_file;
  std::string fit_format = "text";
  fit->add_option("file", fit_file, "histogram file")->required();
  fit->add_option("--format", fit_format, "text or structured")
      ->check(CLI::IsMember({"text", "structured"}));

  // theory
  auto* theory = app.add_subcommand(
      "theory", "evaluate closed-form quantities, optionally over a grid");
  std::string th_op;
  TheoryParams th_params;
  std::string th_var;
  double th_from = 0.0, th_to = 1.0;
  int th_steps = 11;
  theory->add_option("--op", th_op, "quantity to evaluate")->required();
  theory->add_option("--mu-a", th_params.mu_a);
  theory->add_option("--mu-b", th_params.mu_b);
  theory->add_option("--theta", th_params.theta);
  theory->add_option("--Theta", th_params.overlap_angle);
  theory->add_option("--cos2", th_params.cos2);
  theory->add_option("--tau-p", th_params.tau_p);
  theory->add_option("--chirp", th_params.chirp);
  theory->add_option("--jitter", th_params.jitter);
  theory->add_option("--delay", th_params.delay);
  theory->add_option("--nu", th_params.nu);
  theory->add_option("--intensity-var", th_params.intensity_var);
  theory->add_option("--sigma-dip", th_params.sigma_dip);
  theory->add_option("--var", th_var, "sweep variable");
  theory->add_option("--from", th_from);
  theory->add_option("--to", th_to);
  theory->add_option("--steps", th_steps);

  // report
  auto* rep = app.add_subcommand("report",
                                 "render a structured report as text");
  std::string rep_file;
  rep->add_option("file", rep_file, "report.json")->required();

  std::vector<std::string> argv_storage = args;
  std::vector<const char*> argv;
  argv.push_back("homtest");
  for (const auto& a : argv_storage) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (sim->parsed()) return cmd_simulate(sim_config, sim_seed, sim_out);
    if (cert->parsed()) {
      return cmd_certify(cert_files, cert_alpha, cert_out, cert_format,
                         cert_seed_set ? std::optional<uint64_t>(cert_seed)
                                       : std::nullopt);
    }
    if (fit->parsed()) return cmd_fit(fit_file, fit_format);
    if (theory->parsed()) {
      return cmd_theory(th_op, th_params, th_var, th_from, th_to, th_steps);
    }
    if (rep->parsed()) return cmd_report(rep_file);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace homtest::cli
