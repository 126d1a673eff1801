#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "homtest/certify.hpp"
#include "homtest/coherent.hpp"
#include "homtest/detection.hpp"
#include "homtest/io.hpp"
#include "homtest/rng.hpp"
#include "homtest/states.hpp"
#include "homtest/stats.hpp"
#include "homtest/transmitter.hpp"
#include "homtest/version.hpp"

namespace py = pybind11;
using namespace homtest;

namespace {

std::vector<FitPoint> to_points(const std::vector<double>& t,
                                const std::vector<double>& y,
                                const std::vector<double>& s) {
  if (t.size() != y.size() || t.size() != s.size()) {
    throw std::invalid_argument("t, y, s must have the same length");
  }
  std::vector<FitPoint> pts;
  for (size_t i = 0; i < t.size(); ++i) pts.push_back({t[i], y[i], s[i]});
  return pts;
}

py::dict fit_to_dict(const DipFit& fit) {
  py::dict d;
  d["amplitude"] = fit.amplitude;
  d["center_ps"] = fit.center;
  d["sigma_ps"] = fit.sigma;
  d["baseline"] = fit.baseline;
  d["amplitude_std"] = fit.std_amplitude();
  d["center_std_ps"] = fit.std_center();
  d["sigma_std_ps"] = fit.std_sigma();
  d["baseline_std"] = fit.std_baseline();
  d["chi2"] = fit.chi2;
  d["n_points"] = fit.n_points;
  const auto vis = visibility_from_fit(fit);
  d["visibility"] = vis.value;
  d["visibility_std"] = vis.stddev;
  d["indeterminate"] = vis.indeterminate;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "HOM indistinguishability test toolkit: coherent-pulse "
            "interference math, experiment simulation, and the statistical "
            "certification pipeline";
  m.attr("__version__") = kVersion;

  // Two-pulse interference math.
  py::class_<PulsePair>(m, "PulsePair")
      .def(py::init([](double mu_a, double mu_b, double theta, double Theta) {
             PulsePair p{mu_a, mu_b, theta, Theta};
             p.validate();
             return p;
           }),
           py::arg("mu_a"), py::arg("mu_b"), py::arg("theta") = 0.0,
           py::arg("Theta") = 0.0)
      .def_readonly("mu_a", &PulsePair::mu_a)
      .def_readonly("mu_b", &PulsePair::mu_b)
      .def_readonly("theta", &PulsePair::relative_phase)
      .def_readonly("Theta", &PulsePair::overlap_angle);

  m.def("bessel_i0", &bessel_i0, py::arg("z"));
  m.def(
      "splitter_transform",
      [](const PulsePair& p) {
        const auto out = splitter_transform(p);
        return py::make_tuple(out.alpha_c, out.alpha_d, out.beta_c, out.beta_d);
      },
      py::arg("pair"),
      "Output-mode amplitudes (alpha_c, alpha_d, beta_c, beta_d)");
  m.def("mean_output_photons", &mean_output_photons, py::arg("pair"));
  m.def("joint_photon_prob", &joint_photon_prob, py::arg("m"), py::arg("n"),
        py::arg("pair"));
  m.def("coincidence_prob", &coincidence_prob, py::arg("pair"));
  m.def("phase_averaged_coincidence", &phase_averaged_coincidence,
        py::arg("mu_a"), py::arg("mu_b"), py::arg("Theta"));
  m.def("hom_visibility_exact", &hom_visibility_exact, py::arg("mu_a"),
        py::arg("mu_b"), py::arg("Theta"));
  m.def("hom_visibility_approx", &hom_visibility_approx, py::arg("mu_a"),
        py::arg("mu_b"), py::arg("cos2_theta"));
  m.def("swap_outcome_probs_wcp", &swap_outcome_probs_wcp, py::arg("pair"));
  m.def("wcp_fidelity", &wcp_fidelity, py::arg("pair"));
  m.def("nonvacuum_fidelity_sq_avg", &nonvacuum_fidelity_sq_avg,
        py::arg("mu_a"), py::arg("mu_b"), py::arg("Theta"));

  // Finite-dimensional state algebra over numpy arrays.
  m.def(
      "swap_test_probs",
      [](const ComplexVector& a, const ComplexVector& b) {
        return swap_test_probs(PureState(a), PureState(b));
      },
      py::arg("phi"), py::arg("psi"));
  m.def(
      "simulate_cswap",
      [](const ComplexVector& a, const ComplexVector& b) {
        return simulate_cswap(PureState(a), PureState(b));
      },
      py::arg("phi"), py::arg("psi"));
  m.def(
      "trace_product",
      [](const ComplexMatrix& a, const ComplexMatrix& b) {
        return trace_product(DensityMatrix(a), DensityMatrix(b));
      },
      py::arg("rho1"), py::arg("rho2"));
  m.def(
      "linear_entropy",
      [](const ComplexMatrix& a) { return linear_entropy(DensityMatrix(a)); },
      py::arg("rho"));
  m.def(
      "fidelity_bounds",
      [](const ComplexMatrix& a, const ComplexMatrix& b) {
        return fidelity_bounds(DensityMatrix(a), DensityMatrix(b));
      },
      py::arg("rho1"), py::arg("rho2"));
  m.def(
      "uhlmann_fidelity",
      [](const ComplexMatrix& a, const ComplexMatrix& b) {
        return uhlmann_fidelity(DensityMatrix(a), DensityMatrix(b));
      },
      py::arg("rho1"), py::arg("rho2"));
  m.def(
      "modulated_trace_product",
      [](const ComplexMatrix& u1, const ComplexMatrix& u2,
         const ComplexMatrix& r1, const ComplexMatrix& r2) {
        return modulated_trace_product(UnitaryMatrix(u1), UnitaryMatrix(u2),
                                       DensityMatrix(r1), DensityMatrix(r2));
      },
      py::arg("u1"), py::arg("u2"), py::arg("rho1"), py::arg("rho2"));
  m.def(
      "tensor_embed",
      [](const ComplexMatrix& s, const ComplexMatrix& o) {
        return tensor_embed(DensityMatrix(s), DensityMatrix(o)).matrix();
      },
      py::arg("signal"), py::arg("other"));
  m.def(
      "random_density_matrix",
      [](int dim, uint64_t seed) {
        RandomStream rng(seed);
        return random_density_matrix(dim, rng).matrix();
      },
      py::arg("dim"), py::arg("seed"));
  m.def(
      "random_unitary",
      [](int dim, uint64_t seed) {
        RandomStream rng(seed);
        return random_unitary(dim, rng).matrix();
      },
      py::arg("dim"), py::arg("seed"));

  // Transmitter diagnostics.
  m.def("timing_overlap", &timing_overlap, py::arg("d_ps"), py::arg("tau_p_ps"));
  m.def("jitter_factor", &jitter_factor, py::arg("tau_p_ps"),
        py::arg("jitter_std_ps"));
  m.def("intensity_factor_stats", &intensity_factor_stats,
        py::arg("intensity_variance"));
  m.def("chirped_spectrum", &chirped_spectrum, py::arg("nu_thz"),
        py::arg("tau_p_ps"), py::arg("chirp"));
  m.def("spectral_fwhm_thz", &spectral_fwhm_thz, py::arg("tau_p_ps"),
        py::arg("chirp"));
  m.def("hom_dip_profile", &hom_dip_profile, py::arg("t_ps"),
        py::arg("tau_p_ps"), py::arg("chirp"));
  m.def("dip_sigma_ps", &dip_sigma_ps, py::arg("tau_p_ps"), py::arg("chirp"));
  m.def("chirp_from_dip", &chirp_from_dip, py::arg("tau_p_ps"),
        py::arg("sigma_dip_ps"));

  // Fitting and tests over plain arrays.
  m.def(
      "fit_dip",
      [](const std::vector<double>& t, const std::vector<double>& y,
         const std::vector<double>& s) {
        return fit_to_dict(fit_dip(to_points(t, y, s)));
      },
      py::arg("t"), py::arg("y"), py::arg("s"),
      "Weighted dip fit; returns a dict of parameters and uncertainties");
  m.def("chi2_survival", &chi2_survival, py::arg("x"), py::arg("df"));
  m.def("f_survival", &f_survival, py::arg("f"), py::arg("df1"), py::arg("df2"));
  m.def(
      "anova_oneway",
      [](const std::vector<std::vector<double>>& groups) {
        const auto r = anova_oneway(groups);
        py::dict d;
        d["f"] = r.f_statistic;
        d["p"] = r.p_value;
        d["df_between"] = r.df_between;
        d["df_within"] = r.df_within;
        d["degenerate"] = r.degenerate;
        return d;
      },
      py::arg("groups"));
  m.def("power_analysis", &power_analysis, py::arg("delta_v"), py::arg("std_v"),
        py::arg("alpha"));
  m.def("detectable_difference", &detectable_difference, py::arg("std_v"),
        py::arg("alpha"), py::arg("power"));

  // Simulation and certification round trip.
  m.def(
      "run_experiment",
      [](const std::string& config_text, uint64_t seed) {
        const auto hists = run_experiment(parse_config(config_text), seed);
        py::list out;
        for (const auto& h : hists) {
          py::dict d;
          d["group"] = h.group;
          d["tau_ps"] = h.tau_ps;
          d["counts"] = h.counts;
          d["trials"] = h.trials;
          out.append(d);
        }
        return out;
      },
      py::arg("config_text"), py::arg("seed"),
      "Simulate the coincidence scan for a configuration given as text");
  m.def(
      "certify_csv",
      [](const std::vector<std::string>& csv_texts, double alpha,
         uint64_t seed) {
        std::vector<CoincidenceHistogram> hists;
        for (const auto& t : csv_texts) hists.push_back(histogram_from_csv(t));
        CertifyOptions opts;
        opts.alpha = alpha;
        opts.seed = seed;
        const auto report = certify(hists, opts);
        py::dict d;
        d["verdict"] = to_string(report.verdict);
        d["exit_code"] = exit_code(report.verdict);
        d["json"] = report.to_json();
        return d;
      },
      py::arg("csv_texts"), py::arg("alpha") = 0.05, py::arg("seed") = 1,
      "Run the certification pipeline on histogram files given as text");
  m.def(
      "histogram_csv",
      [](const std::string& config_text, uint64_t seed) {
        const auto cfg = parse_config(config_text);
        const auto hists = run_experiment(cfg, seed);
        std::vector<std::string> out;
        for (const auto& h : hists) out.push_back(histogram_to_csv(h, "py"));
        return out;
      },
      py::arg("config_text"), py::arg("seed"),
      "Simulate and return the histogram files as CSV text");
}
