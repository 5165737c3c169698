#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "armaopt/estimate.hpp"
#include "armaopt/evaluate.hpp"
#include "armaopt/rng.hpp"
#include "armaopt/simulate.hpp"
#include "armaopt/statespace.hpp"
#include "armaopt/stats.hpp"
#include "armaopt/transforms.hpp"

namespace py = pybind11;

namespace {

using namespace armaopt;

JonesForm parse_form(const std::string& form) {
  if (form == "stable") return JonesForm::Stable;
  if (form == "naive") return JonesForm::Naive;
  throw std::invalid_argument("jones_form must be 'stable' or 'naive'");
}

Alternative parse_alternative(const std::string& alt) {
  if (alt == "two_sided" || alt == "two-sided") return Alternative::TwoSided;
  if (alt == "greater") return Alternative::Greater;
  if (alt == "less") return Alternative::Less;
  throw std::invalid_argument("alternative must be two_sided, greater, less");
}

py::dict result_to_dict(const FitResult& r) {
  py::dict d;
  d["phi"] = r.params.phi;
  d["theta"] = r.params.theta;
  d["sigma2"] = r.params.sigma2;
  d["rho"] = r.pacf.rho;
  d["b"] = r.pacf.b;
  d["loglik"] = r.ok() ? py::object(py::float_(r.loglik)) : py::none();
  d["boundary"] = std::string(to_string(r.boundary.tag));
  d["n_obj_evals"] = r.n_obj_evals;
  d["n_iters"] = r.n_iters;
  d["wall_time_s"] = r.wall_time_s;
  if (r.failure) {
    py::dict f;
    f["kind"] = std::string(to_string(r.failure->kind));
    f["detail"] = r.failure->detail;
    d["failure"] = f;
  } else {
    d["failure"] = py::none();
  }
  return d;
}

py::dict report_to_dict(const TestReport& rep) {
  py::dict d;
  d["statistic"] = rep.statistic;
  d["p_value"] = rep.p_value;
  d["alternative"] = std::string(to_string(rep.alternative));
  d["n_effective"] = rep.n_effective;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Exact-likelihood ARMA estimation core";

  m.def(
      "pacf_to_arma",
      [](std::vector<double> rho, std::vector<double> b, double sigma2) {
        const ArmaCoeffs c =
            pacf_to_arma({std::move(rho), std::move(b), sigma2});
        return py::make_tuple(c.phi, c.theta, c.sigma2);
      },
      py::arg("rho"), py::arg("b"), py::arg("sigma2") = 1.0,
      "Map partial coordinates to (phi, theta, sigma2).");

  m.def(
      "arma_to_pacf",
      [](std::vector<double> phi, std::vector<double> theta, double sigma2) {
        const PacfCoeffs p =
            arma_to_pacf({std::move(phi), std::move(theta), sigma2});
        return py::make_tuple(p.rho, p.b, p.sigma2);
      },
      py::arg("phi"), py::arg("theta"), py::arg("sigma2") = 1.0,
      "Map (phi, theta, sigma2) to partial coordinates.");

  m.def(
      "jones_map",
      [](std::vector<double> x, const std::string& form) {
        return jones_map(x, parse_form(form));
      },
      py::arg("x"), py::arg("form") = "stable",
      "Componentwise logistic map onto (-1, 1).");

  m.def(
      "jones_inverse",
      [](std::vector<double> rho) { return jones_inverse(rho); },
      py::arg("rho"), "Inverse logistic map.");

  m.def(
      "kalman_loglik",
      [](std::vector<double> phi, std::vector<double> theta, double sigma2,
         std::vector<double> y) {
        const StateSpace ss =
            build_state_space({std::move(phi), std::move(theta), sigma2});
        return kalman_loglik(ss, y);
      },
      py::arg("phi"), py::arg("theta"), py::arg("sigma2"), py::arg("y"),
      "Exact Gaussian log-likelihood by Kalman prediction-error "
      "decomposition.");

  m.def(
      "forecast",
      [](std::vector<double> phi, std::vector<double> theta, double sigma2,
         std::vector<double> y, int horizon) {
        const StateSpace ss =
            build_state_space({std::move(phi), std::move(theta), sigma2});
        return kalman_forecast(ss, y, horizon);
      },
      py::arg("phi"), py::arg("theta"), py::arg("sigma2"), py::arg("y"),
      py::arg("horizon"), "Minimum-MSE point forecasts for horizons 1..h.");

  m.def(
      "simulate_arma",
      [](std::vector<double> phi, std::vector<double> theta, double sigma2,
         std::size_t n, std::uint64_t seed) {
        RngStream rng(seed);
        return simulate_arma({std::move(phi), std::move(theta), sigma2}, n,
                             rng);
      },
      py::arg("phi"), py::arg("theta"), py::arg("sigma2"), py::arg("n"),
      py::arg("seed") = 0, "Simulate a zero-mean Gaussian ARMA series.");

  m.def(
      "hannan_rissanen",
      [](std::vector<double> y, int p, int q, double epsilon) {
        const PacfCoeffs s = hannan_rissanen(y, {p, q}, epsilon);
        return py::make_tuple(s.rho, s.b, s.sigma2);
      },
      py::arg("y"), py::arg("p"), py::arg("q"), py::arg("epsilon") = 1e-2,
      "Two-stage least-squares start point in partial coordinates.");

  m.def(
      "fit_arma",
      [](std::vector<double> y, int p, int q, const std::string& method,
         int starts, std::uint64_t seed, double epsilon, double lam,
         const std::string& jones_form, double tau) {
        FitConfig cfg;
        const auto parsed = parse_fit_method(method);
        if (!parsed) throw std::invalid_argument("unknown method " + method);
        cfg.method = *parsed;
        cfg.epsilon = epsilon;
        cfg.lambda = lam;
        cfg.jones_form = parse_form(jones_form);
        cfg.tau = tau > 0.0 ? tau : 2.0 * epsilon;
        RngStream rng(seed);
        const std::vector<FitResult> results =
            multistart_fit(y, {p, q}, cfg, starts, rng);
        const int best = best_index(results);
        py::dict out;
        out["best_index"] = best;
        out["best"] =
            best >= 0 ? py::object(result_to_dict(results[best])) : py::none();
        py::list all;
        for (const FitResult& r : results) all.append(result_to_dict(r));
        out["results"] = all;
        return out;
      },
      py::arg("y"), py::arg("p"), py::arg("q"), py::arg("method") = "bounded",
      py::arg("starts") = 30, py::arg("seed") = 0, py::arg("epsilon") = 1e-2,
      py::arg("lambda_") = 0.0, py::arg("jones_form") = "stable",
      py::arg("tau") = -1.0,
      "Multi-start exact-likelihood fit; returns best and per-start "
      "results.");

  m.def(
      "mase",
      [](std::vector<double> train, std::vector<double> actual,
         std::vector<double> forecast) { return mase(train, actual, forecast); },
      py::arg("train"), py::arg("actual"), py::arg("forecast"),
      "Mean absolute scaled error over all horizons.");

  m.def(
      "scaled_error",
      [](std::vector<double> train, std::vector<double> actual,
         std::vector<double> forecast, int h) {
        return scaled_error(train, actual, forecast, h);
      },
      py::arg("train"), py::arg("actual"), py::arg("forecast"), py::arg("h"),
      "Absolute scaled error at one horizon (1-based).");

  m.def(
      "wilcoxon_signed_rank",
      [](std::vector<double> d, const std::string& alternative) {
        return report_to_dict(
            wilcoxon_signed_rank(d, parse_alternative(alternative)));
      },
      py::arg("d"), py::arg("alternative") = "two_sided",
      "Wilcoxon signed-rank test on paired differences.");

  m.def(
      "friedman",
      [](const std::vector<std::vector<double>>& errors) {
        return report_to_dict(friedman(rank_methods(errors)));
      },
      py::arg("errors"),
      "Friedman rank test over a series-by-method error matrix.");

  m.def(
      "nemenyi",
      [](const std::vector<std::vector<double>>& errors) {
        return nemenyi(rank_methods(errors));
      },
      py::arg("errors"), "Nemenyi pairwise p-value matrix.");

  py::register_exception<NonCausalError>(m, "NonCausalError");
  py::register_exception<NonInvertibleError>(m, "NonInvertibleError");
  py::register_exception<DegenerateDenominator>(m, "DegenerateDenominator");
  py::register_exception<AllZeroDifferences>(m, "AllZeroDifferences");
}
