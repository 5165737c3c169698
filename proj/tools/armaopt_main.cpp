#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "armaopt/dataset.hpp"
#include "armaopt/estimate.hpp"
#include "armaopt/harness.hpp"
#include "armaopt/simulate.hpp"

namespace {

using namespace armaopt;
using nlohmann::ordered_json;

struct CommonFlags {
  std::uint64_t seed = 0;
  double epsilon = 1e-2;
  double tau = -1.0;  // < 0: follow epsilon as 2*epsilon
  int starts = 30;
  int threads = 0;
  std::string jones_form = "stable";

  double effective_tau() const { return tau > 0.0 ? tau : 2.0 * epsilon; }
  JonesForm parsed_jones_form() const {
    return jones_form == "naive" ? JonesForm::Naive : JonesForm::Stable;
  }
};

void add_common(CLI::App* cmd, CommonFlags& cf, bool with_starts = true) {
  cmd->add_option("--seed", cf.seed, "root RNG seed");
  cmd->add_option("--epsilon", cf.epsilon, "feasible-box shrink")
      ->check(CLI::Range(1e-12, 0.499));
  cmd->add_option("--tau", cf.tau,
                  "boundary-closeness threshold (default 2*epsilon)");
  if (with_starts)
    cmd->add_option("--starts", cf.starts, "start points per series")
        ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", cf.threads,
                  "worker threads (0: ARMA_OPT_THREADS or hardware)");
  cmd->add_option("--jones-form", cf.jones_form,
                  "logistic map evaluation form")
      ->check(CLI::IsMember({"stable", "naive"}));
}

HarnessOptions harness_options(const CommonFlags& cf) {
  HarnessOptions opt;
  opt.seed = cf.seed;
  opt.epsilon = cf.epsilon;
  opt.tau = cf.effective_tau();
  opt.n_starts = cf.starts;
  opt.threads = cf.threads;
  opt.jones_form = cf.parsed_jones_form();
  return opt;
}

ordered_json result_to_json(const FitResult& r, int start_index,
                            double lambda) {
  ordered_json j;
  j["start_index"] = start_index;
  j["lambda"] = lambda;
  if (r.ok()) j["loglik"] = r.loglik;
  else j["loglik"] = nullptr;
  j["phi"] = r.params.phi;
  j["theta"] = r.params.theta;
  j["sigma2"] = r.params.sigma2;
  j["rho"] = r.pacf.rho;
  j["b"] = r.pacf.b;
  j["boundary_class"] = std::string(to_string(r.boundary.tag));
  j["n_obj_evals"] = r.n_obj_evals;
  j["n_iters"] = r.n_iters;
  j["wall_time_s"] = r.wall_time_s;
  if (r.failure) {
    ordered_json f;
    f["kind"] = std::string(to_string(r.failure->kind));
    f["detail"] = r.failure->detail;
    BoundaryClass loc = classify_boundary(r.failure->location, r.boundary.tau);
    f["location_class"] = std::string(to_string(loc.tag));
    j["failure"] = std::move(f);
  } else {
    j["failure"] = nullptr;
  }
  return j;
}

std::vector<ArmaOrder> parse_orders(const std::vector<std::string>& specs) {
  std::vector<ArmaOrder> out;
  for (const std::string& s : specs) {
    int p = 0, q = 0;
    if (std::sscanf(s.c_str(), "%d:%d", &p, &q) != 2 &&
        std::sscanf(s.c_str(), "%dx%d", &p, &q) != 2)
      throw CLI::ValidationError("--orders", "expected p:q entries");
    if (p < 0 || q < 0 || p + q == 0)
      throw CLI::ValidationError("--orders", "invalid order " + s);
    out.push_back({p, q});
  }
  return out;
}

int cmd_simulate(const std::string& preset, const std::string& spec_file,
                 const CommonFlags& cf, int replicates,
                 const std::vector<std::size_t>& lengths,
                 const std::vector<double>& sigmas,
                 const std::vector<std::string>& orders,
                 const std::string& out_dir) {
  DatasetSpec spec;
  if (!spec_file.empty()) {
    std::ifstream in(spec_file);
    if (!in) throw std::runtime_error("cannot open spec file " + spec_file);
    nlohmann::json j;
    in >> j;
    if (j.contains("lengths"))
      spec.lengths = j["lengths"].get<std::vector<std::size_t>>();
    if (j.contains("sigmas"))
      spec.sigmas = j["sigmas"].get<std::vector<double>>();
    if (j.contains("orders")) {
      spec.orders.clear();
      for (const auto& o : j["orders"])
        spec.orders.push_back({o.at(0).get<int>(), o.at(1).get<int>()});
    }
    if (j.contains("replicates")) spec.replicates = j["replicates"].get<int>();
    if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  } else if (preset == "paper") {
    spec = DatasetSpec::paper_preset(cf.seed);
  } else if (preset == "desk") {
    spec = DatasetSpec::desk_preset(cf.seed);
  }
  if (spec_file.empty()) {
    spec.seed = cf.seed;
    if (!lengths.empty()) spec.lengths = lengths;
    if (!sigmas.empty()) spec.sigmas = sigmas;
    if (!orders.empty()) spec.orders = parse_orders(orders);
    if (replicates > 0) spec.replicates = replicates;
  }
  spec.eps = cf.epsilon;
  spec.tau = cf.effective_tau();

  const std::vector<SimulatedSeries> series = generate_series(spec);
  write_dataset(out_dir, spec, series);
  std::cout << "grid: " << spec.lengths.size() << " lengths x "
            << spec.sigmas.size() << " sigmas x " << spec.order_grid().size()
            << " orders x " << spec.replicates << " replicates = "
            << series.size() << " series -> " << out_dir << "\n";
  return 0;
}

int cmd_fit(const std::string& series_file, const std::vector<int>& order_pq,
            const std::string& method, double lambda, const CommonFlags& cf,
            const std::string& out_file) {
  const std::vector<double> y = read_series_csv(series_file);
  const ArmaOrder order{order_pq.at(0), order_pq.at(1)};

  FitConfig cfg;
  const auto m = parse_fit_method(method);
  if (!m) throw CLI::ValidationError("--method", "unknown method " + method);
  cfg.method = *m;
  cfg.epsilon = cf.epsilon;
  cfg.lambda = lambda;
  cfg.jones_form = cf.parsed_jones_form();
  cfg.tau = cf.effective_tau();

  RngStream rng(cf.seed);
  const std::vector<FitResult> results =
      multistart_fit(y, order, cfg, cf.starts, rng);
  const int best = best_index(results);

  ordered_json j;
  j["series"] = series_file;
  j["order"] = {{"p", order.p}, {"q", order.q}};
  j["length"] = y.size();
  j["method"] = method;
  j["lambda"] = lambda;
  j["epsilon"] = cf.epsilon;
  j["tau"] = cf.effective_tau();
  j["jones_form"] = cf.jones_form;
  j["starts"] = cf.starts;
  j["seed"] = cf.seed;
  j["best_index"] = best;
  j["best"] = best >= 0 ? result_to_json(results[best], best, lambda)
                        : ordered_json(nullptr);
  j["results"] = ordered_json::array();
  for (std::size_t i = 0; i < results.size(); ++i)
    j["results"].push_back(
        result_to_json(results[i], static_cast<int>(i), lambda));

  if (out_file.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream out(out_file);
    if (!out) throw std::runtime_error("cannot write " + out_file);
    out << j.dump(2) << "\n";
  }
  return 0;
}

int cmd_benchmark(const std::string& dataset_dir,
                  const std::vector<std::string>& methods, double lambda,
                  const CommonFlags& cf, double far_start_scale,
                  bool no_timing, const std::string& out_file) {
  const Dataset ds = read_dataset(dataset_dir);
  HarnessOptions opt = harness_options(cf);
  opt.lambda = lambda;
  opt.far_start_scale = far_start_scale;
  opt.record_timing = !no_timing;
  opt.methods.clear();
  for (const std::string& name : methods) {
    const auto m = parse_fit_method(name);
    if (!m) throw CLI::ValidationError("--methods", "unknown method " + name);
    opt.methods.push_back(*m);
  }

  const BenchmarkOutput out = run_benchmark(ds, opt);
  if (!out_file.empty()) write_records_csv(out_file, out.records);
  std::cout << render_benchmark_summary(out);
  if (!out_file.empty())
    std::cout << "records written to " << out_file << "\n";
  return 0;
}

int cmd_forecast_eval(const std::string& dataset_dir, const std::string& method,
                      int holdout, double lambda, const CommonFlags& cf,
                      const std::string& out_file) {
  const Dataset ds = read_dataset(dataset_dir);
  HarnessOptions opt = harness_options(cf);
  opt.holdout = holdout;
  opt.lambda = lambda;
  const auto m = parse_fit_method(method);
  if (!m) throw CLI::ValidationError("--method", "unknown method " + method);
  opt.methods = {*m};

  const ForecastEvalOutput out = run_forecast_eval(ds, opt);
  if (!out_file.empty()) write_forecast_csv(out_file, out.rows);
  std::cout << render_forecast_summary(out);
  if (!out_file.empty())
    std::cout << "scores written to " << out_file << "\n";
  return 0;
}

int cmd_reg_sweep(const std::string& dataset_dir,
                  const std::vector<double>& lambdas, const std::string& init,
                  int holdout, const CommonFlags& cf,
                  const std::string& out_file) {
  if (init != "hr")
    throw CLI::ValidationError("--init", "only 'hr' is supported");
  const Dataset ds = read_dataset(dataset_dir);
  HarnessOptions opt = harness_options(cf);
  opt.holdout = holdout;
  if (!lambdas.empty()) opt.lambdas = lambdas;

  const RegSweepOutput out = run_reg_sweep(ds, opt);
  if (!out_file.empty()) write_reg_sweep_csv(out_file, out.rows);
  std::cout << render_reg_sweep_summary(out);
  if (!out_file.empty())
    std::cout << "rows written to " << out_file << "\n";
  return 0;
}

int cmd_report(const std::string& records_file, const std::string& dataset_dir,
               bool clip_p) {
  std::optional<Dataset> ds;
  if (!dataset_dir.empty()) ds = read_dataset(dataset_dir);
  std::cout << render_report(records_file, ds ? &*ds : nullptr, clip_p);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARMA exact-likelihood fitting and benchmark harness"};
  app.require_subcommand(1);

  CommonFlags cf;

  // simulate
  auto* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  std::string sim_preset = "desk", sim_spec_file, sim_out;
  int sim_replicates = 0;
  std::vector<std::size_t> sim_lengths;
  std::vector<double> sim_sigmas;
  std::vector<std::string> sim_orders;
  sim->add_option("--preset", sim_preset, "grid preset")
      ->check(CLI::IsMember({"paper", "desk"}));
  sim->add_option("--spec", sim_spec_file, "dataset spec JSON file");
  sim->add_option("--lengths", sim_lengths, "series lengths")->delimiter(',');
  sim->add_option("--sigmas", sim_sigmas, "noise standard deviations")
      ->delimiter(',');
  sim->add_option("--orders", sim_orders, "orders as p:q")->delimiter(',');
  sim->add_option("--replicates", sim_replicates, "series per grid cell");
  sim->add_option("-o,--out", sim_out, "output dataset directory")->required();
  add_common(sim, cf, false);

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit one series from a CSV file");
  std::string fit_series, fit_method = "bounded", fit_out;
  std::vector<int> fit_order;
  double fit_lambda = 0.0;
  fit_cmd->add_option("series", fit_series, "series CSV (t,y)")->required();
  fit_cmd->add_option("--order", fit_order, "AR and MA orders p q")
      ->expected(2)
      ->required();
  fit_cmd->add_option("--method", fit_method, "fitting method")
      ->check(CLI::IsMember({"bounded", "jones"}));
  fit_cmd->add_option("--lambda", fit_lambda, "L2 regularization weight")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("-o,--out", fit_out, "result JSON path (default stdout)");
  add_common(fit_cmd, cf);

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "multi-start fit benchmark");
  std::string bench_dataset, bench_out;
  std::vector<std::string> bench_methods{"jones", "bounded"};
  double bench_lambda = 0.0, bench_far = 0.0;
  bool bench_no_timing = false;
  bench->add_option("dataset", bench_dataset, "dataset directory")->required();
  bench->add_option("--methods", bench_methods, "methods to run")
      ->delimiter(',');
  bench->add_option("--lambda", bench_lambda, "L2 regularization weight")
      ->check(CLI::NonNegativeNumber);
  bench->add_option("--far-start-scale", bench_far,
                    "draw chart starts from U(-S, S) instead of the box")
      ->check(CLI::NonNegativeNumber);
  bench->add_flag("--no-timing", bench_no_timing,
                  "record zero wall times (byte-stable reruns)");
  bench->add_option("-o,--out", bench_out, "records CSV path");
  add_common(bench, cf);

  // forecast-eval
  auto* fev = app.add_subcommand(
      "forecast-eval", "border vs strictly-feasible forecasting comparison");
  std::string fev_dataset, fev_method = "bounded", fev_out;
  int fev_holdout = 3;
  double fev_lambda = 0.0;
  fev->add_option("dataset", fev_dataset, "dataset directory")->required();
  fev->add_option("--method", fev_method, "fitting method")
      ->check(CLI::IsMember({"bounded", "jones"}));
  fev->add_option("--holdout", fev_holdout, "held-out observations")
      ->check(CLI::PositiveNumber);
  fev->add_option("--lambda", fev_lambda, "L2 regularization weight")
      ->check(CLI::NonNegativeNumber);
  fev->add_option("-o,--out", fev_out, "scores CSV path");
  add_common(fev, cf);

  // reg-sweep
  auto* reg = app.add_subcommand("reg-sweep",
                                 "regularization sweep from shared HR starts");
  std::string reg_dataset, reg_init = "hr", reg_out;
  std::vector<double> reg_lambdas;
  int reg_holdout = 3;
  reg->add_option("dataset", reg_dataset, "dataset directory")->required();
  reg->add_option("--lambdas", reg_lambdas, "penalty weights")->delimiter(',');
  reg->add_option("--init", reg_init, "start-point strategy");
  reg->add_option("--holdout", reg_holdout, "held-out observations")
      ->check(CLI::PositiveNumber);
  reg->add_option("-o,--out", reg_out, "rows CSV path");
  add_common(reg, cf, false);

  // report
  auto* rep = app.add_subcommand("report", "render a records CSV as text");
  std::string rep_records, rep_dataset;
  bool rep_clip = false;
  rep->add_option("records", rep_records, "records CSV")->required();
  rep->add_option("--dataset", rep_dataset,
                  "dataset directory for ground-truth joins");
  rep->add_flag("--clip-p", rep_clip, "clip p-values into [0.001, 0.9]");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (sim->parsed())
      return cmd_simulate(sim_preset, sim_spec_file, cf, sim_replicates,
                          sim_lengths, sim_sigmas, sim_orders, sim_out);
    if (fit_cmd->parsed())
      return cmd_fit(fit_series, fit_order, fit_method, fit_lambda, cf,
                     fit_out);
    if (bench->parsed())
      return cmd_benchmark(bench_dataset, bench_methods, bench_lambda, cf,
                           bench_far, bench_no_timing, bench_out);
    if (fev->parsed())
      return cmd_forecast_eval(fev_dataset, fev_method, fev_holdout,
                               fev_lambda, cf, fev_out);
    if (reg->parsed())
      return cmd_reg_sweep(reg_dataset, reg_lambdas, reg_init, reg_holdout,
                           cf, reg_out);
    if (rep->parsed()) return cmd_report(rep_records, rep_dataset, rep_clip);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
