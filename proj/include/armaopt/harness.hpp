#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "armaopt/dataset.hpp"
#include "armaopt/estimate.hpp"
#include "armaopt/evaluate.hpp"
#include "armaopt/stats.hpp"

namespace armaopt {

/// A records file whose header does not match any known schema.
struct SchemaMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// One benchmark row; the CSV column order is exactly this field order.
struct BenchmarkRecord {
  int series_id = 0;
  int p = 0;
  int q = 0;
  long length = 0;
  double sigma = 0.0;
  std::string method;  // "jones" | "bounded"
  double lambda = 0.0;
  int start_index = 0;
  std::string start_boundary_class;
  std::optional<double> loglik;  // absent exactly when failure_kind present
  double wall_time_s = 0.0;
  std::optional<std::string> failure_kind;
  std::optional<std::string> error_point_class;
  std::string result_boundary_class;
  std::optional<double> mase3;
  std::optional<double> scaled_err_1;
  std::optional<double> scaled_err_2;
  std::optional<double> scaled_err_3;
};

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<BenchmarkRecord>& records);
std::vector<BenchmarkRecord> read_records_csv(
    const std::filesystem::path& path);

/// Shared pipeline knobs. Thread count 0 defers to ARMA_OPT_THREADS, then
/// hardware concurrency.
struct HarnessOptions {
  std::vector<FitMethod> methods{FitMethod::Jones, FitMethod::Bounded};
  int n_starts = 30;
  std::uint64_t seed = 0;
  double epsilon = 1e-2;
  double tau = 2e-2;
  double lambda = 0.0;
  std::vector<double> lambdas{0, 1, 2, 4, 8, 16};  // reg-sweep grid
  JonesForm jones_form = JonesForm::Stable;
  int holdout = 3;
  bool record_timing = true;  // false zeroes wall times for byte-stable reruns
  double far_start_scale = 0.0;  // > 0: chart starts drawn from U(-S, S)
  int threads = 0;
};

struct MethodSummary {
  std::string method;
  long n_runs = 0;
  long n_success = 0;
  long n_failures = 0;
  long n_arithmetic = 0;
  long n_kalman = 0;
  double failures_per_1000 = 0.0;
  double mean_time_s = 0.0;  // successful runs only
};

struct BenchmarkOutput {
  std::vector<BenchmarkRecord> records;  // sorted: series_id, method, start
  std::vector<MethodSummary> summary;
  /// Wilcoxon on paired per-series mean successful times, jones - bounded,
  /// alternative greater. Absent unless both methods ran and some pair of
  /// per-series means differs.
  std::optional<TestReport> time_test;
  long n_time_pairs = 0;
  std::vector<std::string> warnings;  // e.g. series files missing from disk
};

BenchmarkOutput run_benchmark(const Dataset& ds, const HarnessOptions& opt);

/// Border-vs-strict forecasting comparison: per series, best
/// strictly-feasible and best near-border local optimum by log-likelihood,
/// scored on the holdout.
struct ForecastPairRow {
  int series_id = 0;
  int p = 0;
  int q = 0;
  long length = 0;
  double sigma = 0.0;
  double strict_loglik = 0.0;
  double border_loglik = 0.0;
  std::string border_class;
  ForecastScore strict_score;
  ForecastScore border_score;
};

struct ForecastEvalOutput {
  std::vector<ForecastPairRow> rows;
  long n_excluded = 0;  // series lacking one of the two solution types
  /// Per metric: Wilcoxon on (border - strict), alternative greater.
  std::vector<std::pair<std::string, TestReport>> tests;
};

ForecastEvalOutput run_forecast_eval(const Dataset& ds,
                                     const HarnessOptions& opt);

void write_forecast_csv(const std::filesystem::path& path,
                        const std::vector<ForecastPairRow>& rows);
std::vector<ForecastPairRow> read_forecast_csv(
    const std::filesystem::path& path);

/// Regularization sweep: single shared Hannan-Rissanen start per series,
/// columns jones + bounded at each lambda, ranked on holdout metrics.
struct RegSweepRow {
  int series_id = 0;
  int p = 0;
  int q = 0;
  long length = 0;
  double sigma = 0.0;
  std::string method;  // "jones" or "lambda=<v>"
  double lambda = 0.0;
  std::optional<double> loglik;
  double penalty_norm = 0.0;  // ||(rho, b)||_2 at the optimum
  std::optional<double> mase3;
  std::optional<double> scaled_err_1;
  std::optional<double> scaled_err_2;
  std::optional<double> scaled_err_3;
  std::optional<std::string> failure_kind;
};

struct RegSweepOutput {
  std::vector<std::string> method_labels;  // 7 columns at defaults
  std::vector<RegSweepRow> rows;           // series-major, method order fixed
  long n_excluded = 0;  // series with any failed column, dropped from ranks
  std::vector<std::string> metric_names;   // MASE(3), ScaledError(1..3)
  std::vector<std::vector<double>> mean_ranks;  // metric x method
  std::vector<TestReport> friedman_reports;     // per metric
  /// Pairwise matrices only for metrics whose Friedman p passes alpha = 0.1.
  std::vector<std::optional<std::vector<std::vector<double>>>> nemenyi_tables;
};

RegSweepOutput run_reg_sweep(const Dataset& ds, const HarnessOptions& opt);

void write_reg_sweep_csv(const std::filesystem::path& path,
                         const std::vector<RegSweepRow>& rows);
std::vector<RegSweepRow> read_reg_sweep_csv(const std::filesystem::path& path);

std::string render_benchmark_summary(const BenchmarkOutput& out);
std::string render_forecast_summary(const ForecastEvalOutput& out);
std::string render_reg_sweep_summary(const RegSweepOutput& out);

/// Render any of the three record schemas (detected from the header) as a
/// readable text report. `ds` optionally joins ground-truth boundary
/// classes; `clip_p` clips displayed p-values into [0.001, 0.9].
std::string render_report(const std::filesystem::path& records_csv,
                          const Dataset* ds, bool clip_p);

/// Effective worker count: `requested`, else ARMA_OPT_THREADS, else
/// hardware concurrency; always >= 1.
int resolve_threads(int requested);

}  // namespace armaopt
