#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "armaopt/dataset.hpp"
#include "armaopt/harness.hpp"

using namespace armaopt;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("armaopt_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Dataset tiny_dataset(const std::string& tag, std::uint64_t seed,
                     int replicates = 3) {
  DatasetSpec spec;
  spec.lengths = {80};
  spec.sigmas = {1.0};
  spec.orders = {{1, 1}};
  spec.replicates = replicates;
  spec.seed = seed;
  const fs::path dir = fresh_dir(tag);
  write_dataset(dir, spec, generate_series(spec));
  return read_dataset(dir);
}

}  // namespace

TEST_CASE("series csv round-trips at full precision") {
  const fs::path dir = fresh_dir("series");
  const std::vector<double> y{0.1, -2.5, 3.141592653589793,
                              1.0 / 3.0, -1e-17};
  write_series_csv(dir / "s.csv", y);
  CHECK(read_series_csv(dir / "s.csv") == y);
}

TEST_CASE("dataset round-trips through its manifest") {
  DatasetSpec spec;
  spec.lengths = {60};
  spec.sigmas = {0.1, 1.0};
  spec.orders = {{2, 1}};
  spec.replicates = 2;
  spec.seed = 31;
  const fs::path dir = fresh_dir("dataset");
  const std::vector<SimulatedSeries> series = generate_series(spec);
  write_dataset(dir, spec, series);

  const Dataset ds = read_dataset(dir);
  CHECK(ds.seed == 31);
  CHECK(ds.epsilon == spec.eps);
  CHECK(ds.tau == spec.tau);
  REQUIRE(ds.entries.size() == series.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const DatasetEntry& e = ds.entries[i];
    CHECK(e.series_id == series[i].series_id);
    CHECK(e.order == series[i].order);
    CHECK(e.length == series[i].length);
    CHECK(e.sigma == series[i].sigma);
    CHECK(e.truth.coeffs.phi == series[i].truth.coeffs.phi);
    CHECK(e.truth.pacf.rho == series[i].truth.pacf.rho);
    CHECK(e.truth.boundary.tag == series[i].truth.boundary.tag);
    CHECK(ds.load(e) == series[i].values);
  }
}

TEST_CASE("benchmark records csv round-trips optionals") {
  BenchmarkRecord ok;
  ok.series_id = 3;
  ok.p = 2;
  ok.q = 1;
  ok.length = 100;
  ok.sigma = 0.1;
  ok.method = "bounded";
  ok.lambda = 0.5;
  ok.start_index = 4;
  ok.start_boundary_class = "StrictlyFeasible";
  ok.loglik = -123.456789012345678;
  ok.wall_time_s = 0.25;
  ok.result_boundary_class = "NearMA";
  ok.mase3 = 1.5;
  ok.scaled_err_1 = 0.5;
  ok.scaled_err_2 = 1.0;
  ok.scaled_err_3 = 3.0;

  BenchmarkRecord bad;
  bad.series_id = 4;
  bad.method = "jones";
  bad.start_boundary_class = "NearAR";
  bad.failure_kind = "ArithmeticIssue";
  bad.error_point_class = "NearBoth";
  bad.result_boundary_class = "NearAR";

  const fs::path dir = fresh_dir("records");
  write_records_csv(dir / "r.csv", {ok, bad});
  const std::vector<BenchmarkRecord> back = read_records_csv(dir / "r.csv");
  REQUIRE(back.size() == 2);
  CHECK(back[0].loglik.has_value());
  CHECK(*back[0].loglik == *ok.loglik);
  CHECK(!back[0].failure_kind.has_value());
  CHECK(back[0].mase3 == ok.mase3);
  CHECK(back[0].sigma == 0.1);
  CHECK(!back[1].loglik.has_value());
  CHECK(*back[1].failure_kind == "ArithmeticIssue");
  CHECK(*back[1].error_point_class == "NearBoth");
  CHECK(!back[1].mase3.has_value());
}

TEST_CASE("unknown header is a schema mismatch") {
  const fs::path dir = fresh_dir("schema");
  std::ofstream(dir / "bad.csv") << "foo,bar\n1,2\n";
  CHECK_THROWS_AS((void)read_records_csv(dir / "bad.csv"), SchemaMismatch);
  CHECK_THROWS_AS((void)render_report(dir / "bad.csv", nullptr, false),
                  SchemaMismatch);
}

TEST_CASE("benchmark is deterministic and keeps its invariants") {
  const Dataset ds = tiny_dataset("bench", 7);
  HarnessOptions opt;
  opt.n_starts = 3;
  opt.seed = 11;
  opt.record_timing = false;
  opt.threads = 1;

  const BenchmarkOutput a = run_benchmark(ds, opt);
  const BenchmarkOutput b = run_benchmark(ds, opt);
  REQUIRE(a.records.size() == ds.entries.size() * 2 * 3);
  REQUIRE(a.records.size() == b.records.size());

  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const BenchmarkRecord& ra = a.records[i];
    CHECK(ra.method == b.records[i].method);
    CHECK(ra.start_index == b.records[i].start_index);
    CHECK(ra.loglik == b.records[i].loglik);
    CHECK(ra.wall_time_s == 0.0);
    // Success and failure are mutually exclusive.
    CHECK(ra.loglik.has_value() != ra.failure_kind.has_value());
    if (ra.failure_kind) CHECK(ra.error_point_class.has_value());
  }

  // Sorted by (series_id, method, start_index).
  for (std::size_t i = 1; i < a.records.size(); ++i) {
    const auto key = [](const BenchmarkRecord& r) {
      return std::make_tuple(r.series_id, r.method, r.start_index);
    };
    CHECK(key(a.records[i - 1]) <= key(a.records[i]));
  }

  // Both methods see the same start point per (series, start index).
  std::map<std::pair<int, int>, std::string> start_class;
  for (const BenchmarkRecord& r : a.records) {
    const auto k = std::make_pair(r.series_id, r.start_index);
    const auto it = start_class.find(k);
    if (it == start_class.end())
      start_class[k] = r.start_boundary_class;
    else
      CHECK(it->second == r.start_boundary_class);
  }

  REQUIRE(a.summary.size() == 2);
  CHECK(a.summary[0].method == "bounded");
  CHECK(a.summary[1].method == "jones");
  for (const MethodSummary& s : a.summary) {
    CHECK(s.n_runs == static_cast<long>(ds.entries.size()) * 3);
    CHECK(s.n_success + s.n_failures == s.n_runs);
    CHECK(s.n_arithmetic + s.n_kalman == s.n_failures);
  }
}

TEST_CASE("far starts break the naive chart but never the bounded box") {
  const Dataset ds = tiny_dataset("far", 13, 2);
  HarnessOptions opt;
  opt.n_starts = 6;
  opt.seed = 21;
  opt.far_start_scale = 2000.0;
  opt.jones_form = JonesForm::Naive;
  opt.record_timing = false;
  opt.threads = 1;

  const BenchmarkOutput out = run_benchmark(ds, opt);
  long jones_arith = 0, bounded_arith = 0, bounded_runs = 0;
  for (const BenchmarkRecord& r : out.records) {
    const bool arith = r.failure_kind && *r.failure_kind == "ArithmeticIssue";
    if (r.method == "jones") jones_arith += arith;
    if (r.method == "bounded") {
      bounded_arith += arith;
      ++bounded_runs;
    }
  }
  CHECK(jones_arith > 0);
  CHECK(bounded_arith == 0);
  CHECK(bounded_runs == static_cast<long>(ds.entries.size()) * 6);
}

TEST_CASE("forecast evaluation partitions the dataset") {
  const Dataset ds = tiny_dataset("fce", 17, 4);
  HarnessOptions opt;
  opt.n_starts = 6;
  opt.seed = 3;
  opt.threads = 1;
  const ForecastEvalOutput out = run_forecast_eval(ds, opt);
  CHECK(out.rows.size() + static_cast<std::size_t>(out.n_excluded) ==
        ds.entries.size());
  REQUIRE(out.tests.size() == 4);
  CHECK(out.tests[0].first == "MASE(3)");
  for (const ForecastPairRow& r : out.rows) {
    CHECK(r.strict_score.scaled_errors.size() == 3);
    CHECK(r.border_score.scaled_errors.size() == 3);
    CHECK(r.border_class != "StrictlyFeasible");
  }

  const fs::path dir = fresh_dir("fce_csv");
  write_forecast_csv(dir / "f.csv", out.rows);
  const std::vector<ForecastPairRow> back = read_forecast_csv(dir / "f.csv");
  REQUIRE(back.size() == out.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].series_id == out.rows[i].series_id);
    CHECK(back[i].strict_loglik == out.rows[i].strict_loglik);
    CHECK(back[i].border_score.mase_h == out.rows[i].border_score.mase_h);
  }
}

TEST_CASE("regularization sweep produces the full column grid") {
  const Dataset ds = tiny_dataset("reg", 23, 3);
  HarnessOptions opt;
  opt.seed = 5;
  opt.threads = 1;
  const RegSweepOutput out = run_reg_sweep(ds, opt);
  REQUIRE(out.method_labels.size() == 7);
  CHECK(out.method_labels[0] == "jones");
  CHECK(out.method_labels[1] == "lambda=0");
  CHECK(out.method_labels[6] == "lambda=16");
  CHECK(out.rows.size() == ds.entries.size() * 7);
  REQUIRE(out.metric_names.size() == 4);
  REQUIRE(out.mean_ranks.size() == 4);
  for (const auto& row : out.mean_ranks) CHECK(row.size() == 7);
  REQUIRE(out.friedman_reports.size() == 4);
  REQUIRE(out.nemenyi_tables.size() == 4);

  const fs::path dir = fresh_dir("reg_csv");
  write_reg_sweep_csv(dir / "r.csv", out.rows);
  const std::vector<RegSweepRow> back = read_reg_sweep_csv(dir / "r.csv");
  REQUIRE(back.size() == out.rows.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].method == out.rows[i].method);
    CHECK(back[i].loglik == out.rows[i].loglik);
    CHECK(back[i].penalty_norm == out.rows[i].penalty_norm);
  }
}

TEST_CASE("rendered reports carry their headline sections") {
  const Dataset ds = tiny_dataset("render", 29, 2);
  HarnessOptions opt;
  opt.n_starts = 2;
  opt.seed = 9;
  opt.record_timing = false;
  opt.threads = 1;
  const BenchmarkOutput out = run_benchmark(ds, opt);

  const fs::path dir = fresh_dir("render_csv");
  write_records_csv(dir / "rec.csv", out.records);
  const std::string text = render_report(dir / "rec.csv", &ds, false);
  CHECK(text.find("method") != std::string::npos);
  CHECK(text.find("bounded") != std::string::npos);
  CHECK(text.find("jones") != std::string::npos);

  // Header-only file renders the empty notice.
  write_records_csv(dir / "empty.csv", {});
  const std::string empty = render_report(dir / "empty.csv", nullptr, false);
  CHECK(empty.find("no records") != std::string::npos);
}

TEST_CASE("thread resolution prefers explicit then environment") {
  ::setenv("ARMA_OPT_THREADS", "3", 1);
  CHECK(resolve_threads(2) == 2);
  CHECK(resolve_threads(0) == 3);
  ::unsetenv("ARMA_OPT_THREADS");
  CHECK(resolve_threads(0) >= 1);
  ::setenv("ARMA_OPT_THREADS", "garbage", 1);
  CHECK(resolve_threads(0) >= 1);
  ::unsetenv("ARMA_OPT_THREADS");
}

TEST_CASE("multithreaded benchmark equals the single-thread run") {
  const Dataset ds = tiny_dataset("mt", 37, 4);
  HarnessOptions opt;
  opt.n_starts = 2;
  opt.seed = 1;
  opt.record_timing = false;
  opt.threads = 1;
  const BenchmarkOutput one = run_benchmark(ds, opt);
  opt.threads = 4;
  const BenchmarkOutput four = run_benchmark(ds, opt);
  REQUIRE(one.records.size() == four.records.size());
  for (std::size_t i = 0; i < one.records.size(); ++i) {
    CHECK(one.records[i].series_id == four.records[i].series_id);
    CHECK(one.records[i].method == four.records[i].method);
    CHECK(one.records[i].loglik == four.records[i].loglik);
  }
}
