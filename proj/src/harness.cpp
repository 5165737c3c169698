#include "armaopt/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "armaopt/rng.hpp"
#include "armaopt/statespace.hpp"
#include "armaopt/transforms.hpp"

namespace armaopt {

namespace {

// Reserved substream keys; one family per pipeline so start points never
// alias across experiments run from the same seed.
constexpr std::uint64_t kBenchmarkStartsKey = 1;
constexpr std::uint64_t kForecastStartsKey = 2;

constexpr const char* kRecordsHeader =
    "series_id,p,q,length,sigma,method,lambda,start_index,"
    "start_boundary_class,loglik,wall_time_s,failure_kind,error_point_class,"
    "result_boundary_class,mase3,scaled_err_1,scaled_err_2,scaled_err_3";
constexpr const char* kForecastHeader =
    "series_id,p,q,length,sigma,strict_loglik,border_loglik,border_class,"
    "strict_mase3,border_mase3,strict_se1,border_se1,strict_se2,border_se2,"
    "strict_se3,border_se3";
constexpr const char* kRegSweepHeader =
    "series_id,p,q,length,sigma,method,lambda,loglik,penalty_norm,mase3,"
    "scaled_err_1,scaled_err_2,scaled_err_3,failure_kind";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_opt(const std::optional<double>& v) {
  return v ? fmt(*v) : std::string();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return std::stod(s);
}

std::optional<std::string> nonempty_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& fn) {
  const int workers = std::min<std::size_t>(std::max(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(err_mu);
          if (!err) err = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

double pacf_norm2(const PacfCoeffs& p) {
  double acc = 0.0;
  for (double v : p.rho) acc += v * v;
  for (double v : p.b) acc += v * v;
  return std::sqrt(acc);
}

FitConfig config_for(const HarnessOptions& opt, FitMethod method,
                     double lambda) {
  FitConfig cfg;
  cfg.method = method;
  cfg.epsilon = opt.epsilon;
  cfg.lambda = lambda;
  cfg.jones_form = opt.jones_form;
  cfg.tau = opt.tau;
  return cfg;
}

std::vector<FitMethod> sorted_methods(const std::vector<FitMethod>& in) {
  std::vector<FitMethod> m = in;
  std::sort(m.begin(), m.end(), [](FitMethod a, FitMethod b) {
    return to_string(a) < to_string(b);
  });
  m.erase(std::unique(m.begin(), m.end()), m.end());
  if (m.empty()) throw std::invalid_argument("no fit methods selected");
  return m;
}

// Chart start points for the far-start stability protocol: raw (u, w) for
// the logistic chart, the same point mapped and clipped into the box for
// the bounded chart. Start classes come from the mapped coordinates.
struct FarStart {
  std::vector<double> chart;  // length p+q, U(-S, S) draws
};

std::vector<FarStart> draw_far_starts(ArmaOrder order, int n_starts,
                                      double scale, RngStream& rng) {
  std::vector<FarStart> out(n_starts);
  for (FarStart& fs : out) {
    fs.chart.resize(order.n_coeffs());
    for (double& v : fs.chart) v = rng.uniform(-scale, scale);
  }
  return out;
}

PacfCoeffs far_start_point(const FarStart& fs, ArmaOrder order, double s0,
                           FitMethod method, double epsilon) {
  PacfCoeffs p;
  p.rho.resize(order.p);
  p.b.resize(order.q);
  for (int i = 0; i < order.n_coeffs(); ++i) {
    double v = jones_map_scalar(fs.chart[i], JonesForm::Stable);
    if (method == FitMethod::Bounded)
      v = std::clamp(v, -1.0 + epsilon, 1.0 - epsilon);
    (i < order.p ? p.rho[i] : p.b[i - order.p]) = v;
  }
  p.sigma2 = std::exp(s0);
  return p;
}

std::vector<MethodSummary> summarize_records(
    const std::vector<BenchmarkRecord>& records) {
  std::map<std::string, MethodSummary> acc;
  std::map<std::string, double> time_sum;
  for (const BenchmarkRecord& r : records) {
    MethodSummary& s = acc[r.method];
    s.method = r.method;
    ++s.n_runs;
    if (r.failure_kind) {
      ++s.n_failures;
      if (*r.failure_kind == "ArithmeticIssue") ++s.n_arithmetic;
      else ++s.n_kalman;
    } else {
      ++s.n_success;
      time_sum[r.method] += r.wall_time_s;
    }
  }
  std::vector<MethodSummary> out;
  for (auto& [name, s] : acc) {
    s.failures_per_1000 =
        s.n_runs > 0 ? 1000.0 * static_cast<double>(s.n_failures) /
                           static_cast<double>(s.n_runs)
                     : 0.0;
    s.mean_time_s = s.n_success > 0 ? time_sum[name] / s.n_success : 0.0;
    out.push_back(s);
  }
  return out;
}

// Paired per-series mean successful times, jones - bounded.
std::optional<TestReport> time_test_from_records(
    const std::vector<BenchmarkRecord>& records, long* n_pairs) {
  std::map<int, std::map<std::string, std::pair<double, long>>> per_series;
  for (const BenchmarkRecord& r : records) {
    if (r.failure_kind) continue;
    auto& [sum, cnt] = per_series[r.series_id][r.method];
    sum += r.wall_time_s;
    ++cnt;
  }
  std::vector<double> d;
  for (const auto& [id, by_method] : per_series) {
    const auto j = by_method.find("jones");
    const auto b = by_method.find("bounded");
    if (j == by_method.end() || b == by_method.end()) continue;
    d.push_back(j->second.first / j->second.second -
                b->second.first / b->second.second);
  }
  if (n_pairs) *n_pairs = static_cast<long>(d.size());
  if (d.empty()) return std::nullopt;
  try {
    return wilcoxon_signed_rank(d, Alternative::Greater);
  } catch (const AllZeroDifferences&) {
    return std::nullopt;
  }
}

constexpr const char* kMetricNames[4] = {"MASE(3)", "ScaledError(1)",
                                         "ScaledError(2)", "ScaledError(3)"};

double metric_of(const ForecastScore& s, int metric) {
  if (metric == 0) return s.mase_h;
  return s.scaled_errors.at(metric - 1);
}

std::vector<std::pair<std::string, TestReport>> forecast_tests(
    const std::vector<ForecastPairRow>& rows) {
  std::vector<std::pair<std::string, TestReport>> out;
  for (int metric = 0; metric < 4; ++metric) {
    std::vector<double> d;
    d.reserve(rows.size());
    for (const ForecastPairRow& r : rows)
      d.push_back(metric_of(r.border_score, metric) -
                  metric_of(r.strict_score, metric));
    TestReport rep;
    try {
      rep = wilcoxon_signed_rank(d, Alternative::Greater);
    } catch (const AllZeroDifferences&) {
      rep.alternative = Alternative::Greater;  // degenerate: nothing to test
      rep.statistic = 0.0;
      rep.p_value = 1.0;
      rep.n_effective = 0;
    }
    out.emplace_back(kMetricNames[metric], rep);
  }
  return out;
}

struct RegTables {
  std::vector<std::string> labels;
  long n_ranked = 0;
  long n_excluded = 0;
  std::vector<std::vector<double>> mean_ranks;
  std::vector<TestReport> friedman_reports;
  std::vector<std::optional<std::vector<std::vector<double>>>> nemenyi_tables;
};

// Rank completed series over the method columns for each holdout metric;
// Friedman per metric, Nemenyi attached where p passes alpha = 0.1.
RegTables reg_tables_from_rows(const std::vector<RegSweepRow>& rows,
                               const std::vector<std::string>& labels) {
  RegTables out;
  out.labels = labels;
  const std::size_t k = labels.size();

  std::map<int, std::map<std::string, const RegSweepRow*>> by_series;
  for (const RegSweepRow& r : rows) by_series[r.series_id][r.method] = &r;

  std::vector<std::vector<std::vector<double>>> errors(4);  // metric, series
  for (const auto& [id, cols] : by_series) {
    bool complete = cols.size() == k;
    if (complete)
      for (const auto& [label, row] : cols)
        if (row->failure_kind || !row->mase3) complete = false;
    if (!complete) {
      ++out.n_excluded;
      continue;
    }
    ++out.n_ranked;
    for (int metric = 0; metric < 4; ++metric) {
      std::vector<double> row(k);
      for (std::size_t j = 0; j < k; ++j) {
        const RegSweepRow* r = cols.at(labels[j]);
        row[j] = metric == 0 ? *r->mase3
                 : metric == 1 ? *r->scaled_err_1
                 : metric == 2 ? *r->scaled_err_2
                               : *r->scaled_err_3;
      }
      errors[metric].push_back(std::move(row));
    }
  }

  for (int metric = 0; metric < 4; ++metric) {
    if (out.n_ranked < 2) break;  // not enough rows to test
    const RankMatrix rm = rank_methods(errors[metric]);
    std::vector<double> means(k);
    for (std::size_t j = 0; j < k; ++j) means[j] = rm.mean_rank(j);
    out.mean_ranks.push_back(std::move(means));
    out.friedman_reports.push_back(friedman(rm));
    if (out.friedman_reports.back().p_value <= 0.1)
      out.nemenyi_tables.emplace_back(nemenyi(rm));
    else
      out.nemenyi_tables.emplace_back(std::nullopt);
  }
  return out;
}

std::string fmt_p(double p, bool clip) {
  if (clip) p = std::clamp(p, 0.001, 0.9);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.5g", p);
  return buf;
}

void render_benchmark_text(std::ostream& os,
                           const std::vector<BenchmarkRecord>& records,
                           const std::vector<MethodSummary>& summary,
                           const std::optional<TestReport>& time_test,
                           long n_pairs, const Dataset* ds, bool clip_p) {
  os << "== fit benchmark ==\n";
  os << "records: " << records.size() << "\n\n";
  os << "method    runs  ok    failures  per_1000  arithmetic  kalman  "
        "mean_time_s\n";
  for (const MethodSummary& s : summary) {
    char line[160];
    std::snprintf(line, sizeof(line),
                  "%-8s  %-4ld  %-4ld  %-8ld  %-8.3f  %-10ld  %-6ld  %.6f\n",
                  s.method.c_str(), s.n_runs, s.n_success, s.n_failures,
                  s.failures_per_1000, s.n_arithmetic, s.n_kalman,
                  s.mean_time_s);
    os << line;
  }
  if (time_test) {
    os << "\npaired fit-time test (jones - bounded, greater): statistic="
       << fmt(time_test->statistic) << " p=" << fmt_p(time_test->p_value, clip_p)
       << " pairs=" << n_pairs << " n_effective=" << time_test->n_effective
       << "\n";
  }

  // failed runs in Tables 4-5 layout; ground truth class joined from the
  // manifest when available
  std::map<int, std::string> truth_class;
  if (ds)
    for (const DatasetEntry& e : ds->entries)
      truth_class[e.series_id] = std::string(to_string(e.truth.boundary.tag));
  bool any_failure = false;
  for (const BenchmarkRecord& r : records)
    if (r.failure_kind) any_failure = true;
  if (any_failure) {
    os << "\nfailures (model, length, sigma, method, start class, error "
          "class, truth class):\n";
    for (const BenchmarkRecord& r : records) {
      if (!r.failure_kind) continue;
      os << "  ARMA(" << r.p << "," << r.q << ")  n=" << r.length
         << "  sigma=" << fmt(r.sigma) << "  " << r.method << "  "
         << r.start_boundary_class << "  " << *r.error_point_class << "  "
         << (truth_class.count(r.series_id) ? truth_class[r.series_id] : "?")
         << "  [" << *r.failure_kind << "]\n";
    }
  }
}

void render_forecast_text(
    std::ostream& os, const std::vector<ForecastPairRow>& rows,
    const std::vector<std::pair<std::string, TestReport>>& tests,
    long n_excluded, bool clip_p) {
  os << "== border vs strictly-feasible forecasting ==\n";
  os << "paired series: " << rows.size() << "  excluded: " << n_excluded
     << "\n\n";
  os << "metric          mean_border  mean_strict  statistic   p_value\n";
  for (std::size_t m = 0; m < tests.size(); ++m) {
    double mb = 0.0, ms = 0.0;
    for (const ForecastPairRow& r : rows) {
      mb += metric_of(r.border_score, static_cast<int>(m));
      ms += metric_of(r.strict_score, static_cast<int>(m));
    }
    if (!rows.empty()) {
      mb /= static_cast<double>(rows.size());
      ms /= static_cast<double>(rows.size());
    }
    char line[160];
    std::snprintf(line, sizeof(line), "%-14s  %-11.4f  %-11.4f  %-10.4f  %s\n",
                  tests[m].first.c_str(), mb, ms, tests[m].second.statistic,
                  fmt_p(tests[m].second.p_value, clip_p).c_str());
    os << line;
  }
}

void render_reg_text(std::ostream& os, const RegTables& t, bool clip_p) {
  os << "== regularization sweep ==\n";
  os << "ranked series: " << t.n_ranked << "  excluded: " << t.n_excluded
     << "\n\naverage ranks:\n";
  os << "metric        ";
  for (const std::string& l : t.labels) {
    char cell[32];
    std::snprintf(cell, sizeof(cell), "  %-9s", l.c_str());
    os << cell;
  }
  os << '\n';
  for (std::size_t m = 0; m < t.mean_ranks.size(); ++m) {
    char head[32];
    std::snprintf(head, sizeof(head), "%-14s", kMetricNames[m]);
    os << head;
    for (double v : t.mean_ranks[m]) {
      char cell[32];
      std::snprintf(cell, sizeof(cell), "  %-9.3f", v);
      os << cell;
    }
    os << '\n';
  }
  os << "\nFriedman tests:\n";
  for (std::size_t m = 0; m < t.friedman_reports.size(); ++m) {
    os << "  " << kMetricNames[m]
       << ": chi2=" << fmt(t.friedman_reports[m].statistic)
       << " p=" << fmt_p(t.friedman_reports[m].p_value, clip_p) << '\n';
  }
  for (std::size_t m = 0; m < t.nemenyi_tables.size(); ++m) {
    if (!t.nemenyi_tables[m]) continue;
    os << "\nNemenyi pairwise p-values, " << kMetricNames[m] << ":\n";
    os << "          ";
    for (const std::string& l : t.labels) {
      char cell[32];
      std::snprintf(cell, sizeof(cell), "  %-9s", l.c_str());
      os << cell;
    }
    os << '\n';
    const auto& mat = *t.nemenyi_tables[m];
    for (std::size_t i = 0; i < t.labels.size(); ++i) {
      char head[32];
      std::snprintf(head, sizeof(head), "%-10s", t.labels[i].c_str());
      os << head;
      for (std::size_t j = 0; j < t.labels.size(); ++j) {
        char cell[32];
        std::snprintf(cell, sizeof(cell), "  %-9s",
                      fmt_p(mat[i][j], clip_p).c_str());
        os << cell;
      }
      os << '\n';
    }
  }
}

}  // namespace

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ARMA_OPT_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

void write_records_csv(const std::filesystem::path& path,
                       const std::vector<BenchmarkRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kRecordsHeader << '\n';
  for (const BenchmarkRecord& r : records) {
    out << r.series_id << ',' << r.p << ',' << r.q << ',' << r.length << ','
        << fmt(r.sigma) << ',' << r.method << ',' << fmt(r.lambda) << ','
        << r.start_index << ',' << r.start_boundary_class << ','
        << fmt_opt(r.loglik) << ',' << fmt(r.wall_time_s) << ','
        << r.failure_kind.value_or("") << ','
        << r.error_point_class.value_or("") << ',' << r.result_boundary_class
        << ',' << fmt_opt(r.mase3) << ',' << fmt_opt(r.scaled_err_1) << ','
        << fmt_opt(r.scaled_err_2) << ',' << fmt_opt(r.scaled_err_3) << '\n';
  }
}

std::vector<BenchmarkRecord> read_records_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRecordsHeader)
    throw SchemaMismatch("unexpected records header in " + path.string());
  std::vector<BenchmarkRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != 18)
      throw SchemaMismatch("bad records row in " + path.string());
    BenchmarkRecord r;
    r.series_id = std::stoi(f[0]);
    r.p = std::stoi(f[1]);
    r.q = std::stoi(f[2]);
    r.length = std::stol(f[3]);
    r.sigma = std::stod(f[4]);
    r.method = f[5];
    r.lambda = std::stod(f[6]);
    r.start_index = std::stoi(f[7]);
    r.start_boundary_class = f[8];
    r.loglik = parse_opt(f[9]);
    r.wall_time_s = std::stod(f[10]);
    r.failure_kind = nonempty_opt(f[11]);
    r.error_point_class = nonempty_opt(f[12]);
    r.result_boundary_class = f[13];
    r.mase3 = parse_opt(f[14]);
    r.scaled_err_1 = parse_opt(f[15]);
    r.scaled_err_2 = parse_opt(f[16]);
    r.scaled_err_3 = parse_opt(f[17]);
    out.push_back(std::move(r));
  }
  return out;
}

BenchmarkOutput run_benchmark(const Dataset& ds, const HarnessOptions& opt) {
  const std::vector<FitMethod> methods = sorted_methods(opt.methods);
  const int threads = resolve_threads(opt.threads);
  const std::size_t n_series = ds.entries.size();

  std::vector<std::vector<BenchmarkRecord>> per_series(n_series);
  std::vector<std::string> warnings(n_series);

  parallel_for(n_series, threads, [&](std::size_t si) {
    const DatasetEntry& e = ds.entries[si];
    std::vector<double> y;
    try {
      y = ds.load(e);
    } catch (const std::exception& ex) {
      warnings[si] = ex.what();
      return;
    }

    RngStream rng =
        RngStream(opt.seed).substream(static_cast<std::uint64_t>(e.series_id),
                                      kBenchmarkStartsKey);
    std::vector<PacfCoeffs> starts;
    std::vector<FarStart> far;
    double s0 = 0.0;
    if (opt.far_start_scale > 0.0) {
      s0 = start_log_sigma2(y);
      far = draw_far_starts(e.order, opt.n_starts, opt.far_start_scale, rng);
    } else {
      starts = draw_starts(y, e.order, opt.n_starts, opt.epsilon, rng);
    }

    for (const FitMethod m : methods) {
      const FitConfig cfg = config_for(opt, m, opt.lambda);
      for (int k = 0; k < opt.n_starts; ++k) {
        FitResult r;
        BoundaryTag start_tag;
        if (opt.far_start_scale > 0.0) {
          const PacfCoeffs sp =
              far_start_point(far[k], e.order, s0, m, opt.epsilon);
          start_tag = classify_boundary(sp, opt.tau).tag;
          std::vector<double> x0;
          if (m == FitMethod::Jones) {
            x0 = far[k].chart;
          } else {
            x0.reserve(e.order.n_coeffs() + 1);
            for (double v : sp.rho) x0.push_back(v);
            for (double v : sp.b) x0.push_back(v);
          }
          x0.push_back(s0);
          r = fit_from_chart(y, e.order, cfg, std::move(x0));
        } else {
          start_tag = classify_boundary(starts[k], opt.tau).tag;
          r = fit(y, e.order, cfg, starts[k]);
        }

        BenchmarkRecord rec;
        rec.series_id = e.series_id;
        rec.p = e.order.p;
        rec.q = e.order.q;
        rec.length = static_cast<long>(e.length);
        rec.sigma = e.sigma;
        rec.method = std::string(to_string(m));
        rec.lambda = opt.lambda;
        rec.start_index = k;
        rec.start_boundary_class = std::string(to_string(start_tag));
        rec.wall_time_s = opt.record_timing ? r.wall_time_s : 0.0;
        rec.result_boundary_class = std::string(to_string(r.boundary.tag));
        if (r.ok()) {
          rec.loglik = r.loglik;
        } else {
          rec.failure_kind = std::string(to_string(r.failure->kind));
          rec.error_point_class = std::string(to_string(
              classify_boundary(r.failure->location, opt.tau).tag));
        }
        per_series[si].push_back(std::move(rec));
      }
    }
  });

  BenchmarkOutput out;
  for (std::size_t si = 0; si < n_series; ++si) {
    for (BenchmarkRecord& r : per_series[si])
      out.records.push_back(std::move(r));
    if (!warnings[si].empty())
      out.warnings.push_back("skipped series " +
                             std::to_string(ds.entries[si].series_id) + ": " +
                             warnings[si]);
  }
  std::stable_sort(out.records.begin(), out.records.end(),
                   [](const BenchmarkRecord& a, const BenchmarkRecord& b) {
                     return std::tie(a.series_id, a.method, a.start_index) <
                            std::tie(b.series_id, b.method, b.start_index);
                   });
  out.summary = summarize_records(out.records);
  out.time_test = time_test_from_records(out.records, &out.n_time_pairs);
  return out;
}

ForecastEvalOutput run_forecast_eval(const Dataset& ds,
                                     const HarnessOptions& opt) {
  if (opt.methods.empty())
    throw std::invalid_argument("forecast eval needs a fit method");
  const FitMethod method = opt.methods.front();
  const int threads = resolve_threads(opt.threads);
  const std::size_t n_series = ds.entries.size();

  std::vector<std::optional<ForecastPairRow>> rows(n_series);
  std::vector<char> excluded(n_series, 0);

  parallel_for(n_series, threads, [&](std::size_t si) {
    const DatasetEntry& e = ds.entries[si];
    std::vector<double> y;
    try {
      y = ds.load(e);
    } catch (const std::exception&) {
      excluded[si] = 1;
      return;
    }
    if (y.size() <= static_cast<std::size_t>(opt.holdout) + 4) {
      excluded[si] = 1;
      return;
    }
    const TimeSeries ts(y, y.size() - opt.holdout);
    const std::span<const double> train = ts.train();

    RngStream rng =
        RngStream(opt.seed).substream(static_cast<std::uint64_t>(e.series_id),
                                      kForecastStartsKey);
    const std::vector<PacfCoeffs> starts =
        draw_starts(train, e.order, opt.n_starts, opt.epsilon, rng);
    const FitConfig cfg = config_for(opt, method, opt.lambda);

    int best_strict = -1, best_border = -1;
    std::vector<FitResult> results;
    results.reserve(starts.size());
    for (const PacfCoeffs& s : starts)
      results.push_back(fit(train, e.order, cfg, s));
    for (int i = 0; i < static_cast<int>(results.size()); ++i) {
      const FitResult& r = results[i];
      if (!r.ok() || !std::isfinite(r.loglik)) continue;
      int& slot = r.boundary.tag == BoundaryTag::StrictlyFeasible
                      ? best_strict
                      : best_border;
      if (slot < 0 || r.loglik > results[slot].loglik + 1e-9) slot = i;
    }
    if (best_strict < 0 || best_border < 0) {
      excluded[si] = 1;
      return;
    }

    auto score_of = [&](const FitResult& r) {
      const StateSpace ss = build_state_space(r.params);
      const std::vector<double> fc =
          kalman_forecast(ss, train, opt.holdout);
      return forecast_score(train, ts.test(), fc);
    };
    ForecastPairRow row;
    row.series_id = e.series_id;
    row.p = e.order.p;
    row.q = e.order.q;
    row.length = static_cast<long>(e.length);
    row.sigma = e.sigma;
    row.strict_loglik = results[best_strict].loglik;
    row.border_loglik = results[best_border].loglik;
    row.border_class =
        std::string(to_string(results[best_border].boundary.tag));
    try {
      row.strict_score = score_of(results[best_strict]);
      row.border_score = score_of(results[best_border]);
    } catch (const std::exception&) {
      excluded[si] = 1;  // degenerate holdout scale or filter failure
      return;
    }
    rows[si] = std::move(row);
  });

  ForecastEvalOutput out;
  for (std::size_t si = 0; si < n_series; ++si) {
    if (rows[si]) out.rows.push_back(std::move(*rows[si]));
    else if (excluded[si]) ++out.n_excluded;
  }
  std::sort(out.rows.begin(), out.rows.end(),
            [](const ForecastPairRow& a, const ForecastPairRow& b) {
              return a.series_id < b.series_id;
            });
  out.tests = forecast_tests(out.rows);
  return out;
}

void write_forecast_csv(const std::filesystem::path& path,
                        const std::vector<ForecastPairRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kForecastHeader << '\n';
  for (const ForecastPairRow& r : rows) {
    out << r.series_id << ',' << r.p << ',' << r.q << ',' << r.length << ','
        << fmt(r.sigma) << ',' << fmt(r.strict_loglik) << ','
        << fmt(r.border_loglik) << ',' << r.border_class << ','
        << fmt(r.strict_score.mase_h) << ',' << fmt(r.border_score.mase_h);
    for (int h = 0; h < 3; ++h)
      out << ',' << fmt(r.strict_score.scaled_errors.at(h)) << ','
          << fmt(r.border_score.scaled_errors.at(h));
    out << '\n';
  }
}

std::vector<ForecastPairRow> read_forecast_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kForecastHeader)
    throw SchemaMismatch("unexpected forecast header in " + path.string());
  std::vector<ForecastPairRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != 16)
      throw SchemaMismatch("bad forecast row in " + path.string());
    ForecastPairRow r;
    r.series_id = std::stoi(f[0]);
    r.p = std::stoi(f[1]);
    r.q = std::stoi(f[2]);
    r.length = std::stol(f[3]);
    r.sigma = std::stod(f[4]);
    r.strict_loglik = std::stod(f[5]);
    r.border_loglik = std::stod(f[6]);
    r.border_class = f[7];
    r.strict_score.mase_h = std::stod(f[8]);
    r.border_score.mase_h = std::stod(f[9]);
    for (int h = 0; h < 3; ++h) {
      r.strict_score.scaled_errors.push_back(std::stod(f[10 + 2 * h]));
      r.border_score.scaled_errors.push_back(std::stod(f[11 + 2 * h]));
    }
    out.push_back(std::move(r));
  }
  return out;
}

RegSweepOutput run_reg_sweep(const Dataset& ds, const HarnessOptions& opt) {
  RegSweepOutput out;
  out.method_labels.push_back("jones");
  for (double l : opt.lambdas) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "lambda=%g", l);
    out.method_labels.emplace_back(buf);
  }

  const int threads = resolve_threads(opt.threads);
  const std::size_t n_series = ds.entries.size();
  std::vector<std::vector<RegSweepRow>> per_series(n_series);

  parallel_for(n_series, threads, [&](std::size_t si) {
    const DatasetEntry& e = ds.entries[si];
    std::vector<double> y;
    try {
      y = ds.load(e);
    } catch (const std::exception&) {
      return;
    }
    if (y.size() <= static_cast<std::size_t>(opt.holdout) + 4) return;
    const TimeSeries ts(y, y.size() - opt.holdout);
    const std::span<const double> train = ts.train();
    const PacfCoeffs start = hannan_rissanen(train, e.order, opt.epsilon);

    auto run_one = [&](const std::string& label, FitMethod method,
                       double lambda) {
      const FitConfig cfg = config_for(opt, method, lambda);
      const FitResult r = fit(train, e.order, cfg, start);
      RegSweepRow row;
      row.series_id = e.series_id;
      row.p = e.order.p;
      row.q = e.order.q;
      row.length = static_cast<long>(e.length);
      row.sigma = e.sigma;
      row.method = label;
      row.lambda = lambda;
      row.penalty_norm = pacf_norm2(r.pacf);
      if (r.ok()) {
        row.loglik = r.loglik;
        try {
          const StateSpace ss = build_state_space(r.params);
          const std::vector<double> fc =
              kalman_forecast(ss, train, opt.holdout);
          const ForecastScore sc = forecast_score(train, ts.test(), fc);
          row.mase3 = sc.mase_h;
          row.scaled_err_1 = sc.scaled_errors.at(0);
          row.scaled_err_2 = sc.scaled_errors.at(1);
          row.scaled_err_3 = sc.scaled_errors.at(2);
        } catch (const std::exception&) {
          row.failure_kind = "KalmanError";  // scoring failed post-fit
        }
      } else {
        row.failure_kind = std::string(to_string(r.failure->kind));
      }
      per_series[si].push_back(std::move(row));
    };

    run_one("jones", FitMethod::Jones, 0.0);
    for (std::size_t j = 0; j < opt.lambdas.size(); ++j)
      run_one(out.method_labels[j + 1], FitMethod::Bounded, opt.lambdas[j]);
  });

  for (auto& rows : per_series)
    for (RegSweepRow& r : rows) out.rows.push_back(std::move(r));
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const RegSweepRow& a, const RegSweepRow& b) {
                     return a.series_id < b.series_id;
                   });

  RegTables t = reg_tables_from_rows(out.rows, out.method_labels);
  out.n_excluded = t.n_excluded;
  out.metric_names.assign(std::begin(kMetricNames), std::end(kMetricNames));
  out.mean_ranks = std::move(t.mean_ranks);
  out.friedman_reports = std::move(t.friedman_reports);
  out.nemenyi_tables = std::move(t.nemenyi_tables);
  return out;
}

void write_reg_sweep_csv(const std::filesystem::path& path,
                         const std::vector<RegSweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << kRegSweepHeader << '\n';
  for (const RegSweepRow& r : rows) {
    out << r.series_id << ',' << r.p << ',' << r.q << ',' << r.length << ','
        << fmt(r.sigma) << ',' << r.method << ',' << fmt(r.lambda) << ','
        << fmt_opt(r.loglik) << ',' << fmt(r.penalty_norm) << ','
        << fmt_opt(r.mase3) << ',' << fmt_opt(r.scaled_err_1) << ','
        << fmt_opt(r.scaled_err_2) << ',' << fmt_opt(r.scaled_err_3) << ','
        << r.failure_kind.value_or("") << '\n';
  }
}

std::vector<RegSweepRow> read_reg_sweep_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRegSweepHeader)
    throw SchemaMismatch("unexpected reg-sweep header in " + path.string());
  std::vector<RegSweepRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_line(line);
    if (f.size() != 14)
      throw SchemaMismatch("bad reg-sweep row in " + path.string());
    RegSweepRow r;
    r.series_id = std::stoi(f[0]);
    r.p = std::stoi(f[1]);
    r.q = std::stoi(f[2]);
    r.length = std::stol(f[3]);
    r.sigma = std::stod(f[4]);
    r.method = f[5];
    r.lambda = std::stod(f[6]);
    r.loglik = parse_opt(f[7]);
    r.penalty_norm = std::stod(f[8]);
    r.mase3 = parse_opt(f[9]);
    r.scaled_err_1 = parse_opt(f[10]);
    r.scaled_err_2 = parse_opt(f[11]);
    r.scaled_err_3 = parse_opt(f[12]);
    r.failure_kind = nonempty_opt(f[13]);
    out.push_back(std::move(r));
  }
  return out;
}

std::string render_benchmark_summary(const BenchmarkOutput& out) {
  std::ostringstream os;
  render_benchmark_text(os, out.records, out.summary, out.time_test,
                        out.n_time_pairs, nullptr, false);
  for (const std::string& w : out.warnings) os << "warning: " << w << '\n';
  return os.str();
}

std::string render_forecast_summary(const ForecastEvalOutput& out) {
  std::ostringstream os;
  render_forecast_text(os, out.rows, out.tests, out.n_excluded, false);
  return os.str();
}

std::string render_reg_sweep_summary(const RegSweepOutput& out) {
  RegTables t;
  t.labels = out.method_labels;
  t.n_excluded = out.n_excluded;
  t.n_ranked = 0;
  std::map<int, int> count_by_series;
  for (const RegSweepRow& r : out.rows) ++count_by_series[r.series_id];
  t.n_ranked = static_cast<long>(count_by_series.size()) - out.n_excluded;
  t.mean_ranks = out.mean_ranks;
  t.friedman_reports = out.friedman_reports;
  t.nemenyi_tables = out.nemenyi_tables;
  std::ostringstream os;
  render_reg_text(os, t, false);
  return os.str();
}

std::string render_report(const std::filesystem::path& records_csv,
                          const Dataset* ds, bool clip_p) {
  std::ifstream probe(records_csv);
  if (!probe)
    throw std::runtime_error("cannot open " + records_csv.string());
  std::string header;
  std::getline(probe, header);
  probe.close();

  std::ostringstream os;
  if (header == kRecordsHeader) {
    const std::vector<BenchmarkRecord> records =
        read_records_csv(records_csv);
    if (records.empty()) return "no records\n";
    long n_pairs = 0;
    const auto summary = summarize_records(records);
    const auto test = time_test_from_records(records, &n_pairs);
    render_benchmark_text(os, records, summary, test, n_pairs, ds, clip_p);
  } else if (header == kForecastHeader) {
    const std::vector<ForecastPairRow> rows = read_forecast_csv(records_csv);
    if (rows.empty()) return "no records\n";
    render_forecast_text(os, rows, forecast_tests(rows), 0, clip_p);
  } else if (header == kRegSweepHeader) {
    const std::vector<RegSweepRow> rows = read_reg_sweep_csv(records_csv);
    if (rows.empty()) return "no records\n";
    std::vector<std::string> labels;
    for (const RegSweepRow& r : rows)
      if (std::find(labels.begin(), labels.end(), r.method) == labels.end())
        labels.push_back(r.method);
    render_reg_text(os, reg_tables_from_rows(rows, labels), clip_p);
  } else {
    throw SchemaMismatch("unrecognized records header in " +
                         records_csv.string());
  }
  return os.str();
}

}  // namespace armaopt
