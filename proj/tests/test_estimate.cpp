#include <doctest.h>

#include <cmath>
#include <span>
#include <vector>

#include "armaopt/estimate.hpp"
#include "armaopt/rng.hpp"
#include "armaopt/simulate.hpp"
#include "armaopt/statespace.hpp"
#include "armaopt/transforms.hpp"

using namespace armaopt;

namespace {

ObjectiveEval eval_of(double v) {
  ObjectiveEval e;
  e.value = v;
  return e;
}

FitConfig config(FitMethod m) {
  FitConfig cfg;
  cfg.method = m;
  return cfg;
}

}  // namespace

TEST_CASE("central differences are near-exact on a cubic") {
  ObjectiveFn f = [](std::span<const double> x) {
    return eval_of(x[0] * x[0] * x[0] + 2.0 * x[1]);
  };
  const std::vector<double> x{1.5, -0.5};
  const std::vector<double> lo{-10.0, -10.0}, hi{10.0, 10.0};
  const GradientResult g = fd_gradient(f, x, lo, hi);
  REQUIRE(g.ok());
  CHECK(g.grad[0] == doctest::Approx(3.0 * 1.5 * 1.5).epsilon(1e-7));
  CHECK(g.grad[1] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("one-sided stencils take over at active bounds") {
  // f(x) = x^3: one-sided three-point stencils are second order, so the
  // derivative at the boundary is still accurate.
  ObjectiveFn f = [](std::span<const double> x) {
    return eval_of(x[0] * x[0] * x[0]);
  };
  const std::vector<double> lo{0.0}, hi{2.0};
  {
    const GradientResult g = fd_gradient(f, std::vector<double>{0.0}, lo, hi);
    REQUIRE(g.ok());
    CHECK(g.grad[0] == doctest::Approx(0.0).epsilon(1e-7));
  }
  {
    const GradientResult g = fd_gradient(f, std::vector<double>{2.0}, lo, hi);
    REQUIRE(g.ok());
    CHECK(g.grad[0] == doctest::Approx(12.0).epsilon(1e-6));
  }
}

TEST_CASE("tight boxes shrink the step instead of stepping outside") {
  std::vector<std::vector<double>> seen;
  ObjectiveFn f = [&seen](std::span<const double> x) {
    seen.emplace_back(x.begin(), x.end());
    return eval_of(x[0]);
  };
  const std::vector<double> lo{1.0}, hi{1.0 + 1e-6};
  const GradientResult g = fd_gradient(f, std::vector<double>{1.0}, lo, hi);
  REQUIRE(g.ok());
  CHECK(g.grad[0] == doctest::Approx(1.0).epsilon(1e-4));
  for (const auto& pt : seen) {
    CHECK(pt[0] >= lo[0]);
    CHECK(pt[0] <= hi[0]);
  }
}

TEST_CASE("gradient failures carry the offending evaluation point") {
  ObjectiveFn f = [](std::span<const double> x) {
    if (x[0] > 1.0) {
      ObjectiveEval e;
      e.failure = FitFailure{FailureKind::KalmanError, "boom", {}};
      return e;
    }
    return eval_of(x[0]);
  };
  const std::vector<double> lo{-2.0}, hi{2.0};
  const GradientResult g = fd_gradient(f, std::vector<double>{1.0}, lo, hi);
  CHECK(!g.ok());
  CHECK(g.failure->kind == FailureKind::KalmanError);
}

TEST_CASE("optimizer solves a one-dimensional quadratic") {
  ObjectiveFn f = [](std::span<const double> x) {
    return eval_of(-(x[0] - 3.0) * (x[0] - 3.0));
  };
  FitConfig cfg;
  const std::vector<double> x0{0.0}, lo{0.0}, hi{10.0};
  const OptimizeResult r = optimize_bounded(f, x0, lo, hi, cfg);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(3.0).epsilon(1e-6));
  CHECK(r.value == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(!r.failure.has_value());
}

TEST_CASE("optimizer lands on active bounds when the peak is outside") {
  ObjectiveFn f = [](std::span<const double> x) {
    return eval_of(-(x[0] - 5.0) * (x[0] - 5.0) - (x[1] + 5.0) * (x[1] + 5.0));
  };
  FitConfig cfg;
  const std::vector<double> x0{0.5, 0.5}, lo{0.0, 0.0}, hi{1.0, 1.0};
  const OptimizeResult r = optimize_bounded(f, x0, lo, hi, cfg);
  CHECK(r.converged);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(r.x[1] == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("optimizer crosses the rosenbrock valley") {
  ObjectiveFn f = [](std::span<const double> x) {
    const double a = 1.0 - x[0];
    const double b = x[1] - x[0] * x[0];
    return eval_of(-(a * a + 100.0 * b * b));
  };
  FitConfig cfg;
  cfg.max_iters = 2000;
  const std::vector<double> x0{-1.2, 1.0}, lo{-2.0, -2.0}, hi{2.0, 2.0};
  const OptimizeResult r = optimize_bounded(f, x0, lo, hi, cfg);
  CHECK(r.x[0] == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(r.x[1] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("every trial point stays inside the box and ascent is monotone") {
  std::vector<std::vector<double>> seen;
  ObjectiveFn f = [&seen](std::span<const double> x) {
    seen.emplace_back(x.begin(), x.end());
    const double dx = x[0] - 0.9, dy = x[1] + 0.9;
    return eval_of(-(dx * dx + 4.0 * dy * dy + 0.3 * dx * dy));
  };
  FitConfig cfg;
  const std::vector<double> lo{-1.0, -1.0}, hi{1.0, 1.0};
  const OptimizeResult r = optimize_bounded(f, {0.0, 0.0}, lo, hi, cfg);
  CHECK(r.converged);
  for (const auto& pt : seen)
    for (std::size_t i = 0; i < pt.size(); ++i) {
      CHECK(pt[i] >= lo[i] - 1e-15);
      CHECK(pt[i] <= hi[i] + 1e-15);
    }
}

TEST_CASE("first-evaluation failure is returned, not thrown") {
  ObjectiveFn f = [](std::span<const double>) {
    ObjectiveEval e;
    e.failure = FitFailure{FailureKind::ArithmeticIssue, "dead on arrival", {}};
    return e;
  };
  FitConfig cfg;
  const std::vector<double> x0{0.0}, lo{-1.0}, hi{1.0};
  const OptimizeResult r = optimize_bounded(f, x0, lo, hi, cfg);
  CHECK(!r.converged);
  REQUIRE(r.failure.has_value());
  CHECK(r.failure->kind == FailureKind::ArithmeticIssue);
  CHECK(std::isnan(r.value));
}

TEST_CASE("best iterate survives a mid-run failure wall") {
  // Objective fails for x > 2; the maximizer at x = 5 is unreachable, so the
  // run must stop with its best feasible iterate and no failure masking.
  ObjectiveFn f = [](std::span<const double> x) {
    if (x[0] > 2.0) {
      ObjectiveEval e;
      e.failure = FitFailure{FailureKind::KalmanError, "wall", {}};
      return e;
    }
    return eval_of(-(x[0] - 5.0) * (x[0] - 5.0));
  };
  FitConfig cfg;
  const std::vector<double> x0{0.0}, lo{-10.0}, hi{10.0};
  const OptimizeResult r = optimize_bounded(f, x0, lo, hi, cfg);
  CHECK(r.x[0] <= 2.0);
  CHECK(r.x[0] > 0.5);  // made progress before hitting the wall
  CHECK(std::isfinite(r.value));
}

TEST_CASE("bounded and chart objectives agree at the same model") {
  RngStream rng(51);
  const ArmaCoeffs m{{0.5}, {0.3}, 1.0};
  const std::vector<double> y = simulate_arma(m, 120, rng);
  ArmaObjective fb(y, {1, 1}, config(FitMethod::Bounded));
  ArmaObjective fj(y, {1, 1}, config(FitMethod::Jones));
  const PacfCoeffs pt{{0.4}, {-0.2}, 1.3};
  const std::vector<double> xb = fb.encode(pt);
  const std::vector<double> xj = fj.encode(pt);
  const ObjectiveEval eb = fb(xb);
  const ObjectiveEval ej = fj(xj);
  REQUIRE(eb.ok());
  REQUIRE(ej.ok());
  CHECK(eb.value == doctest::Approx(ej.value).epsilon(1e-9));
}

TEST_CASE("objective equals the kalman likelihood at a decoded point") {
  RngStream rng(52);
  const ArmaCoeffs m{{0.6}, {}, 1.0};
  const std::vector<double> y = simulate_arma(m, 80, rng);
  ArmaObjective f(y, {1, 0}, config(FitMethod::Bounded));
  const std::vector<double> x{0.5, 0.0};  // rho = 0.5, sigma2 = 1
  const ObjectiveEval e = f(x);
  REQUIRE(e.ok());
  const double direct =
      kalman_loglik(build_state_space(pacf_to_arma(f.decode(x))), y);
  CHECK(e.value == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("penalty subtracts lambda times the squared coordinates") {
  RngStream rng(53);
  const std::vector<double> y = simulate_arma({{0.5}, {0.3}, 1.0}, 60, rng);
  FitConfig plain = config(FitMethod::Bounded);
  FitConfig reg = plain;
  reg.lambda = 2.0;
  ArmaObjective f0(y, {1, 1}, plain);
  ArmaObjective f2(y, {1, 1}, reg);
  const std::vector<double> x{0.4, -0.2, 0.1};
  const double norm2 = 0.4 * 0.4 + 0.2 * 0.2;
  CHECK(f2(x).value ==
        doctest::Approx(f0(x).value - 2.0 * norm2).epsilon(1e-12));
}

TEST_CASE("bounded objective refuses points outside the shrunk box") {
  RngStream rng(54);
  const std::vector<double> y = simulate_arma({{0.5}, {}, 1.0}, 40, rng);
  ArmaObjective f(y, {1, 0}, config(FitMethod::Bounded));
  CHECK_THROWS_AS((void)f(std::vector<double>{1.5, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("naive chart failures are recorded as arithmetic issues") {
  RngStream rng(55);
  const std::vector<double> y = simulate_arma({{0.5}, {}, 1.0}, 40, rng);
  FitConfig cfg = config(FitMethod::Jones);
  cfg.jones_form = JonesForm::Naive;
  ArmaObjective f(y, {1, 0}, cfg);

  // Overflow side: chart coordinate becomes NaN.
  const ObjectiveEval nan_side = f(std::vector<double>{-800.0, 0.0});
  REQUIRE(!nan_side.ok());
  CHECK(nan_side.failure->kind == FailureKind::ArithmeticIssue);

  // Rounding side: chart coordinate lands exactly on +1.
  const ObjectiveEval round_side = f(std::vector<double>{50.0, 0.0});
  REQUIRE(!round_side.ok());
  CHECK(round_side.failure->kind == FailureKind::ArithmeticIssue);
  // The recorded location classifies as a boundary point.
  CHECK(std::abs(round_side.failure->location.rho[0]) > 1.0 - 2e-2);

  // The stable form succeeds from the same chart coordinates.
  FitConfig stable_cfg = config(FitMethod::Jones);
  ArmaObjective g(y, {1, 0}, stable_cfg);
  CHECK(g(std::vector<double>{-800.0, 0.0}).ok());
  CHECK(g(std::vector<double>{50.0, 0.0}).ok());
}

TEST_CASE("white-noise fit recovers the variance mle") {
  RngStream rng(56);
  std::vector<double> y(400);
  for (double& v : y) v = rng.gaussian(0.0, 2.0);  // variance 4
  double sumsq = 0.0;
  for (double v : y) sumsq += v * v;
  const double mle = sumsq / y.size();

  const FitResult r = fit(y, {0, 0}, config(FitMethod::Bounded),
                          PacfCoeffs{{}, {}, 1.0});
  REQUIRE(r.ok());
  CHECK(r.params.sigma2 == doctest::Approx(mle).epsilon(1e-5));
}

TEST_CASE("hannan-rissanen lands near an AR(1) truth on long data") {
  RngStream rng(57);
  const ArmaCoeffs m{{0.6}, {}, 1.0};
  const std::vector<double> y = simulate_arma(m, 2000, rng);
  const PacfCoeffs s = hannan_rissanen(y, {1, 0});
  REQUIRE(s.rho.size() == 1);
  CHECK(s.rho[0] == doctest::Approx(0.6).epsilon(0.2));
  CHECK(s.sigma2 == doctest::Approx(1.0).epsilon(0.3));
  CHECK(std::abs(s.rho[0]) <= 1.0 - 1e-2);
}

TEST_CASE("hannan-rissanen falls back gracefully on short series") {
  const std::vector<double> y{1.0, -0.5, 0.25, 0.1, -0.2};
  const PacfCoeffs s = hannan_rissanen(y, {1, 1});
  CHECK(s.rho == std::vector<double>{0.0});
  CHECK(s.b == std::vector<double>{0.0});
  CHECK(s.sigma2 > 0.0);
}

TEST_CASE("hannan-rissanen start is always inside the shrunk box") {
  RngStream rng(58);
  for (int trial = 0; trial < 10; ++trial) {
    const GroundTruth gt = sample_feasible({2, 2}, 1.0, rng);
    RngStream r2 = rng.substream(static_cast<std::uint64_t>(trial));
    const std::vector<double> y = simulate_arma(gt.coeffs, 300, r2);
    const PacfCoeffs s = hannan_rissanen(y, {2, 2});
    for (double v : s.rho) CHECK(std::abs(v) <= 1.0 - 1e-2 + 1e-15);
    for (double v : s.b) CHECK(std::abs(v) <= 1.0 - 1e-2 + 1e-15);
  }
}

TEST_CASE("fit beats the truth's own likelihood on its sample") {
  RngStream rng(59);
  const ArmaCoeffs m{{0.5}, {0.3}, 1.0};
  const std::vector<double> y = simulate_arma(m, 500, rng);
  for (FitMethod method : {FitMethod::Bounded, FitMethod::Jones}) {
    const FitResult r = fit(y, {1, 1}, config(method),
                            hannan_rissanen(y, {1, 1}));
    REQUIRE(r.ok());
    const double at_truth = kalman_loglik(build_state_space(m), y);
    CHECK(r.loglik >= at_truth - 1e-6);
    CHECK(r.params.phi[0] == doctest::Approx(0.5).epsilon(0.5));
  }
}

TEST_CASE("failure on unusable data is recorded, not thrown") {
  std::vector<double> y(50, 0.0);  // zero variance: degenerate likelihood
  y[0] = 1e308;
  y[1] = -1e308;
  const FitResult r = fit(y, {1, 0}, config(FitMethod::Bounded),
                          PacfCoeffs{{0.0}, {}, 1.0});
  // Either the fit succeeds numerically or it reports a recorded failure;
  // what it must not do is throw.
  if (!r.ok()) {
    CHECK(std::isnan(r.loglik));
    CHECK(!r.failure->detail.empty());
  }
}

TEST_CASE("multistart is deterministic and keeps every run") {
  RngStream rng(60);
  const std::vector<double> y = simulate_arma({{0.5}, {0.2}, 1.0}, 150, rng);
  FitConfig cfg = config(FitMethod::Bounded);
  RngStream ra(99), rb(99);
  const std::vector<FitResult> a = multistart_fit(y, {1, 1}, cfg, 6, ra);
  const std::vector<FitResult> b = multistart_fit(y, {1, 1}, cfg, 6, rb);
  REQUIRE(a.size() == 6);
  REQUIRE(b.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].ok() == b[i].ok());
    if (a[i].ok()) CHECK(a[i].loglik == b[i].loglik);
  }
}

TEST_CASE("methods share identical start points") {
  RngStream rng(61);
  const std::vector<double> y = simulate_arma({{0.5}, {0.2}, 1.0}, 100, rng);
  RngStream ra(7), rb(7);
  const std::vector<PacfCoeffs> sa = draw_starts(y, {1, 1}, 5, 1e-2, ra);
  const std::vector<PacfCoeffs> sb = draw_starts(y, {1, 1}, 5, 1e-2, rb);
  REQUIRE(sa.size() == 5);
  for (std::size_t i = 0; i < sa.size(); ++i) {
    CHECK(sa[i].rho == sb[i].rho);
    CHECK(sa[i].b == sb[i].b);
    CHECK(sa[i].sigma2 == sb[i].sigma2);
    for (double v : sa[i].rho) CHECK(std::abs(v) <= 1.0 - 1e-2);
    for (double v : sa[i].b) CHECK(std::abs(v) <= 1.0 - 1e-2);
  }
}

TEST_CASE("best_index prefers higher likelihood and breaks ties low") {
  FitResult good;
  good.loglik = -10.0;
  FitResult better;
  better.loglik = -5.0;
  FitResult tied = better;
  FitResult failed;
  failed.failure = FitFailure{FailureKind::KalmanError, "x", {}};

  std::vector<FitResult> rs{good, better, tied, failed};
  CHECK(best_index(rs) == 1);

  std::vector<FitResult> all_failed{failed, failed};
  CHECK(best_index(all_failed) == -1);

  std::vector<FitResult> empty;
  CHECK(best_index(empty) == -1);
}

TEST_CASE("start sigma2 is the clamped log sample variance") {
  std::vector<double> y{10.0, -10.0, 10.0, -10.0};
  const double s = start_log_sigma2(y);
  double mean = 0.0;
  double var = 0.0;
  for (double v : y) mean += v;
  mean /= y.size();
  for (double v : y) var += (v - mean) * (v - mean);
  var /= y.size() - 1;
  CHECK(s == doctest::Approx(std::log(var)).epsilon(1e-12));
  CHECK(s >= -30.0);
  CHECK(s <= 30.0);
}
