#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "armaopt/rng.hpp"
#include "armaopt/transforms.hpp"
#include "armaopt/types.hpp"

namespace armaopt {

enum class FitMethod { Bounded, Jones };

constexpr std::string_view to_string(FitMethod m) {
  return m == FitMethod::Bounded ? "bounded" : "jones";
}

std::optional<FitMethod> parse_fit_method(std::string_view s);

/// Knobs shared by the objective, the optimizer, and the fit drivers.
struct FitConfig {
  FitMethod method = FitMethod::Bounded;
  double epsilon = 1e-2;  // feasible-box shrink, coordinates in [-1+eps, 1-eps]
  double lambda = 0.0;    // L2 penalty weight on (rho, b); sigma^2 unpenalized
  JonesForm jones_form = JonesForm::Stable;
  int max_iters = 500;
  double tol = 1e-6;      // projected-gradient infinity-norm stop
  double tau = 2e-2;      // boundary classification threshold (2 * epsilon)
  double s_min = -30.0;   // bounds on s = ln sigma^2
  double s_max = 30.0;
};

/// One objective evaluation: a finite value, or a recorded failure with the
/// evaluation point attached. Failures never abort the caller.
struct ObjectiveEval {
  double value = 0.0;
  std::optional<FitFailure> failure;

  bool ok() const { return !failure.has_value(); }
};

using ObjectiveFn = std::function<ObjectiveEval(std::span<const double>)>;

/// Penalized exact log-likelihood in chart coordinates x = (c_1..c_{p+q}, s).
/// Bounded method: c is (rho | b) restricted to the eps-box. Jones method:
/// c is (u | w), mapped through the logistic chart before evaluation.
/// Maximization sense; the L2 penalty is subtracted when lambda > 0.
class ArmaObjective {
 public:
  ArmaObjective(std::span<const double> y, ArmaOrder order,
                const FitConfig& cfg);

  int dim() const { return order_.n_coeffs() + 1; }
  ArmaOrder order() const { return order_; }
  const FitConfig& config() const { return cfg_; }

  ObjectiveEval operator()(std::span<const double> x) const;
  long n_evals() const { return n_evals_; }

  std::vector<double> lower_bounds() const;
  std::vector<double> upper_bounds() const;

  /// Chart point to model parameters. Coordinates that left (-1,1) through
  /// the naive map are clamped just inside, so failure locations remain
  /// classifiable.
  PacfCoeffs decode(std::span<const double> x) const;
  std::vector<double> encode(const PacfCoeffs& p) const;

 private:
  std::vector<double> y_;
  ArmaOrder order_;
  FitConfig cfg_;
  mutable long n_evals_ = 0;
};

/// Finite-difference gradient of a maximization objective. Central stencil
/// with h_i = eps_mach^(1/3) * max(1, |x_i|); coordinates whose central
/// points would leave [lower, upper] switch to a shifted three-point
/// one-sided stencil of the same order.
struct GradientResult {
  std::vector<double> grad;
  std::optional<FitFailure> failure;  // first objective failure, if any

  bool ok() const { return !failure.has_value(); }
};

GradientResult fd_gradient(const ObjectiveFn& f, std::span<const double> x,
                           std::span<const double> lower,
                           std::span<const double> upper);

/// Projected quasi-Newton ascent (limited-memory curvature, Armijo
/// backtracking along the projected arc). Stops when the projected-gradient
/// infinity norm falls below cfg.tol or after cfg.max_iters iterations.
struct OptimizeResult {
  std::vector<double> x;
  double value = 0.0;
  long n_iters = 0;
  long n_evals = 0;
  bool converged = false;
  std::optional<FitFailure> failure;
};

OptimizeResult optimize_bounded(const ObjectiveFn& f,
                                std::vector<double> x0,
                                std::span<const double> lower,
                                std::span<const double> upper,
                                const FitConfig& cfg);

/// Hannan-Rissanen start point: long-AR residuals, then least squares of y_t
/// on lagged y and lagged residuals. The coefficient estimate is mapped to
/// partial coordinates with clipping into the eps-box, so the result is
/// always a feasible start. Degenerate regressions fall back to the zero
/// start with the sample variance.
PacfCoeffs hannan_rissanen(std::span<const double> y, ArmaOrder order,
                           double epsilon = 1e-2);

/// One local fit from a feasible start point (chart encoding handled per
/// method). Wall time, evaluation counts, boundary class, and any recorded
/// failure are attached to the result.
FitResult fit(std::span<const double> y, ArmaOrder order,
              const FitConfig& cfg, const PacfCoeffs& start);

/// Same, from raw chart coordinates. Lets callers place Jones starts at
/// extreme (u, w) values that no interior PACF point encodes.
FitResult fit_from_chart(std::span<const double> y, ArmaOrder order,
                         const FitConfig& cfg, std::vector<double> x0);

/// ln(sample variance), clamped into the optimizer's s bounds; the common
/// sigma^2 start shared by every draw on a series.
double start_log_sigma2(std::span<const double> y);

/// Uniform start points over the eps-box; sigma^2 starts at the sample
/// variance of `y` for every draw.
std::vector<PacfCoeffs> draw_starts(std::span<const double> y, ArmaOrder order,
                                    int n_starts, double epsilon,
                                    RngStream& rng);

/// Multi-start driver: starts are pre-generated from `rng`, fits run in
/// start order, every result is kept (failures included).
std::vector<FitResult> multistart_fit(std::span<const double> y,
                                      ArmaOrder order, const FitConfig& cfg,
                                      int n_starts, RngStream& rng);

/// Index of the best successful result by log-likelihood; ties within 1e-9
/// go to the lower start index. -1 when every run failed.
int best_index(std::span<const FitResult> results);

}  // namespace armaopt
