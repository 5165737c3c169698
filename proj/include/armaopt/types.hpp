#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace armaopt {

/// Autoregressive / moving-average orders of an ARMA(p,q) model.
struct ArmaOrder {
  int p = 0;
  int q = 0;

  int n_coeffs() const { return p + q; }
  bool operator==(const ArmaOrder&) const = default;
};

/// Ordered real-valued observations with an optional train/test split:
/// the test portion is everything after index `train_len`.
class TimeSeries {
 public:
  TimeSeries() = default;

  explicit TimeSeries(std::vector<double> values)
      : TimeSeries(std::move(values), 0) {
    train_len_ = values_.size();
  }

  TimeSeries(std::vector<double> values, std::size_t train_len)
      : values_(std::move(values)), train_len_(train_len) {
    if (train_len_ > values_.size())
      throw std::invalid_argument("TimeSeries: train_len exceeds length");
    for (double v : values_)
      if (!std::isfinite(v))
        throw std::invalid_argument("TimeSeries: non-finite observation");
  }

  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::size_t train_len() const { return train_len_; }

  std::span<const double> train() const {
    return {values_.data(), train_len_};
  }
  std::span<const double> test() const {
    return {values_.data() + train_len_, values_.size() - train_len_};
  }

  /// Copy with the last `h` observations held out as the test set.
  TimeSeries with_holdout(std::size_t h) const {
    if (h >= values_.size())
      throw std::invalid_argument("TimeSeries: holdout leaves no train data");
    return TimeSeries(values_, values_.size() - h);
  }

 private:
  std::vector<double> values_;
  std::size_t train_len_ = 0;
};

/// Coefficient-space ARMA parameters (phi, theta, sigma^2).
struct ArmaCoeffs {
  std::vector<double> phi;
  std::vector<double> theta;
  double sigma2 = 1.0;

  ArmaOrder order() const {
    return {static_cast<int>(phi.size()), static_cast<int>(theta.size())};
  }
};

/// Partial autocorrelation / partial moving-average parameters.
/// Each coordinate lies strictly inside (-1, 1).
struct PacfCoeffs {
  std::vector<double> rho;
  std::vector<double> b;
  double sigma2 = 1.0;

  ArmaOrder order() const {
    return {static_cast<int>(rho.size()), static_cast<int>(b.size())};
  }
};

enum class BoundaryTag { StrictlyFeasible, NearAR, NearMA, NearBoth };

/// Closeness-to-boundary classification of a feasible point, determined by
/// (1 - ||rho||_inf < tau) and (1 - ||b||_inf < tau).
struct BoundaryClass {
  BoundaryTag tag = BoundaryTag::StrictlyFeasible;
  double tau = 0.0;
};

constexpr std::string_view to_string(BoundaryTag t) {
  switch (t) {
    case BoundaryTag::StrictlyFeasible: return "StrictlyFeasible";
    case BoundaryTag::NearAR: return "NearAR";
    case BoundaryTag::NearMA: return "NearMA";
    case BoundaryTag::NearBoth: return "NearBoth";
  }
  return "?";
}

std::optional<BoundaryTag> parse_boundary_tag(std::string_view s);

enum class FailureKind { ArithmeticIssue, KalmanError };

constexpr std::string_view to_string(FailureKind k) {
  return k == FailureKind::ArithmeticIssue ? "ArithmeticIssue" : "KalmanError";
}

/// Recorded numerical failure of a fit. Failures are data, not aborts:
/// the benchmark harness counts them per run.
struct FitFailure {
  FailureKind kind = FailureKind::KalmanError;
  std::string detail;
  PacfCoeffs location;  // parameter point at which the failure occurred
};

/// Outcome of one local optimization run.
struct FitResult {
  ArmaCoeffs params;
  PacfCoeffs pacf;
  double loglik = std::numeric_limits<double>::quiet_NaN();
  long n_obj_evals = 0;
  long n_iters = 0;
  double wall_time_s = 0.0;
  std::optional<FitFailure> failure;
  BoundaryClass boundary;

  bool ok() const { return !failure.has_value(); }
};

}  // namespace armaopt
