#pragma once

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <vector>

#include "armaopt/types.hpp"

namespace armaopt {

/// Kalman recursion failure: singular stationary solve, non-positive
/// innovation variance, or a non-finite recursion quantity. The estimation
/// layer converts this into a recorded FitFailure.
struct KalmanFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// State-space form of an ARMA(p,q) model with state dimension
/// r = max(p, q+1): transition in companion form with phi down the first
/// column, disturbance loading (1, theta_1, ..., theta_{r-1}), observation =
/// first state coordinate.
struct StateSpace {
  int r = 1;
  Eigen::MatrixXd T;
  Eigen::VectorXd R;
  double sigma2 = 1.0;
};

StateSpace build_state_space(const ArmaCoeffs& c);

/// Stationary state covariance: the solution of P = T P T' + sigma^2 R R',
/// obtained from the vectorized linear system. Throws KalmanFailure when the
/// system is singular to working precision (non-stationary transition).
Eigen::MatrixXd stationary_init(const StateSpace& ss);

struct KalmanDiagnostics {
  std::vector<double> innovation_variances;
  Eigen::VectorXd state_mean;  // one-step predicted state after the last obs
  Eigen::MatrixXd state_cov;
};

/// Exact Gaussian log-likelihood of `y` by prediction-error decomposition,
/// filter started at the stationary covariance. Equals the dense
/// multivariate-normal log-density with the model's autocovariance matrix.
double kalman_loglik(const StateSpace& ss, std::span<const double> y,
                     KalmanDiagnostics* diag = nullptr);

/// Log-likelihood with the noise variance concentrated out; `sigma2_hat`
/// receives the implied variance. Internal optimization, not used by the
/// default estimator (the fitting objectives keep sigma^2 explicit).
double kalman_loglik_concentrated(const StateSpace& ss,
                                  std::span<const double> y,
                                  double* sigma2_hat = nullptr);

/// Minimum-MSE point forecasts for horizons 1..h: the predicted state is
/// iterated through the transition with no further updates.
std::vector<double> kalman_forecast(const StateSpace& ss,
                                    std::span<const double> y, int horizon);

}  // namespace armaopt
