#include "armaopt/statespace.hpp"

#include <cmath>
#include <numbers>

namespace armaopt {

namespace {

constexpr double kMinInnovationVariance = 1e-300;

// Convergence of the covariance recursion to its steady state; once reached
// the gain and innovation variance are fixed points and are frozen.
constexpr double kSteadyStateTol = 1e-13;

struct FilterCore {
  const StateSpace& ss;
  Eigen::VectorXd a;    // one-step predicted state mean
  Eigen::MatrixXd P;    // one-step predicted state covariance
  Eigen::MatrixXd Q;    // sigma^2 R R'
  Eigen::VectorXd K;    // gain
  Eigen::MatrixXd TK;   // T - K e1'
  Eigen::MatrixXd W, Pn;
  Eigen::VectorXd Ta;
  bool steady = false;
  double sum_log_f = 0.0;
  double sum_sq = 0.0;  // sum of v_t^2 / F_t
  std::size_t n = 0;

  explicit FilterCore(const StateSpace& s)
      : ss(s),
        a(Eigen::VectorXd::Zero(s.r)),
        P(stationary_init(s)),
        Q(s.sigma2 * (s.R * s.R.transpose())),
        K(s.r),
        TK(s.r, s.r),
        W(s.r, s.r),
        Pn(s.r, s.r),
        Ta(s.r) {}

  void step(double y, std::vector<double>* innov_vars) {
    const double f = P(0, 0);
    if (!std::isfinite(f) || f < kMinInnovationVariance)
      throw KalmanFailure("non-positive innovation variance");
    const double v = y - a(0);
    if (!std::isfinite(v))
      throw KalmanFailure("non-finite innovation");
    sum_log_f += std::log(f);
    sum_sq += v * v / f;
    ++n;
    if (innov_vars) innov_vars->push_back(f);

    if (!steady) {
      K.noalias() = ss.T * P.col(0);
      K /= f;
      TK = ss.T;
      TK.col(0) -= K;
    }
    Ta.noalias() = ss.T * a;
    a = Ta;
    a.noalias() += K * v;
    if (steady) return;

    // Joseph-form update keeps P symmetric up to roundoff.
    W.noalias() = TK * P;
    Pn.noalias() = W * TK.transpose();
    Pn += Q;
    Pn = 0.5 * (Pn + Pn.transpose().eval());
    if (!Pn.allFinite())
      throw KalmanFailure("non-finite state covariance");
    const double scale = 1.0 + Pn.cwiseAbs().maxCoeff();
    if ((Pn - P).cwiseAbs().maxCoeff() < kSteadyStateTol * scale)
      steady = true;
    P = Pn;
  }
};

}  // namespace

StateSpace build_state_space(const ArmaCoeffs& c) {
  const int p = static_cast<int>(c.phi.size());
  const int q = static_cast<int>(c.theta.size());
  const int r = std::max(p, q + 1);
  StateSpace ss;
  ss.r = r;
  ss.T = Eigen::MatrixXd::Zero(r, r);
  for (int i = 0; i < p; ++i) ss.T(i, 0) = c.phi[i];
  for (int i = 0; i + 1 < r; ++i) ss.T(i, i + 1) = 1.0;
  ss.R = Eigen::VectorXd::Zero(r);
  ss.R(0) = 1.0;
  for (int i = 0; i < q; ++i) ss.R(i + 1) = c.theta[i];
  ss.sigma2 = c.sigma2;
  return ss;
}

Eigen::MatrixXd stationary_init(const StateSpace& ss) {
  const int r = ss.r;
  const Eigen::MatrixXd Q = ss.sigma2 * (ss.R * ss.R.transpose());
  // (I - T (x) T) vec(P) = vec(Q); r <= 6 in the experiment grid, so the
  // r^2 x r^2 solve is exact and cheap.
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(r * r, r * r);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < r; ++j)
      for (int k = 0; k < r; ++k)
        for (int l = 0; l < r; ++l)
          A(i * r + k, j * r + l) -= ss.T(i, j) * ss.T(k, l);
  Eigen::VectorXd q(r * r);
  for (int j = 0; j < r; ++j)
    for (int k = 0; k < r; ++k) q(j * r + k) = Q(j, k);

  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible())
    throw KalmanFailure("stationary covariance system is singular");
  const Eigen::VectorXd x = lu.solve(q);
  if (!x.allFinite())
    throw KalmanFailure("stationary covariance solve produced non-finite values");

  Eigen::MatrixXd P(r, r);
  for (int j = 0; j < r; ++j)
    for (int k = 0; k < r; ++k) P(j, k) = x(j * r + k);
  P = 0.5 * (P + P.transpose().eval());

  const double scale = Q.cwiseAbs().maxCoeff() + P.cwiseAbs().maxCoeff();
  const double resid =
      (P - ss.T * P * ss.T.transpose() - Q).cwiseAbs().maxCoeff();
  if (!(resid <= 1e-8 * scale))
    throw KalmanFailure("stationary covariance solve is inaccurate");
  for (int i = 0; i < r; ++i)
    if (P(i, i) < -1e-12 * scale)
      throw KalmanFailure("stationary covariance has a negative diagonal");
  return P;
}

double kalman_loglik(const StateSpace& ss, std::span<const double> y,
                     KalmanDiagnostics* diag) {
  FilterCore f(ss);
  std::vector<double>* innov = nullptr;
  if (diag) {
    diag->innovation_variances.clear();
    diag->innovation_variances.reserve(y.size());
    innov = &diag->innovation_variances;
  }
  for (double yt : y) f.step(yt, innov);
  if (diag) {
    diag->state_mean = f.a;
    diag->state_cov = f.P;
  }
  const double n = static_cast<double>(y.size());
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + f.sum_log_f + f.sum_sq);
}

double kalman_loglik_concentrated(const StateSpace& ss,
                                  std::span<const double> y,
                                  double* sigma2_hat) {
  StateSpace unit = ss;
  unit.sigma2 = 1.0;
  FilterCore f(unit);
  for (double yt : y) f.step(yt, nullptr);
  const double n = static_cast<double>(y.size());
  const double s2 = f.sum_sq / n;
  if (sigma2_hat) *sigma2_hat = s2;
  if (!(s2 > 0.0)) throw KalmanFailure("degenerate concentrated variance");
  return -0.5 * (n * std::log(2.0 * std::numbers::pi) + f.sum_log_f +
                 n * std::log(s2) + n);
}

std::vector<double> kalman_forecast(const StateSpace& ss,
                                    std::span<const double> y, int horizon) {
  if (horizon < 1) throw std::invalid_argument("kalman_forecast: horizon < 1");
  FilterCore f(ss);
  for (double yt : y) f.step(yt, nullptr);
  std::vector<double> out;
  out.reserve(horizon);
  Eigen::VectorXd a = f.a;
  out.push_back(a(0));
  for (int h = 1; h < horizon; ++h) {
    a = (ss.T * a).eval();
    out.push_back(a(0));
  }
  return out;
}

}  // namespace armaopt
