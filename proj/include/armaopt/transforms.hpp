#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "armaopt/types.hpp"

namespace armaopt {

/// Reverse Levinson recursion left the open hypercube: the AR polynomial has
/// a root in the closed unit disk.
struct NonCausalError : std::domain_error {
  using std::domain_error::domain_error;
};

/// MA analogue of NonCausalError.
struct NonInvertibleError : std::domain_error {
  using std::domain_error::domain_error;
};

/// Evaluation form of the logistic map (-inf,inf) -> (-1,1).
/// Stable evaluates tanh(x/2) and saturates strictly inside the interval;
/// Naive evaluates the literal ratio (1 - e^-x)/(1 + e^-x), which overflows
/// for large negative x and rounds onto +-1 for |x| beyond ~37.
enum class JonesForm { Stable, Naive };

/// Intermediate reflection coefficients at or beyond this magnitude are
/// treated as boundary points by the inverse recursions.
inline constexpr double kPacfBoundaryTol = 1e-15;

/// Saturation limit of the stable logistic map, strictly inside (-1,1) and
/// strictly inside the inverse recursions' boundary tolerance.
inline constexpr double kPacfSaturation = 1.0 - 1e-13;

/// Levinson mapping: partial autocorrelations in (-1,1)^k to causal AR
/// coefficients. Throws std::domain_error if any |rho_i| >= 1.
std::vector<double> levinson_forward(std::span<const double> rho);

/// Inverse Levinson mapping. Throws NonCausalError if the reverse recursion
/// produces any reflection coefficient with |rho_k| >= 1 - kPacfBoundaryTol;
/// this doubles as the causality test for phi.
std::vector<double> levinson_inverse(std::span<const double> phi);

/// Partial moving-average coefficients in (-1,1)^k to invertible MA
/// coefficients (plus-sign recursion). Throws std::domain_error on |b_i| >= 1.
std::vector<double> ma_forward(std::span<const double> b);

/// Inverse of ma_forward. Throws NonInvertibleError if the reverse recursion
/// exits the open hypercube.
std::vector<double> ma_inverse(std::span<const double> theta);

/// Componentwise logistic map onto (-1,1). The stable form never overflows
/// and never reaches +-1; the naive form reproduces the failure modes of the
/// literal expression (NaN from inf/inf, exact +-1 from rounding).
std::vector<double> jones_map(std::span<const double> x,
                              JonesForm form = JonesForm::Stable);
double jones_map_scalar(double x, JonesForm form = JonesForm::Stable);

/// Inverse logistic map, u = log((1+rho)/(1-rho)). Throws std::domain_error
/// at |rho_i| >= 1.
std::vector<double> jones_inverse(std::span<const double> rho);
double jones_inverse_scalar(double rho);

/// (rho, b, sigma^2) -> (phi, theta, sigma^2). Propagates domain errors.
ArmaCoeffs pacf_to_arma(const PacfCoeffs& p);

/// (phi, theta, sigma^2) -> (rho, b, sigma^2). Throws NonCausalError /
/// NonInvertibleError when the coefficients are infeasible.
PacfCoeffs arma_to_pacf(const ArmaCoeffs& c);

/// Total variant of arma_to_pacf for start-point construction: every
/// reflection coefficient extracted by the reverse recursions is clamped
/// into [-1+eps, 1-eps] before the downdate, so infeasible inputs yield a
/// nearby interior point instead of an error. Identical to arma_to_pacf
/// whenever the input already lies inside the shrunk box.
PacfCoeffs arma_to_pacf_clipped(const ArmaCoeffs& c, double eps);

}  // namespace armaopt
