#include "armaopt/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace armaopt {

namespace {

// Shared forward recursion; `sign` is -1 for the AR (Levinson) map and +1
// for the MA map.
std::vector<double> forward_recursion(std::span<const double> r, double sign,
                                      const char* what) {
  const std::size_t k = r.size();
  for (double ri : r)
    if (!(std::abs(ri) < 1.0))
      throw std::domain_error(std::string(what) +
                              ": coefficient outside (-1,1)");
  std::vector<double> out(r.begin(), r.end());
  std::vector<double> prev(k);
  for (std::size_t step = 1; step < k; ++step) {
    std::copy_n(out.begin(), step, prev.begin());
    for (std::size_t i = 0; i < step; ++i)
      out[i] = prev[i] + sign * r[step] * prev[step - 1 - i];
  }
  return out;
}

// Reverse recursion. When `clip_eps` >= 0, each extracted coefficient is
// clamped into [-1+clip_eps, 1-clip_eps] and the recursion always succeeds;
// otherwise coefficients at the boundary tolerance raise `on_boundary`.
std::vector<double> inverse_recursion(std::span<const double> coef,
                                      double sign, double clip_eps,
                                      void (*on_boundary)()) {
  const std::size_t k = coef.size();
  std::vector<double> work(coef.begin(), coef.end());
  std::vector<double> r(k);
  std::vector<double> next(k);
  for (std::size_t step = k; step-- > 0;) {
    double rk = work[step];
    if (clip_eps >= 0.0) {
      rk = std::clamp(rk, -1.0 + clip_eps, 1.0 - clip_eps);
    } else if (!(std::abs(rk) < 1.0 - kPacfBoundaryTol)) {
      on_boundary();
    }
    r[step] = rk;
    if (step == 0) break;
    const double d = 1.0 - rk * rk;
    for (std::size_t i = 0; i < step; ++i)
      next[i] = (work[i] - sign * rk * work[step - 1 - i]) / d;
    std::copy_n(next.begin(), step, work.begin());
  }
  return r;
}

[[noreturn]] void throw_non_causal() {
  throw NonCausalError("AR coefficients are not causal");
}

[[noreturn]] void throw_non_invertible() {
  throw NonInvertibleError("MA coefficients are not invertible");
}

}  // namespace

std::vector<double> levinson_forward(std::span<const double> rho) {
  return forward_recursion(rho, -1.0, "levinson_forward");
}

std::vector<double> levinson_inverse(std::span<const double> phi) {
  return inverse_recursion(phi, -1.0, -1.0, throw_non_causal);
}

std::vector<double> ma_forward(std::span<const double> b) {
  return forward_recursion(b, +1.0, "ma_forward");
}

std::vector<double> ma_inverse(std::span<const double> theta) {
  return inverse_recursion(theta, +1.0, -1.0, throw_non_invertible);
}

double jones_map_scalar(double x, JonesForm form) {
  if (form == JonesForm::Naive) {
    const double e = std::exp(-x);
    return (1.0 - e) / (1.0 + e);
  }
  const double y = std::tanh(0.5 * x);
  return std::clamp(y, -kPacfSaturation, kPacfSaturation);
}

std::vector<double> jones_map(std::span<const double> x, JonesForm form) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    out[i] = jones_map_scalar(x[i], form);
  return out;
}

double jones_inverse_scalar(double rho) {
  if (!(std::abs(rho) < 1.0))
    throw std::domain_error("jones_inverse: value outside (-1,1)");
  // log1p form keeps full precision near the origin.
  return std::log1p(rho) - std::log1p(-rho);
}

std::vector<double> jones_inverse(std::span<const double> rho) {
  std::vector<double> out(rho.size());
  for (std::size_t i = 0; i < rho.size(); ++i)
    out[i] = jones_inverse_scalar(rho[i]);
  return out;
}

ArmaCoeffs pacf_to_arma(const PacfCoeffs& p) {
  return {levinson_forward(p.rho), ma_forward(p.b), p.sigma2};
}

PacfCoeffs arma_to_pacf(const ArmaCoeffs& c) {
  return {levinson_inverse(c.phi), ma_inverse(c.theta), c.sigma2};
}

PacfCoeffs arma_to_pacf_clipped(const ArmaCoeffs& c, double eps) {
  return {inverse_recursion(c.phi, -1.0, eps, nullptr),
          inverse_recursion(c.theta, +1.0, eps, nullptr), c.sigma2};
}

}  // namespace armaopt
