#include "armaopt/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace armaopt {

namespace {

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Denominator shared by every horizon: mean absolute first difference of
// the train span. Throws when the train series is constant.
double scale_denominator(std::span<const double> train) {
  if (train.size() < 2)
    throw DegenerateDenominator("train series too short to scale errors");
  double acc = 0.0;
  for (std::size_t t = 1; t < train.size(); ++t)
    acc += std::abs(train[t] - train[t - 1]);
  double denom = acc / static_cast<double>(train.size() - 1);
  if (denom <= 0.0 || !std::isfinite(denom))
    throw DegenerateDenominator("train series is constant");
  return denom;
}

}  // namespace

BoundaryClass classify_boundary(const PacfCoeffs& p, double tau) {
  const bool near_ar = !p.rho.empty() && (1.0 - inf_norm(p.rho)) < tau;
  const bool near_ma = !p.b.empty() && (1.0 - inf_norm(p.b)) < tau;
  BoundaryTag tag = BoundaryTag::StrictlyFeasible;
  if (near_ar && near_ma)
    tag = BoundaryTag::NearBoth;
  else if (near_ar)
    tag = BoundaryTag::NearAR;
  else if (near_ma)
    tag = BoundaryTag::NearMA;
  return BoundaryClass{tag, tau};
}

double mase(std::span<const double> train, std::span<const double> actual,
            std::span<const double> forecast) {
  if (actual.size() != forecast.size() || actual.empty())
    throw std::invalid_argument("mase: actual and forecast sizes must match");
  const double denom = scale_denominator(train);
  double acc = 0.0;
  for (std::size_t h = 0; h < actual.size(); ++h)
    acc += std::abs(actual[h] - forecast[h]);
  return acc / (static_cast<double>(actual.size()) * denom);
}

double scaled_error(std::span<const double> train,
                    std::span<const double> actual,
                    std::span<const double> forecast, int h) {
  if (actual.size() != forecast.size())
    throw std::invalid_argument("scaled_error: size mismatch");
  if (h < 1 || static_cast<std::size_t>(h) > actual.size())
    throw std::invalid_argument("scaled_error: horizon out of range");
  const double denom = scale_denominator(train);
  return std::abs(actual[h - 1] - forecast[h - 1]) / denom;
}

ForecastScore forecast_score(std::span<const double> train,
                             std::span<const double> actual,
                             std::span<const double> forecast) {
  ForecastScore out;
  out.scaled_errors.reserve(actual.size());
  const double denom = scale_denominator(train);
  double acc = 0.0;
  for (std::size_t h = 0; h < actual.size(); ++h) {
    double e = std::abs(actual[h] - forecast[h]) / denom;
    out.scaled_errors.push_back(e);
    acc += e;
  }
  out.mase_h = acc / static_cast<double>(actual.size());
  return out;
}

}  // namespace armaopt
