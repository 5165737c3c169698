#pragma once

#include <span>
#include <stdexcept>
#include <vector>

#include "armaopt/types.hpp"

namespace armaopt {

/// The train series is constant, so the scale-free denominator vanishes.
struct DegenerateDenominator : std::domain_error {
  using std::domain_error::domain_error;
};

/// Classify a feasible point by its distance to the causality and
/// invertibility boundaries: NearAR / NearMA when the respective gap
/// 1 - ||.||_inf falls below tau, NearBoth when both do.
BoundaryClass classify_boundary(const PacfCoeffs& p, double tau);

/// Mean absolute scaled error over horizons 1..h, scaled by the in-sample
/// mean absolute one-step difference of the train series.
double mase(std::span<const double> train, std::span<const double> actual,
            std::span<const double> forecast);

/// Single absolute scaled error at horizon h (1-based).
double scaled_error(std::span<const double> train,
                    std::span<const double> actual,
                    std::span<const double> forecast, int h);

/// Forecast accuracy bundle for one (series, model) pair.
struct ForecastScore {
  double mase_h = 0.0;
  std::vector<double> scaled_errors;  // horizons 1..h
};

ForecastScore forecast_score(std::span<const double> train,
                             std::span<const double> actual,
                             std::span<const double> forecast);

}  // namespace armaopt
