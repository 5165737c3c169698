#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "armaopt/rng.hpp"
#include "armaopt/types.hpp"

namespace armaopt {

/// Ground-truth model behind one simulated series.
struct GroundTruth {
  ArmaCoeffs coeffs;
  PacfCoeffs pacf;
  BoundaryClass boundary;
};

/// Per-coordinate sampling law for ground-truth and start-point draws.
/// The default is uniform in partial-autocorrelation space over the shrunk
/// box (-1+eps, 1-eps); alternative laws can be plugged in.
using SamplingLaw = std::function<double(RngStream&)>;

SamplingLaw uniform_pacf_law(double eps = 1e-2);

/// Draw a strictly feasible ground truth of the given order and noise sd.
GroundTruth sample_feasible(ArmaOrder order, double sigma, RngStream& rng,
                            const SamplingLaw& law = uniform_pacf_law(),
                            double tau = 2e-2);

/// Simulate n observations of the ARMA recursion with Gaussian innovations,
/// after a discarded burn-in of max(500, 10(p+q)) steps started at zeros.
std::vector<double> simulate_arma(const ArmaCoeffs& truth, std::size_t n,
                                  RngStream& rng);

/// Autocovariances gamma(0..max_lag) from the MA(infinity) weights of
/// theta(z)/phi(z); the psi tail is truncated once negligible.
std::vector<double> acvf(const ArmaCoeffs& truth, int max_lag);

/// Dense-likelihood oracle: log-density of N(0, Gamma) with the Toeplitz
/// autocovariance matrix, via Cholesky factorization. Supports n <= 256;
/// independent of the Kalman recursion path by construction.
double dense_loglik_oracle(const ArmaCoeffs& truth, std::span<const double> y);

/// Grid specification for the synthetic dataset.
struct DatasetSpec {
  std::vector<std::size_t> lengths{100, 1000, 10000};
  std::vector<double> sigmas{0.01, 0.1, 1.0};
  std::vector<ArmaOrder> orders;  // empty = {1..5} x {1..5}
  int replicates = 10;
  std::uint64_t seed = 0;
  double eps = 1e-2;
  double tau = 2e-2;

  std::vector<ArmaOrder> order_grid() const;
  std::size_t total_series() const;

  static DatasetSpec paper_preset(std::uint64_t seed);
  static DatasetSpec desk_preset(std::uint64_t seed);
};

/// One generated series with its provenance.
struct SimulatedSeries {
  int series_id = 0;
  ArmaOrder order;
  std::size_t length = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;  // substream key used for this series
  GroundTruth truth;
  std::vector<double> values;
};

/// Deterministically generate the whole grid; series_id runs 0..N-1 in
/// (length, sigma, order, replicate) lexicographic order.
std::vector<SimulatedSeries> generate_series(const DatasetSpec& spec);

}  // namespace armaopt
