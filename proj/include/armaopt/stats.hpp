#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace armaopt {

enum class Alternative { TwoSided, Greater, Less };

constexpr std::string_view to_string(Alternative a) {
  switch (a) {
    case Alternative::TwoSided: return "two_sided";
    case Alternative::Greater: return "greater";
    case Alternative::Less: return "less";
  }
  return "?";
}

/// Every paired difference is zero, so the signed-rank test is undefined.
struct AllZeroDifferences : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Common test outcome. `statistic` is the signed standardized value;
/// `w_plus` and `exact` carry signed-rank detail (sum of positive ranks,
/// whether the exact enumeration branch was used).
struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  Alternative alternative = Alternative::TwoSided;
  long n_effective = 0;
  double w_plus = 0.0;
  bool exact = false;
};

/// Wilcoxon signed-rank test on paired differences. Zeros are discarded,
/// tied absolute values receive average ranks. Exact enumeration up to
/// n_effective = 25, then a normal approximation with continuity correction
/// and tie-corrected variance.
TestReport wilcoxon_signed_rank(std::span<const double> d,
                                Alternative alternative);

/// Row-wise method ranks, ascending in error, ties averaged.
/// Each row sums to k(k+1)/2.
struct RankMatrix {
  std::size_t n_series = 0;
  std::size_t n_methods = 0;
  std::vector<double> ranks;  // row-major

  double at(std::size_t i, std::size_t j) const {
    return ranks[i * n_methods + j];
  }
  double& at(std::size_t i, std::size_t j) {
    return ranks[i * n_methods + j];
  }
  double mean_rank(std::size_t j) const;
};

RankMatrix rank_methods(const std::vector<std::vector<double>>& errors);

/// Friedman test on a rank matrix; chi-square statistic with tie correction,
/// k-1 degrees of freedom.
TestReport friedman(const RankMatrix& ranks);

/// Nemenyi pairwise p-values: standardized rank differences against the
/// studentized-range tail with k groups and infinite degrees of freedom.
/// Symmetric with unit diagonal. Unclipped (reports can clip for
/// table-style display).
std::vector<std::vector<double>> nemenyi(const RankMatrix& ranks);

// Distribution tails used by the tests above; exposed for direct checking.

/// Standard normal CDF and survival function via erfc (no cancellation in
/// either tail).
double normal_cdf(double x);
double normal_sf(double x);

/// Regularized incomplete gamma functions P(a,x) and Q(a,x) = 1 - P(a,x),
/// series / continued-fraction split at x = a + 1.
double regularized_gamma_p(double a, double x);
double regularized_gamma_q(double a, double x);

/// Chi-square survival function with k degrees of freedom.
double chisq_sf(double x, double k);

/// Survival function of the range of k iid standard normals (studentized
/// range with infinite degrees of freedom), by adaptive quadrature of a
/// cancellation-free integrand. Supports k in [2, 20].
double studentized_range_sf(double q, int k);

}  // namespace armaopt
