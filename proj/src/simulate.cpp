#include "armaopt/simulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "armaopt/evaluate.hpp"
#include "armaopt/transforms.hpp"

namespace armaopt {

SamplingLaw uniform_pacf_law(double eps) {
  return [eps](RngStream& rng) { return rng.uniform(-1.0 + eps, 1.0 - eps); };
}

GroundTruth sample_feasible(ArmaOrder order, double sigma, RngStream& rng,
                            const SamplingLaw& law, double tau) {
  PacfCoeffs pacf;
  pacf.rho.resize(order.p);
  pacf.b.resize(order.q);
  for (auto& v : pacf.rho) v = law(rng);
  for (auto& v : pacf.b) v = law(rng);
  pacf.sigma2 = sigma * sigma;
  GroundTruth g;
  g.pacf = pacf;
  g.coeffs = pacf_to_arma(pacf);
  g.boundary = classify_boundary(pacf, tau);
  return g;
}

std::vector<double> simulate_arma(const ArmaCoeffs& truth, std::size_t n,
                                  RngStream& rng) {
  const std::size_t p = truth.phi.size();
  const std::size_t q = truth.theta.size();
  const double sd = std::sqrt(truth.sigma2);
  const std::size_t burn = std::max<std::size_t>(500, 10 * (p + q));
  const std::size_t total = burn + n;

  std::vector<double> y(total, 0.0);
  std::vector<double> e(total, 0.0);
  for (std::size_t t = 0; t < total; ++t) {
    e[t] = rng.gaussian(0.0, sd);
    double v = e[t];
    for (std::size_t i = 0; i < p && i < t; ++i) v += truth.phi[i] * y[t - 1 - i];
    for (std::size_t j = 0; j < q && j < t; ++j) v += truth.theta[j] * e[t - 1 - j];
    y[t] = v;
  }
  return {y.begin() + static_cast<std::ptrdiff_t>(burn), y.end()};
}

namespace {

// MA(infinity) weights of theta(z)/phi(z), extended until the remaining tail
// is negligible relative to the accumulated weights.
std::vector<double> psi_weights(const ArmaCoeffs& c, int min_len) {
  const std::size_t p = c.phi.size();
  const std::size_t q = c.theta.size();
  constexpr std::size_t kMaxLen = 200000;
  const std::size_t window = std::max<std::size_t>(p, 1);

  std::vector<double> psi{1.0};
  double max_abs = 1.0;
  for (std::size_t j = 1; j < kMaxLen; ++j) {
    double v = j <= q ? c.theta[j - 1] : 0.0;
    for (std::size_t i = 1; i <= p && i <= j; ++i) v += c.phi[i - 1] * psi[j - i];
    psi.push_back(v);
    max_abs = std::max(max_abs, std::abs(v));
    if (j < static_cast<std::size_t>(min_len) || j <= p + q + window) continue;
    double recent = 0.0;
    for (std::size_t k = 0; k < window; ++k) recent = std::max(recent, std::abs(psi[j - k]));
    if (recent < 1e-16 * max_abs) break;
  }
  return psi;
}

}  // namespace

std::vector<double> acvf(const ArmaCoeffs& truth, int max_lag) {
  const std::vector<double> psi = psi_weights(truth, max_lag + 1);
  std::vector<double> gamma(max_lag + 1, 0.0);
  for (int k = 0; k <= max_lag; ++k) {
    double s = 0.0;
    for (std::size_t j = 0; j + k < psi.size(); ++j) s += psi[j] * psi[j + k];
    gamma[k] = truth.sigma2 * s;
  }
  return gamma;
}

double dense_loglik_oracle(const ArmaCoeffs& truth,
                           std::span<const double> y) {
  const std::size_t n = y.size();
  if (n == 0) return 0.0;
  if (n > 256)
    throw std::invalid_argument("dense_loglik_oracle: n > 256");
  const std::vector<double> gamma = acvf(truth, static_cast<int>(n) - 1);
  Eigen::MatrixXd G(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      G(i, j) = gamma[i >= j ? i - j : j - i];
  Eigen::LLT<Eigen::MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("dense_loglik_oracle: factorization failed");
  const Eigen::VectorXd yv =
      Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(n));
  const Eigen::VectorXd z = llt.matrixL().solve(yv);
  double log_det = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    log_det += std::log(llt.matrixL()(i, i));
  return -0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi) -
         log_det - 0.5 * z.squaredNorm();
}

std::vector<ArmaOrder> DatasetSpec::order_grid() const {
  if (!orders.empty()) return orders;
  std::vector<ArmaOrder> grid;
  for (int p = 1; p <= 5; ++p)
    for (int q = 1; q <= 5; ++q) grid.push_back({p, q});
  return grid;
}

std::size_t DatasetSpec::total_series() const {
  return lengths.size() * sigmas.size() * order_grid().size() *
         static_cast<std::size_t>(replicates);
}

DatasetSpec DatasetSpec::paper_preset(std::uint64_t seed) {
  DatasetSpec s;
  s.seed = seed;
  return s;
}

DatasetSpec DatasetSpec::desk_preset(std::uint64_t seed) {
  DatasetSpec s;
  s.lengths = {100, 500};
  s.sigmas = {1.0};
  s.orders = {{1, 1}, {2, 1}, {2, 2}};
  s.replicates = 5;
  s.seed = seed;
  return s;
}

std::vector<SimulatedSeries> generate_series(const DatasetSpec& spec) {
  const RngStream root(spec.seed);
  const SamplingLaw law = uniform_pacf_law(spec.eps);
  std::vector<SimulatedSeries> out;
  out.reserve(spec.total_series());
  int id = 0;
  for (std::size_t n : spec.lengths)
    for (double sigma : spec.sigmas)
      for (ArmaOrder order : spec.order_grid())
        for (int rep = 0; rep < spec.replicates; ++rep, ++id) {
          SimulatedSeries s;
          s.series_id = id;
          s.order = order;
          s.length = n;
          s.sigma = sigma;
          s.seed = static_cast<std::uint64_t>(id);
          RngStream rng = root.substream(s.seed);
          s.truth = sample_feasible(order, sigma, rng, law, spec.tau);
          s.values = simulate_arma(s.truth.coeffs, n, rng);
          out.push_back(std::move(s));
        }
  return out;
}

}  // namespace armaopt
