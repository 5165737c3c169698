#include "armaopt/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>

namespace armaopt {

namespace {

// Average ranks of `v` ascending; tie_sum accumulates sum(t^3 - t) over tie
// groups for the variance corrections.
std::vector<double> average_ranks(const std::vector<double>& v,
                                  double* tie_sum = nullptr) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(n);
  if (tie_sum) *tie_sum = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = r;
    if (tie_sum) {
      const double t = static_cast<double>(j - i + 1);
      *tie_sum += t * t * t - t;
    }
    i = j + 1;
  }
  return ranks;
}

// Exact null distribution of 2*W+ over sign patterns, ranks doubled to keep
// integer sums under averaged ties. counts[s] = number of patterns with
// doubled rank sum s.
std::vector<double> exact_counts(const std::vector<double>& ranks) {
  int total = 0;
  std::vector<int> doubled(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    doubled[i] = static_cast<int>(std::llround(2.0 * ranks[i]));
    total += doubled[i];
  }
  std::vector<double> counts(total + 1, 0.0);
  counts[0] = 1.0;
  for (int r : doubled)
    for (int s = total; s >= r; --s) counts[s] += counts[s - r];
  return counts;
}

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double fa, double fm, double fb, double s,
                        double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double s2 = sl + sr;
  if (depth <= 0 || std::abs(s2 - s) <= 15.0 * tol)
    return s2 + (s2 - s) / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, sl, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, sr, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double s = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson(f, a, b, fa, fm, fb, s, tol, 48);
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_sf(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double regularized_gamma_p(double a, double x) {
  if (a <= 0.0 || x < 0.0)
    throw std::invalid_argument("regularized_gamma_p: bad arguments");
  if (x == 0.0) return 0.0;
  if (x >= a + 1.0) return 1.0 - regularized_gamma_q(a, x);
  // series expansion around 0
  double ap = a, sum = 1.0 / a, del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * 1e-16) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double regularized_gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0)
    throw std::invalid_argument("regularized_gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - regularized_gamma_p(a, x);
  // Lentz continued fraction
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double chisq_sf(double x, double k) {
  if (x <= 0.0) return 1.0;
  return regularized_gamma_q(0.5 * k, 0.5 * x);
}

double studentized_range_sf(double q, int k) {
  if (k < 2 || k > 20)
    throw std::invalid_argument("studentized_range_sf: k outside [2, 20]");
  if (!(q > 0.0)) return 1.0;
  const double inv_sqrt2pi = 0.3989422804014327;
  auto integrand = [&](double u) {
    const double phi = inv_sqrt2pi * std::exp(-0.5 * u * u);
    const double pu = normal_cdf(u);
    const double puq = normal_cdf(u - q);
    const double diff = pu - puq;
    // sum_{i=0}^{k-2} pu^i diff^(k-2-i); factored survival form, no
    // subtraction of near-equal tail masses
    double sum = 0.0, pu_pow = 1.0;
    for (int i = 0; i <= k - 2; ++i) {
      double term = pu_pow;
      for (int j = 0; j < k - 2 - i; ++j) term *= diff;
      sum += term;
      pu_pow *= pu;
    }
    return phi * puq * sum;
  };
  const double val = k * integrate(integrand, -12.0, 12.0, 1e-14);
  return std::clamp(val, 0.0, 1.0);
}

TestReport wilcoxon_signed_rank(std::span<const double> d,
                                Alternative alternative) {
  std::vector<double> nz;
  nz.reserve(d.size());
  for (double v : d) {
    if (!std::isfinite(v))
      throw std::invalid_argument("wilcoxon_signed_rank: non-finite input");
    if (v != 0.0) nz.push_back(v);
  }
  if (nz.empty())
    throw AllZeroDifferences("wilcoxon_signed_rank: all differences are zero");

  const std::size_t n = nz.size();
  std::vector<double> abs_d(n);
  for (std::size_t i = 0; i < n; ++i) abs_d[i] = std::abs(nz[i]);
  double tie_sum = 0.0;
  const std::vector<double> ranks = average_ranks(abs_d, &tie_sum);

  double w_plus = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    if (nz[i] > 0.0) w_plus += ranks[i];

  const double nd = static_cast<double>(n);
  const double mean = nd * (nd + 1.0) / 4.0;
  const double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_sum / 48.0;
  const double sd = std::sqrt(var);

  TestReport rep;
  rep.alternative = alternative;
  rep.n_effective = static_cast<long>(n);
  rep.w_plus = w_plus;
  rep.statistic = (w_plus - mean) / sd;

  if (n <= 25) {
    rep.exact = true;
    const std::vector<double> counts = exact_counts(ranks);
    const double total = std::ldexp(1.0, static_cast<int>(n));  // 2^n patterns
    const int w2 = static_cast<int>(std::llround(2.0 * w_plus));
    double below = 0.0, above = 0.0;
    for (int s = 0; s < static_cast<int>(counts.size()); ++s) {
      if (s <= w2) below += counts[s];
      if (s >= w2) above += counts[s];
    }
    const double p_le = below / total, p_ge = above / total;
    switch (alternative) {
      case Alternative::Greater: rep.p_value = p_ge; break;
      case Alternative::Less: rep.p_value = p_le; break;
      case Alternative::TwoSided:
        rep.p_value = std::min(1.0, 2.0 * std::min(p_le, p_ge));
        break;
    }
  } else {
    // continuity correction toward the mean
    switch (alternative) {
      case Alternative::Greater:
        rep.p_value = normal_sf((w_plus - mean - 0.5) / sd);
        break;
      case Alternative::Less:
        rep.p_value = normal_cdf((w_plus - mean + 0.5) / sd);
        break;
      case Alternative::TwoSided: {
        const double shift = w_plus > mean ? -0.5 : (w_plus < mean ? 0.5 : 0.0);
        const double z = (w_plus - mean + shift) / sd;
        rep.p_value = std::min(1.0, 2.0 * normal_sf(std::abs(z)));
        break;
      }
    }
  }
  rep.p_value = std::clamp(rep.p_value, 0.0, 1.0);
  return rep;
}

double RankMatrix::mean_rank(std::size_t j) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < n_series; ++i) acc += at(i, j);
  return acc / static_cast<double>(n_series);
}

RankMatrix rank_methods(const std::vector<std::vector<double>>& errors) {
  if (errors.empty()) throw std::invalid_argument("rank_methods: empty input");
  RankMatrix rm;
  rm.n_series = errors.size();
  rm.n_methods = errors.front().size();
  rm.ranks.resize(rm.n_series * rm.n_methods);
  for (std::size_t i = 0; i < rm.n_series; ++i) {
    const std::vector<double>& row = errors[i];
    if (row.size() != rm.n_methods)
      throw std::invalid_argument("rank_methods: ragged input");
    for (double v : row)
      if (!std::isfinite(v))
        throw std::invalid_argument("rank_methods: non-finite error");
    const std::vector<double> r = average_ranks(row);
    for (std::size_t j = 0; j < rm.n_methods; ++j) rm.at(i, j) = r[j];
  }
  return rm;
}

TestReport friedman(const RankMatrix& ranks) {
  const double N = static_cast<double>(ranks.n_series);
  const double k = static_cast<double>(ranks.n_methods);
  if (ranks.n_methods < 2 || ranks.n_series < 2)
    throw std::invalid_argument("friedman: need >= 2 methods and >= 2 series");

  double ss = 0.0;
  for (std::size_t j = 0; j < ranks.n_methods; ++j) {
    const double dev = ranks.mean_rank(j) - (k + 1.0) / 2.0;
    ss += dev * dev;
  }
  double stat = 12.0 * N / (k * (k + 1.0)) * ss;

  // tie correction from repeated rank values within each row
  double tie_sum = 0.0;
  for (std::size_t i = 0; i < ranks.n_series; ++i) {
    std::vector<double> row(ranks.n_methods);
    for (std::size_t j = 0; j < ranks.n_methods; ++j) row[j] = ranks.at(i, j);
    std::sort(row.begin(), row.end());
    for (std::size_t j = 0; j < row.size();) {
      std::size_t e = j;
      while (e + 1 < row.size() && row[e + 1] == row[j]) ++e;
      const double t = static_cast<double>(e - j + 1);
      tie_sum += t * t * t - t;
      j = e + 1;
    }
  }
  const double correction = 1.0 - tie_sum / (N * k * (k * k - 1.0));

  TestReport rep;
  rep.alternative = Alternative::Greater;
  rep.n_effective = static_cast<long>(ranks.n_series);
  if (correction <= 0.0) {
    rep.statistic = 0.0;  // every row fully tied, no information
    rep.p_value = 1.0;
    return rep;
  }
  stat /= correction;
  rep.statistic = stat;
  rep.p_value = chisq_sf(stat, k - 1.0);
  return rep;
}

std::vector<std::vector<double>> nemenyi(const RankMatrix& ranks) {
  const std::size_t k = ranks.n_methods;
  const double N = static_cast<double>(ranks.n_series);
  const double kk = static_cast<double>(k);
  if (k < 2 || ranks.n_series < 2)
    throw std::invalid_argument("nemenyi: need >= 2 methods and >= 2 series");
  const double se = std::sqrt(kk * (kk + 1.0) / (12.0 * N));

  std::vector<double> mean(k);
  for (std::size_t j = 0; j < k; ++j) mean[j] = ranks.mean_rank(j);

  std::vector<std::vector<double>> p(k, std::vector<double>(k, 1.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const double q = std::abs(mean[i] - mean[j]) / se;
      const double pv = studentized_range_sf(q, static_cast<int>(k));
      p[i][j] = pv;
      p[j][i] = pv;
    }
  }
  return p;
}

}  // namespace armaopt
