#include "armaopt/estimate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "armaopt/evaluate.hpp"
#include "armaopt/statespace.hpp"

namespace armaopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Failure locations are clamped this far inside (-1,1): outside the inverse
// recursions' boundary tolerance, inside every classification threshold.
constexpr double kLocationGap = 1e-12;

double clamp_sigma2(double v) {
  if (!std::isfinite(v) || v <= 0.0) return 1.0;
  return std::clamp(v, 1e-12, 1e12);
}

double sample_variance(std::span<const double> y) {
  if (y.size() < 2) return 1.0;
  double mean = std::accumulate(y.begin(), y.end(), 0.0) /
                static_cast<double>(y.size());
  double acc = 0.0;
  for (double v : y) acc += (v - mean) * (v - mean);
  return acc / static_cast<double>(y.size() - 1);
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_penalty(const PacfCoeffs& p) {
  double pen = 0.0;
  for (double r : p.rho) pen += r * r;
  for (double v : p.b) pen += v * v;
  return pen;
}

}  // namespace

std::optional<FitMethod> parse_fit_method(std::string_view s) {
  if (s == "bounded") return FitMethod::Bounded;
  if (s == "jones") return FitMethod::Jones;
  return std::nullopt;
}

ArmaObjective::ArmaObjective(std::span<const double> y, ArmaOrder order,
                             const FitConfig& cfg)
    : y_(y.begin(), y.end()), order_(order), cfg_(cfg) {
  if (order.p < 0 || order.q < 0)
    throw std::invalid_argument("ArmaObjective: negative order");
  if (y_.empty()) throw std::invalid_argument("ArmaObjective: empty series");
  if (cfg_.epsilon <= 0.0 || cfg_.epsilon >= 0.5)
    throw std::invalid_argument("ArmaObjective: epsilon outside (0, 0.5)");
  if (cfg_.lambda < 0.0)
    throw std::invalid_argument("ArmaObjective: negative lambda");
}

PacfCoeffs ArmaObjective::decode(std::span<const double> x) const {
  const int k = order_.n_coeffs();
  PacfCoeffs out;
  out.rho.resize(order_.p);
  out.b.resize(order_.q);
  for (int i = 0; i < k; ++i) {
    double v = x[i];
    if (cfg_.method == FitMethod::Jones)
      v = jones_map_scalar(v, cfg_.jones_form);
    if (!std::isfinite(v))
      v = std::copysign(1.0 - kLocationGap, x[i]);
    else if (std::abs(v) >= 1.0 - kPacfBoundaryTol)
      v = std::copysign(1.0 - kLocationGap, v);
    (i < order_.p ? out.rho[i] : out.b[i - order_.p]) = v;
  }
  out.sigma2 = std::exp(std::clamp(x[k], cfg_.s_min, cfg_.s_max));
  return out;
}

std::vector<double> ArmaObjective::encode(const PacfCoeffs& p) const {
  if (p.order() != order_)
    throw std::invalid_argument("ArmaObjective: start has wrong order");
  const int k = order_.n_coeffs();
  std::vector<double> x(k + 1);
  for (int i = 0; i < k; ++i) {
    double v = i < order_.p ? p.rho[i] : p.b[i - order_.p];
    x[i] = cfg_.method == FitMethod::Jones ? jones_inverse_scalar(v) : v;
  }
  x[k] = std::clamp(std::log(clamp_sigma2(p.sigma2)), cfg_.s_min, cfg_.s_max);
  return x;
}

std::vector<double> ArmaObjective::lower_bounds() const {
  std::vector<double> lo(dim());
  std::fill(lo.begin(), lo.end() - 1,
            cfg_.method == FitMethod::Bounded ? -1.0 + cfg_.epsilon : -kInf);
  lo.back() = cfg_.s_min;
  return lo;
}

std::vector<double> ArmaObjective::upper_bounds() const {
  std::vector<double> hi(dim());
  std::fill(hi.begin(), hi.end() - 1,
            cfg_.method == FitMethod::Bounded ? 1.0 - cfg_.epsilon : kInf);
  hi.back() = cfg_.s_max;
  return hi;
}

ObjectiveEval ArmaObjective::operator()(std::span<const double> x) const {
  ++n_evals_;
  if (static_cast<int>(x.size()) != dim())
    throw std::invalid_argument("ArmaObjective: wrong decision-vector length");
  const int k = order_.n_coeffs();
  PacfCoeffs p;
  p.rho.resize(order_.p);
  p.b.resize(order_.q);
  bool left_box = false;
  for (int i = 0; i < k; ++i) {
    double v = x[i];
    if (cfg_.method == FitMethod::Jones)
      v = jones_map_scalar(v, cfg_.jones_form);
    if (!std::isfinite(v) || std::abs(v) >= 1.0 - kPacfBoundaryTol)
      left_box = true;
    (i < order_.p ? p.rho[i] : p.b[i - order_.p]) = v;
  }
  p.sigma2 = std::exp(x[k]);

  ObjectiveEval ev;
  if (left_box) {
    // Only the logistic chart can emit boundary or non-finite coordinates;
    // bounded evaluations live strictly inside the eps-box by construction.
    if (cfg_.method == FitMethod::Bounded)
      throw std::invalid_argument(
          "bounded objective evaluated outside the feasible box");
    ev.value = kNaN;
    ev.failure = FitFailure{FailureKind::ArithmeticIssue,
                            "logistic map left the open hypercube", decode(x)};
    return ev;
  }

  try {
    ArmaCoeffs c = pacf_to_arma(p);
    StateSpace ss = build_state_space(c);
    ev.value = kalman_loglik(ss, y_);
  } catch (const KalmanFailure& e) {
    ev.value = kNaN;
    ev.failure = FitFailure{FailureKind::KalmanError, e.what(), decode(x)};
    return ev;
  }
  if (!std::isfinite(ev.value)) {
    ev.failure = FitFailure{FailureKind::KalmanError,
                            "non-finite log-likelihood", decode(x)};
    ev.value = kNaN;
    return ev;
  }
  if (cfg_.lambda > 0.0) ev.value -= cfg_.lambda * l2_penalty(p);
  return ev;
}

GradientResult fd_gradient(const ObjectiveFn& f, std::span<const double> x,
                           std::span<const double> lower,
                           std::span<const double> upper) {
  const int n = static_cast<int>(x.size());
  static const double kStep =
      std::cbrt(std::numeric_limits<double>::epsilon());
  GradientResult out;
  out.grad.assign(n, 0.0);
  std::vector<double> xt(x.begin(), x.end());
  std::optional<double> f_base;

  auto eval_at = [&](int i, double xi, double& dst) -> bool {
    xt[i] = xi;
    ObjectiveEval ev = f(xt);
    xt[i] = x[i];
    if (!ev.ok()) {
      if (!out.failure) out.failure = ev.failure;
      return false;
    }
    dst = ev.value;
    return true;
  };

  for (int i = 0; i < n; ++i) {
    double h = kStep * std::max(1.0, std::abs(x[i]));
    const double lo = lower[i], hi = upper[i];
    if (std::isfinite(lo) && std::isfinite(hi))
      h = std::min(h, (hi - lo) / 4.0);
    if (!(h > 0.0)) continue;  // degenerate box, derivative unavailable

    if (x[i] + h <= hi && x[i] - h >= lo) {
      double fp, fm;
      if (!eval_at(i, x[i] + h, fp) || !eval_at(i, x[i] - h, fm)) break;
      out.grad[i] = (fp - fm) / (2.0 * h);
    } else if (x[i] + h > hi) {
      // backward three-point stencil, all points feasible
      if (!f_base) {
        double v;
        if (!eval_at(i, x[i], v)) break;
        f_base = v;
      }
      double f1, f2;
      if (!eval_at(i, x[i] - h, f1) || !eval_at(i, x[i] - 2.0 * h, f2)) break;
      out.grad[i] = (3.0 * *f_base - 4.0 * f1 + f2) / (2.0 * h);
    } else {
      // forward three-point stencil
      if (!f_base) {
        double v;
        if (!eval_at(i, x[i], v)) break;
        f_base = v;
      }
      double f1, f2;
      if (!eval_at(i, x[i] + h, f1) || !eval_at(i, x[i] + 2.0 * h, f2)) break;
      out.grad[i] = (-3.0 * *f_base + 4.0 * f1 - f2) / (2.0 * h);
    }
  }
  return out;
}

OptimizeResult optimize_bounded(const ObjectiveFn& f, std::vector<double> x0,
                                std::span<const double> lower,
                                std::span<const double> upper,
                                const FitConfig& cfg) {
  const int n = static_cast<int>(x0.size());
  OptimizeResult out;

  auto cf = [&](std::span<const double> x) {
    ++out.n_evals;
    return f(x);
  };
  auto project = [&](std::vector<double>& v) {
    for (int i = 0; i < n; ++i) v[i] = std::clamp(v[i], lower[i], upper[i]);
  };

  project(x0);
  ObjectiveEval e0 = cf(x0);
  out.x = x0;
  if (!e0.ok()) {
    out.value = kNaN;
    out.failure = e0.failure;
    return out;
  }
  double fx = e0.value;
  out.value = fx;

  auto grad_at = [&](const std::vector<double>& xx,
                     std::vector<double>& gg) -> std::optional<FitFailure> {
    GradientResult gr = fd_gradient(
        [&](std::span<const double> z) { return cf(z); }, xx, lower, upper);
    if (!gr.ok()) return gr.failure;
    gg = std::move(gr.grad);
    return std::nullopt;
  };

  std::vector<double> x = x0, g(n);
  if (auto fail = grad_at(x, g)) {
    out.failure = std::move(fail);
    out.value = kNaN;
    return out;
  }

  // Ascent form of the projected-gradient norm: components that push
  // through an active bound are dead and excluded.
  auto proj_grad_norm = [&](const std::vector<double>& xx,
                            const std::vector<double>& gg) {
    double norm = 0.0;
    for (int i = 0; i < n; ++i) {
      double gi = gg[i];
      if (xx[i] <= lower[i] && gi < 0.0) gi = 0.0;
      if (xx[i] >= upper[i] && gi > 0.0) gi = 0.0;
      norm = std::max(norm, std::abs(gi));
    }
    return norm;
  };

  struct Pair {
    std::vector<double> s, y;  // y in minimization sign
  };
  std::vector<Pair> mem;
  constexpr int kMemory = 10;
  constexpr double kArmijo = 1e-4;
  constexpr double kMinStep = 1e-12;
  // Accepted steps gaining no more than this (relative to f's scale) are
  // numerically idle: the line search is resolving rounding jitter, not the
  // surface.  On stiff ridges along the box boundary the gradient tolerance
  // can be unreachable in double precision, so the stop decision has to come
  // from the attainable gains instead.
  constexpr double kGainFloor = 1e6 * std::numeric_limits<double>::epsilon();

  for (long it = 0; it < cfg.max_iters; ++it) {
    if (proj_grad_norm(x, g) <= cfg.tol) {
      out.converged = true;
      break;
    }
    out.n_iters = it + 1;

    // Free-subspace gradient: components pushing through an active bound
    // are masked out, so the quasi-Newton direction never fights the
    // projection (two-metric style).
    std::vector<double> gm = g;
    for (int i = 0; i < n; ++i) {
      if (x[i] <= lower[i] && gm[i] < 0.0) gm[i] = 0.0;
      if (x[i] >= upper[i] && gm[i] > 0.0) gm[i] = 0.0;
    }

    // Two-loop recursion on the minimization gradient -gm; the result r
    // approximates H(-gm), so the ascent direction is -r.
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = -gm[i];
    std::vector<double> alpha(mem.size());
    for (int j = static_cast<int>(mem.size()) - 1; j >= 0; --j) {
      const double rho_j = 1.0 / dot(mem[j].y, mem[j].s);
      alpha[j] = rho_j * dot(mem[j].s, r);
      for (int i = 0; i < n; ++i) r[i] -= alpha[j] * mem[j].y[i];
    }
    if (!mem.empty()) {
      const Pair& last = mem.back();
      double gamma = dot(last.s, last.y) / dot(last.y, last.y);
      if (!std::isfinite(gamma) || gamma <= 0.0) gamma = 1.0;
      for (int i = 0; i < n; ++i) r[i] *= gamma;
    }
    for (std::size_t j = 0; j < mem.size(); ++j) {
      const double rho_j = 1.0 / dot(mem[j].y, mem[j].s);
      const double beta = rho_j * dot(mem[j].y, r);
      for (int i = 0; i < n; ++i) r[i] += (alpha[j] - beta) * mem[j].s[i];
    }
    std::vector<double> d(n);
    for (int i = 0; i < n; ++i) d[i] = -r[i];
    // Re-mask: curvature pairs may reintroduce blocked components.
    for (int i = 0; i < n; ++i) {
      if (x[i] <= lower[i] && d[i] < 0.0) d[i] = 0.0;
      if (x[i] >= upper[i] && d[i] > 0.0) d[i] = 0.0;
    }
    if (dot(gm, d) <= 0.0) {
      mem.clear();
      d = gm;  // quasi-Newton direction lost ascent, fall back to steepest
    }

    bool accepted = false;
    std::vector<double> xt(n);
    double ft = 0.0;
    long trials = 0, failed_trials = 0;
    std::optional<FitFailure> trial_failure;

    auto line_search = [&](const std::vector<double>& dir) {
      std::vector<double> prev;
      for (double step = 1.0; step >= kMinStep; step *= 0.5) {
        for (int i = 0; i < n; ++i)
          xt[i] = std::clamp(x[i] + step * dir[i], lower[i], upper[i]);
        if (xt == x) return;  // projection absorbed the whole step
        if (xt == prev) continue;  // projection collapsed onto the last trial
        prev = xt;
        ++trials;
        ObjectiveEval ev = cf(xt);
        if (!ev.ok()) {
          ++failed_trials;
          if (!trial_failure) trial_failure = ev.failure;
          continue;
        }
        double along = 0.0;
        for (int i = 0; i < n; ++i) along += g[i] * (xt[i] - x[i]);
        if (ev.value >= fx + kArmijo * along) {
          accepted = true;
          ft = ev.value;
          return;
        }
      }
    };

    // Fallback direction: the raw masked gradient, normalized so step one is
    // box-sized (its own scale carries no curvature information).
    std::vector<double> gs = gm;
    {
      double gmax = 0.0;
      for (int i = 0; i < n; ++i) gmax = std::max(gmax, std::abs(gs[i]));
      if (gmax > 1.0)
        for (double& v : gs) v /= gmax;
    }
    const double gain_floor = kGainFloor * std::max(1.0, std::abs(fx));

    line_search(d);
    bool stalled = false;
    if ((!accepted || ft - fx <= gain_floor) && d != gs) {
      // The primary step is idle or absent.  A mis-scaled quasi-Newton
      // direction looks exactly like a flat surface from the line search's
      // viewpoint, so retry along the raw gradient before concluding
      // anything; only if that is idle too is the surface really exhausted.
      std::vector<double> idle_x;
      double idle_f = -kInf;
      if (accepted) {
        idle_x = xt;
        idle_f = ft;
      }
      mem.clear();
      accepted = false;
      line_search(gs);
      if (accepted && ft - fx <= gain_floor && ft < idle_f) {
        xt = idle_x;  // both idle; keep the better of the two points
        ft = idle_f;
      }
      if (!accepted || ft - fx <= gain_floor) {
        stalled = true;
        if (!accepted && idle_f > -kInf) {
          accepted = true;
          xt = std::move(idle_x);
          ft = idle_f;
        }
      }
    } else if (accepted && ft - fx <= gain_floor) {
      stalled = true;  // the primary direction was the raw gradient already
    }

    if (!accepted) {
      if (trials > 0 && failed_trials == trials)
        out.failure = std::move(trial_failure);
      break;  // stalled (or every trial point failed); keep best-so-far
    }
    if (stalled) {
      // Neither the quasi-Newton nor the raw-gradient search can gain more
      // than f's rounding scale: flat at double precision.  Take the last
      // idle improvement and stop here.
      if (ft > fx) {
        x = xt;
        fx = ft;
      }
      out.converged = true;
      break;
    }

    std::vector<double> g_new(n);
    if (auto fail = grad_at(xt, g_new)) {
      // Accepted point retained; the fit is reported as failed at the
      // gradient's evaluation point.
      x = xt;
      fx = ft;
      out.failure = std::move(fail);
      break;
    }

    Pair pr;
    pr.s.resize(n);
    pr.y.resize(n);
    for (int i = 0; i < n; ++i) {
      pr.s[i] = xt[i] - x[i];
      pr.y[i] = g[i] - g_new[i];  // minimization sign: (-g_new) - (-g)
    }
    const double sy = dot(pr.s, pr.y);
    if (sy > 1e-10 * std::sqrt(dot(pr.s, pr.s)) * std::sqrt(dot(pr.y, pr.y))) {
      mem.push_back(std::move(pr));
      if (static_cast<int>(mem.size()) > kMemory)
        mem.erase(mem.begin());
    }
    x = xt;
    fx = ft;
    g = std::move(g_new);
  }

  out.x = x;
  if (!out.failure) out.value = fx;
  else if (out.n_iters > 0) out.value = fx;  // best-so-far before the failure
  return out;
}

PacfCoeffs hannan_rissanen(std::span<const double> y, ArmaOrder order,
                           double epsilon) {
  const int p = order.p, q = order.q;
  const long n = static_cast<long>(y.size());

  PacfCoeffs fallback;
  fallback.rho.assign(p, 0.0);
  fallback.b.assign(q, 0.0);
  fallback.sigma2 = clamp_sigma2(sample_variance(y));
  if (p + q == 0 || n <= 10L * (p + q)) return fallback;

  const int m = static_cast<int>(std::min<long>(
      static_cast<long>(std::ceil(10.0 * std::log10(static_cast<double>(n)))) +
          std::max(p, q),
      n / 4));
  if (m < 1 || n - m < m + 2) return fallback;

  // Stage 1: long-AR least squares, residuals proxy the innovations.
  Eigen::MatrixXd X1(n - m, m);
  Eigen::VectorXd y1(n - m);
  for (long t = m; t < n; ++t) {
    y1(t - m) = y[t];
    for (int j = 0; j < m; ++j) X1(t - m, j) = y[t - 1 - j];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr1(X1);
  if (qr1.rank() < m) return fallback;
  Eigen::VectorXd a = qr1.solve(y1);
  if (!a.allFinite()) return fallback;

  std::vector<double> resid(n, 0.0);
  for (long t = m; t < n; ++t) {
    double pred = 0.0;
    for (int j = 0; j < m; ++j) pred += a(j) * y[t - 1 - j];
    resid[t] = y[t] - pred;
  }

  // Stage 2: regress y_t on its own lags and lagged residuals.
  const long t0 = std::max<long>(p, m + q);
  const long rows = n - t0;
  if (rows < p + q + 2) return fallback;
  Eigen::MatrixXd X2(rows, p + q);
  Eigen::VectorXd y2(rows);
  for (long t = t0; t < n; ++t) {
    y2(t - t0) = y[t];
    for (int j = 0; j < p; ++j) X2(t - t0, j) = y[t - 1 - j];
    for (int j = 0; j < q; ++j) X2(t - t0, p + j) = resid[t - 1 - j];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr2(X2);
  if (qr2.rank() < p + q) return fallback;
  Eigen::VectorXd beta = qr2.solve(y2);
  if (!beta.allFinite()) return fallback;

  ArmaCoeffs c;
  c.phi.assign(beta.data(), beta.data() + p);
  c.theta.assign(beta.data() + p, beta.data() + p + q);
  c.sigma2 = clamp_sigma2((y2 - X2 * beta).squaredNorm() /
                          static_cast<double>(rows));
  return arma_to_pacf_clipped(c, epsilon);
}

FitResult fit_from_chart(std::span<const double> y, ArmaOrder order,
                         const FitConfig& cfg, std::vector<double> x0) {
  const auto t_start = std::chrono::steady_clock::now();
  ArmaObjective obj(y, order, cfg);
  const std::vector<double> lo = obj.lower_bounds();
  const std::vector<double> hi = obj.upper_bounds();
  OptimizeResult opt = optimize_bounded(
      [&obj](std::span<const double> x) { return obj(x); }, std::move(x0),
      lo, hi, cfg);

  FitResult res;
  res.pacf = obj.decode(opt.x);
  res.params = pacf_to_arma(res.pacf);
  res.n_obj_evals = opt.n_evals;
  res.n_iters = opt.n_iters;
  if (opt.failure) {
    res.failure = std::move(opt.failure);
  } else {
    // Stored log-likelihood is unpenalized; undo the L2 term.
    res.loglik = opt.value + cfg.lambda * l2_penalty(res.pacf);
  }
  res.boundary = classify_boundary(res.pacf, cfg.tau);
  res.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return res;
}

FitResult fit(std::span<const double> y, ArmaOrder order, const FitConfig& cfg,
              const PacfCoeffs& start) {
  ArmaObjective obj(y, order, cfg);
  return fit_from_chart(y, order, cfg, obj.encode(start));
}

double start_log_sigma2(std::span<const double> y) {
  return std::clamp(std::log(clamp_sigma2(sample_variance(y))), -30.0, 30.0);
}

std::vector<PacfCoeffs> draw_starts(std::span<const double> y, ArmaOrder order,
                                    int n_starts, double epsilon,
                                    RngStream& rng) {
  const double s2 = clamp_sigma2(sample_variance(y));
  std::vector<PacfCoeffs> out;
  out.reserve(n_starts);
  for (int k = 0; k < n_starts; ++k) {
    PacfCoeffs p;
    p.rho.resize(order.p);
    p.b.resize(order.q);
    for (double& v : p.rho) v = rng.uniform(-1.0 + epsilon, 1.0 - epsilon);
    for (double& v : p.b) v = rng.uniform(-1.0 + epsilon, 1.0 - epsilon);
    p.sigma2 = s2;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<FitResult> multistart_fit(std::span<const double> y,
                                      ArmaOrder order, const FitConfig& cfg,
                                      int n_starts, RngStream& rng) {
  if (n_starts < 1)
    throw std::invalid_argument("multistart_fit: n_starts must be >= 1");
  const std::vector<PacfCoeffs> starts =
      draw_starts(y, order, n_starts, cfg.epsilon, rng);
  std::vector<FitResult> out;
  out.reserve(starts.size());
  for (const PacfCoeffs& s : starts) out.push_back(fit(y, order, cfg, s));
  return out;
}

int best_index(std::span<const FitResult> results) {
  int best = -1;
  for (int i = 0; i < static_cast<int>(results.size()); ++i) {
    if (!results[i].ok() || !std::isfinite(results[i].loglik)) continue;
    if (best < 0 || results[i].loglik > results[best].loglik + 1e-9) best = i;
  }
  return best;
}

}  // namespace armaopt
