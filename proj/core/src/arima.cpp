#include "ivfts/arima.hpp"

#include "ivfts/error.hpp"
#include "optimize.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <utility>

namespace ivfts {

namespace {

constexpr double kKpssCritical5 = 0.463;
// Residual variance (in standardized units) treated as an exact fit.
constexpr double kVarianceFloor = 1e-16;
// Candidates whose reciprocal roots come this close to the unit circle are rejected.
constexpr double kRootMargin = 1e-3;
constexpr double kRawClamp = 10.0;

std::vector<double> difference(std::span<const double> x) {
  std::vector<double> out;
  if (x.size() < 2) return out;
  out.reserve(x.size() - 1);
  for (std::size_t t = 1; t < x.size(); ++t) out.push_back(x[t] - x[t - 1]);
  return out;
}

std::vector<double> difference(std::span<const double> x, int d) {
  std::vector<double> out(x.begin(), x.end());
  for (int k = 0; k < d; ++k) out = difference(out);
  return out;
}

double mean_of(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v;
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double variance_of(std::span<const double> x) {
  const double m = mean_of(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

bool is_degenerate(std::span<const double> x) {
  const double m = mean_of(x);
  return variance_of(x) <= 1e-20 * m * m + std::numeric_limits<double>::min();
}

// Maps unconstrained values to coefficients of a stationary AR polynomial
// through partial autocorrelations (Durbin-Levinson recursion).
std::vector<double> pacf_to_coefficients(std::span<const double> raw) {
  const std::size_t p = raw.size();
  std::vector<double> out(p), work(p);
  for (std::size_t j = 0; j < p; ++j)
    work[j] = out[j] = std::tanh(std::clamp(raw[j], -kRawClamp, kRawClamp));
  for (std::size_t j = 1; j < p; ++j) {
    const double a = out[j];
    for (std::size_t k = 0; k < j; ++k) work[k] -= a * out[j - k - 1];
    for (std::size_t k = 0; k < j; ++k) out[k] = work[k];
  }
  return out;
}

std::vector<double> coefficients_to_pacf(std::span<const double> coef) {
  const std::size_t p = coef.size();
  std::vector<double> out(coef.begin(), coef.end()), work(p);
  for (std::size_t j = p; j-- > 1;) {
    const double a = out[j];
    for (std::size_t k = 0; k < j; ++k) work[k] = (out[k] + a * out[j - k - 1]) / (1.0 - a * a);
    for (std::size_t k = 0; k < j; ++k) out[k] = work[k];
  }
  for (auto& v : out) v = std::atanh(std::clamp(v, -0.999999, 0.999999));
  return out;
}

struct Params {
  std::vector<double> ar;
  std::vector<double> ma;
  double mean = 0.0;
};

struct Layout {
  int p = 0;
  int q = 0;
  bool with_mean = false;
  Eigen::Index size() const { return p + q + (with_mean ? 1 : 0); }

  Params decode(const Eigen::VectorXd& x) const {
    Params out;
    out.ar = pacf_to_coefficients(std::span<const double>(x.data(), static_cast<std::size_t>(p)));
    auto ma = pacf_to_coefficients(std::span<const double>(x.data() + p, static_cast<std::size_t>(q)));
    for (auto& v : ma) v = -v;
    out.ma = std::move(ma);
    out.mean = with_mean ? x[p + q] : 0.0;
    return out;
  }

  Eigen::VectorXd encode(const Params& params) const {
    Eigen::VectorXd x(size());
    const auto ar = coefficients_to_pacf(params.ar);
    std::vector<double> neg_ma(params.ma.size());
    for (std::size_t j = 0; j < params.ma.size(); ++j) neg_ma[j] = -params.ma[j];
    const auto ma = coefficients_to_pacf(neg_ma);
    for (int i = 0; i < p; ++i) x[i] = ar[static_cast<std::size_t>(i)];
    for (int j = 0; j < q; ++j) x[p + j] = ma[static_cast<std::size_t>(j)];
    if (with_mean) x[p + q] = params.mean;
    return x;
  }
};

double css_sum_of_squares(const std::vector<double>& z, const Params& params) {
  const std::size_t p = params.ar.size();
  const std::size_t q = params.ma.size();
  const std::size_t n = z.size();
  std::vector<double> e(n, 0.0);
  double ssq = 0.0;
  for (std::size_t t = p; t < n; ++t) {
    double pred = params.mean;
    for (std::size_t i = 0; i < p; ++i) pred += params.ar[i] * (z[t - i - 1] - params.mean);
    for (std::size_t j = 0; j < q && j < t; ++j) pred += params.ma[j] * e[t - j - 1];
    e[t] = z[t] - pred;
    ssq += e[t] * e[t];
  }
  return ssq;
}

// ARMA in state-space form: state dimension r = max(p, q + 1), transition with
// the AR coefficients in the first column and ones on the superdiagonal.
struct StateSpace {
  int r = 1;
  std::vector<double> phi;    // length r
  Eigen::VectorXd loading;    // (1, theta_1, ..., theta_{r-1})

  explicit StateSpace(const Params& params) {
    const int p = static_cast<int>(params.ar.size());
    const int q = static_cast<int>(params.ma.size());
    r = std::max(p, q + 1);
    phi.assign(static_cast<std::size_t>(r), 0.0);
    for (int i = 0; i < p; ++i) phi[static_cast<std::size_t>(i)] = params.ar[static_cast<std::size_t>(i)];
    loading = Eigen::VectorXd::Zero(r);
    loading[0] = 1.0;
    for (int j = 0; j < q; ++j) loading[j + 1] = params.ma[static_cast<std::size_t>(j)];
  }

  Eigen::MatrixXd transition() const {
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(r, r);
    for (int i = 0; i < r; ++i) t(i, 0) = phi[static_cast<std::size_t>(i)];
    for (int i = 0; i + 1 < r; ++i) t(i, i + 1) = 1.0;
    return t;
  }

  void advance(Eigen::VectorXd& a) const {
    const double head = a[0];
    for (int i = 0; i + 1 < r; ++i) a[i] = phi[static_cast<std::size_t>(i)] * head + a[i + 1];
    a[r - 1] = phi[static_cast<std::size_t>(r - 1)] * head;
  }

  // Solves P = T P T' + R R' through the Kronecker-vectorized linear system.
  Eigen::MatrixXd stationary_covariance() const {
    const Eigen::MatrixXd t = transition();
    const int rr = r * r;
    Eigen::MatrixXd system = Eigen::MatrixXd::Identity(rr, rr);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j)
        for (int k = 0; k < r; ++k)
          for (int l = 0; l < r; ++l) system(i * r + k, j * r + l) -= t(i, j) * t(k, l);
    const Eigen::MatrixXd rrt = loading * loading.transpose();
    Eigen::VectorXd rhs(rr);
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < r; ++k) rhs[i * r + k] = rrt(i, k);
    const Eigen::VectorXd solution = system.partialPivLu().solve(rhs);
    Eigen::MatrixXd out(r, r);
    for (int i = 0; i < r; ++i)
      for (int k = 0; k < r; ++k) out(i, k) = solution[i * r + k];
    return 0.5 * (out + out.transpose());
  }
};

struct FilterResult {
  double ssq = 0.0;
  double sumlog = 0.0;
  Eigen::VectorXd next_state;  // predicted state for the first unseen period
  bool ok = true;
};

FilterResult kalman_filter(const std::vector<double>& z, const StateSpace& ss) {
  FilterResult out;
  const int r = ss.r;
  const Eigen::MatrixXd t = ss.transition();
  const Eigen::MatrixXd rrt = ss.loading * ss.loading.transpose();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(r);
  Eigen::MatrixXd p = ss.stationary_covariance();
  bool steady = false;
  for (double y : z) {
    const double f = p(0, 0);
    if (!(f > 0.0) || !std::isfinite(f)) {
      out.ok = false;
      break;
    }
    const double v = y - a[0];
    out.ssq += v * v / f;
    out.sumlog += std::log(f);
    const Eigen::VectorXd gain = p.col(0) / f;
    a += gain * v;
    ss.advance(a);
    if (!steady) {
      const Eigen::MatrixXd updated = p - gain * p.row(0);
      const Eigen::MatrixXd predicted = t * updated * t.transpose() + rrt;
      steady = (predicted - p).cwiseAbs().maxCoeff() < 1e-13;
      p = predicted;
    }
  }
  out.next_state = a;
  return out;
}

double neg2_loglik_exact(const std::vector<double>& z, const Params& params, double* sigma2_out) {
  std::vector<double> centered(z.size());
  for (std::size_t t = 0; t < z.size(); ++t) centered[t] = z[t] - params.mean;
  const FilterResult fr = kalman_filter(centered, StateSpace(params));
  const double n = static_cast<double>(z.size());
  if (!fr.ok || !std::isfinite(fr.ssq) || !std::isfinite(fr.sumlog))
    return std::numeric_limits<double>::infinity();
  const double sigma2 = std::max(fr.ssq / n, kVarianceFloor);
  if (sigma2_out) *sigma2_out = sigma2;
  return n * std::log(2.0 * std::numbers::pi * sigma2) + fr.sumlog + fr.ssq / sigma2;
}

struct Candidate {
  ArimaFit fit;
  bool valid = false;
};

double aicc_of(double neg2ll, int k, std::size_t n) {
  const double nn = static_cast<double>(n);
  if (nn - k - 1.0 <= 0.0) return std::numeric_limits<double>::infinity();
  return neg2ll + 2.0 * k + 2.0 * k * (k + 1.0) / (nn - k - 1.0);
}

bool roots_ok(const std::vector<double>& ar, const std::vector<double>& ma) {
  std::vector<double> neg(ma.size());
  for (std::size_t j = 0; j < ma.size(); ++j) neg[j] = -ma[j];
  const double limit = 1.0 / (1.0 + kRootMargin);
  return max_reciprocal_root(ar) < limit && max_reciprocal_root(neg) < limit;
}

// Least-squares AR(p) with intercept on z; used as a starting point.
bool ols_ar_start(const std::vector<double>& z, int p, bool with_mean, Params& params) {
  const auto n = static_cast<Eigen::Index>(z.size());
  const Eigen::Index rows = n - p;
  const Eigen::Index cols = p + (with_mean ? 1 : 0);
  if (rows <= cols) return false;
  Eigen::MatrixXd x(rows, cols);
  Eigen::VectorXd y(rows);
  for (Eigen::Index t = p; t < n; ++t) {
    y[t - p] = z[static_cast<std::size_t>(t)];
    for (int i = 0; i < p; ++i) x(t - p, i) = z[static_cast<std::size_t>(t - i - 1)];
    if (with_mean) x(t - p, p) = 1.0;
  }
  const Eigen::VectorXd beta = x.colPivHouseholderQr().solve(y);
  if (!beta.allFinite()) return false;
  params.ar.assign(beta.data(), beta.data() + p);
  if (max_reciprocal_root(params.ar) >= 0.999) return false;
  double sum = 0.0;
  for (double c : params.ar) sum += c;
  if (with_mean) params.mean = beta[p] / (1.0 - sum);
  return true;
}

Candidate estimate(std::span<const double> series, ArimaOrder order, bool css_only) {
  Candidate out;
  out.fit.order = order;
  const std::vector<double> w = difference(series, order.d);
  const std::size_t n = w.size();
  const bool with_mean = order.d == 0;
  const Layout layout{order.p, order.q, with_mean};
  const int k = static_cast<int>(layout.size()) + 1;
  if (n < static_cast<std::size_t>(order.p + order.q + 3)) return out;

  double scale = std::sqrt(variance_of(w));
  if (!(scale > 0.0)) scale = 1.0;
  std::vector<double> z(n);
  for (std::size_t t = 0; t < n; ++t) z[t] = w[t] / scale;

  Params start;
  start.ar.assign(static_cast<std::size_t>(order.p), 0.0);
  start.ma.assign(static_cast<std::size_t>(order.q), 0.0);
  start.mean = with_mean ? mean_of(z) : 0.0;
  if (order.p > 0) {
    Params ols = start;
    if (ols_ar_start(z, order.p, with_mean, ols)) {
      start.ar = ols.ar;
      if (with_mean) start.mean = ols.mean;
    }
  }

  const double css_n = static_cast<double>(n - static_cast<std::size_t>(order.p));
  auto css_objective = [&](const Eigen::VectorXd& x) {
    const double ssq = css_sum_of_squares(z, layout.decode(x));
    return 0.5 * std::log(ssq / css_n + kVarianceFloor);
  };
  const auto css = detail::minimize_bfgs(css_objective, layout.encode(start));
  Params params = layout.decode(css.x);
  const double css_sigma2 = css_sum_of_squares(z, params) / css_n;
  if (!std::isfinite(css_sigma2)) return out;

  double neg2ll = 0.0;
  double sigma2 = 0.0;
  if (css_only || css_sigma2 <= kVarianceFloor) {
    sigma2 = std::max(css_sigma2, kVarianceFloor);
    neg2ll = static_cast<double>(n) * (std::log(2.0 * std::numbers::pi * sigma2) + 1.0);
  } else {
    auto ml_objective = [&](const Eigen::VectorXd& x) {
      return neg2_loglik_exact(z, layout.decode(x), nullptr) / static_cast<double>(n);
    };
    const auto ml = detail::minimize_bfgs(ml_objective, css.x);
    if (std::isfinite(ml.value) && ml.value <= ml_objective(css.x)) params = layout.decode(ml.x);
    neg2ll = neg2_loglik_exact(z, params, &sigma2);
  }
  if (!std::isfinite(neg2ll)) return out;

  // Back to the original units of the series.
  neg2ll += 2.0 * static_cast<double>(n) * std::log(scale);
  out.fit.ar = params.ar;
  out.fit.ma = params.ma;
  out.fit.intercept = with_mean ? params.mean * scale : 0.0;
  out.fit.sigma2 = sigma2 * scale * scale;
  out.fit.loglik = -0.5 * neg2ll;
  out.fit.aicc = aicc_of(neg2ll, k, n);
  out.valid = std::isfinite(out.fit.aicc) && roots_ok(out.fit.ar, out.fit.ma);
  return out;
}

// Lexicographic preference: AICc, then fewer parameters, then smaller p.
bool better(const ArimaFit& a, const ArimaFit& b) {
  const double tol = 1e-9 * std::max(1.0, std::abs(b.aicc));
  if (a.aicc < b.aicc - tol) return true;
  if (a.aicc > b.aicc + tol) return false;
  const int sa = a.order.p + a.order.q;
  const int sb = b.order.p + b.order.q;
  if (sa != sb) return sa < sb;
  return a.order.p < b.order.p;
}

ArimaFit yule_walker_fallback(std::span<const double> series, int d, int max_p) {
  const std::vector<double> w = difference(series, d);
  const bool with_mean = d == 0;
  const double mu = with_mean ? mean_of(w) : 0.0;
  const std::size_t n = w.size();
  const int top = std::min<int>(max_p, static_cast<int>(n / 4));
  std::vector<double> acov(static_cast<std::size_t>(top) + 1, 0.0);
  for (int l = 0; l <= top; ++l) {
    double s = 0.0;
    for (std::size_t t = static_cast<std::size_t>(l); t < n; ++t)
      s += (w[t] - mu) * (w[t - static_cast<std::size_t>(l)] - mu);
    acov[static_cast<std::size_t>(l)] = s / static_cast<double>(n);
  }

  ArimaFit best;
  best.fallback_ar = true;
  best.order = {0, d, 0};
  best.intercept = mu;
  best.sigma2 = acov[0];
  double best_aic = static_cast<double>(n) * std::log(std::max(acov[0], 1e-300)) + 2.0;
  std::vector<double> phi;
  double v = acov[0];
  for (int p = 1; p <= top && v > 0.0; ++p) {
    double num = acov[static_cast<std::size_t>(p)];
    for (int i = 1; i < p; ++i) num -= phi[static_cast<std::size_t>(i - 1)] * acov[static_cast<std::size_t>(p - i)];
    const double kappa = num / v;
    std::vector<double> next(static_cast<std::size_t>(p));
    for (int i = 1; i < p; ++i)
      next[static_cast<std::size_t>(i - 1)] =
          phi[static_cast<std::size_t>(i - 1)] - kappa * phi[static_cast<std::size_t>(p - i - 1)];
    next[static_cast<std::size_t>(p - 1)] = kappa;
    phi = next;
    v *= (1.0 - kappa * kappa);
    const double aic = static_cast<double>(n) * std::log(std::max(v, 1e-300)) + 2.0 * (p + 1);
    if (aic < best_aic) {
      best_aic = aic;
      best.order.p = p;
      best.ar = phi;
      best.sigma2 = v;
    }
  }
  const int k = best.order.p + (with_mean ? 1 : 0) + 1;
  const double neg2ll = static_cast<double>(n) * (std::log(2.0 * std::numbers::pi * std::max(best.sigma2, 1e-300)) + 1.0);
  best.loglik = -0.5 * neg2ll;
  best.aicc = aicc_of(neg2ll, k, n);
  return best;
}

void require_finite(std::span<const double> x) {
  for (double v : x) require(std::isfinite(v), "score series contains non-finite values");
}

}  // namespace

double max_reciprocal_root(std::span<const double> coefficients) {
  std::size_t p = coefficients.size();
  while (p > 0 && coefficients[p - 1] == 0.0) --p;
  if (p == 0) return 0.0;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  for (std::size_t i = 0; i < p; ++i) companion(0, static_cast<Eigen::Index>(i)) = coefficients[i];
  for (std::size_t i = 1; i < p; ++i) companion(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i - 1)) = 1.0;
  return companion.eigenvalues().cwiseAbs().maxCoeff();
}

double kpss_statistic(std::span<const double> series) {
  const std::size_t n = series.size();
  require(n >= 2, "KPSS needs at least two observations");
  const double m = mean_of(series);
  std::vector<double> e(n);
  for (std::size_t t = 0; t < n; ++t) e[t] = series[t] - m;
  const auto lags = static_cast<std::size_t>(std::floor(4.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
  double s2 = 0.0;
  for (double v : e) s2 += v * v;
  for (std::size_t j = 1; j <= lags && j < n; ++j) {
    double c = 0.0;
    for (std::size_t t = j; t < n; ++t) c += e[t] * e[t - j];
    s2 += 2.0 * (1.0 - static_cast<double>(j) / static_cast<double>(lags + 1)) * c;
  }
  s2 /= static_cast<double>(n);
  if (!(s2 > 0.0)) return 0.0;
  double partial = 0.0;
  double eta = 0.0;
  for (double v : e) {
    partial += v;
    eta += partial * partial;
  }
  return eta / (static_cast<double>(n) * static_cast<double>(n) * s2);
}

int select_differencing(std::span<const double> series, int max_d) {
  std::vector<double> x(series.begin(), series.end());
  for (int d = 0; d < max_d; ++d) {
    if (x.size() < 4) return d;
    if (is_degenerate(x)) {
      // A constant level needs the intercept, which only exists at d = 0;
      // a nonzero constant slope after differencing needs one more difference.
      const double m = mean_of(x);
      if (d == 0 || std::abs(m) <= 1e-12 * (1.0 + std::abs(m))) return d;
    } else if (kpss_statistic(x) <= kKpssCritical5) {
      return d;
    }
    x = difference(x);
  }
  return max_d;
}

ArimaFit fit_arima(std::span<const double> series, ArimaOrder order) {
  require(order.p >= 0 && order.q >= 0 && order.d >= 0, "ARIMA orders must be non-negative");
  require_finite(series);
  const Candidate c = estimate(series, order, false);
  require(std::isfinite(c.fit.aicc), "ARIMA estimation failed");
  return c.fit;
}

ArimaFit fit_auto_arima(const ScoreSeries& series, const AutoArimaOptions& options) {
  const auto& x = series.values;
  require(x.size() >= 20, "auto ARIMA needs at least 20 observations");
  require_finite(x);
  const int d = select_differencing(x, options.max_d);
  const bool approximate = x.size() - static_cast<std::size_t>(d) > options.approximation_length;

  std::map<std::pair<int, int>, Candidate> tried;
  const ArimaFit* best = nullptr;
  auto consider = [&](int p, int q) -> bool {
    if (p < 0 || q < 0 || p > options.max_p || q > options.max_q) return false;
    if (tried.count({p, q}) || static_cast<int>(tried.size()) >= options.max_models) return false;
    const auto& c = tried.emplace(std::pair{p, q}, estimate(x, {p, d, q}, approximate)).first->second;
    if (!c.valid) return false;
    if (!best || better(c.fit, *best)) {
      best = &c.fit;
      return true;
    }
    return false;
  };

  consider(std::min(2, options.max_p), std::min(2, options.max_q));
  consider(0, 0);
  consider(std::min(1, options.max_p), 0);
  consider(0, std::min(1, options.max_q));

  bool improved = best != nullptr;
  while (improved) {
    improved = false;
    const int p = best->order.p;
    const int q = best->order.q;
    const std::pair<int, int> moves[] = {{-1, 0}, {1, 0}, {0, -1}, {0, 1},
                                         {-1, -1}, {1, 1}, {-1, 1}, {1, -1}};
    for (auto [dp, dq] : moves) {
      if (consider(p + dp, q + dq)) {
        improved = true;
        break;
      }
    }
  }

  if (!best) return yule_walker_fallback(x, d, options.max_p);
  if (!approximate) return *best;

  const Candidate refined = estimate(x, best->order, false);
  return refined.valid ? refined.fit : *best;
}

std::vector<double> forecast_scores(const ArimaFit& fit, const ScoreSeries& series, int h) {
  require(h >= 1, "forecast horizon must be positive");
  require_finite(series.values);
  const int d = fit.order.d;
  require(series.values.size() > static_cast<std::size_t>(d), "series too short for its differencing order");

  std::vector<std::vector<double>> levels{series.values};
  for (int k = 0; k < d; ++k) levels.push_back(difference(levels.back()));

  Params params{fit.ar, fit.ma, d == 0 ? fit.intercept : 0.0};
  std::vector<double> centered(levels.back().size());
  for (std::size_t t = 0; t < centered.size(); ++t) centered[t] = levels.back()[t] - params.mean;
  const StateSpace ss(params);
  const FilterResult fr = kalman_filter(centered, ss);
  require(fr.ok, "ARIMA filter failed while forecasting");

  std::vector<double> out(static_cast<std::size_t>(h));
  Eigen::VectorXd a = fr.next_state;
  for (int i = 0; i < h; ++i) {
    out[static_cast<std::size_t>(i)] = a[0] + params.mean;
    ss.advance(a);
  }
  for (int k = d - 1; k >= 0; --k) {
    double level = levels[static_cast<std::size_t>(k)].back();
    for (auto& v : out) {
      level += v;
      v = level;
    }
  }
  return out;
}

}  // namespace ivfts
