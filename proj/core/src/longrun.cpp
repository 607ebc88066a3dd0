#include "ivfts/longrun.hpp"

#include "ivfts/error.hpp"
#include "ivfts/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ivfts {

double KernelWeights::operator()(double u) const {
  const double a = std::abs(u);
  if (a > support_m) return 0.0;
  switch (family) {
    case Family::Bartlett:
      return 1.0 - a / support_m;
    case Family::FlatTop:
      return a <= 0.5 * support_m ? 1.0 : 2.0 * (1.0 - a / support_m);
  }
  return 0.0;
}

double KernelWeights::squared_integral() const {
  switch (family) {
    case Family::Bartlett:
      return 2.0 * support_m / 3.0;
    case Family::FlatTop:
      return 4.0 * support_m / 3.0;
  }
  return 0.0;
}

BandwidthSpec BandwidthSpec::fixed(double h) {
  require(h > 0.0 && std::isfinite(h), "bandwidth must be positive");
  return {Mode::Fixed, h};
}

Matrix autocovariance_lag(const Matrix& values, long lag) {
  const long n = static_cast<long>(values.rows());
  require(n >= 1, "empty panel");
  require(std::labs(lag) < n, "lag must be smaller than the sample size");
  const Matrix centered = detail::center_rows(values, column_mean(values));
  const Matrix forward = detail::lagged_cross_product(centered, static_cast<std::size_t>(std::labs(lag)));
  if (lag >= 0) return forward;
  return forward.transpose();
}

Matrix autocovariance_lag(const CurvePanel& panel, long lag) {
  return autocovariance_lag(panel.values(), lag);
}

std::size_t truncation_lag(const KernelWeights& weights, double h, std::size_t n) {
  if (!(h > 0.0) || n < 2) return 0;
  const double reach = std::ceil(weights.support_m * h);
  return static_cast<std::size_t>(std::min<double>(static_cast<double>(n - 1), reach));
}

namespace {

// sum_{l=-L..L} coef(l) gamma_l for an even coefficient sequence, reduced in lag order.
template <typename Coefficient>
Matrix symmetric_lag_sum(const Matrix& centered, std::size_t max_lag, Coefficient&& coef) {
  std::vector<double> c(max_lag + 1);
  for (std::size_t l = 0; l <= max_lag; ++l) c[l] = coef(l);

  std::vector<Matrix> lags(max_lag + 1);
  parallel_for(max_lag + 1, [&](std::size_t l) {
    if (c[l] != 0.0) lags[l] = detail::lagged_cross_product(centered, l);
  });

  const Eigen::Index r = centered.cols();
  Matrix sum = Matrix::Zero(r, r);
  if (c[0] != 0.0) sum += c[0] * lags[0];
  for (std::size_t l = 1; l <= max_lag; ++l) {
    if (c[l] == 0.0) continue;
    sum += c[l] * (lags[l] + lags[l].transpose());
  }
  return sum;
}

double l2_norm_squared(const Matrix& surface, const Eigen::VectorXd& quadrature) {
  return (quadrature.transpose() * surface.cwiseAbs2() * quadrature)(0, 0);
}

}  // namespace

Matrix long_run_covariance(const Matrix& values, const Eigen::VectorXd& quadrature,
                           const KernelWeights& weights, double h, double negative_tolerance) {
  require(values.rows() >= 2, "insufficient observations");
  require(values.cols() == quadrature.size(), "panel and quadrature disagree in dimension");
  require(h >= 0.0 && std::isfinite(h), "bandwidth must be non-negative");
  const auto n = static_cast<std::size_t>(values.rows());
  const Matrix centered = detail::center_rows(values, column_mean(values));
  const std::size_t max_lag = truncation_lag(weights, h, n);

  Matrix cov = symmetric_lag_sum(centered, max_lag, [&](std::size_t l) {
    return l == 0 ? 1.0 : weights(static_cast<double>(l) / h);
  });

  const Eigen::VectorXd root = quadrature.cwiseSqrt();
  const Matrix sym = root.asDiagonal() * cov * root.asDiagonal();
  const double trace = sym.trace();
  if (trace > 0.0) {
    const double smallest = Eigen::SelfAdjointEigenSolver<Matrix>(sym, Eigen::EigenvaluesOnly)
                                .eigenvalues()
                                .minCoeff();
    require(smallest >= -negative_tolerance * trace,
            "long-run covariance estimate has a large negative eigenvalue");
  }
  return cov;
}

std::size_t significant_lag_run(const Matrix& values, const Eigen::VectorXd& quadrature, double c) {
  const auto n = static_cast<std::size_t>(values.rows());
  require(n >= 2, "insufficient observations");
  const Matrix centered = detail::center_rows(values, column_mean(values));
  const double trace = (quadrature.array() * detail::lagged_cross_product(centered, 0).diagonal().array()).sum();
  if (!(trace > 0.0)) return 0;
  const double nd = static_cast<double>(n);
  const double threshold = c * std::sqrt(std::log10(nd) / nd);
  const auto run = static_cast<std::size_t>(std::max(5.0, std::ceil(std::sqrt(std::log10(nd)))));

  std::size_t last_significant = 0;
  for (std::size_t l = 1; l < n && l <= last_significant + run; ++l) {
    const double rho = std::sqrt(l2_norm_squared(detail::lagged_cross_product(centered, l), quadrature)) / trace;
    if (rho > threshold) last_significant = l;
  }
  return last_significant;
}

double plugin_bandwidth(const Matrix& values, const Eigen::VectorXd& quadrature,
                        const KernelWeights& weights) {
  const auto n = static_cast<std::size_t>(values.rows());
  if (n < 10) throw Error("insufficient sample for plug-in");
  const double q = weights.order_q;
  const double exponent = 1.0 / (2.0 * q + 1.0);
  const double h0 = std::pow(static_cast<double>(n), exponent);
  const Matrix centered = detail::center_rows(values, column_mean(values));
  const std::size_t max_lag = truncation_lag(weights, h0, n);
  const std::size_t significant = significant_lag_run(values, quadrature);

  const Matrix pilot = symmetric_lag_sum(centered, max_lag, [&](std::size_t l) {
    return l == 0 ? 1.0 : weights(static_cast<double>(l) / h0);
  });
  const Matrix derivative = symmetric_lag_sum(centered, max_lag, [&](std::size_t l) {
    if (l == 0 || l > significant) return 0.0;
    return weights(static_cast<double>(l) / h0) * std::pow(static_cast<double>(l), q);
  });

  const double trace = (quadrature.array() * pilot.diagonal().array()).sum();
  const double denominator =
      (l2_norm_squared(pilot, quadrature) + trace * trace) * weights.squared_integral();
  if (!(denominator > 0.0)) return 0.0;
  const double ratio = 2.0 * q * l2_norm_squared(derivative, quadrature) / denominator;
  const double h = std::pow(ratio * static_cast<double>(n), exponent);
  if (weights.family != KernelWeights::Family::FlatTop) return h;
  // Once the plateau covers every significant lag the flat-top sum is
  // unbiased; widening further only adds noisy lags.
  const std::size_t covered = std::max<std::size_t>(1, significant_lag_run(values, quadrature, 2.0));
  return std::min(h, 2.0 * static_cast<double>(covered) / weights.support_m);
}

double plugin_bandwidth(const CurvePanel& panel, const KernelWeights& weights) {
  return plugin_bandwidth(panel.values(), panel.grid().weights(), weights);
}

double resolve_bandwidth(const Matrix& values, const Eigen::VectorXd& quadrature,
                         const KernelWeights& weights, const BandwidthSpec& bw) {
  if (bw.mode == BandwidthSpec::Mode::Fixed) return bw.h;
  return plugin_bandwidth(values, quadrature, weights);
}

Matrix long_run_covariance(const CurvePanel& panel, const KernelWeights& weights,
                           const BandwidthSpec& bw) {
  const double h = resolve_bandwidth(panel.values(), panel.grid().weights(), weights, bw);
  return long_run_covariance(panel.values(), panel.grid().weights(), weights, h);
}

FpcaBasis fit_dynamic_fpca(const Matrix& values, const Eigen::VectorXd& quadrature,
                           const KernelWeights& weights, const BandwidthSpec& bw,
                           const ComponentRule& rule, bool allow_degenerate, double negative_tolerance) {
  const double h = resolve_bandwidth(values, quadrature, weights, bw);
  return fpca_from_covariance(values, quadrature,
                              long_run_covariance(values, quadrature, weights, h, negative_tolerance), rule,
                              CovarianceKind::Dynamic, allow_degenerate);
}

FpcaBasis fit_dynamic_fpca(const CurvePanel& panel, const KernelWeights& weights,
                           const BandwidthSpec& bw, const ComponentRule& rule) {
  return fit_dynamic_fpca(panel.values(), panel.grid().weights(), weights, bw, rule);
}

}  // namespace ivfts
