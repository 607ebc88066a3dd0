#pragma once

#include "ivfts/fpca.hpp"

#include <cstddef>

namespace ivfts {

/// Symmetric lag-window W_q with bounded support [-m, m].
///
/// bartlett:  W(u) = 1 - |u|/m on [-m, m]                          (order 1)
/// flat_top:  W(u) = 1 on |u| <= m/2, then 2 (1 - |u|/m) down to 0  (trapezoid)
///
/// With the default m = 1 the flat-top window is exactly 1 on [-1/2, 1/2], so
/// every lag below h/2 enters the long-run sum unweighted.
struct KernelWeights {
  enum class Family { Bartlett, FlatTop };
  Family family = Family::FlatTop;
  int order_q = 2;
  double support_m = 1.0;

  static KernelWeights bartlett(double m = 1.0) { return {Family::Bartlett, 1, m}; }
  static KernelWeights flat_top(double m = 1.0) { return {Family::FlatTop, 2, m}; }

  double operator()(double u) const;
  /// Integral of W^2 over its support.
  double squared_integral() const;
};

struct BandwidthSpec {
  enum class Mode { Fixed, Plugin };
  Mode mode = Mode::Plugin;
  double h = 0.0;  // bandwidth (Fixed) or ignored (Plugin)

  static BandwidthSpec fixed(double h);
  static BandwidthSpec plugin() { return {Mode::Plugin, 0.0}; }
};

/// gamma_lag(t, s) with the 1/n divisor; negative lags use gamma_{-l}(t,s) = gamma_l(s,t).
Matrix autocovariance_lag(const Matrix& values, long lag);
Matrix autocovariance_lag(const CurvePanel& panel, long lag);

/// Largest lag with a possibly nonzero weight: min(n - 1, ceil(m h)).
std::size_t truncation_lag(const KernelWeights& weights, double h, std::size_t n);

/// Kernel sandwich estimate  sum_l W(l/h) gamma_l(t,s)  using a resolved bandwidth.
/// Lag surfaces may be computed in parallel; they are reduced in lag order so the
/// result does not depend on the schedule.
///
/// The estimate need not be positive semi-definite. Negative eigenvalues of the
/// quadrature-weighted operator are tolerated (and later clamped to zero by
/// eigendecompose) down to -negative_tolerance * trace; beyond that the estimate
/// is rejected.
Matrix long_run_covariance(const Matrix& values, const Eigen::VectorXd& quadrature,
                           const KernelWeights& weights, double h,
                           double negative_tolerance = 1e-8);
Matrix long_run_covariance(const CurvePanel& panel, const KernelWeights& weights,
                           const BandwidthSpec& bw);

/// Data-driven bandwidth through a pilot plug-in rule:
///
///   q      = weights.order_q, h0 = n^(1/(2q+1))
///   C      = sum_l W(l/h0) gamma_l                 (pilot long-run covariance)
///   C^(q)  = sum_l W(l/h0) |l|^q gamma_l          (pilot q-th "derivative" surface)
///   ratio  = 2q ||C^(q)||^2 / ((||C||^2 + (int C(t,t) dt)^2) int W^2)
///   h      = (ratio * n)^(1/(2q+1))
///
/// Only lags up to significant_lag_run enter C^(q), so serially independent
/// panels get h = 0 instead of a bandwidth fitted to sampling noise. For the
/// flat-top window h is further capped at 2 max(1, L) / m, where L is the lag
/// run at the conventional c = 2: the smallest bandwidth whose plateau still
/// covers every clearly significant lag.
///
/// Norms are quadrature L2 norms over the grid. The kernel curvature constant
/// c_q is taken as 1 because the flat-top window has c_q = 0 at every order.
double plugin_bandwidth(const Matrix& values, const Eigen::VectorXd& quadrature,
                        const KernelWeights& weights);
double plugin_bandwidth(const CurvePanel& panel, const KernelWeights& weights);

/// Last lag l whose normalized autocovariance ||gamma_l|| / int C(t,t) dt exceeds
/// c sqrt(log10(n) / n), scanning until max(5, ceil(sqrt(log10 n))) consecutive
/// lags fall below it. 0 when no lag is significant.
std::size_t significant_lag_run(const Matrix& values, const Eigen::VectorXd& quadrature, double c = 1.2);

/// Resolves a BandwidthSpec against data.
double resolve_bandwidth(const Matrix& values, const Eigen::VectorXd& quadrature,
                         const KernelWeights& weights, const BandwidthSpec& bw);

/// FPCA on the long-run covariance; scores are still projections of the centered curves.
/// `negative_tolerance` is forwarded to long_run_covariance.
FpcaBasis fit_dynamic_fpca(const Matrix& values, const Eigen::VectorXd& quadrature,
                           const KernelWeights& weights, const BandwidthSpec& bw,
                           const ComponentRule& rule, bool allow_degenerate = false,
                           double negative_tolerance = 1e-8);
FpcaBasis fit_dynamic_fpca(const CurvePanel& panel, const KernelWeights& weights,
                           const BandwidthSpec& bw, const ComponentRule& rule);

}  // namespace ivfts
