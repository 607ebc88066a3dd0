#pragma once

// Non-seasonal ARIMA(p, d, q) models for principal component score series:
// fixed-order estimation, stepwise automatic order selection and point forecasts.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ivfts {

struct ScoreSeries {
  std::vector<double> values;
  std::string label;
};

struct ArimaOrder {
  int p = 0;
  int d = 0;
  int q = 0;
  friend bool operator==(const ArimaOrder&, const ArimaOrder&) = default;
};

/// (1 - sum ar_i B^i)(1 - B)^d (x_t - intercept) = (1 + sum ma_j B^j) e_t, Var e_t = sigma2.
/// The intercept is the mean of the differenced series and is only used when d = 0.
struct ArimaFit {
  ArimaOrder order;
  std::vector<double> ar;
  std::vector<double> ma;
  double intercept = 0.0;
  double sigma2 = 0.0;
  double loglik = 0.0;
  double aicc = 0.0;
  /// Set when no stationary and invertible ARMA candidate survived and the
  /// order search fell back to a Yule-Walker AR(p) chosen by AIC.
  bool fallback_ar = false;
};

struct AutoArimaOptions {
  int max_p = 5;
  int max_q = 5;
  int max_d = 2;
  int max_models = 94;
  /// Above this length the search ranks candidates by conditional sum of squares
  /// and only the chosen order is refined by exact likelihood.
  std::size_t approximation_length = 150;
};

/// KPSS level-stationarity statistic with Bartlett long-run variance and
/// lag truncation floor(4 (n/100)^(1/4)). Returns 0 for a constant series.
double kpss_statistic(std::span<const double> series);

/// Number of differences (<= max_d) chosen by repeated KPSS tests at the 5% level.
int select_differencing(std::span<const double> series, int max_d = 2);

/// Fixed-order fit: conditional sum of squares start, exact Gaussian likelihood
/// (Kalman filter) refinement. The intercept is estimated iff d == 0.
ArimaFit fit_arima(std::span<const double> series, ArimaOrder order);

/// Stepwise AICc order search over p, q <= 5 after choosing d by KPSS.
ArimaFit fit_auto_arima(const ScoreSeries& series, const AutoArimaOptions& options = {});

/// Point forecasts for horizons 1..h. The series may extend past the data the
/// fit was estimated on; the state is filtered through all of it.
std::vector<double> forecast_scores(const ArimaFit& fit, const ScoreSeries& series, int h);

/// Largest modulus of the reciprocal roots of 1 - sum c_i z^i; < 1 means all roots
/// lie outside the unit circle.
double max_reciprocal_root(std::span<const double> coefficients);

}  // namespace ivfts
