#include "ivfts/score_forecast.hpp"

#include "ivfts/error.hpp"

namespace ivfts {

Curve rw_curve_forecast(const CurvePanel& panel, int h) {
  require(h >= 1, "forecast horizon must be positive");
  require(!panel.empty(), "empty panel");
  return panel.last();
}

Ar1Coefficients fit_ar1(const Eigen::Ref<const Eigen::VectorXd>& series) {
  const Eigen::Index n = series.size();
  require(n >= 3, "AR(1) needs at least three observations");
  const auto lagged = series.head(n - 1);
  const auto next = series.tail(n - 1);
  const double mx = lagged.mean();
  const double my = next.mean();
  double sxx = 0.0;
  double sxy = 0.0;
  for (Eigen::Index t = 0; t < n - 1; ++t) {
    sxx += (lagged[t] - mx) * (lagged[t] - mx);
    sxy += (lagged[t] - mx) * (next[t] - my);
  }
  // A flat regressor carries no slope information; the series is its own mean.
  if (!(sxx > 0.0)) return {my, 0.0};
  const double slope = sxy / sxx;
  return {my - slope * mx, slope};
}

double iterate_ar1(const Ar1Coefficients& coef, double last, int h) {
  double x = last;
  for (int i = 0; i < h; ++i) x = coef.intercept + coef.slope * x;
  return x;
}

Curve ar1_curve_forecast(const CurvePanel& panel, int h) {
  require(h >= 1, "forecast horizon must be positive");
  require(panel.rows() >= 10, "AR(1) benchmark needs at least 10 observations");
  const Matrix& values = panel.values();
  Curve out(values.cols());
  for (Eigen::Index k = 0; k < values.cols(); ++k) {
    const Eigen::VectorXd column = values.col(k);
    out[k] = iterate_ar1(fit_ar1(column), column[column.size() - 1], h);
  }
  return out;
}

}  // namespace ivfts
