#pragma once

// Curve-level benchmark forecasters. Both work directly on grid values and
// ignore any functional structure.

#include "ivfts/arima.hpp"
#include "ivfts/fda.hpp"

#include <vector>

namespace ivfts {

/// Random walk: the last observed curve, whatever the horizon.
Curve rw_curve_forecast(const CurvePanel& panel, int h);

/// x_{t+1} = intercept + slope x_t, fitted by least squares at one grid point.
struct Ar1Coefficients {
  double intercept = 0.0;
  double slope = 0.0;
};

Ar1Coefficients fit_ar1(const Eigen::Ref<const Eigen::VectorXd>& series);

/// Iterates the recursion h times from `last`.
double iterate_ar1(const Ar1Coefficients& coef, double last, int h);

/// Per-grid-point AR(1) with intercept, iterated to horizon h.
Curve ar1_curve_forecast(const CurvePanel& panel, int h);

}  // namespace ivfts
