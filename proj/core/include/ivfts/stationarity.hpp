#pragma once

#include "ivfts/fda.hpp"

#include <cstdint>

namespace ivfts {

struct StationarityResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t components = 0;  // projection dimension d
  std::size_t lrv_lag = 0;     // Bartlett truncation used for score long-run variances
};

/// CUSUM test of the null that the curves are stationary, on projections onto
/// the leading static principal components.
StationarityResult stationarity_test(const CurvePanel& panel, std::size_t n_mc, std::uint64_t seed);

/// Monte Carlo draws of sup_x sum_k B_k(x)^2 for d independent Brownian
/// bridges on an n-point grid.
std::vector<double> bridge_sup_draws(std::size_t d, std::size_t n, std::size_t draws, std::uint64_t seed);

}  // namespace ivfts
