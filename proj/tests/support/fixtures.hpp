#pragma once

// Seeded synthetic panels for tests.

#include "ivfts/fda.hpp"

#include <cstdint>
#include <vector>

namespace fixture {

using ivfts::CurvePanel;
using ivfts::DeltaGrid;
using ivfts::Matrix;
using ivfts::PanelSet;

DeltaGrid delta_grid();  // 10, 25, 50, 75, 90

/// n x R panel with a few smooth random factors plus noise; eigenvalues are
/// distinct with probability one.
CurvePanel random_panel(std::size_t n, std::uint64_t seed, const DeltaGrid& grid = delta_grid());

/// Independent curves: smooth mean plus iid Gaussian noise per grid point.
CurvePanel iid_panel(std::size_t n, std::uint64_t seed);

/// iid panel whose mean curve shifts by `shift_sd` noise standard deviations
/// at the midpoint.
CurvePanel break_panel(std::size_t n, double shift_sd, std::uint64_t seed);

/// Loading normalized to unit weighted norm on the grid.
Eigen::VectorXd unit_loading(const DeltaGrid& grid);

/// X_i = mu + beta_i phi with beta an MA(1): beta_i = e_i + theta e_{i-1}.
CurvePanel ma1_panel(std::size_t n, double theta, double sigma, std::uint64_t seed);

/// Rank-one panel X_i = mu + beta_i phi with the noiseless recursion
/// beta_i = phi_ar * beta_{i-1}, beta_0 given. `next` receives X_{n+1}.
CurvePanel rank_one_ar1_panel(std::size_t n, double phi_ar, double beta0, Eigen::VectorXd* next);

/// Three-maturity set X^j = mu + eta^j + R + U^j where U^j sums to zero over
/// j, R has rank `k` and each U^j has rank `l` in a basis orthogonal to R's.
/// `ratio` receives the realized integrated-variance share of R per maturity.
PanelSet multilevel_set(std::size_t n, double common_scale, double residual_scale, std::uint64_t seed,
                        std::vector<double>* ratio);

}  // namespace fixture
