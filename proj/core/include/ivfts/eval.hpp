#pragma once

// Expanding-window backtesting and point-forecast error measures.

#include "ivfts/fda.hpp"
#include "ivfts/models.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace ivfts {

struct BacktestPlan {
  std::size_t initial_train_size = 30;
  std::vector<int> horizons{1};
  std::size_t refit_every = 1;
  std::vector<ModelSpec> models;

  /// Checks the plan against a sample of n curves.
  void validate(std::size_t n) const;
  /// Number of forecast origins for horizon h on a sample of n curves.
  std::size_t forecast_count(std::size_t n, int h) const;
};

enum class LossMetric { Mafe, Msfe };

std::string to_string(LossMetric metric);

/// Per-origin curve losses for one maturity and horizon: rows are forecast
/// origins, columns are models.
struct LossMatrix {
  LossMetric metric = LossMetric::Mafe;
  std::string maturity;
  int horizon = 1;
  std::vector<std::string> model_ids;
  std::vector<std::string> target_dates;  // date of the forecast target per row
  Matrix values;

  std::size_t origins() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t models() const { return static_cast<std::size_t>(values.cols()); }
  /// Mean loss per model over origins.
  Eigen::VectorXd column_means() const;
};

/// All forecasts one model made at one horizon, in origin order.
struct ForecastTrack {
  std::string model_id;
  int horizon = 1;
  std::vector<ForecastBundle> bundles;
};

struct BacktestResult {
  std::vector<ForecastTrack> tracks;  // model-major, then horizon in plan order
  std::vector<LossMatrix> losses;     // horizon, maturity, metric

  const ForecastTrack& track(const std::string& model_id, int h) const;
  const LossMatrix& loss(LossMetric metric, const std::string& maturity, int h) const;
};

BacktestResult run_backtest(const PanelSet& set, const BacktestPlan& plan);

double mafe(const Curve& actual, const Curve& forecast);
double msfe(const Curve& actual, const Curve& forecast);
/// Mean of the per-curve losses over all pairs.
double mean_mafe(const std::vector<Curve>& actuals, const std::vector<Curve>& forecasts);
double mean_msfe(const std::vector<Curve>& actuals, const std::vector<Curve>& forecasts);

enum class MmeFlavor { Under, Over };

/// Mean mixed error. The Under flavour charges the square root of the error
/// on under-predictions and the full error on over-predictions, which weighs
/// under-prediction more heavily for errors below one; Over swaps the roles.
double mme(const std::vector<Curve>& actuals, const std::vector<Curve>& forecasts, MmeFlavor flavor);

struct RSquared {
  Curve pointwise;
  double total = 0.0;
};

/// Pointwise coefficient of determination and its span-normalized integral.
RSquared r_squared(const CurvePanel& panel, const Matrix& fitted);

}  // namespace ivfts
