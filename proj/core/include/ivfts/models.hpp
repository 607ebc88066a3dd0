#pragma once

#include "ivfts/arima.hpp"
#include "ivfts/fpca.hpp"
#include "ivfts/longrun.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ivfts {

enum class ModelFamily { Univariate, Multivariate, Multilevel, RandomWalk, Ar1 };

/// Which forecaster to run and how to size its bases.
///
/// Identifiers follow the table convention: FTS, MFTS and MLFTS for the
/// univariate, multivariate and multilevel models, a leading D for long-run
/// (dynamic) covariance, and a -CPV or -K<n> suffix for component selection.
/// RW and AR1 name the curve-level benchmarks.
struct ModelSpec {
  std::string id;
  ModelFamily family = ModelFamily::Univariate;
  CovarianceKind covariance = CovarianceKind::Static;
  ComponentRule k_rule = ComponentRule::cpv(0.99);
  std::optional<ComponentRule> l_rule;  // multilevel only
  KernelWeights kernel = KernelWeights::flat_top();
  BandwidthSpec bandwidth = BandwidthSpec::plugin();
  AutoArimaOptions arima;

  void validate() const;
  bool functional() const {
    return family == ModelFamily::Univariate || family == ModelFamily::Multivariate ||
           family == ModelFamily::Multilevel;
  }

  static ModelSpec parse(std::string_view id);
  static ModelSpec univariate(CovarianceKind kind, ComponentRule k_rule);
  static ModelSpec multivariate(CovarianceKind kind, ComponentRule k_rule);
  static ModelSpec multilevel(CovarianceKind kind, ComponentRule k_rule, ComponentRule l_rule);
};

/// h-step-ahead forecasts of every maturity from one model at one origin.
struct ForecastBundle {
  std::string model_id;
  std::size_t origin_index = 0;  // number of observations the forecast conditions on
  int horizon = 1;
  std::vector<Curve> forecasts;  // one per maturity
  std::vector<std::size_t> retained_k;
  std::vector<std::size_t> retained_l;
};

/// FPCA basis plus one ARIMA model per retained score series.
struct ScoreModel {
  FpcaBasis basis;
  std::vector<ArimaFit> score_fits;

  /// Forecast of the curve h steps after the last row of `values`.
  Curve forecast(const Matrix& values, int h) const;
};

/// Two-level decomposition of a panel set:
/// X^j_i = mu_c + eta^j + R_i + U^j_i, with R from FPCA of the maturity average and
/// U^j from FPCA of each maturity's remainder.
struct MultilevelFit {
  Curve grand_mean;
  std::vector<Curve> deviations;           // eta^j = mu^j - mu_c
  FpcaBasis common;                        // basis of R
  std::vector<FpcaBasis> residual;         // basis of U^j
  std::vector<double> residual_variance;   // mean squared remainder per maturity
};

/// A model estimated on a training window that can forecast from any later
/// history of the same panel set (the basis and ARIMA parameters stay fixed).
class FittedModel {
 public:
  virtual ~FittedModel() = default;
  virtual const ModelSpec& spec() const = 0;
  virtual std::vector<Curve> forecast(const PanelSet& history, int h) const = 0;
  /// In-sample fitted curves (n x R) for maturity j; benchmarks have none.
  virtual Matrix fitted(std::size_t j) const = 0;
  virtual std::vector<std::size_t> retained_k() const = 0;
  virtual std::vector<std::size_t> retained_l() const { return {}; }
};

std::unique_ptr<FittedModel> fit_model(const PanelSet& set, const ModelSpec& spec);

/// Fit on all of `set` and forecast h steps past its last row.
ForecastBundle forecast_with(const PanelSet& set, const ModelSpec& spec, int h);

ForecastBundle forecast_univariate(const CurvePanel& panel, const ModelSpec& spec, int h);
ForecastBundle forecast_multivariate(const PanelSet& set, const ModelSpec& spec, int h);
ForecastBundle forecast_multilevel(const PanelSet& set, const ModelSpec& spec, int h);

/// Static or long-run FPCA of `values` per the spec's covariance kind.
/// `negative_tolerance` only matters for the long-run estimate.
FpcaBasis fit_basis(const Matrix& values, const Eigen::VectorXd& weights, const ModelSpec& spec,
                    const ComponentRule& rule, bool allow_degenerate, double negative_tolerance = 1e-8);
ScoreModel fit_score_model(const Matrix& values, const Eigen::VectorXd& weights,
                           const ModelSpec& spec, const ComponentRule& rule, bool allow_degenerate,
                           double negative_tolerance = 1e-8);

MultilevelFit fit_multilevel(const PanelSet& set, const ModelSpec& spec);

/// Share of retained eigenvalue mass carried by the common level for maturity j.
double within_cluster_variability(const MultilevelFit& fit, std::size_t j);

/// Scale used to standardize one maturity before stacking: root mean square of
/// its centered values (1 for a flat panel).
double standardization_scale(const Matrix& values);

}  // namespace ivfts
