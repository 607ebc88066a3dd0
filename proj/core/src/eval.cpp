#include "ivfts/eval.hpp"

#include "ivfts/error.hpp"
#include "ivfts/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>

namespace ivfts {

void BacktestPlan::validate(std::size_t n) const {
  require(initial_train_size >= 30, "backtest needs an initial training window of at least 30 curves");
  require(!horizons.empty(), "backtest needs at least one horizon");
  require(refit_every >= 1, "refit interval must be positive");
  require(!models.empty(), "backtest needs at least one model");
  std::set<int> seen;
  for (int h : horizons) {
    require(h >= 1, "forecast horizons must be positive");
    require(seen.insert(h).second, "duplicate forecast horizon " + std::to_string(h));
  }
  std::set<std::string> ids;
  for (const auto& m : models) require(ids.insert(m.id).second, "duplicate model id '" + m.id + "'");
  const std::size_t needed =
      initial_train_size + static_cast<std::size_t>(*std::max_element(horizons.begin(), horizons.end()));
  if (needed > n)
    throw Error("backtest needs " + std::to_string(needed) + " curves (training window " +
                std::to_string(initial_train_size) + " plus longest horizon) but the sample has " +
                std::to_string(n) + ", short by " + std::to_string(needed - n));
}

std::size_t BacktestPlan::forecast_count(std::size_t n, int h) const {
  const std::size_t last_origin = n - static_cast<std::size_t>(h);
  return last_origin >= initial_train_size ? last_origin - initial_train_size + 1 : 0;
}

std::string to_string(LossMetric metric) { return metric == LossMetric::Mafe ? "mafe" : "msfe"; }

Eigen::VectorXd LossMatrix::column_means() const { return values.colwise().mean().transpose(); }

const ForecastTrack& BacktestResult::track(const std::string& model_id, int h) const {
  for (const auto& t : tracks)
    if (t.model_id == model_id && t.horizon == h) return t;
  throw Error("no forecasts for model '" + model_id + "' at horizon " + std::to_string(h));
}

const LossMatrix& BacktestResult::loss(LossMetric metric, const std::string& maturity, int h) const {
  for (const auto& l : losses)
    if (l.metric == metric && l.maturity == maturity && l.horizon == h) return l;
  throw Error("no " + to_string(metric) + " losses for maturity '" + maturity + "' at horizon " +
              std::to_string(h));
}

BacktestResult run_backtest(const PanelSet& set, const BacktestPlan& plan) {
  const std::size_t n = set.rows();
  plan.validate(n);
  for (const auto& m : plan.models) m.validate();

  const std::size_t models = plan.models.size();
  const std::size_t horizons = plan.horizons.size();
  const std::size_t train = plan.initial_train_size;
  const int shortest = *std::min_element(plan.horizons.begin(), plan.horizons.end());
  const std::size_t last_origin = n - static_cast<std::size_t>(shortest);

  BacktestResult result;
  result.tracks.resize(models * horizons);
  for (std::size_t m = 0; m < models; ++m)
    for (std::size_t k = 0; k < horizons; ++k) {
      auto& track = result.tracks[m * horizons + k];
      track.model_id = plan.models[m].id;
      track.horizon = plan.horizons[k];
      track.bundles.resize(plan.forecast_count(n, track.horizon));
    }

  // One task per (model, refit block). A block fits once on the data up to its
  // first origin and then forecasts from each origin in the block.
  const std::size_t blocks = (last_origin - train) / plan.refit_every + 1;
  parallel_for(models * blocks, [&](std::size_t task) {
    const std::size_t m = task / blocks;
    const std::size_t first = train + (task % blocks) * plan.refit_every;
    const std::size_t stop = std::min(last_origin, first + plan.refit_every - 1);
    const auto fitted = fit_model(set.head(first), plan.models[m]);
    for (std::size_t origin = first; origin <= stop; ++origin) {
      const PanelSet history = set.head(origin);
      for (std::size_t k = 0; k < horizons; ++k) {
        const int h = plan.horizons[k];
        if (origin + static_cast<std::size_t>(h) > n) continue;
        ForecastBundle& bundle = result.tracks[m * horizons + k].bundles[origin - train];
        bundle.model_id = plan.models[m].id;
        bundle.origin_index = origin;
        bundle.horizon = h;
        bundle.forecasts = fitted->forecast(history, h);
        bundle.retained_k = fitted->retained_k();
        bundle.retained_l = fitted->retained_l();
      }
    }
  });

  for (std::size_t k = 0; k < horizons; ++k) {
    const int h = plan.horizons[k];
    const std::size_t count = plan.forecast_count(n, h);
    for (std::size_t j = 0; j < set.size(); ++j) {
      LossMatrix mafe_loss;
      mafe_loss.metric = LossMetric::Mafe;
      mafe_loss.maturity = set[j].maturity();
      mafe_loss.horizon = h;
      mafe_loss.values = Matrix(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(models));
      for (std::size_t r = 0; r < count; ++r)
        mafe_loss.target_dates.push_back(set.dates()[train + r - 1 + static_cast<std::size_t>(h)]);
      for (const auto& spec : plan.models) mafe_loss.model_ids.push_back(spec.id);
      LossMatrix msfe_loss = mafe_loss;
      msfe_loss.metric = LossMetric::Msfe;

      for (std::size_t m = 0; m < models; ++m) {
        const auto& track = result.tracks[m * horizons + k];
        for (std::size_t r = 0; r < count; ++r) {
          const Curve actual = set[j].row(train + r - 1 + static_cast<std::size_t>(h));
          const Curve& forecast = track.bundles[r].forecasts[j];
          const auto row = static_cast<Eigen::Index>(r);
          const auto col = static_cast<Eigen::Index>(m);
          mafe_loss.values(row, col) = mafe(actual, forecast);
          msfe_loss.values(row, col) = msfe(actual, forecast);
        }
      }
      result.losses.push_back(std::move(mafe_loss));
      result.losses.push_back(std::move(msfe_loss));
    }
  }
  return result;
}

namespace {

void check_pair(const Curve& actual, const Curve& forecast) {
  require(actual.size() == forecast.size(), "actual and forecast curves differ in length");
  require(actual.size() > 0, "empty curve");
}

void check_sequences(const std::vector<Curve>& actuals, const std::vector<Curve>& forecasts) {
  require(actuals.size() == forecasts.size(), "actual and forecast sequences differ in length");
  require(!actuals.empty(), "at least one forecast is required");
  for (std::size_t i = 0; i < actuals.size(); ++i) check_pair(actuals[i], forecasts[i]);
  for (const auto& a : actuals)
    require(a.size() == actuals.front().size(), "curves in a sequence differ in length");
}

}  // namespace

double mafe(const Curve& actual, const Curve& forecast) {
  check_pair(actual, forecast);
  return (actual - forecast).cwiseAbs().mean();
}

double msfe(const Curve& actual, const Curve& forecast) {
  check_pair(actual, forecast);
  return (actual - forecast).squaredNorm() / static_cast<double>(actual.size());
}

double mean_mafe(const std::vector<Curve>& actuals, const std::vector<Curve>& forecasts) {
  check_sequences(actuals, forecasts);
  double sum = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) sum += mafe(actuals[i], forecasts[i]);
  return sum / static_cast<double>(actuals.size());
}

double mean_msfe(const std::vector<Curve>& actuals, const std::vector<Curve>& forecasts) {
  check_sequences(actuals, forecasts);
  double sum = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) sum += msfe(actuals[i], forecasts[i]);
  return sum / static_cast<double>(actuals.size());
}

double mme(const std::vector<Curve>& actuals, const std::vector<Curve>& forecasts, MmeFlavor flavor) {
  check_sequences(actuals, forecasts);
  double sum = 0.0;
  for (std::size_t i = 0; i < actuals.size(); ++i) {
    for (Eigen::Index t = 0; t < actuals[i].size(); ++t) {
      const double e = actuals[i][t] - forecasts[i][t];
      if (e == 0.0) continue;
      const bool under = e > 0.0;
      const bool root = (flavor == MmeFlavor::Under) == under;
      sum += root ? std::sqrt(std::abs(e)) : std::abs(e);
    }
  }
  const double cells = static_cast<double>(actuals.size()) * static_cast<double>(actuals.front().size());
  return sum / cells;
}

RSquared r_squared(const CurvePanel& panel, const Matrix& fitted) {
  const Matrix& x = panel.values();
  require(fitted.rows() == x.rows() && fitted.cols() == x.cols(),
          "fitted values do not match the panel dimensions");
  require(panel.rows() >= 2, "R-squared needs at least two curves");
  const Curve mean = column_mean(x);
  RSquared out;
  out.pointwise = Curve(x.cols());
  for (Eigen::Index t = 0; t < x.cols(); ++t) {
    const double total = (x.col(t).array() - mean[t]).square().sum();
    if (!(total > 0.0))
      throw Error("no variance at grid point " + std::to_string(panel.grid().points()[static_cast<std::size_t>(t)]));
    const double resid = (x.col(t) - fitted.col(t)).squaredNorm();
    out.pointwise[t] = 1.0 - resid / total;
  }
  out.total = panel.grid().weights().dot(out.pointwise) / panel.grid().span();
  return out;
}

}  // namespace ivfts
