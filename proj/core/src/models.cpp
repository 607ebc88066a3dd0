#include "ivfts/models.hpp"

#include "ivfts/error.hpp"
#include "ivfts/parallel.hpp"
#include "ivfts/score_forecast.hpp"

#include <cctype>
#include <cmath>
#include <string>
#include <utility>

namespace ivfts {

// ---------------------------------------------------------------------------
// ModelSpec

void ModelSpec::validate() const {
  const bool multilevel = family == ModelFamily::Multilevel;
  require(l_rule.has_value() == multilevel,
          "model '" + id + "': a second-level component rule belongs to multilevel models only");
  auto check_rule = [&](const ComponentRule& rule) {
    if (rule.mode == ComponentRule::Mode::Cpv)
      require(rule.threshold > 0.0 && rule.threshold <= 1.0,
              "model '" + id + "': CPV threshold must lie in (0, 1]");
    else
      require(rule.count >= 1, "model '" + id + "': fixed component count must be positive");
  };
  check_rule(k_rule);
  if (l_rule) check_rule(*l_rule);
  require(kernel.support_m > 0.0, "model '" + id + "': kernel support must be positive");
}

ModelSpec ModelSpec::univariate(CovarianceKind kind, ComponentRule k_rule) {
  ModelSpec s;
  s.family = ModelFamily::Univariate;
  s.covariance = kind;
  s.k_rule = k_rule;
  s.id = std::string(kind == CovarianceKind::Dynamic ? "D" : "") + "FTS";
  return s;
}

ModelSpec ModelSpec::multivariate(CovarianceKind kind, ComponentRule k_rule) {
  ModelSpec s = univariate(kind, k_rule);
  s.family = ModelFamily::Multivariate;
  s.id = std::string(kind == CovarianceKind::Dynamic ? "D" : "") + "MFTS";
  return s;
}

ModelSpec ModelSpec::multilevel(CovarianceKind kind, ComponentRule k_rule, ComponentRule l_rule) {
  ModelSpec s = univariate(kind, k_rule);
  s.family = ModelFamily::Multilevel;
  s.l_rule = l_rule;
  s.id = std::string(kind == CovarianceKind::Dynamic ? "D" : "") + "MLFTS";
  return s;
}

ModelSpec ModelSpec::parse(std::string_view text) {
  std::string id(text);
  for (auto& c : id) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  ModelSpec s;
  s.id = id;
  if (id == "RW") {
    s.family = ModelFamily::RandomWalk;
    return s;
  }
  if (id == "AR1") {
    s.family = ModelFamily::Ar1;
    return s;
  }

  const auto dash = id.find('-');
  require(dash != std::string::npos, "unknown model identifier '" + id + "'");
  std::string head = id.substr(0, dash);
  const std::string rule = id.substr(dash + 1);
  CovarianceKind kind = CovarianceKind::Static;
  if (head.size() > 3 && head.front() == 'D') {
    kind = CovarianceKind::Dynamic;
    head.erase(0, 1);
  }

  std::optional<std::size_t> fixed;
  if (rule == "CPV") {
  } else if (rule.size() > 1 && rule.front() == 'K') {
    try {
      fixed = static_cast<std::size_t>(std::stoul(rule.substr(1)));
    } catch (const std::exception&) {
      throw Error("unknown component rule in model identifier '" + id + "'");
    }
  } else {
    throw Error("unknown component rule in model identifier '" + id + "'");
  }

  if (head == "FTS" || head == "MFTS") {
    const ComponentRule k = fixed ? ComponentRule::fixed(*fixed) : ComponentRule::cpv(0.99);
    s = head == "FTS" ? univariate(kind, k) : multivariate(kind, k);
  } else if (head == "MLFTS") {
    const ComponentRule k = fixed ? ComponentRule::fixed(*fixed) : ComponentRule::cpv(0.9);
    s = multilevel(kind, k, k);
  } else {
    throw Error("unknown model family in identifier '" + id + "'");
  }
  s.id = id;
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Shared building blocks

FpcaBasis fit_basis(const Matrix& values, const Eigen::VectorXd& weights, const ModelSpec& spec,
                    const ComponentRule& rule, bool allow_degenerate, double negative_tolerance) {
  if (spec.covariance == CovarianceKind::Dynamic)
    return fit_dynamic_fpca(values, weights, spec.kernel, spec.bandwidth, rule, allow_degenerate,
                            negative_tolerance);
  return fit_static_fpca(values, weights, rule, allow_degenerate);
}

ScoreModel fit_score_model(const Matrix& values, const Eigen::VectorXd& weights,
                           const ModelSpec& spec, const ComponentRule& rule, bool allow_degenerate,
                           double negative_tolerance) {
  ScoreModel model;
  model.basis = fit_basis(values, weights, spec, rule, allow_degenerate, negative_tolerance);
  const std::size_t k = model.basis.components();
  model.score_fits.resize(k);
  parallel_for(k, [&](std::size_t c) {
    const Eigen::VectorXd column = model.basis.scores.col(static_cast<Eigen::Index>(c));
    ScoreSeries series{{column.data(), column.data() + column.size()}, "score " + std::to_string(c + 1)};
    model.score_fits[c] = fit_auto_arima(series, spec.arima);
  });
  return model;
}

Curve ScoreModel::forecast(const Matrix& values, int h) const {
  require(h >= 1, "forecast horizon must be positive");
  const std::size_t k = basis.components();
  if (k == 0) return basis.mean;
  const Matrix scores = basis.project(values);
  Eigen::VectorXd ahead(static_cast<Eigen::Index>(k));
  for (std::size_t c = 0; c < k; ++c) {
    const Eigen::VectorXd column = scores.col(static_cast<Eigen::Index>(c));
    ScoreSeries series{{column.data(), column.data() + column.size()}, {}};
    ahead[static_cast<Eigen::Index>(c)] = forecast_scores(score_fits[c], series, h).back();
  }
  return basis.curve(ahead);
}

double standardization_scale(const Matrix& values) {
  const Matrix centered = detail::center_rows(values, column_mean(values));
  const double rms = std::sqrt(centered.squaredNorm() / static_cast<double>(centered.size()));
  return rms > 0.0 ? rms : 1.0;
}

namespace {

// Largest negative long-run eigenvalue, relative to the trace, that the
// stacked multivariate fit clamps instead of rejecting.
constexpr double kStackedNegativeTolerance = 1e-3;

Matrix maturity_average(const PanelSet& set) {
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(set.rows()),
                            static_cast<Eigen::Index>(set.grid().size()));
  for (const auto& p : set) sum += p.values();
  return sum / static_cast<double>(set.size());
}

// ---------------------------------------------------------------------------

class UnivariateModel final : public FittedModel {
 public:
  UnivariateModel(const PanelSet& set, ModelSpec spec) : spec_(std::move(spec)) {
    models_.reserve(set.size());
    for (const auto& panel : set)
      models_.push_back(
          fit_score_model(panel.values(), panel.grid().weights(), spec_, spec_.k_rule, true));
  }

  const ModelSpec& spec() const override { return spec_; }

  std::vector<Curve> forecast(const PanelSet& history, int h) const override {
    require(history.size() == models_.size(), "history has a different number of maturities");
    std::vector<Curve> out;
    for (std::size_t j = 0; j < models_.size(); ++j) out.push_back(models_[j].forecast(history[j].values(), h));
    return out;
  }

  Matrix fitted(std::size_t j) const override { return models_.at(j).basis.fitted(); }

  std::vector<std::size_t> retained_k() const override {
    std::vector<std::size_t> out;
    for (const auto& m : models_) out.push_back(m.basis.components());
    return out;
  }

 private:
  ModelSpec spec_;
  std::vector<ScoreModel> models_;
};

class MultivariateModel final : public FittedModel {
 public:
  MultivariateModel(const PanelSet& set, ModelSpec spec) : spec_(std::move(spec)) {
    omega_ = set.size();
    points_ = static_cast<Eigen::Index>(set.grid().size());
    // A single maturity has nothing to balance against, so it is left unscaled.
    for (const auto& panel : set)
      scales_.push_back(omega_ == 1 ? 1.0 : standardization_scale(panel.values()));
    weights_ = Eigen::VectorXd(points_ * static_cast<Eigen::Index>(omega_));
    for (std::size_t j = 0; j < omega_; ++j)
      weights_.segment(static_cast<Eigen::Index>(j) * points_, points_) = set.grid().weights();

    // The stacked covariance of smooth curves is nearly singular, and a flat-top
    // long-run estimate can dip slightly below zero along directions that carry
    // almost no variance. Those are clamped rather than rejected.
    const double tolerance = omega_ == 1 ? 1e-8 : kStackedNegativeTolerance;
    ComponentRule rule = spec_.k_rule;
    const Matrix stacked = stack(set);
    if (omega_ > 1 && rule.mode == ComponentRule::Mode::Fixed) {
      const FpcaBasis probe = fit_basis(stacked, weights_, spec_, ComponentRule::fixed(1), true, tolerance);
      std::size_t rank = 0;
      for (double v : probe.spectrum)
        if (v > 1e-12 * probe.spectrum[0]) ++rank;
      rule.count = std::max<std::size_t>(1, std::min(rule.count, rank));
    }
    model_ = fit_score_model(stacked, weights_, spec_, rule, true, tolerance);
  }

  const ModelSpec& spec() const override { return spec_; }

  std::vector<Curve> forecast(const PanelSet& history, int h) const override {
    require(history.size() == omega_, "history has a different number of maturities");
    const Curve joint = model_.forecast(stack(history), h);
    std::vector<Curve> out;
    for (std::size_t j = 0; j < omega_; ++j)
      out.push_back(scales_[j] * joint.segment(static_cast<Eigen::Index>(j) * points_, points_));
    return out;
  }

  Matrix fitted(std::size_t j) const override {
    const Matrix joint = model_.basis.fitted();
    return scales_.at(j) * joint.middleCols(static_cast<Eigen::Index>(j) * points_, points_);
  }

  std::vector<std::size_t> retained_k() const override {
    return std::vector<std::size_t>(omega_, model_.basis.components());
  }

 private:
  Matrix stack(const PanelSet& set) const {
    Matrix out(static_cast<Eigen::Index>(set.rows()), points_ * static_cast<Eigen::Index>(omega_));
    for (std::size_t j = 0; j < omega_; ++j)
      out.middleCols(static_cast<Eigen::Index>(j) * points_, points_) = set[j].values() / scales_[j];
    return out;
  }

  ModelSpec spec_;
  std::size_t omega_ = 0;
  Eigen::Index points_ = 0;
  std::vector<double> scales_;
  Eigen::VectorXd weights_;
  ScoreModel model_;
};

class MultilevelModel final : public FittedModel {
 public:
  MultilevelModel(const PanelSet& set, ModelSpec spec) : spec_(std::move(spec)) {
    const Eigen::VectorXd& w = set.grid().weights();
    common_ = fit_score_model(maturity_average(set), w, spec_, spec_.k_rule, true);
    const Matrix common_part = common_.basis.scores * common_.basis.eigenfunctions;
    for (const auto& panel : set) {
      const Curve mean = column_mean(panel.values());
      means_.push_back(mean);
      deviations_.push_back(mean - common_.basis.mean);
      const Matrix remainder = detail::center_rows(panel.values(), mean) - common_part;
      residual_.push_back(fit_score_model(remainder, w, spec_, *spec_.l_rule, true));
    }
  }

  const ModelSpec& spec() const override { return spec_; }

  std::vector<Curve> forecast(const PanelSet& history, int h) const override {
    require(history.size() == residual_.size(), "history has a different number of maturities");
    const Matrix average = maturity_average(history);
    const Curve common_curve = common_.forecast(average, h);
    const Matrix common_part = common_.basis.project(average) * common_.basis.eigenfunctions;
    std::vector<Curve> out;
    for (std::size_t j = 0; j < residual_.size(); ++j) {
      const Matrix remainder = detail::center_rows(history[j].values(), means_[j]) - common_part;
      out.push_back(deviations_[j] + common_curve + residual_[j].forecast(remainder, h));
    }
    return out;
  }

  Matrix fitted(std::size_t j) const override {
    Matrix out = common_.basis.fitted() + residual_.at(j).basis.fitted();
    out.rowwise() += deviations_[j].transpose();
    return out;
  }

  std::vector<std::size_t> retained_k() const override {
    return std::vector<std::size_t>(residual_.size(), common_.basis.components());
  }
  std::vector<std::size_t> retained_l() const override {
    std::vector<std::size_t> out;
    for (const auto& r : residual_) out.push_back(r.basis.components());
    return out;
  }

  MultilevelFit decomposition(const PanelSet& set) const {
    MultilevelFit fit;
    fit.grand_mean = common_.basis.mean;
    fit.deviations = deviations_;
    fit.common = common_.basis;
    for (std::size_t j = 0; j < residual_.size(); ++j) {
      fit.residual.push_back(residual_[j].basis);
      const Matrix remainder = detail::center_rows(set[j].values(), means_[j]) -
                               common_.basis.scores * common_.basis.eigenfunctions;
      const Matrix left = remainder - residual_[j].basis.fitted();
      fit.residual_variance.push_back(left.squaredNorm() / static_cast<double>(left.size()));
    }
    return fit;
  }

 private:
  ModelSpec spec_;
  ScoreModel common_;
  std::vector<Curve> means_;
  std::vector<Curve> deviations_;
  std::vector<ScoreModel> residual_;
};

class BenchmarkModel final : public FittedModel {
 public:
  BenchmarkModel(const PanelSet& set, ModelSpec spec) : spec_(std::move(spec)) {
    if (spec_.family == ModelFamily::Ar1) {
      for (const auto& panel : set) {
        require(panel.rows() >= 10, "AR(1) benchmark needs at least 10 observations");
        std::vector<Ar1Coefficients> coefs;
        for (Eigen::Index k = 0; k < panel.values().cols(); ++k) {
          const Eigen::VectorXd column = panel.values().col(k);
          coefs.push_back(fit_ar1(column));
        }
        coefficients_.push_back(std::move(coefs));
      }
    }
  }

  const ModelSpec& spec() const override { return spec_; }

  std::vector<Curve> forecast(const PanelSet& history, int h) const override {
    std::vector<Curve> out;
    for (std::size_t j = 0; j < history.size(); ++j) {
      Curve last = rw_curve_forecast(history[j], h);
      if (spec_.family == ModelFamily::Ar1) {
        for (Eigen::Index k = 0; k < last.size(); ++k)
          last[k] = iterate_ar1(coefficients_.at(j)[static_cast<std::size_t>(k)], last[k], h);
      }
      out.push_back(std::move(last));
    }
    return out;
  }

  Matrix fitted(std::size_t) const override {
    throw Error("benchmark model '" + spec_.id + "' has no in-sample fit");
  }

  std::vector<std::size_t> retained_k() const override { return {}; }

 private:
  ModelSpec spec_;
  std::vector<std::vector<Ar1Coefficients>> coefficients_;
};

}  // namespace

// ---------------------------------------------------------------------------

std::unique_ptr<FittedModel> fit_model(const PanelSet& set, const ModelSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case ModelFamily::Univariate:
      return std::make_unique<UnivariateModel>(set, spec);
    case ModelFamily::Multivariate:
      return std::make_unique<MultivariateModel>(set, spec);
    case ModelFamily::Multilevel:
      return std::make_unique<MultilevelModel>(set, spec);
    case ModelFamily::RandomWalk:
    case ModelFamily::Ar1:
      return std::make_unique<BenchmarkModel>(set, spec);
  }
  throw Error("unknown model family");
}

ForecastBundle forecast_with(const PanelSet& set, const ModelSpec& spec, int h) {
  require(h >= 1, "forecast horizon must be positive");
  const auto model = fit_model(set, spec);
  ForecastBundle bundle;
  bundle.model_id = spec.id;
  bundle.origin_index = set.rows();
  bundle.horizon = h;
  bundle.forecasts = model->forecast(set, h);
  bundle.retained_k = model->retained_k();
  bundle.retained_l = model->retained_l();
  return bundle;
}

ForecastBundle forecast_univariate(const CurvePanel& panel, const ModelSpec& spec, int h) {
  require(spec.family == ModelFamily::Univariate, "forecast_univariate needs a univariate spec");
  return forecast_with(PanelSet({panel}), spec, h);
}

ForecastBundle forecast_multivariate(const PanelSet& set, const ModelSpec& spec, int h) {
  require(spec.family == ModelFamily::Multivariate, "forecast_multivariate needs a multivariate spec");
  return forecast_with(set, spec, h);
}

ForecastBundle forecast_multilevel(const PanelSet& set, const ModelSpec& spec, int h) {
  require(spec.family == ModelFamily::Multilevel, "forecast_multilevel needs a multilevel spec");
  return forecast_with(set, spec, h);
}

MultilevelFit fit_multilevel(const PanelSet& set, const ModelSpec& spec) {
  require(spec.family == ModelFamily::Multilevel, "fit_multilevel needs a multilevel spec");
  spec.validate();
  return MultilevelModel(set, spec).decomposition(set);
}

double within_cluster_variability(const MultilevelFit& fit, std::size_t j) {
  require(j < fit.residual.size(), "maturity index out of range");
  const double common = fit.common.eigenvalues.sum();
  const double residual = fit.residual[j].eigenvalues.sum();
  const double total = common + residual;
  if (!(total > 0.0)) throw Error("degenerate fit");
  return common / total;
}

}  // namespace ivfts
