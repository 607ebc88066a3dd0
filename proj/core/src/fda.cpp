#include "ivfts/fda.hpp"

#include "ivfts/error.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

namespace ivfts {

Eigen::VectorXd trapezoid_weights(const std::vector<double>& points) {
  const auto r = static_cast<Eigen::Index>(points.size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(r);
  for (Eigen::Index k = 0; k + 1 < r; ++k) {
    const double half = 0.5 * (points[k + 1] - points[k]);
    w[k] += half;
    w[k + 1] += half;
  }
  return w;
}

DeltaGrid::DeltaGrid(std::vector<double> points) : points_(std::move(points)) {
  require(points_.size() >= 2, "delta grid needs at least two points");
  for (std::size_t k = 0; k < points_.size(); ++k) {
    require(std::isfinite(points_[k]), "delta grid points must be finite");
    if (k > 0) require(points_[k] > points_[k - 1], "delta grid points must be strictly increasing");
  }
  weights_ = trapezoid_weights(points_);
}

namespace {

std::vector<std::string> ordinal_dates(Eigen::Index n) {
  std::vector<std::string> dates;
  dates.reserve(static_cast<std::size_t>(n));
  char buf[32];
  for (Eigen::Index i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "t%08ld", static_cast<long>(i));
    dates.emplace_back(buf);
  }
  return dates;
}

}  // namespace

CurvePanel::CurvePanel(DeltaGrid grid, std::vector<std::string> dates, Matrix values,
                       std::string maturity)
    : grid_(std::move(grid)),
      dates_(std::move(dates)),
      values_(std::move(values)),
      maturity_(std::move(maturity)) {
  require(static_cast<std::size_t>(values_.cols()) == grid_.size(),
          "panel columns do not match the delta grid");
  require(static_cast<std::size_t>(values_.rows()) == dates_.size(),
          "panel rows do not match the date labels");
  for (std::size_t i = 1; i < dates_.size(); ++i) {
    require(dates_[i - 1] < dates_[i], "panel dates must be strictly increasing: '" + dates_[i - 1] +
                                           "' then '" + dates_[i] + "'");
  }
  require(values_.allFinite(), "panel contains non-finite values");
}

CurvePanel::CurvePanel(DeltaGrid grid, Matrix values, std::string maturity)
    : CurvePanel(std::move(grid), ordinal_dates(values.rows()), Matrix(values), std::move(maturity)) {}

const Curve CurvePanel::last() const {
  require(!empty(), "empty panel");
  return row(rows() - 1);
}

CurvePanel CurvePanel::head(std::size_t count) const {
  require(count <= rows(), "panel head beyond available rows");
  return CurvePanel(grid_, std::vector<std::string>(dates_.begin(), dates_.begin() + count),
                    values_.topRows(static_cast<Eigen::Index>(count)), maturity_);
}

PanelSet::PanelSet(std::vector<CurvePanel> panels) : panels_(std::move(panels)) {
  require(!panels_.empty(), "panel set needs at least one maturity");
  for (const auto& p : panels_) {
    require(p.grid() == panels_.front().grid(), "panels in a set must share the delta grid");
    require(p.dates() == panels_.front().dates(), "panels in a set must share dates");
  }
}

std::vector<std::string> PanelSet::maturities() const {
  std::vector<std::string> out;
  for (const auto& p : panels_) out.push_back(p.maturity());
  return out;
}

PanelSet PanelSet::head(std::size_t count) const {
  std::vector<CurvePanel> out;
  out.reserve(panels_.size());
  for (const auto& p : panels_) out.push_back(p.head(count));
  return PanelSet(std::move(out));
}

Curve column_mean(const Matrix& values) {
  require(values.rows() > 0, "empty panel");
  Curve mean = Curve::Zero(values.cols());
  for (Eigen::Index i = 0; i < values.rows(); ++i) mean += values.row(i).transpose();
  return mean / static_cast<double>(values.rows());
}

Curve cross_sectional_mean(const CurvePanel& panel) { return column_mean(panel.values()); }

double inner_product(const Curve& f, const Curve& g, const Eigen::VectorXd& weights) {
  require(f.size() == g.size() && f.size() == weights.size(),
          "inner product dimension mismatch");
  double acc = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) acc += weights[k] * f[k] * g[k];
  return acc;
}

double inner_product(const Curve& f, const Curve& g, const DeltaGrid& grid) {
  return inner_product(f, g, grid.weights());
}

CurvePanel average_panel(const PanelSet& set) {
  Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(set.rows()),
                            static_cast<Eigen::Index>(set.grid().size()));
  for (const auto& p : set) sum += p.values();
  return CurvePanel(set.grid(), set.dates(), sum / static_cast<double>(set.size()), "average");
}

}  // namespace ivfts
