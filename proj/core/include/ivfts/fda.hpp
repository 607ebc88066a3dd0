#pragma once

// Discretized functional observations: a smile is a vector of implied
// volatilities sampled on a fixed delta grid, a panel is n such smiles in
// date order, and a panel set aligns several maturities on the same dates.

#include <Eigen/Dense>

#include <cstddef>
#include <string>
#include <vector>

namespace ivfts {

using Curve = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Ordered abscissae with trapezoid quadrature weights.
class DeltaGrid {
 public:
  explicit DeltaGrid(std::vector<double> points);

  std::size_t size() const { return points_.size(); }
  const std::vector<double>& points() const { return points_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  double span() const { return points_.back() - points_.front(); }

  friend bool operator==(const DeltaGrid& a, const DeltaGrid& b) { return a.points_ == b.points_; }

 private:
  std::vector<double> points_;
  Eigen::VectorXd weights_;
};

/// Trapezoid weights for strictly increasing abscissae; they sum to the span.
Eigen::VectorXd trapezoid_weights(const std::vector<double>& points);

/// n curves (rows) for one maturity on a common grid.
class CurvePanel {
 public:
  CurvePanel(DeltaGrid grid, std::vector<std::string> dates, Matrix values, std::string maturity);
  /// Dates default to zero-padded ordinal labels.
  CurvePanel(DeltaGrid grid, Matrix values, std::string maturity = "");

  const DeltaGrid& grid() const { return grid_; }
  const std::vector<std::string>& dates() const { return dates_; }
  const Matrix& values() const { return values_; }
  const std::string& maturity() const { return maturity_; }

  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t points() const { return grid_.size(); }
  bool empty() const { return values_.rows() == 0; }
  Curve row(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }
  const Curve last() const;

  /// First `count` observations, as an expanding-window origin sees them.
  CurvePanel head(std::size_t count) const;

 private:
  DeltaGrid grid_;
  std::vector<std::string> dates_;
  Matrix values_;
  std::string maturity_;
};

/// Aligned panels sharing grid and dates, one per maturity.
class PanelSet {
 public:
  explicit PanelSet(std::vector<CurvePanel> panels);

  std::size_t size() const { return panels_.size(); }
  std::size_t rows() const { return panels_.front().rows(); }
  const CurvePanel& operator[](std::size_t j) const { return panels_[j]; }
  const std::vector<CurvePanel>& panels() const { return panels_; }
  const DeltaGrid& grid() const { return panels_.front().grid(); }
  const std::vector<std::string>& dates() const { return panels_.front().dates(); }
  std::vector<std::string> maturities() const;

  PanelSet head(std::size_t count) const;

  auto begin() const { return panels_.begin(); }
  auto end() const { return panels_.end(); }

 private:
  std::vector<CurvePanel> panels_;
};

/// Pointwise mean of the rows of an n x R matrix.
Curve column_mean(const Matrix& values);

Curve cross_sectional_mean(const CurvePanel& panel);

/// Quadrature inner product sum_k w_k f_k g_k.
double inner_product(const Curve& f, const Curve& g, const Eigen::VectorXd& weights);
double inner_product(const Curve& f, const Curve& g, const DeltaGrid& grid);

/// Elementwise average of the maturities in a set.
CurvePanel average_panel(const PanelSet& set);

}  // namespace ivfts
