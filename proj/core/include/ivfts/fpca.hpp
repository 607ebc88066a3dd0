#pragma once

#include "ivfts/fda.hpp"

#include <cstddef>

namespace ivfts {

enum class CovarianceKind { Static, Dynamic };

/// How many principal components to keep: a cumulative-percentage-of-variance
/// threshold or a fixed count.
struct ComponentRule {
  enum class Mode { Cpv, Fixed };
  Mode mode = Mode::Cpv;
  double threshold = 0.99;
  std::size_t count = 0;

  static ComponentRule cpv(double threshold) { return {Mode::Cpv, threshold, 0}; }
  static ComponentRule fixed(std::size_t count) { return {Mode::Fixed, 0.0, count}; }
};

/// Eigenvalues in non-increasing order; rows of `functions` are the matching
/// eigenfunctions sampled on the grid, orthonormal under the quadrature weights.
struct Eigenpairs {
  Eigen::VectorXd values;
  Matrix functions;
};

/// Mean, retained eigenpairs and scores of a (static or long-run) FPCA fit.
struct FpcaBasis {
  Curve mean;
  Eigen::VectorXd eigenvalues;  // retained, length K
  Matrix eigenfunctions;        // K x R
  Matrix scores;                // n x K
  Eigen::VectorXd spectrum;     // every eigenvalue of the decomposed operator
  Eigen::VectorXd weights;      // quadrature weights the basis is orthonormal under
  CovarianceKind kind = CovarianceKind::Static;

  std::size_t components() const { return static_cast<std::size_t>(eigenvalues.size()); }
  /// mean + sum_k scores[k] * phi_k
  Curve curve(const Eigen::VectorXd& component_scores) const;
  /// In-sample fitted curves, n x R.
  Matrix fitted() const;
  /// Scores of arbitrary observations (rows) against this basis.
  Matrix project(const Matrix& values) const;
};

namespace detail {
/// (1/n) sum_j c_j(a) c_{j+lag}(b) over rows of an already centered matrix, lag >= 0.
/// Shared by the static covariance and the autocovariance surfaces so that lag 0
/// of both agrees bit for bit.
Matrix lagged_cross_product(const Matrix& centered, std::size_t lag);
Matrix center_rows(const Matrix& values, const Curve& mean);
}  // namespace detail

Matrix sample_covariance(const Matrix& values);
Matrix sample_covariance(const CurvePanel& panel);

/// Solves the quadrature-weighted problem  C W phi = lambda phi  through the
/// symmetric form W^1/2 C W^1/2. Eigenfunctions satisfy phi_j' W phi_k = delta_jk
/// and carry their largest-magnitude entry with a positive sign.
Eigenpairs eigendecompose(const Matrix& cov, const Eigen::VectorXd& weights);
Eigenpairs eigendecompose(const Matrix& cov, const DeltaGrid& grid);

/// Smallest K whose leading eigenvalues reach `threshold` of the positive mass.
std::size_t select_k_cpv(const Eigen::VectorXd& eigenvalues, double threshold);

/// Builds a basis from a precomputed covariance operator. With
/// `allow_degenerate` a zero operator yields K = 0 instead of an error.
FpcaBasis fpca_from_covariance(const Matrix& values, const Eigen::VectorXd& weights,
                               const Matrix& cov, const ComponentRule& rule, CovarianceKind kind,
                               bool allow_degenerate = false);

FpcaBasis fit_static_fpca(const CurvePanel& panel, const ComponentRule& rule);
FpcaBasis fit_static_fpca(const Matrix& values, const Eigen::VectorXd& weights,
                          const ComponentRule& rule, bool allow_degenerate = false);

}  // namespace ivfts
