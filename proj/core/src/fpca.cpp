#include "ivfts/fpca.hpp"

#include "ivfts/error.hpp"

#include <algorithm>
#include <cmath>

namespace ivfts {

namespace detail {

Matrix center_rows(const Matrix& values, const Curve& mean) {
  return values.rowwise() - mean.transpose();
}

Matrix lagged_cross_product(const Matrix& centered, std::size_t lag) {
  const Eigen::Index n = centered.rows();
  const Eigen::Index r = centered.cols();
  const auto l = static_cast<Eigen::Index>(lag);
  Matrix out = Matrix::Zero(r, r);
  for (Eigen::Index a = 0; a < r; ++a) {
    for (Eigen::Index b = 0; b < r; ++b) {
      double acc = 0.0;
      for (Eigen::Index j = 0; j + l < n; ++j) acc += centered(j, a) * centered(j + l, b);
      out(a, b) = acc / static_cast<double>(n);
    }
  }
  return out;
}

}  // namespace detail

Curve FpcaBasis::curve(const Eigen::VectorXd& component_scores) const {
  require(component_scores.size() == eigenvalues.size(), "score vector does not match basis size");
  Curve out = mean;
  for (Eigen::Index k = 0; k < component_scores.size(); ++k)
    out += component_scores[k] * eigenfunctions.row(k).transpose();
  return out;
}

Matrix FpcaBasis::fitted() const {
  Matrix out = scores * eigenfunctions;
  out.rowwise() += mean.transpose();
  return out;
}

Matrix FpcaBasis::project(const Matrix& values) const {
  require(values.cols() == mean.size(), "projection dimension mismatch");
  const Matrix centered = detail::center_rows(values, mean);
  return centered * weights.asDiagonal() * eigenfunctions.transpose();
}

Matrix sample_covariance(const Matrix& values) {
  require(values.rows() >= 2, "insufficient observations");
  return detail::lagged_cross_product(detail::center_rows(values, column_mean(values)), 0);
}

Matrix sample_covariance(const CurvePanel& panel) { return sample_covariance(panel.values()); }

Eigenpairs eigendecompose(const Matrix& cov, const Eigen::VectorXd& weights) {
  require(cov.rows() == cov.cols() && cov.rows() == weights.size(),
          "covariance and quadrature weights disagree in dimension");
  require(cov.allFinite(), "covariance contains non-finite values");
  const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
  require((cov - cov.transpose()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          "covariance is not symmetric");
  require((weights.array() > 0.0).all(), "quadrature weights must be positive");

  const Eigen::VectorXd root = weights.cwiseSqrt();
  Matrix sym = root.asDiagonal() * cov * root.asDiagonal();
  sym = 0.5 * (sym + sym.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym);
  require(solver.info() == Eigen::Success, "eigendecomposition failed");

  const Eigen::Index r = cov.rows();
  Eigenpairs out{Eigen::VectorXd(r), Matrix(r, r)};
  for (Eigen::Index k = 0; k < r; ++k) {
    const Eigen::Index src = r - 1 - k;  // solver sorts ascending
    out.values[k] = std::max(0.0, solver.eigenvalues()[src]);
    Curve phi = solver.eigenvectors().col(src).cwiseQuotient(root);
    Eigen::Index pivot = 0;
    phi.cwiseAbs().maxCoeff(&pivot);
    if (phi[pivot] < 0.0) phi = -phi;
    out.functions.row(k) = phi.transpose();
  }
  return out;
}

Eigenpairs eigendecompose(const Matrix& cov, const DeltaGrid& grid) {
  return eigendecompose(cov, grid.weights());
}

namespace {

constexpr double kRelativeZero = 1e-12;

double positive_mass(const Eigen::VectorXd& eigenvalues) {
  if (eigenvalues.size() == 0 || !(eigenvalues[0] > 0.0)) return 0.0;
  const double floor = kRelativeZero * eigenvalues[0];
  double total = 0.0;
  for (double v : eigenvalues)
    if (v > floor) total += v;
  return total;
}

}  // namespace

std::size_t select_k_cpv(const Eigen::VectorXd& eigenvalues, double threshold) {
  require(threshold > 0.0 && threshold <= 1.0, "CPV threshold must lie in (0, 1]");
  const double total = positive_mass(eigenvalues);
  if (total <= 0.0) throw Error("degenerate covariance");
  const double floor = kRelativeZero * eigenvalues[0];
  double cumulative = 0.0;
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (!(eigenvalues[i] > floor)) break;
    cumulative += eigenvalues[i];
    k = static_cast<std::size_t>(i) + 1;
    if (cumulative / total >= threshold - 1e-12) return k;
  }
  return k;
}

FpcaBasis fpca_from_covariance(const Matrix& values, const Eigen::VectorXd& weights,
                               const Matrix& cov, const ComponentRule& rule, CovarianceKind kind,
                               bool allow_degenerate) {
  const auto n = static_cast<std::size_t>(values.rows());
  require(n >= 2, "insufficient observations");
  const Eigenpairs pairs = eigendecompose(cov, weights);
  const auto r = static_cast<std::size_t>(pairs.values.size());

  std::size_t k = 0;
  if (rule.mode == ComponentRule::Mode::Fixed) {
    require(rule.count >= 1, "fixed component count must be positive");
    require(rule.count < n, "number of components must be smaller than the sample size");
    k = std::min(rule.count, r);
  } else if (positive_mass(pairs.values) > 0.0 || !allow_degenerate) {
    k = select_k_cpv(pairs.values, rule.threshold);
  }

  FpcaBasis basis;
  basis.mean = column_mean(values);
  basis.spectrum = pairs.values;
  basis.eigenvalues = pairs.values.head(static_cast<Eigen::Index>(k));
  basis.eigenfunctions = pairs.functions.topRows(static_cast<Eigen::Index>(k));
  basis.weights = weights;
  basis.kind = kind;
  basis.scores = basis.project(values);
  return basis;
}

FpcaBasis fit_static_fpca(const Matrix& values, const Eigen::VectorXd& weights,
                          const ComponentRule& rule, bool allow_degenerate) {
  return fpca_from_covariance(values, weights, sample_covariance(values), rule,
                              CovarianceKind::Static, allow_degenerate);
}

FpcaBasis fit_static_fpca(const CurvePanel& panel, const ComponentRule& rule) {
  return fit_static_fpca(panel.values(), panel.grid().weights(), rule);
}

}  // namespace ivfts
