#include "fixtures.hpp"

#include "ivfts/random.hpp"

#include <cmath>
#include <random>

namespace fixture {

DeltaGrid delta_grid() { return DeltaGrid({10, 25, 50, 75, 90}); }

namespace {

Eigen::VectorXd mean_curve(const DeltaGrid& grid) {
  Eigen::VectorXd mu(static_cast<Eigen::Index>(grid.size()));
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double x = (grid.points()[k] - 50.0) / 40.0;
    mu[static_cast<Eigen::Index>(k)] = 10.0 + 1.5 * x * x - 0.5 * x;
  }
  return mu;
}

// Weighted-orthonormal polynomial basis on the grid (Gram-Schmidt).
Matrix orthonormal_basis(const DeltaGrid& grid, std::size_t count) {
  const auto r = static_cast<Eigen::Index>(grid.size());
  Matrix b(static_cast<Eigen::Index>(count), r);
  const Eigen::VectorXd& w = grid.weights();
  for (std::size_t k = 0; k < count; ++k) {
    Eigen::VectorXd v(r);
    for (Eigen::Index t = 0; t < r; ++t) v[t] = std::pow((grid.points()[static_cast<std::size_t>(t)] - 50.0) / 40.0, static_cast<double>(k));
    for (std::size_t p = 0; p < k; ++p) {
      const Eigen::VectorXd prev = b.row(static_cast<Eigen::Index>(p)).transpose();
      v -= (v.cwiseProduct(w).dot(prev)) * prev;
    }
    v /= std::sqrt(v.cwiseProduct(w).dot(v));
    b.row(static_cast<Eigen::Index>(k)) = v.transpose();
  }
  return b;
}

}  // namespace

CurvePanel random_panel(std::size_t n, std::uint64_t seed, const DeltaGrid& grid) {
  ivfts::Rng rng(seed);
  std::normal_distribution<double> z;
  const auto r = static_cast<Eigen::Index>(grid.size());
  const Matrix basis = orthonormal_basis(grid, grid.size());
  Matrix x(static_cast<Eigen::Index>(n), r);
  const Eigen::VectorXd mu = mean_curve(grid);
  for (std::size_t i = 0; i < n; ++i) {
    Eigen::VectorXd row = mu;
    for (Eigen::Index k = 0; k < basis.rows(); ++k)
      row += (3.0 / (1.0 + 1.7 * static_cast<double>(k))) * z(rng) * basis.row(k).transpose();
    x.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return CurvePanel(grid, x, "1M");
}

CurvePanel iid_panel(std::size_t n, std::uint64_t seed) { return break_panel(n, 0.0, seed); }

CurvePanel break_panel(std::size_t n, double shift_sd, std::uint64_t seed) {
  const DeltaGrid grid = delta_grid();
  ivfts::Rng rng(seed);
  std::normal_distribution<double> z;
  const Eigen::VectorXd mu = mean_curve(grid);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
  for (std::size_t i = 0; i < n; ++i)
    for (Eigen::Index t = 0; t < x.cols(); ++t)
      x(static_cast<Eigen::Index>(i), t) = mu[t] + z(rng) + (i >= n / 2 ? shift_sd : 0.0);
  return CurvePanel(grid, x, "1M");
}

Eigen::VectorXd unit_loading(const DeltaGrid& grid) {
  return orthonormal_basis(grid, 2).row(1).transpose() * 0.6 + orthonormal_basis(grid, 1).row(0).transpose() * 0.8;
}

CurvePanel ma1_panel(std::size_t n, double theta, double sigma, std::uint64_t seed) {
  const DeltaGrid grid = delta_grid();
  ivfts::Rng rng(seed);
  std::normal_distribution<double> z(0.0, sigma);
  const Eigen::VectorXd phi = unit_loading(grid);
  const Eigen::VectorXd mu = mean_curve(grid);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
  double prev = z(rng);
  for (std::size_t i = 0; i < n; ++i) {
    const double e = z(rng);
    x.row(static_cast<Eigen::Index>(i)) = (mu + (e + theta * prev) * phi).transpose();
    prev = e;
  }
  return CurvePanel(grid, x, "1M");
}

CurvePanel rank_one_ar1_panel(std::size_t n, double phi_ar, double beta0, Eigen::VectorXd* next) {
  const DeltaGrid grid = delta_grid();
  const Eigen::VectorXd phi = unit_loading(grid);
  const Eigen::VectorXd mu = mean_curve(grid);
  Matrix x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
  double beta = beta0;
  for (std::size_t i = 0; i < n; ++i) {
    x.row(static_cast<Eigen::Index>(i)) = (mu + beta * phi).transpose();
    beta *= phi_ar;
  }
  if (next) *next = mu + beta * phi;
  return CurvePanel(grid, x, "1M");
}

PanelSet multilevel_set(std::size_t n, double common_scale, double residual_scale, std::uint64_t seed,
                        std::vector<double>* ratio) {
  const DeltaGrid grid = delta_grid();
  const std::size_t omega = 3;
  const Matrix basis = orthonormal_basis(grid, 4);  // rows 0-1 common, rows 2-3 residual
  ivfts::Rng rng(seed);
  std::normal_distribution<double> z;
  const Eigen::VectorXd mu = mean_curve(grid);
  const auto r = static_cast<Eigen::Index>(grid.size());
  const auto rows = static_cast<Eigen::Index>(n);

  Matrix common = Matrix::Zero(rows, r);
  double a1 = 0, a2 = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    a1 = 0.9 * a1 + common_scale * z(rng);
    a2 = 0.5 * a2 + 0.5 * common_scale * z(rng);
    common.row(i) = a1 * basis.row(0) + a2 * basis.row(1);
  }
  std::vector<Matrix> raw(omega, Matrix::Zero(rows, r));
  for (auto& v : raw) {
    double g1 = 0, g2 = 0;
    for (Eigen::Index i = 0; i < rows; ++i) {
      g1 = 0.7 * g1 + residual_scale * z(rng);
      g2 = 0.3 * g2 + 0.6 * residual_scale * z(rng);
      v.row(i) = g1 * basis.row(2) + g2 * basis.row(3);
    }
  }
  Matrix avg = Matrix::Zero(rows, r);
  for (const auto& v : raw) avg += v / static_cast<double>(omega);

  auto integrated_variance = [&](const Matrix& m) {
    const Eigen::RowVectorXd mean = m.colwise().mean();
    const Matrix c = m.rowwise() - mean;
    const Eigen::VectorXd var = c.colwise().squaredNorm().transpose() / static_cast<double>(n);
    return grid.weights().dot(var);
  };
  const double vr = integrated_variance(common);
  std::vector<CurvePanel> panels;
  const char* labels[] = {"1M", "6M", "2Y"};
  if (ratio) ratio->clear();
  for (std::size_t j = 0; j < omega; ++j) {
    const Matrix u = raw[j] - avg;
    if (ratio) ratio->push_back(vr / (vr + integrated_variance(u)));
    Matrix x = common + u;
    const Eigen::VectorXd eta = (static_cast<double>(j) - 1.0) * 0.7 * basis.row(0).transpose();
    x.rowwise() += (mu + eta).transpose();
    panels.emplace_back(grid, x, labels[j]);
  }
  return PanelSet(std::move(panels));
}

}  // namespace fixture
