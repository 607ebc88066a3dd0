#include "ivfts/stationarity.hpp"

#include "ivfts/error.hpp"
#include "ivfts/fpca.hpp"
#include "ivfts/parallel.hpp"
#include "ivfts/random.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace ivfts {

namespace {

constexpr double kProjectionCpv = 0.90;

// Bartlett-weighted long-run variance of a mean-zero series.
double bartlett_lrv(const Eigen::VectorXd& x, std::size_t lag) {
  const Eigen::Index n = x.size();
  double lrv = x.squaredNorm() / static_cast<double>(n);
  for (std::size_t l = 1; l <= lag; ++l) {
    const auto ll = static_cast<Eigen::Index>(l);
    const double gamma = x.head(n - ll).dot(x.tail(n - ll)) / static_cast<double>(n);
    lrv += 2.0 * (1.0 - static_cast<double>(l) / static_cast<double>(lag + 1)) * gamma;
  }
  return lrv;
}

}  // namespace

std::vector<double> bridge_sup_draws(std::size_t d, std::size_t n, std::size_t draws, std::uint64_t seed) {
  require(d >= 1 && n >= 2, "bridge simulation needs a positive dimension and at least two points");
  std::vector<double> out(draws);
  parallel_for(draws, [&](std::size_t r) {
    Rng rng = counter_rng(seed, r);
    std::normal_distribution<double> z;
    Matrix walk(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index k = 0; k < walk.cols(); ++k) {
      double s = 0.0;
      for (Eigen::Index i = 0; i < walk.rows(); ++i) {
        s += z(rng);
        walk(i, k) = s;
      }
    }
    const double scale = 1.0 / static_cast<double>(n);
    double best = 0.0;
    for (Eigen::Index i = 0; i < walk.rows(); ++i) {
      const double x = static_cast<double>(i + 1) / static_cast<double>(n);
      double sum = 0.0;
      for (Eigen::Index k = 0; k < walk.cols(); ++k) {
        const double b = walk(i, k) - x * walk(walk.rows() - 1, k);
        sum += b * b * scale;
      }
      best = std::max(best, sum);
    }
    out[r] = best;
  });
  return out;
}

StationarityResult stationarity_test(const CurvePanel& panel, std::size_t n_mc, std::uint64_t seed) {
  const std::size_t n = panel.rows();
  require(n >= 50, "stationarity test needs at least 50 curves, got " + std::to_string(n));
  require(n_mc >= 1, "stationarity test needs at least one Monte Carlo draw");

  const FpcaBasis basis = fit_static_fpca(panel, ComponentRule::cpv(kProjectionCpv));
  const Matrix& scores = basis.scores;
  StationarityResult out;
  out.components = basis.components();
  out.lrv_lag = static_cast<std::size_t>(std::floor(std::cbrt(static_cast<double>(n))));

  // Partial sums of the centered scores; with an in-sample mean the bridge
  // correction is a no-op up to rounding, but it keeps the form exact.
  double statistic = 0.0;
  std::vector<double> lrv(out.components);
  for (std::size_t k = 0; k < out.components; ++k) {
    lrv[k] = bartlett_lrv(scores.col(static_cast<Eigen::Index>(k)), out.lrv_lag);
    if (!(lrv[k] > 0.0)) throw Error("degenerate score long-run variance");
  }
  Eigen::VectorXd partial = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(out.components));
  const Eigen::VectorXd total = scores.colwise().sum().transpose();
  for (std::size_t i = 0; i < n; ++i) {
    partial += scores.row(static_cast<Eigen::Index>(i)).transpose();
    const double x = static_cast<double>(i + 1) / static_cast<double>(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < out.components; ++k) {
      const double b = partial[static_cast<Eigen::Index>(k)] - x * total[static_cast<Eigen::Index>(k)];
      sum += b * b / (static_cast<double>(n) * lrv[k]);
    }
    statistic = std::max(statistic, sum);
  }
  out.statistic = statistic;

  const auto draws = bridge_sup_draws(out.components, n, n_mc, seed);
  const auto exceed = std::count_if(draws.begin(), draws.end(), [&](double v) { return v >= statistic; });
  out.p_value = static_cast<double>(exceed) / static_cast<double>(n_mc);
  return out;
}

}  // namespace ivfts
