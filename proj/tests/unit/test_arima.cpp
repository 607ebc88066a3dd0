#include "ivfts/arima.hpp"
#include "ivfts/error.hpp"
#include "ivfts/random.hpp"
#include "ivfts/score_forecast.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ivfts;

namespace {

ScoreSeries noise(std::size_t n, std::uint64_t seed, double mean = 0.0) {
  Rng rng(seed);
  std::normal_distribution<double> z(mean, 1.0);
  ScoreSeries s;
  for (std::size_t i = 0; i < n; ++i) s.values.push_back(z(rng));
  return s;
}

}  // namespace

TEST_CASE("reciprocal roots") {
  CHECK(max_reciprocal_root(std::vector<double>{0.5}) == doctest::Approx(0.5));
  CHECK(max_reciprocal_root(std::vector<double>{}) == 0.0);
  // 1 - 1.5z + 0.56z^2 = (1 - 0.8z)(1 - 0.7z)
  CHECK(max_reciprocal_root(std::vector<double>{1.5, -0.56}) == doctest::Approx(0.8).epsilon(1e-10));
  CHECK(max_reciprocal_root(std::vector<double>{1.0}) == doctest::Approx(1.0));
}

TEST_CASE("KPSS and differencing") {
  const ScoreSeries wn = noise(300, 1);
  CHECK(select_differencing(wn.values) == 0);
  std::vector<double> walk;
  double s = 0;
  for (double v : wn.values) walk.push_back(s += v);
  CHECK(select_differencing(walk) >= 1);
  std::vector<double> trend;
  for (int t = 0; t < 100; ++t) trend.push_back(t);
  CHECK(select_differencing(trend) >= 1);
  CHECK(kpss_statistic(std::vector<double>(50, 3.0)) == 0.0);
  CHECK(select_differencing(std::vector<double>(50, 3.0)) == 0);
}

TEST_CASE("exact AR(1) recursion is forecast exactly") {
  ScoreSeries s;
  double x = 1.0;
  for (int i = 0; i < 60; ++i) {
    s.values.push_back(x);
    x *= 0.8;
  }
  const ArimaFit fit = fit_auto_arima(s);
  const double last = s.values.back();
  CHECK(fit.order.p + fit.order.d >= 1);
  CHECK(std::abs(forecast_scores(fit, s, 1)[0] - 0.8 * last) < 1e-6);
}

TEST_CASE("constant series forecasts the constant") {
  ScoreSeries s{std::vector<double>(40, 2.5), "c"};
  const ArimaFit fit = fit_auto_arima(s);
  CHECK(fit.order.d == 0);
  for (double f : forecast_scores(fit, s, 5)) CHECK(f == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("linear trend extrapolates") {
  ScoreSeries s;
  for (int t = 1; t <= 50; ++t) s.values.push_back(t);
  const ArimaFit fit = fit_auto_arima(s);
  CHECK(fit.order.d >= 1);
  const auto f = forecast_scores(fit, s, 4);
  for (int h = 1; h <= 4; ++h) CHECK(std::abs(f[static_cast<std::size_t>(h - 1)] - (50.0 + h)) < 1e-6);
}

TEST_CASE("fixed-order forecasts follow the recursion") {
  ArimaFit fit;
  fit.order = {1, 0, 0};
  fit.ar = {0.5};
  fit.intercept = 0.0;
  fit.sigma2 = 1.0;
  ScoreSeries s{{1.0, -2.0, 3.0, 4.0}, "x"};
  const auto f = forecast_scores(fit, s, 3);
  CHECK(f[0] == doctest::Approx(2.0));
  CHECK(f[1] == doctest::Approx(1.0));
  CHECK(f[2] == doctest::Approx(0.5));

  ArimaFit mean_only;
  mean_only.intercept = 1.75;
  mean_only.sigma2 = 1.0;
  for (double v : forecast_scores(mean_only, s, 4)) CHECK(v == doctest::Approx(1.75));

  ArimaFit walk;
  walk.order = {0, 1, 0};
  walk.sigma2 = 1.0;
  for (double v : forecast_scores(walk, s, 4)) CHECK(v == doctest::Approx(4.0));
}

TEST_CASE("white noise selects a low order with the sample mean") {
  const ScoreSeries s = noise(400, 9, 3.0);
  const ArimaFit fit = fit_auto_arima(s);
  CHECK(fit.order.d == 0);
  CHECK(fit.order.p + fit.order.q <= 2);
  double mean = 0;
  for (double v : s.values) mean += v;
  mean /= 400;
  CHECK(forecast_scores(fit, s, 20).back() == doctest::Approx(mean).epsilon(0.05));
}

TEST_CASE("estimated AR(1) coefficient is close to the truth") {
  Rng rng(12);
  std::normal_distribution<double> z;
  ScoreSeries s;
  double x = 0;
  for (int i = 0; i < 600; ++i) s.values.push_back(x = 0.6 * x + z(rng));
  const ArimaFit fit = fit_arima(s.values, {1, 0, 0});
  CHECK(fit.ar[0] == doctest::Approx(0.6).epsilon(0.15));
  CHECK(fit.sigma2 == doctest::Approx(1.0).epsilon(0.15));
  CHECK(std::isfinite(fit.aicc));
  const ArimaFit automatic = fit_auto_arima(s);
  CHECK(max_reciprocal_root(automatic.ar) < 1.0);
  std::vector<double> neg_ma;
  for (double m : automatic.ma) neg_ma.push_back(-m);
  CHECK(max_reciprocal_root(neg_ma) <= 1.0);
}

TEST_CASE("scale equivariance of the automatic fit") {
  const ScoreSeries s = noise(120, 4);
  ScoreSeries scaled = s;
  for (double& v : scaled.values) v *= 1000.0;
  const ArimaFit a = fit_auto_arima(s);
  const ArimaFit b = fit_auto_arima(scaled);
  CHECK(a.order == b.order);
  CHECK(forecast_scores(b, scaled, 3)[2] == doctest::Approx(1000.0 * forecast_scores(a, s, 3)[2]).epsilon(1e-4));
}

TEST_CASE("auto ARIMA preconditions") {
  CHECK_THROWS_AS(fit_auto_arima(noise(10, 1)), Error);
  ScoreSeries bad = noise(30, 1);
  bad.values[3] = std::nan("");
  CHECK_THROWS_AS(fit_auto_arima(bad), Error);
  CHECK_THROWS_AS(forecast_scores(ArimaFit{}, noise(30, 1), 0), Error);
}

TEST_CASE("curve benchmarks") {
  const DeltaGrid grid({10, 25, 50, 75, 90});
  Matrix x(12, 5);
  for (Eigen::Index i = 0; i < 12; ++i)
    for (Eigen::Index t = 0; t < 5; ++t) x(i, t) = static_cast<double>(i * 5 + t);
  const CurvePanel p(grid, x);
  CHECK(rw_curve_forecast(p, 1) == p.last());
  CHECK(rw_curve_forecast(p, 10) == p.last());

  // x_{t+1} = 0.9 x_t + 1 from x_0 = 0
  Eigen::VectorXd s(30);
  s[0] = 0;
  for (Eigen::Index i = 1; i < 30; ++i) s[i] = 0.9 * s[i - 1] + 1;
  const Ar1Coefficients c = fit_ar1(s);
  CHECK(c.slope == doctest::Approx(0.9).epsilon(1e-8));
  CHECK(c.intercept == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(iterate_ar1(c, s[29], 2) == doctest::Approx(0.9 * (0.9 * s[29] + 1) + 1).epsilon(1e-10));

  const Ar1Coefficients flat = fit_ar1(Eigen::VectorXd::Constant(20, 4.0));
  CHECK(iterate_ar1(flat, 4.0, 7) == 4.0);
  CHECK_THROWS_AS(ar1_curve_forecast(p.head(9), 1), Error);

  // iid noise: long-horizon forecasts approach intercept / (1 - slope).
  Rng rng(2);
  std::normal_distribution<double> z(5.0, 1.0);
  Eigen::VectorXd n(500);
  for (Eigen::Index i = 0; i < 500; ++i) n[i] = z(rng);
  const Ar1Coefficients nc = fit_ar1(n);
  CHECK(iterate_ar1(nc, n[499], 200) == doctest::Approx(nc.intercept / (1 - nc.slope)).epsilon(1e-9));
}
