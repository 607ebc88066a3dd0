// Acceptance suite: one PASS/FAIL line per criterion. Every tolerance and
// replicate count is pinned below; the exit status is non-zero when any
// criterion fails.

#include "fixtures.hpp"
#include "oracles.hpp"

#include "ivfts/config.hpp"
#include "ivfts/error.hpp"
#include "ivfts/eval.hpp"
#include "ivfts/fpca.hpp"
#include "ivfts/io.hpp"
#include "ivfts/longrun.hpp"
#include "ivfts/mcs.hpp"
#include "ivfts/models.hpp"
#include "ivfts/pipeline.hpp"
#include "ivfts/random.hpp"
#include "ivfts/stationarity.hpp"
#include "ivfts/trading.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace ivfts;
namespace fs = std::filesystem;

namespace {

const fs::path kFixtures = IVFTS_FIXTURE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double max_abs(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

CurvePanel relabel(const CurvePanel& p, std::string maturity) {
  return CurvePanel(p.grid(), p.dates(), p.values(), std::move(maturity));
}

// 1 ------------------------------------------------------------------------
Outcome fpca_oracle() {
  constexpr int kPanels = 200;
  constexpr double kValueTol = 1e-8;     // relative to the leading eigenvalue
  constexpr double kFunctionTol = 1e-6;  // after sign alignment
  double worst_value = 0.0, worst_function = 0.0;
  for (std::uint64_t seed = 1; seed <= kPanels; ++seed) {
    const CurvePanel p = fixture::random_panel(100, 1000 + seed);
    const Matrix cov = sample_covariance(p);
    const Eigenpairs e = eigendecompose(cov, p.grid());
    Eigen::VectorXd values;
    Matrix functions;
    oracle::operator_eigen(oracle::lagged_covariance(p.values(), 0), p.grid().weights(), values, functions);
    for (Eigen::Index k = 0; k < values.size(); ++k) {
      worst_value = std::max(worst_value, std::abs(e.values[k] - values[k]) / values[0]);
      Eigen::RowVectorXd f = e.functions.row(k);
      if (f.dot(functions.row(k)) < 0) f = -f;
      worst_function = std::max(worst_function, (f - functions.row(k)).cwiseAbs().maxCoeff());
    }
  }
  return {worst_value <= kValueTol && worst_function <= kFunctionTol,
          fmt("200 panels, max eigenvalue error %.2e, max eigenfunction error %.2e", worst_value, worst_function)};
}

// 2 ------------------------------------------------------------------------
Outcome static_dynamic_reduction() {
  // Flat-top bandwidth 0.5 leaves weight only on lag 0.
  const BandwidthSpec lag_zero = BandwidthSpec::fixed(0.5);
  std::vector<CurvePanel> panels;
  for (const auto& p : ingest_iv_csv(kFixtures / "iv.csv").panels) panels.push_back(p);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) panels.push_back(fixture::random_panel(80, seed));
  panels.push_back(fixture::ma1_panel(300, 0.5, 1.0, 3));
  panels.push_back(fixture::iid_panel(120, 4));

  std::size_t identical = 0;
  for (const auto& p : panels) {
    const FpcaBasis s = fit_static_fpca(p, ComponentRule::cpv(0.99));
    const FpcaBasis d = fit_dynamic_fpca(p, KernelWeights::flat_top(), lag_zero, ComponentRule::cpv(0.99));
    ModelSpec dyn = ModelSpec::parse("DFTS-CPV");
    dyn.bandwidth = lag_zero;
    const auto fs_ = forecast_univariate(p, ModelSpec::parse("FTS-CPV"), 1);
    const auto fd = forecast_univariate(p, dyn, 1);
    if (s.spectrum == d.spectrum && s.eigenfunctions == d.eigenfunctions && s.scores == d.scores &&
        fs_.forecasts[0] == fd.forecasts[0])
      ++identical;
  }
  return {identical == panels.size(),
          fmt("%.0f of %.0f panels bit-identical (basis and forecast)", static_cast<double>(identical),
              static_cast<double>(panels.size()))};
}

// 3 ------------------------------------------------------------------------
Outcome ma1_long_run() {
  constexpr double kTheta = 0.5;
  constexpr double kSigma = 1.0;
  constexpr int kReplicates = 100;
  constexpr double kRelTol = 0.10;
  constexpr double kRequired = 0.90;
  const double truth = (1 + kTheta) * (1 + kTheta) * kSigma * kSigma;
  int within = 0;
  double worst = 0.0;
  for (int r = 0; r < kReplicates; ++r) {
    const CurvePanel p = fixture::ma1_panel(2000, kTheta, kSigma, 7000 + static_cast<std::uint64_t>(r));
    const Eigen::VectorXd wphi = p.grid().weights().cwiseProduct(fixture::unit_loading(p.grid()));
    const Matrix c = long_run_covariance(p, KernelWeights::flat_top(), BandwidthSpec::plugin());
    const double rel = std::abs(wphi.dot(c * wphi) - truth) / truth;
    worst = std::max(worst, rel);
    if (rel <= kRelTol) ++within;
  }
  const double share = static_cast<double>(within) / kReplicates;
  return {share >= kRequired, fmt("%.0f%% of 100 replicates within 10%% of 2.25 (worst %.1f%%)", 100 * share, 100 * worst)};
}

// 4 ------------------------------------------------------------------------
Outcome window_arithmetic() {
  BacktestPlan plan;
  plan.initial_train_size = 1827;
  plan.horizons = {1, 5, 10};
  plan.models = {ModelSpec::parse("RW")};
  const std::size_t expected[] = {522, 518, 513};
  const CurvePanel p = fixture::random_panel(2349, 42);
  const BacktestResult r = run_backtest(PanelSet({p}), plan);
  bool ok = true;
  std::string got;
  for (std::size_t k = 0; k < 3; ++k) {
    const int h = plan.horizons[k];
    const std::size_t tracked = r.track("RW", h).bundles.size();
    const std::size_t rows = r.loss(LossMetric::Mafe, p.maturity(), h).origins();
    ok = ok && plan.forecast_count(2349, h) == expected[k] && tracked == expected[k] && rows == expected[k];
    got += (k ? "/" : "") + std::to_string(tracked);
  }
  return {ok, "n=2349 train=1827 gives " + got + " forecasts at h=1/5/10"};
}

// 5 ------------------------------------------------------------------------
Outcome metric_identities() {
  constexpr double kTol = 1e-12;
  Rng rng(515);
  std::normal_distribution<double> z;
  double worst = 0.0;
  bool identity = true;
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t count = 1 + static_cast<std::size_t>(rep % 17);
    std::vector<Curve> as, fs_;
    for (std::size_t i = 0; i < count; ++i) {
      Curve a(5), f(5);
      for (Eigen::Index t = 0; t < 5; ++t) {
        a[t] = 10 + 3 * z(rng);
        f[t] = (rep % 5 == 0 && t == 2) ? a[t] : a[t] + z(rng);
      }
      as.push_back(a);
      fs_.push_back(f);
      worst = std::max({worst, std::abs(mafe(a, f) - oracle::mafe(a, f)), std::abs(msfe(a, f) - oracle::msfe(a, f))});
    }
    const double under = mme(as, fs_, MmeFlavor::Under);
    const double over = mme(as, fs_, MmeFlavor::Over);
    worst = std::max({worst, std::abs(under - oracle::mme_under(as, fs_)), std::abs(over - oracle::mme_over(as, fs_))});
    // Both flavors charge every cell sqrt|e| + |e| once in total.
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i)
      for (Eigen::Index t = 0; t < 5; ++t) {
        const double e = std::abs(as[i][t] - fs_[i][t]);
        total += e + std::sqrt(e);
      }
    total /= static_cast<double>(count * 5);
    if (std::abs(under + over - total) > kTol * std::max(1.0, total)) identity = false;
    // Swapping actual and forecast exchanges the flavors exactly.
    if (mme(fs_, as, MmeFlavor::Under) != over || mme(fs_, as, MmeFlavor::Over) != under) identity = false;
  }
  return {worst <= kTol && identity,
          fmt("200 fixtures, max oracle deviation %.1e, MME(U)+MME(O) identity ", worst) + (identity ? "holds" : "broken")};
}

// 6 ------------------------------------------------------------------------
Outcome composition() {
  constexpr double kRankOneTol = 1e-6;
  constexpr double kMultilevelTol = 1e-8;
  double rank_one = 0.0;
  for (double beta0 : {5.0, -3.0, 1.5}) {
    Eigen::VectorXd next;
    const CurvePanel p = fixture::rank_one_ar1_panel(80, 0.8, beta0, &next);
    for (const char* id : {"FTS-CPV", "FTS-K1", "DFTS-CPV"})
      rank_one = std::max(rank_one, (forecast_univariate(p, ModelSpec::parse(id), 1).forecasts[0] - next).cwiseAbs().maxCoeff());
  }
  double multilevel = 0.0;
  bool omega_one = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const CurvePanel p = fixture::random_panel(80, 300 + seed);
    const PanelSet twin({relabel(p, "1M"), relabel(p, "3M")});
    const auto ml = forecast_multilevel(twin, ModelSpec::parse("MLFTS-K5"), 1);
    const auto uni = forecast_univariate(p, ModelSpec::parse("FTS-K5"), 1);
    for (const auto& f : ml.forecasts) multilevel = std::max(multilevel, max_abs(f, uni.forecasts[0]));
    for (const char* id : {"CPV", "K2"}) {
      const std::string suffix = id;
      for (const char* prefix : {"", "D"}) {
        const auto u = forecast_univariate(p, ModelSpec::parse(std::string(prefix) + "FTS-" + suffix), 1);
        const auto m = forecast_multivariate(PanelSet({p}), ModelSpec::parse(std::string(prefix) + "MFTS-" + suffix), 1);
        if (!(u.forecasts[0] == m.forecasts[0])) omega_one = false;
      }
    }
  }
  return {rank_one <= kRankOneTol && multilevel <= kMultilevelTol && omega_one,
          fmt("rank-one error %.1e, multilevel vs univariate %.1e, ", rank_one, multilevel) +
              "omega=1 multivariate " + (omega_one ? "bit-identical" : "differs")};
}

// 7 ------------------------------------------------------------------------
Outcome within_cluster() {
  constexpr int kReplicates = 20;
  constexpr double kTol = 0.005;  // agreement to two decimals
  double worst = 0.0;
  for (int r = 0; r < kReplicates; ++r) {
    std::vector<double> ratio;
    const double common = 1.0 + 0.1 * r;
    const PanelSet set = fixture::multilevel_set(300, common, 1.0, 900 + static_cast<std::uint64_t>(r), &ratio);
    const MultilevelFit fit = fit_multilevel(set, ModelSpec::parse("MLFTS-K2"));
    for (std::size_t j = 0; j < set.size(); ++j)
      worst = std::max(worst, std::abs(within_cluster_variability(fit, j) - ratio[j]));
  }
  return {worst <= kTol, fmt("20 replicates x 3 maturities, max |estimate - generator| %.1e", worst)};
}

// 8 ------------------------------------------------------------------------
Outcome mcs_size_power() {
  constexpr int kReplicates = 200;
  constexpr std::size_t kN = 500;
  constexpr std::size_t kModels = 5;
  constexpr double kSizeRequired = 0.90;
  constexpr double kPowerRequired = 0.95;
  std::vector<std::string> ids;
  for (std::size_t j = 0; j < kModels; ++j) ids.push_back("M" + std::to_string(j));
  McsConfig cfg;
  cfg.alpha = 0.05;
  cfg.n_bootstrap = 1000;
  int kept_all = 0, eliminated = 0;
  for (int r = 0; r < kReplicates; ++r) {
    Rng rng = counter_rng(880, static_cast<std::uint64_t>(r));
    std::normal_distribution<double> z(5.0, 1.0);
    Matrix x(kN, kModels);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = z(rng);
    cfg.seed = 10000 + static_cast<std::uint64_t>(r);
    if (model_confidence_set(x, ids, cfg).superior_set.size() == kModels) ++kept_all;
    x.col(3).array() += 1.0;  // one loss standard deviation
    const auto inflated = model_confidence_set(x, ids, cfg);
    if (std::find(inflated.superior_set.begin(), inflated.superior_set.end(), "M3") == inflated.superior_set.end())
      ++eliminated;
  }
  const double size = static_cast<double>(kept_all) / kReplicates;
  const double power = static_cast<double>(eliminated) / kReplicates;
  return {size >= kSizeRequired && power >= kPowerRequired,
          fmt("equal models kept in %.1f%%, inflated model eliminated in %.1f%%", 100 * size, 100 * power)};
}

// 9 ------------------------------------------------------------------------
Outcome stationarity_calibration() {
  constexpr int kReplicates = 200;
  constexpr double kLevel = 0.05;
  constexpr double kSizeLow = 0.02, kSizeHigh = 0.09;
  constexpr double kPowerRequired = 0.95;
  constexpr std::size_t kDraws = 1000;
  int rejected = 0, detected = 0;
  for (int r = 0; r < kReplicates; ++r) {
    const auto seed = static_cast<std::uint64_t>(r);
    if (stationarity_test(fixture::iid_panel(100, 20000 + seed), kDraws, 30000 + seed).p_value < kLevel) ++rejected;
    if (stationarity_test(fixture::break_panel(100, 5.0, 40000 + seed), kDraws, 50000 + seed).p_value < kLevel)
      ++detected;
  }
  const double size = static_cast<double>(rejected) / kReplicates;
  const double power = static_cast<double>(detected) / kReplicates;
  return {size >= kSizeLow && size <= kSizeHigh && power >= kPowerRequired,
          fmt("size %.1f%% at 5%%, power %.1f%% against a 5-SD break", 100 * size, 100 * power)};
}

// 10 -----------------------------------------------------------------------
Outcome gk_pricing() {
  constexpr int kDraws = 100000;
  constexpr double kParityTol = 1e-12;
  constexpr double kQuadratureTol = 1e-6;
  Rng rng(1010);
  std::uniform_real_distribution<double> u(0, 1);
  double parity_worst = 0.0;
  int vega_failures = 0;
  for (int i = 0; i < kDraws; ++i) {
    const MarketInputs in{0.5 + 1.5 * u(rng), -0.01 + 0.08 * u(rng), -0.01 + 0.08 * u(rng), 0.01 + 2 * u(rng),
                          0.01 + 0.6 * u(rng)};
    const double k = in.spot * (0.7 + 0.6 * u(rng));
    const double c = gk_price(in, k, OptionKind::Call);
    const double p = gk_price(in, k, OptionKind::Put);
    const double parity = in.spot * std::exp(-in.foreign_rate * in.tau) - k * std::exp(-in.domestic_rate * in.tau);
    parity_worst = std::max(parity_worst, std::abs(c - p - parity));

    // Analytic vega is positive; the priced increment must agree in sign
    // wherever it exceeds rounding.
    const double sd = in.sigma * std::sqrt(in.tau);
    const double d1 = (std::log(in.spot / k) + (in.domestic_rate - in.foreign_rate + 0.5 * in.sigma * in.sigma) * in.tau) / sd;
    const double vega = in.spot * std::exp(-in.foreign_rate * in.tau) * std::sqrt(in.tau) * std::exp(-0.5 * d1 * d1) /
                        std::sqrt(2.0 * M_PI);
    MarketInputs up = in;
    up.sigma += 1e-3;
    const double dc = gk_price(up, k, OptionKind::Call) - c;
    const double dp = gk_price(up, k, OptionKind::Put) - p;
    const double slack = 1e-14 * in.spot;
    const bool resolvable = vega * 1e-3 > 1e-10 * std::max(1.0, in.spot);
    if (!(vega >= 0.0) || dc < -slack || dp < -slack || (resolvable && !(dc > 0.0 && dp > 0.0))) ++vega_failures;
  }
  double quadrature_worst = 0.0;
  for (const MarketInputs& in : {MarketInputs{100, 0, 0, 1, 0.2}, MarketInputs{1.3, 0.03, 0.01, 0.5, 0.12},
                                 MarketInputs{0.9, -0.005, 0.02, 0.08, 0.3}, MarketInputs{150, 0.01, 0.0, 2.0, 0.08}}) {
    const double f = gk_forward(in);
    const double atm = gk_price(in, f, OptionKind::Call) + gk_price(in, f, OptionKind::Put);
    const double ref = oracle::lognormal_call(in.spot, f, in.domestic_rate, in.foreign_rate, in.sigma, in.tau) +
                       oracle::lognormal_put(in.spot, f, in.domestic_rate, in.foreign_rate, in.sigma, in.tau);
    quadrature_worst = std::max(quadrature_worst, std::abs(atm - ref));
  }
  return {parity_worst <= kParityTol && quadrature_worst <= kQuadratureTol && vega_failures == 0,
          fmt("parity max error %.1e over 1e5 draws, ATM quadrature error %.1e, vega failures %.0f", parity_worst,
              quadrature_worst, vega_failures)};
}

// 11 -----------------------------------------------------------------------
Outcome ledger_and_stats() {
  constexpr double kTol = 1e-10;
  const IvData iv = ingest_iv_csv(kFixtures / "iv.csv");
  const MarketSeries market = read_market_csv(kFixtures / "market.csv");
  const PanelSet& set = iv.panels;
  // One-step forecasts from noisy perturbations of the realized move.
  Rng rng(1111);
  std::normal_distribution<double> z;
  std::vector<ForecastBundle> bundles;
  for (std::size_t i = 1; i + 1 < set.rows(); ++i) {
    ForecastBundle b;
    b.model_id = "noisy";
    b.origin_index = i;
    b.horizon = 1;
    for (const auto& p : set) b.forecasts.push_back(p.row(i - 1).array() + 0.01 * z(rng));
    bundles.push_back(b);
  }
  const TradingConfig cfg;
  const auto forward = straddle_strategy(bundles, set, market, cfg);
  const auto flipped = straddle_strategy(bundles, set, market, cfg, true);
  bool antisymmetric = true;
  std::size_t active = 0;
  for (std::size_t j = 0; j < forward.per_maturity.size(); ++j)
    for (std::size_t d = 0; d < forward.per_maturity[j].records.size(); ++d) {
      const double a = forward.per_maturity[j].records[d].ret;
      if (a != -flipped.per_maturity[j].records[d].ret) antisymmetric = false;
      if (a != 0.0) ++active;
    }
  for (std::size_t d = 0; d < forward.portfolio.records.size(); ++d)
    if (forward.portfolio.records[d].ret != -flipped.portfolio.records[d].ret) antisymmetric = false;

  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    std::normal_distribution<double> ret(0.001 * (rep % 7 - 3), 0.01 + 0.001 * rep);
    std::vector<double> r(60 + 10 * static_cast<std::size_t>(rep));
    for (double& v : r) v = ret(rng);
    const PerformanceStats s = performance_stats(r);
    const PerformanceStats t = performance_stats(r, 0.05);
    worst = std::max({worst, std::abs(s.t_stat - oracle::t_statistic(r)),
                      std::abs(s.sharpe - oracle::mean(r) / oracle::sample_sd(r)),
                      std::abs(s.sortino - oracle::sortino(r)), std::abs(t.mean - oracle::trimmed_mean(r, 0.05))});
  }
  return {antisymmetric && active > 0 && worst <= kTol,
          fmt("%.0f active trades ", static_cast<double>(active)) + (antisymmetric ? "exactly negated" : "NOT negated") +
              fmt(", statistics max deviation %.1e", worst)};
}

// 12 -----------------------------------------------------------------------
Outcome end_to_end_determinism() {
  const fs::path base = fs::temp_directory_path() / ("ivfts_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  RunConfig cfg = RunConfig::load(kFixtures / "fixture.ini");
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    cfg.out_dir = base / run;
    for (const char* cmd : {"fit", "backtest", "mcs", "stationarity", "trade"}) run_pipeline(cmd, cfg, log);
  }
  std::size_t compared = 0, differing = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "a")) {
    if (!e.is_regular_file()) continue;
    const fs::path twin = base / "b" / fs::relative(e.path(), base / "a");
    ++compared;
    if (!fs::exists(twin) || read_file(e.path()) != read_file(twin)) ++differing;
  }
  std::size_t second = 0;
  for (const auto& e : fs::recursive_directory_iterator(base / "b"))
    if (e.is_regular_file()) ++second;
  fs::remove_all(base);
  return {compared > 0 && differing == 0 && second == compared,
          fmt("%.0f reports compared, %.0f differ", static_cast<double>(compared), static_cast<double>(differing))};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"FPCA oracle equivalence", fpca_oracle},
      {"static/dynamic reduction", static_dynamic_reduction},
      {"long-run MA(1) variance", ma1_long_run},
      {"window arithmetic", window_arithmetic},
      {"metric identities", metric_identities},
      {"forecaster composition", composition},
      {"within-cluster variability", within_cluster},
      {"MCS size and power", mcs_size_power},
      {"stationarity calibration", stationarity_calibration},
      {"GK pricing", gk_pricing},
      {"ledger antisymmetry and statistics", ledger_and_stats},
      {"end-to-end determinism", end_to_end_determinism},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, check] : criteria) {
    ++index;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = check();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!out.pass) ++failed;
    std::printf("%s %2d %s: %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", index, name, out.detail.c_str(), seconds);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", index - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
