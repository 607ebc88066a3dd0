#include "ivfts/synth.hpp"

#include "ivfts/error.hpp"
#include "ivfts/random.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

namespace ivfts {

std::vector<std::string> business_days(std::size_t count) {
  using namespace std::chrono;
  std::vector<std::string> out;
  sys_days cursor = year_month_day{year{2016}, month{1}, day{4}};
  while (out.size() < count) {
    const weekday wd{cursor};
    if (wd != Saturday && wd != Sunday) {
      const year_month_day ymd{cursor};
      char buf[16];
      std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                    static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
      out.emplace_back(buf);
    }
    cursor += days{1};
  }
  return out;
}

SynthData synthesize(const SynthOptions& options, std::uint64_t seed) {
  require(options.days >= 30, "synthetic panels need at least 30 days");
  require(!options.maturities.empty(), "synthetic panels need at least one maturity");
  const std::size_t n = options.days;
  const std::size_t omega = options.maturities.size();
  const DeltaGrid grid(options.deltas);
  const auto dates = business_days(n);

  Rng rng(substream_seed(seed, "synth/iv"));
  std::normal_distribution<double> z;

  // Common level and skew factors, then one level factor per maturity.
  std::vector<double> level(n), skew(n);
  double a = 0.0, b = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    a = 0.95 * a + 0.3 * z(rng);
    b = 0.90 * b + 0.1 * z(rng);
    level[i] = a;
    skew[i] = b;
  }
  std::vector<CurvePanel> panels;
  for (std::size_t j = 0; j < omega; ++j) {
    const double base = 9.0 + 0.8 * static_cast<double>(j);
    const double damp = 1.0 / (1.0 + 0.3 * static_cast<double>(j));
    Matrix values(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(grid.size()));
    double own = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      own = 0.8 * own + 0.15 * z(rng);
      for (std::size_t k = 0; k < grid.size(); ++k) {
        const double x = (grid.points()[k] - 50.0) / 40.0;
        const double smile = base + 1.2 * x * x - 0.6 * x;
        const double v = smile + damp * level[i] + own + skew[i] * x + 0.05 * z(rng);
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = std::max(v, 0.5);
      }
    }
    panels.emplace_back(grid, dates, std::move(values), options.maturities[j]);
  }

  Rng mrng(substream_seed(seed, "synth/market"));
  MarketSeries market;
  market.dates = dates;
  double log_spot = std::log(1.10);
  double rd = 0.02;
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) log_spot += 0.006 * z(mrng);
    rd = 0.02 + 0.9 * (rd - 0.02) + 0.0002 * z(mrng);
    market.spot.push_back(std::exp(log_spot));
    market.domestic_rate.push_back(rd);
    market.foreign_rate.push_back(0.005);
  }
  return {PanelSet(std::move(panels)), std::move(market)};
}

}  // namespace ivfts
