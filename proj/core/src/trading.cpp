#include "ivfts/trading.hpp"

#include "ivfts/error.hpp"
#include "ivfts/parallel.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <numeric>
#include <regex>

namespace ivfts {

namespace {

double norm_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

void MarketInputs::validate() const {
  require(spot > 0.0 && std::isfinite(spot), "spot must be positive");
  require(tau > 0.0 && std::isfinite(tau), "time to expiry must be positive");
  require(sigma > 0.0 && std::isfinite(sigma), "volatility must be positive");
  require(std::isfinite(domestic_rate) && std::isfinite(foreign_rate), "rates must be finite");
}

double gk_forward(const MarketInputs& in) {
  return in.spot * std::exp((in.domestic_rate - in.foreign_rate) * in.tau);
}

double gk_price(const MarketInputs& in, double strike, OptionKind kind) {
  in.validate();
  require(strike > 0.0 && std::isfinite(strike), "strike must be positive");
  const double spot_pv = in.spot * std::exp(-in.foreign_rate * in.tau);
  const double strike_pv = strike * std::exp(-in.domestic_rate * in.tau);
  const double vol = in.sigma * std::sqrt(in.tau);
  if (vol < 1e-12) {
    const double intrinsic = kind == OptionKind::Call ? spot_pv - strike_pv : strike_pv - spot_pv;
    return std::max(intrinsic, 0.0);
  }
  const double d1 = (std::log(in.spot / strike) + (in.domestic_rate - in.foreign_rate + 0.5 * in.sigma * in.sigma) * in.tau) / vol;
  const double d2 = d1 - vol;
  const double price = kind == OptionKind::Call ? spot_pv * norm_cdf(d1) - strike_pv * norm_cdf(d2)
                                                : strike_pv * norm_cdf(-d2) - spot_pv * norm_cdf(-d1);
  return std::max(price, 0.0);
}

double atm_straddle(const MarketInputs& in) {
  const double k = gk_forward(in);
  return gk_price(in, k, OptionKind::Call) + gk_price(in, k, OptionKind::Put);
}

void MarketSeries::validate() const {
  const std::size_t n = dates.size();
  require(spot.size() == n && domestic_rate.size() == n && foreign_rate.size() == n,
          "market series columns differ in length");
  for (std::size_t i = 0; i < n; ++i) {
    require(spot[i] > 0.0 && std::isfinite(spot[i]), "non-positive spot on " + dates[i]);
    require(std::isfinite(domestic_rate[i]) && std::isfinite(foreign_rate[i]), "non-finite rate on " + dates[i]);
    if (i > 0) require(dates[i - 1] < dates[i], "market dates must be strictly increasing");
  }
}

std::size_t MarketSeries::index_of(const std::string& date) const {
  const auto it = std::lower_bound(dates.begin(), dates.end(), date);
  if (it == dates.end() || *it != date) throw Error("no market data for date " + date);
  return static_cast<std::size_t>(it - dates.begin());
}

double tenor_years(const std::string& label) {
  static const std::regex pattern(R"(^\s*([0-9]+(?:\.[0-9]+)?)\s*([dDwWmMyY])\s*$)");
  std::smatch match;
  if (!std::regex_match(label, match, pattern)) throw Error("cannot read a tenor from maturity '" + label + "'");
  const double count = std::stod(match[1].str());
  if (!(count > 0.0)) throw Error("tenor of maturity '" + label + "' is not positive");
  switch (std::toupper(static_cast<unsigned char>(match[2].str()[0]))) {
    case 'D': return count / 365.0;
    case 'W': return count * 7.0 / 365.0;
    case 'M': return count / 12.0;
    default: return count;
  }
}

double TradingConfig::tenor(const std::string& maturity) const {
  const auto it = tenor_override.find(maturity);
  return it != tenor_override.end() ? it->second : tenor_years(maturity);
}

std::vector<double> TradeLedger::returns() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.ret);
  return out;
}

std::size_t TradeLedger::active_days() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const TradeRecord& r) { return r.signal != Signal::Flat; }));
}

double atm_value(const Curve& curve, const DeltaGrid& grid, double atm_delta) {
  const auto& x = grid.points();
  require(static_cast<std::size_t>(curve.size()) == x.size(), "curve does not match the grid");
  require(atm_delta >= x.front() && atm_delta <= x.back(), "ATM delta lies outside the grid");
  const auto hi = std::lower_bound(x.begin(), x.end(), atm_delta);
  const auto k = static_cast<std::size_t>(hi - x.begin());
  if (x[k] == atm_delta) return curve[static_cast<Eigen::Index>(k)];
  const double w = (atm_delta - x[k - 1]) / (x[k] - x[k - 1]);
  return (1.0 - w) * curve[static_cast<Eigen::Index>(k - 1)] + w * curve[static_cast<Eigen::Index>(k)];
}

StrategyResult straddle_strategy(const std::vector<ForecastBundle>& forecasts, const PanelSet& actual,
                                 const MarketSeries& market, const TradingConfig& cfg, bool flip) {
  market.validate();
  require(cfg.iv_scale > 0.0 && cfg.days_per_year > 0.0, "invalid trading configuration");
  require(!forecasts.empty(), "no forecasts to trade on");
  const std::size_t n = actual.rows();
  const double day = 1.0 / cfg.days_per_year;

  struct Day {
    std::size_t today;
    std::size_t entry_mkt;
    std::size_t exit_mkt;
  };
  std::vector<Day> days;
  for (const auto& b : forecasts) {
    require(b.horizon == 1, "the straddle strategy trades on one-step forecasts only");
    require(b.forecasts.size() == actual.size(), "forecast bundle does not cover every maturity");
    require(b.origin_index >= 1 && b.origin_index < n,
            "forecast origin " + std::to_string(b.origin_index) + " has no next-day observation");
    const std::size_t today = b.origin_index - 1;
    if (!days.empty()) require(today > days.back().today, "forecasts must be in increasing origin order");
    days.push_back({today, market.index_of(actual.dates()[today]), market.index_of(actual.dates()[today + 1])});
  }

  StrategyResult result;
  result.per_maturity.resize(actual.size());
  std::vector<std::size_t> zero_premium(actual.size(), 0);
  parallel_for(actual.size(), [&](std::size_t j) {
    const CurvePanel& panel = actual[j];
    const double tau = cfg.tenor(panel.maturity());
    require(tau > day, "maturity '" + panel.maturity() + "' expires within one trading day");
    TradeLedger& ledger = result.per_maturity[j];
    ledger.maturity = panel.maturity();
    for (std::size_t d = 0; d < days.size(); ++d) {
      const Day& dd = days[d];
      const double iv_today = atm_value(panel.row(dd.today), panel.grid(), cfg.atm_delta);
      const double iv_next = atm_value(panel.row(dd.today + 1), panel.grid(), cfg.atm_delta);
      const double iv_forecast = atm_value(forecasts[d].forecasts[j], panel.grid(), cfg.atm_delta);

      TradeRecord rec;
      rec.date = panel.dates()[dd.today];
      rec.maturity = panel.maturity();
      int direction = iv_forecast > iv_today ? 1 : (iv_forecast < iv_today ? -1 : 0);
      if (flip) direction = -direction;

      const MarketInputs entry_in{market.spot[dd.entry_mkt], market.domestic_rate[dd.entry_mkt],
                                  market.foreign_rate[dd.entry_mkt], tau, iv_today * cfg.iv_scale};
      const double strike = gk_forward(entry_in);
      rec.entry = gk_price(entry_in, strike, OptionKind::Call) + gk_price(entry_in, strike, OptionKind::Put);
      const MarketInputs exit_in{market.spot[dd.exit_mkt], market.domestic_rate[dd.exit_mkt],
                                 market.foreign_rate[dd.exit_mkt], tau - day, iv_next * cfg.iv_scale};
      rec.exit = gk_price(exit_in, strike, OptionKind::Call) + gk_price(exit_in, strike, OptionKind::Put);

      if (!(rec.entry > 0.0)) {
        ++zero_premium[j];
        direction = 0;
      }
      rec.signal = static_cast<Signal>(direction);
      if (direction != 0) rec.ret = direction * (rec.exit - rec.entry) / rec.entry - cfg.spread;
      ledger.records.push_back(rec);
    }
  });
  result.zero_premium_days = std::accumulate(zero_premium.begin(), zero_premium.end(), std::size_t{0});

  result.portfolio.maturity = "portfolio";
  const double books = static_cast<double>(actual.size());
  for (std::size_t d = 0; d < days.size(); ++d) {
    TradeRecord rec;
    rec.date = actual.dates()[days[d].today];
    rec.maturity = "portfolio";
    bool any = false;
    for (const auto& ledger : result.per_maturity) {
      const auto& r = ledger.records[d];
      rec.entry += r.entry / books;
      rec.exit += r.exit / books;
      rec.ret += r.ret / books;
      any = any || r.signal != Signal::Flat;
    }
    rec.signal = any ? Signal::Long : Signal::Flat;
    result.portfolio.records.push_back(rec);
  }
  return result;
}

std::vector<double> trimmed_sample(std::vector<double> returns, double trim) {
  require(trim >= 0.0 && trim < 0.5, "trim fraction must lie in [0, 0.5)");
  std::sort(returns.begin(), returns.end());
  const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(returns.size()) * trim / 2.0));
  return {returns.begin() + static_cast<std::ptrdiff_t>(cut), returns.end() - static_cast<std::ptrdiff_t>(cut)};
}

PerformanceStats performance_stats(const std::vector<double>& returns, double trim) {
  const std::vector<double> sample = trimmed_sample(returns, trim);
  require(sample.size() >= 2, "performance statistics need at least two returns");
  for (double r : sample) require(std::isfinite(r), "non-finite return");
  PerformanceStats s;
  s.count = sample.size();
  const double n = static_cast<double>(s.count);
  s.mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
  double ss = 0.0;
  double downside = 0.0;
  for (double r : sample) {
    ss += (r - s.mean) * (r - s.mean);
    if (r < 0.0) downside += r * r;
  }
  s.sd = std::sqrt(ss / (n - 1.0));
  if (!(s.sd > 0.0)) throw Error("degenerate returns");
  s.t_stat = s.mean / (s.sd / std::sqrt(n));
  const boost::math::students_t dist(n - 1.0);
  s.one_sided_p = boost::math::cdf(boost::math::complement(dist, s.t_stat));
  s.sharpe = s.mean / s.sd;
  const double dd = std::sqrt(downside / n);
  s.sortino = dd > 0.0 ? s.mean / dd : std::numeric_limits<double>::infinity();
  return s;
}

PerformanceStats performance_stats(const TradeLedger& ledger, double trim) {
  require(ledger.active_days() >= 2, "performance statistics need at least two traded days");
  return performance_stats(ledger.returns(), trim);
}

}  // namespace ivfts
