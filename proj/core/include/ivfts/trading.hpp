#pragma once

// Garman-Kohlhagen pricing of FX options and a one-day ATM straddle strategy
// that trades on the sign of the forecast change in ATM implied volatility.

#include "ivfts/fda.hpp"
#include "ivfts/models.hpp"

#include <map>
#include <string>
#include <vector>

namespace ivfts {

struct MarketInputs {
  double spot = 0.0;
  double domestic_rate = 0.0;  // continuously compounded, per annum
  double foreign_rate = 0.0;
  double tau = 0.0;            // years to expiry
  double sigma = 0.0;          // annualized volatility, decimal

  void validate() const;
};

enum class OptionKind { Call, Put };

double gk_price(const MarketInputs& in, double strike, OptionKind kind);
double gk_forward(const MarketInputs& in);
/// Call plus put struck at the forward.
double atm_straddle(const MarketInputs& in);

/// Spot and rate series keyed by date.
struct MarketSeries {
  std::vector<std::string> dates;
  std::vector<double> spot;
  std::vector<double> domestic_rate;
  std::vector<double> foreign_rate;

  void validate() const;
  std::size_t index_of(const std::string& date) const;
};

/// Years to expiry for tenor labels like 1W, 3M, 1Y.
double tenor_years(const std::string& label);

struct TradingConfig {
  double atm_delta = 50.0;    // grid coordinate of the ATM quote
  double iv_scale = 0.01;     // quote units to decimal volatility
  double spread = 0.0;        // proportional cost charged on every traded day
  double days_per_year = 252.0;
  std::map<std::string, double> tenor_override;  // maturity label -> years

  double tenor(const std::string& maturity) const;
};

enum class Signal { Short = -1, Flat = 0, Long = 1 };

struct TradeRecord {
  std::string date;      // entry date
  std::string maturity;  // "portfolio" for the equal-weight book
  Signal signal = Signal::Flat;
  double entry = 0.0;
  double exit = 0.0;
  double ret = 0.0;
};

struct TradeLedger {
  std::string maturity;
  std::vector<TradeRecord> records;

  std::vector<double> returns() const;
  std::size_t active_days() const;
};

struct StrategyResult {
  std::vector<TradeLedger> per_maturity;
  TradeLedger portfolio;
  std::size_t zero_premium_days = 0;
};

/// Runs the straddle strategy. Each bundle must be a one-step forecast whose
/// origin leaves a next-day observation in `actual`. `flip` reverses every
/// signal, which is useful for sensitivity runs.
StrategyResult straddle_strategy(const std::vector<ForecastBundle>& forecasts, const PanelSet& actual,
                                 const MarketSeries& market, const TradingConfig& cfg, bool flip = false);

/// ATM value of a curve, interpolated linearly on the grid.
double atm_value(const Curve& curve, const DeltaGrid& grid, double atm_delta);

struct PerformanceStats {
  std::size_t count = 0;
  double mean = 0.0;
  double sd = 0.0;
  double t_stat = 0.0;
  double one_sided_p = 1.0;
  double sharpe = 0.0;
  double sortino = 0.0;
};

/// Sorted sample with floor(count * trim / 2) observations removed from each tail.
std::vector<double> trimmed_sample(std::vector<double> returns, double trim);

PerformanceStats performance_stats(const std::vector<double>& returns, double trim = 0.0);
PerformanceStats performance_stats(const TradeLedger& ledger, double trim = 0.0);

}  // namespace ivfts
