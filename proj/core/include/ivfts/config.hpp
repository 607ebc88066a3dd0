#pragma once

#include "ivfts/eval.hpp"
#include "ivfts/mcs.hpp"
#include "ivfts/trading.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ivfts {

/// Everything one experiment needs, read from an INI file:
///
///   [run]          seed, out
///   [data]         iv, market, maturities
///   [models]       ids
///   [backtest]     initial_train, horizons, refit_every
///   [mcs]          alpha, n_bootstrap, block_length (auto or integer),
///                  statistics (tmax, tr), metric (mafe, msfe), losses
///   [stationarity] n_mc
///   [trading]      model, atm_delta, iv_scale, spread, trim, days_per_year,
///                  tenor.<maturity> = years
///   [synth]        days, maturities
///
/// Relative paths are resolved against the directory holding the file.
struct RunConfig {
  std::filesystem::path iv_path;
  std::filesystem::path market_path;
  std::filesystem::path losses_path;
  std::vector<std::string> maturities;
  std::vector<std::string> models{"FTS-CPV", "DFTS-CPV", "MFTS-CPV", "DMFTS-CPV", "MLFTS-CPV", "DMLFTS-CPV"};

  std::size_t initial_train = 30;
  std::vector<int> horizons{1};
  std::size_t refit_every = 1;

  McsConfig mcs;
  std::vector<McsStatistic> mcs_statistics{McsStatistic::TMax, McsStatistic::TRange};
  LossMetric mcs_metric = LossMetric::Mafe;

  std::size_t stationarity_draws = 1000;

  TradingConfig trading;
  std::string trade_model;  // empty: first model in the list
  double trim_fraction = 0.05;

  std::size_t synth_days = 120;
  std::vector<std::string> synth_maturities{"1M", "3M", "1Y"};

  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;

  static RunConfig load(const std::filesystem::path& path);
  void validate() const;

  std::vector<ModelSpec> model_specs() const;
  BacktestPlan plan() const;

  /// Stable key = value rendering of every setting that affects results.
  /// The output directory is excluded and input files appear by content digest,
  /// so reruns elsewhere hash the same.
  std::string canonical() const;
  std::string hash() const;
};

std::vector<int> parse_int_list(const std::string& text);
std::vector<std::string> parse_name_list(const std::string& text);

}  // namespace ivfts
