// ivfts: command-line front end for fitting, backtesting, testing and trading
// implied-volatility smile panels.

#include "ivfts/config.hpp"
#include "ivfts/error.hpp"
#include "ivfts/pipeline.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Functional time-series models for implied-volatility smiles"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out_dir;
  std::string horizons;
  std::string models;
  std::string losses;
  std::size_t days = 0;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    auto* opt = sub->add_option("--config", config_path, "INI file describing the experiment");
    if (needs_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "global seed (overrides [run] seed)");
    sub->add_option("--out", out_dir, "output directory (overrides [run] out)");
  };
  auto add_models = [&](CLI::App* sub) {
    sub->add_option("--models", models, "comma-separated model ids, e.g. DFTS-CPV,MLFTS-K4,RW");
    sub->add_option("--horizons", horizons, "comma-separated forecast horizons");
  };

  auto* fit = app.add_subcommand("fit", "fit every model on the full sample and report R-squared");
  add_common(fit, true);
  add_models(fit);
  auto* backtest = app.add_subcommand("backtest", "expanding-window forecasts and error tables");
  add_common(backtest, true);
  add_models(backtest);
  auto* mcs = app.add_subcommand("mcs", "model confidence sets from backtest losses or a loss CSV");
  add_common(mcs, true);
  add_models(mcs);
  mcs->add_option("--losses", losses, "loss matrix CSV to test instead of running a backtest")
      ->check(CLI::ExistingFile);
  auto* stationarity = app.add_subcommand("stationarity", "functional stationarity test per maturity");
  add_common(stationarity, true);
  auto* trade = app.add_subcommand("trade", "ATM straddle strategy driven by one-step forecasts");
  add_common(trade, true);
  add_models(trade);
  auto* synth = app.add_subcommand("synth", "write a synthetic IV panel and market series");
  add_common(synth, false);
  synth->add_option("--days", days, "number of business days to generate");

  CLI11_PARSE(app, argc, argv);
  CLI::App* chosen = app.get_subcommands().front();

  try {
    ivfts::RunConfig cfg = config_path.empty() ? ivfts::RunConfig{} : ivfts::RunConfig::load(config_path);
    if (chosen->count("--seed")) cfg.seed = seed;
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (!horizons.empty()) cfg.horizons = ivfts::parse_int_list(horizons);
    if (!models.empty()) {
      cfg.models = ivfts::parse_name_list(models);
      const bool listed = std::find(cfg.models.begin(), cfg.models.end(), cfg.trade_model) != cfg.models.end();
      if (chosen == trade || !listed) cfg.trade_model = cfg.models.front();
    }
    if (!losses.empty()) cfg.losses_path = losses;
    if (days) cfg.synth_days = days;
    ivfts::run_pipeline(chosen->get_name(), cfg, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "ivfts " << chosen->get_name() << ": " << e.what() << "\n";
    return 1;
  }
  return 0;
}
