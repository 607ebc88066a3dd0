#pragma once

// Subcommand drivers. Each reads what it needs from the config, writes its
// reports under cfg.out_dir and returns the paths it wrote.

#include "ivfts/config.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace ivfts {

using Written = std::vector<std::filesystem::path>;

Written run_fit(const RunConfig& cfg, std::ostream& log);
Written run_backtest_reports(const RunConfig& cfg, std::ostream& log);
Written run_mcs_reports(const RunConfig& cfg, std::ostream& log);
Written run_stationarity_reports(const RunConfig& cfg, std::ostream& log);
Written run_trade_reports(const RunConfig& cfg, std::ostream& log);
Written run_synth(const RunConfig& cfg, std::ostream& log);

/// Dispatches on a subcommand name.
Written run_pipeline(const std::string& command, const RunConfig& cfg, std::ostream& log);

/// Seed for an MCS run, derived from the global seed and a label such as
/// "h1/1M/tmax" or "file/tmax" (the latter for a loss-matrix file).
std::uint64_t mcs_seed(const RunConfig& cfg, const std::string& label);

}  // namespace ivfts
