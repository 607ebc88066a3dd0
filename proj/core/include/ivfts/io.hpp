#pragma once

// CSV ingestion and emission. Files are plain comma-separated text with a
// header row; quoted fields are not supported and lines starting with '#'
// are skipped.

#include "ivfts/eval.hpp"
#include "ivfts/fda.hpp"
#include "ivfts/trading.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace ivfts {

struct IvData {
  PanelSet panels;
  std::size_t dropped_days = 0;  // days missing at least one (maturity, delta) cell
};

/// Reads long-format quotes (date,maturity,delta,iv) and pivots them into
/// aligned panels. `maturities` selects and orders the panels; when empty,
/// maturities appear in order of first occurrence.
IvData ingest_iv_csv(const std::filesystem::path& path, const std::vector<std::string>& maturities = {});
std::string iv_csv(const PanelSet& set);

MarketSeries read_market_csv(const std::filesystem::path& path);
std::string market_csv(const MarketSeries& market);

/// Loss matrix as target_date followed by one column per model.
std::string loss_csv(const LossMatrix& losses);
LossMatrix read_loss_csv(const std::filesystem::path& path);

/// Shortest text that reads back to exactly the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view text, char delimiter);
std::string trim(std::string_view text);

/// Writes through a temporary file in the same directory and renames it into
/// place, so readers never observe a partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Lower-case alphanumerics with other characters folded to '_', for file names.
std::string file_token(std::string_view label);

}  // namespace ivfts
