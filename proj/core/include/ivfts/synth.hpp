#pragma once

// Synthetic smile panels and market series for fixtures and demos.

#include "ivfts/fda.hpp"
#include "ivfts/trading.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ivfts {

struct SynthOptions {
  std::size_t days = 120;
  std::vector<std::string> maturities{"1M", "3M", "1Y"};
  std::vector<double> deltas{10.0, 25.0, 50.0, 75.0, 90.0};
};

struct SynthData {
  PanelSet panels;
  MarketSeries market;
};

/// Smiles with a shared level/skew factor pair, a maturity-specific level
/// factor and measurement noise, quoted in vol points on business days.
SynthData synthesize(const SynthOptions& options, std::uint64_t seed);

/// Weekday dates (YYYY-MM-DD) starting at 2016-01-04.
std::vector<std::string> business_days(std::size_t count);

}  // namespace ivfts
