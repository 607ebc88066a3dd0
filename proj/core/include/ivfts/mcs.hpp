#pragma once

#include "ivfts/eval.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ivfts {

enum class McsStatistic { TMax, TRange };

struct McsConfig {
  double alpha = 0.05;
  std::size_t n_bootstrap = 5000;
  std::optional<std::size_t> block_length;  // empty: chosen from AR fits of the differentials
  McsStatistic statistic = McsStatistic::TMax;
  std::uint64_t seed = 0;

  void validate() const;
};

struct McsResult {
  std::vector<std::string> superior_set;
  /// Models removed from the set, in removal order, each with its MCS p-value
  /// (running maximum of the equal-ability test p-values up to its removal).
  std::vector<std::pair<std::string, double>> elimination_order;
  std::vector<std::string> model_ids;   // input column order
  std::vector<double> mcs_p_values;     // per input column
  std::size_t block_length = 1;
};

McsResult model_confidence_set(const LossMatrix& losses, const McsConfig& cfg);
McsResult model_confidence_set(const Matrix& losses, const std::vector<std::string>& model_ids,
                               const McsConfig& cfg);

/// Resampled time indices for bootstrap replicate `replicate`: blocks of
/// `block_length` consecutive indices with random starts, wrapping at n.
std::vector<std::size_t> circular_block_indices(std::size_t n, std::size_t block_length,
                                                std::uint64_t seed, std::uint64_t replicate);

/// Largest order p <= max_order whose last least-squares AR(p) coefficient
/// has |t| > 1.96; 1 when none is significant.
std::size_t significant_ar_order(const Eigen::VectorXd& series, std::size_t max_order = 10);

/// Block length shared by all pairwise loss differentials.
std::size_t automatic_block_length(const Matrix& losses, std::size_t max_order = 10);

}  // namespace ivfts
