#include "ivfts/mcs.hpp"

#include "ivfts/error.hpp"
#include "ivfts/parallel.hpp"
#include "ivfts/random.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ivfts {

void McsConfig::validate() const {
  require(alpha > 0.0 && alpha < 1.0, "MCS alpha must lie in (0, 1)");
  require(n_bootstrap >= 1, "MCS needs at least one bootstrap replicate");
  if (block_length) require(*block_length >= 1, "MCS block length must be positive");
}

std::vector<std::size_t> circular_block_indices(std::size_t n, std::size_t block_length,
                                                std::uint64_t seed, std::uint64_t replicate) {
  require(n >= 1 && block_length >= 1, "bootstrap needs a nonempty series and a positive block length");
  Rng rng = counter_rng(seed, replicate);
  std::uniform_int_distribution<std::size_t> start(0, n - 1);
  std::vector<std::size_t> out;
  out.reserve(n);
  while (out.size() < n) {
    const std::size_t s = start(rng);
    for (std::size_t i = 0; i < block_length && out.size() < n; ++i) out.push_back((s + i) % n);
  }
  return out;
}

std::size_t significant_ar_order(const Eigen::VectorXd& series, std::size_t max_order) {
  const auto n = static_cast<std::size_t>(series.size());
  std::size_t best = 1;
  for (std::size_t p = 1; p <= max_order; ++p) {
    if (n < 2 * p + 4) break;
    const std::size_t rows = n - p;
    Matrix x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p + 1));
    Eigen::VectorXd y(static_cast<Eigen::Index>(rows));
    for (std::size_t t = 0; t < rows; ++t) {
      const auto r = static_cast<Eigen::Index>(t);
      y[r] = series[static_cast<Eigen::Index>(t + p)];
      x(r, 0) = 1.0;
      for (std::size_t l = 1; l <= p; ++l)
        x(r, static_cast<Eigen::Index>(l)) = series[static_cast<Eigen::Index>(t + p - l)];
    }
    const Eigen::ColPivHouseholderQR<Matrix> qr(x);
    if (qr.rank() < x.cols()) continue;
    const Eigen::VectorXd beta = qr.solve(y);
    const double rss = (y - x * beta).squaredNorm();
    const double sigma2 = rss / static_cast<double>(rows - p - 1);
    const Matrix xtx_inv = (x.transpose() * x).inverse();
    const double se = std::sqrt(sigma2 * xtx_inv(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p)));
    if (se > 0.0 && std::abs(beta[static_cast<Eigen::Index>(p)]) / se > 1.96) best = p;
  }
  return best;
}

std::size_t automatic_block_length(const Matrix& losses, std::size_t max_order) {
  std::size_t block = 1;
  for (Eigen::Index a = 0; a < losses.cols(); ++a)
    for (Eigen::Index b = a + 1; b < losses.cols(); ++b) {
      const Eigen::VectorXd d = losses.col(a) - losses.col(b);
      block = std::max(block, significant_ar_order(d, max_order));
    }
  return block;
}

namespace {

// Mean of the selected entries, summed in sorted order so the result does not
// depend on the column order of the loss matrix.
double sorted_mean(const double* values, const std::vector<std::size_t>& active, std::vector<double>& scratch) {
  scratch.clear();
  for (std::size_t i : active) scratch.push_back(values[i]);
  std::sort(scratch.begin(), scratch.end());
  double sum = 0.0;
  for (double v : scratch) sum += v;
  return sum / static_cast<double>(scratch.size());
}

struct StepOutcome {
  std::size_t worst = 0;  // position in the active list
  double p_value = 1.0;
};

class McsEngine {
 public:
  McsEngine(const Matrix& losses, const McsConfig& cfg, std::size_t block)
      : m_(static_cast<std::size_t>(losses.cols())), b_(cfg.n_bootstrap) {
    const auto n = static_cast<std::size_t>(losses.rows());
    means_ = losses.colwise().mean().transpose();
    boot_ = Matrix(static_cast<Eigen::Index>(m_), static_cast<Eigen::Index>(b_));
    parallel_for(b_, [&](std::size_t rep) {
      const auto idx = circular_block_indices(n, block, cfg.seed, rep);
      for (std::size_t j = 0; j < m_; ++j) {
        double sum = 0.0;
        for (std::size_t i : idx) sum += losses(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
        boot_(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(rep)) = sum / static_cast<double>(n);
      }
    });
    const double scale = std::max(1.0, losses.cwiseAbs().maxCoeff());
    tiny_sd_ = 1e-12 * scale;
  }

  StepOutcome step_tmax(const std::vector<std::size_t>& active) const {
    const std::size_t k = active.size();
    std::vector<double> scratch;
    std::vector<double> d(k);
    const double centre = sorted_mean(means_.data(), active, scratch);
    for (std::size_t a = 0; a < k; ++a) d[a] = means_[static_cast<Eigen::Index>(active[a])] - centre;

    Matrix dev(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(b_));
    for (std::size_t rep = 0; rep < b_; ++rep) {
      const double* col = boot_.col(static_cast<Eigen::Index>(rep)).data();
      const double c = sorted_mean(col, active, scratch);
      for (std::size_t a = 0; a < k; ++a)
        dev(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(rep)) = (col[active[a]] - c) - d[a];
    }

    std::vector<double> sd(k);
    std::vector<double> t(k, 0.0);
    for (std::size_t a = 0; a < k; ++a) {
      sd[a] = std::sqrt(dev.row(static_cast<Eigen::Index>(a)).squaredNorm() / static_cast<double>(b_));
      if (sd[a] > tiny_sd_) t[a] = d[a] / sd[a];
    }
    StepOutcome out;
    out.worst = static_cast<std::size_t>(std::max_element(t.begin(), t.end()) - t.begin());
    const double stat = t[out.worst];

    bool any = false;
    std::size_t exceed = 0;
    for (std::size_t rep = 0; rep < b_; ++rep) {
      double star = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < k; ++a) {
        if (!(sd[a] > tiny_sd_)) continue;
        any = true;
        star = std::max(star, dev(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(rep)) / sd[a]);
      }
      if (star > stat) ++exceed;
    }
    out.p_value = any ? static_cast<double>(exceed) / static_cast<double>(b_) : 1.0;
    return out;
  }

  StepOutcome step_trange(const std::vector<std::size_t>& active) const {
    const std::size_t k = active.size();
    Matrix t = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    Matrix sd = Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t c = a + 1; c < k; ++c) {
        const auto ia = static_cast<Eigen::Index>(active[a]);
        const auto ic = static_cast<Eigen::Index>(active[c]);
        const double d = means_[ia] - means_[ic];
        const double var =
            ((boot_.row(ia) - boot_.row(ic)).array() - d).square().sum() / static_cast<double>(b_);
        const double s = std::sqrt(var);
        sd(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = s;
        if (s > tiny_sd_) {
          t(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = d / s;
          t(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(a)) = -d / s;
        }
      }

    StepOutcome out;
    double worst_score = -std::numeric_limits<double>::infinity();
    double stat = 0.0;
    for (std::size_t a = 0; a < k; ++a) {
      const double row_max = t.row(static_cast<Eigen::Index>(a)).maxCoeff();
      if (row_max > worst_score) {
        worst_score = row_max;
        out.worst = a;
      }
      stat = std::max(stat, t.row(static_cast<Eigen::Index>(a)).cwiseAbs().maxCoeff());
    }

    bool any = false;
    std::size_t exceed = 0;
    for (std::size_t rep = 0; rep < b_; ++rep) {
      double star = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = a + 1; c < k; ++c) {
          const double s = sd(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c));
          if (!(s > tiny_sd_)) continue;
          any = true;
          const auto ia = static_cast<Eigen::Index>(active[a]);
          const auto ic = static_cast<Eigen::Index>(active[c]);
          const auto r = static_cast<Eigen::Index>(rep);
          const double dev = (boot_(ia, r) - boot_(ic, r)) - (means_[ia] - means_[ic]);
          star = std::max(star, std::abs(dev) / s);
        }
      if (star > stat) ++exceed;
    }
    out.p_value = any ? static_cast<double>(exceed) / static_cast<double>(b_) : 1.0;
    return out;
  }

 private:
  std::size_t m_;
  std::size_t b_;
  Eigen::VectorXd means_;
  Matrix boot_;  // bootstrap mean loss, model x replicate
  double tiny_sd_ = 0.0;
};

}  // namespace

McsResult model_confidence_set(const Matrix& losses, const std::vector<std::string>& model_ids,
                               const McsConfig& cfg) {
  cfg.validate();
  const auto m = static_cast<std::size_t>(losses.cols());
  require(m >= 2, "MCS needs at least two models");
  require(losses.rows() >= 20, "MCS needs at least 20 forecast origins");
  require(model_ids.size() == m, "one model id is needed per loss column");
  require(losses.allFinite(), "loss matrix contains non-finite values");

  McsResult result;
  result.model_ids = model_ids;
  result.block_length = cfg.block_length ? *cfg.block_length : automatic_block_length(losses);
  result.block_length = std::min(result.block_length, static_cast<std::size_t>(losses.rows()));
  const McsEngine engine(losses, cfg, result.block_length);

  std::vector<std::size_t> active(m);
  for (std::size_t j = 0; j < m; ++j) active[j] = j;
  result.mcs_p_values.assign(m, 1.0);
  double running = 0.0;
  while (active.size() > 1) {
    const StepOutcome step =
        cfg.statistic == McsStatistic::TMax ? engine.step_tmax(active) : engine.step_trange(active);
    const std::size_t removed = active[step.worst];
    running = std::max(running, step.p_value);
    result.mcs_p_values[removed] = running;
    if (running < cfg.alpha) result.elimination_order.emplace_back(model_ids[removed], running);
    active.erase(active.begin() + static_cast<std::ptrdiff_t>(step.worst));
  }
  for (std::size_t j = 0; j < m; ++j)
    if (result.mcs_p_values[j] >= cfg.alpha) result.superior_set.push_back(model_ids[j]);
  return result;
}

McsResult model_confidence_set(const LossMatrix& losses, const McsConfig& cfg) {
  return model_confidence_set(losses.values, losses.model_ids, cfg);
}

}  // namespace ivfts
