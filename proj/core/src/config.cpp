#include "ivfts/config.hpp"

#include "ivfts/error.hpp"
#include "ivfts/io.hpp"
#include "ivfts/random.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdio>
#include <filesystem>
#include <set>

namespace ivfts {

namespace pt = boost::property_tree;

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  for (const auto& part : split(text, ',')) {
    const std::string t = trim(part);
    if (t.empty()) continue;
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size()) throw Error("not an integer: '" + t + "'");
    out.push_back(v);
  }
  return out;
}

std::vector<std::string> parse_name_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& part : split(text, ',')) {
    std::string t = trim(part);
    if (!t.empty()) out.push_back(std::move(t));
  }
  return out;
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& value) {
  if (value.empty()) return {};
  const std::filesystem::path p(value);
  return p.is_absolute() ? p : base / p;
}

template <typename T>
T get_number(const pt::ptree& tree, const std::string& key, T fallback) {
  const auto v = tree.get_optional<std::string>(key);
  if (!v) return fallback;
  try {
    if constexpr (std::is_floating_point_v<T>) {
      return static_cast<T>(parse_double(*v));
    } else {
      std::size_t used = 0;
      const std::string t = trim(*v);
      const long long parsed = std::stoll(t, &used);
      if (used != t.size() || parsed < 0) throw Error("");
      return static_cast<T>(parsed);
    }
  } catch (const std::exception&) {
    throw Error("config key '" + key + "' has an invalid value '" + *v + "'");
  }
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ",") + s;
  return out;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("config file not found: " + path.string());
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error("cannot parse config " + path.string() + ": " + e.message() + " at line " + std::to_string(e.line()));
  }
  const std::filesystem::path base = path.parent_path();
  RunConfig cfg;

  cfg.seed = get_number<std::uint64_t>(tree, "run.seed", cfg.seed);
  if (auto out = tree.get_optional<std::string>("run.out")) cfg.out_dir = resolve(base, trim(*out));

  cfg.iv_path = resolve(base, trim(tree.get<std::string>("data.iv", "")));
  cfg.market_path = resolve(base, trim(tree.get<std::string>("data.market", "")));
  if (auto m = tree.get_optional<std::string>("data.maturities")) cfg.maturities = parse_name_list(*m);

  if (auto ids = tree.get_optional<std::string>("models.ids")) cfg.models = parse_name_list(*ids);

  cfg.initial_train = get_number<std::size_t>(tree, "backtest.initial_train", cfg.initial_train);
  if (auto h = tree.get_optional<std::string>("backtest.horizons")) cfg.horizons = parse_int_list(*h);
  cfg.refit_every = get_number<std::size_t>(tree, "backtest.refit_every", cfg.refit_every);

  cfg.mcs.alpha = get_number<double>(tree, "mcs.alpha", cfg.mcs.alpha);
  cfg.mcs.n_bootstrap = get_number<std::size_t>(tree, "mcs.n_bootstrap", cfg.mcs.n_bootstrap);
  if (auto b = tree.get_optional<std::string>("mcs.block_length")) {
    if (trim(*b) != "auto") cfg.mcs.block_length = get_number<std::size_t>(tree, "mcs.block_length", 1);
  }
  if (auto s = tree.get_optional<std::string>("mcs.statistics")) {
    cfg.mcs_statistics.clear();
    for (const auto& name : parse_name_list(*s)) {
      if (name == "tmax")
        cfg.mcs_statistics.push_back(McsStatistic::TMax);
      else if (name == "tr")
        cfg.mcs_statistics.push_back(McsStatistic::TRange);
      else
        throw Error("unknown MCS statistic '" + name + "' (expected tmax or tr)");
    }
  }
  if (auto m = tree.get_optional<std::string>("mcs.metric")) {
    const std::string t = trim(*m);
    if (t == "mafe")
      cfg.mcs_metric = LossMetric::Mafe;
    else if (t == "msfe")
      cfg.mcs_metric = LossMetric::Msfe;
    else
      throw Error("unknown MCS metric '" + t + "' (expected mafe or msfe)");
  }
  cfg.losses_path = resolve(base, trim(tree.get<std::string>("mcs.losses", "")));

  cfg.stationarity_draws = get_number<std::size_t>(tree, "stationarity.n_mc", cfg.stationarity_draws);

  cfg.trade_model = trim(tree.get<std::string>("trading.model", ""));
  cfg.trading.atm_delta = get_number<double>(tree, "trading.atm_delta", cfg.trading.atm_delta);
  cfg.trading.iv_scale = get_number<double>(tree, "trading.iv_scale", cfg.trading.iv_scale);
  cfg.trading.spread = get_number<double>(tree, "trading.spread", cfg.trading.spread);
  cfg.trading.days_per_year = get_number<double>(tree, "trading.days_per_year", cfg.trading.days_per_year);
  cfg.trim_fraction = get_number<double>(tree, "trading.trim", cfg.trim_fraction);
  if (auto section = tree.get_child_optional("trading")) {
    for (const auto& [key, node] : *section)
      if (key.rfind("tenor.", 0) == 0) cfg.trading.tenor_override[key.substr(6)] = parse_double(node.data());
  }

  cfg.synth_days = get_number<std::size_t>(tree, "synth.days", cfg.synth_days);
  if (auto m = tree.get_optional<std::string>("synth.maturities")) cfg.synth_maturities = parse_name_list(*m);

  cfg.validate();
  return cfg;
}

void RunConfig::validate() const {
  std::set<std::string> ids;
  for (const auto& m : models) require(ids.insert(m).second, "duplicate model id '" + m + "' in config");
  require(!models.empty(), "config lists no models");
  (void)model_specs();
  require(!horizons.empty(), "config lists no horizons");
  for (int h : horizons) require(h >= 1, "horizons must be positive");
  require(initial_train >= 30, "initial training window must be at least 30");
  require(refit_every >= 1, "refit interval must be positive");
  mcs.validate();
  require(!mcs_statistics.empty(), "config lists no MCS statistics");
  require(trim_fraction >= 0.0 && trim_fraction < 0.5, "trim fraction must lie in [0, 0.5)");
  require(synth_days >= 30, "synthetic fixtures need at least 30 days");
  require(!synth_maturities.empty(), "synthetic fixtures need at least one maturity");
  if (!trade_model.empty())
    require(ids.count(trade_model) || trade_model == "RW" || trade_model == "AR1",
            "trading model '" + trade_model + "' is not a known model id");
}

std::vector<ModelSpec> RunConfig::model_specs() const {
  std::vector<ModelSpec> out;
  for (const auto& id : models) out.push_back(ModelSpec::parse(id));
  return out;
}

BacktestPlan RunConfig::plan() const {
  BacktestPlan p;
  p.initial_train_size = initial_train;
  p.horizons = horizons;
  p.refit_every = refit_every;
  p.models = model_specs();
  return p;
}

namespace {

// Input files enter the canonical form by content so that the same data hashes
// the same wherever the checkout lives.
std::string input_digest(const std::filesystem::path& path) {
  if (path.empty()) return "";
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) return "missing:" + path.filename().generic_string();
  char buf[24];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx", static_cast<unsigned long long>(fnv1a64(read_file(path))));
  return buf;
}

}  // namespace

std::string RunConfig::canonical() const {
  std::string s;
  auto line = [&](const std::string& key, const std::string& value) { s += key + " = " + value + "\n"; };
  line("run.seed", std::to_string(seed));
  line("data.iv", input_digest(iv_path));
  line("data.market", input_digest(market_path));
  line("data.maturities", join(maturities));
  line("models.ids", join(models));
  line("backtest.initial_train", std::to_string(initial_train));
  std::vector<std::string> hs;
  for (int h : horizons) hs.push_back(std::to_string(h));
  line("backtest.horizons", join(hs));
  line("backtest.refit_every", std::to_string(refit_every));
  line("mcs.alpha", format_double(mcs.alpha));
  line("mcs.n_bootstrap", std::to_string(mcs.n_bootstrap));
  line("mcs.block_length", mcs.block_length ? std::to_string(*mcs.block_length) : "auto");
  std::vector<std::string> stats;
  for (auto st : mcs_statistics) stats.push_back(st == McsStatistic::TMax ? "tmax" : "tr");
  line("mcs.statistics", join(stats));
  line("mcs.metric", to_string(mcs_metric));
  line("mcs.losses", input_digest(losses_path));
  line("stationarity.n_mc", std::to_string(stationarity_draws));
  line("trading.model", trade_model);
  line("trading.atm_delta", format_double(trading.atm_delta));
  line("trading.iv_scale", format_double(trading.iv_scale));
  line("trading.spread", format_double(trading.spread));
  line("trading.days_per_year", format_double(trading.days_per_year));
  line("trading.trim", format_double(trim_fraction));
  for (const auto& [k, v] : trading.tenor_override) line("trading.tenor." + k, format_double(v));
  line("synth.days", std::to_string(synth_days));
  line("synth.maturities", join(synth_maturities));
  return s;
}

std::string RunConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical())));
  return buf;
}

}  // namespace ivfts
