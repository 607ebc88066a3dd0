#include "ivfts/pipeline.hpp"

#include "ivfts/error.hpp"
#include "ivfts/eval.hpp"
#include "ivfts/io.hpp"
#include "ivfts/mcs.hpp"
#include "ivfts/random.hpp"
#include "ivfts/stationarity.hpp"
#include "ivfts/synth.hpp"
#include "ivfts/trading.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

namespace ivfts {

using Json = nlohmann::ordered_json;

namespace {

std::string header_comment(const std::string& command, const RunConfig& cfg) {
  return "# ivfts " + command + " config_hash=" + cfg.hash() + " seed=" + std::to_string(cfg.seed) + "\n";
}

Json meta(const std::string& command, const RunConfig& cfg) {
  Json j;
  j["command"] = command;
  j["config_hash"] = cfg.hash();
  j["seed"] = cfg.seed;
  return j;
}

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string cell(double v) { return std::isfinite(v) ? format_double(v) : "NA"; }

class Reports {
 public:
  Reports(const RunConfig& cfg, std::ostream& log) : cfg_(cfg), log_(log) {}

  void write(const std::string& name, const std::string& content) {
    const auto path = cfg_.out_dir / name;
    write_file_atomic(path, content);
    log_ << "wrote " << path.string() << "\n";
    written_.push_back(path);
  }
  void write_json(const std::string& name, const Json& j) { write(name, j.dump(2) + "\n"); }

  Written done() { return std::move(written_); }

 private:
  const RunConfig& cfg_;
  std::ostream& log_;
  Written written_;
};

PanelSet load_panels(const RunConfig& cfg, std::ostream& log) {
  if (cfg.iv_path.empty()) throw Error("config does not name an implied-volatility file ([data] iv)");
  IvData data = ingest_iv_csv(cfg.iv_path, cfg.maturities);
  log << "loaded " << data.panels.rows() << " days x " << data.panels.size() << " maturities from "
      << cfg.iv_path.string();
  if (data.dropped_days) log << " (dropped " << data.dropped_days << " incomplete days)";
  log << "\n";
  return std::move(data.panels);
}

ModelSpec fixed_four(const ModelSpec& spec) {
  ModelSpec s = spec;
  s.k_rule = ComponentRule::fixed(4);
  if (s.l_rule) s.l_rule = ComponentRule::fixed(4);
  return s;
}

std::string statistic_name(McsStatistic s) { return s == McsStatistic::TMax ? "tmax" : "tr"; }

Json mcs_json(const McsResult& r) {
  Json j;
  j["block_length"] = r.block_length;
  j["superior_set"] = r.superior_set;
  Json elim = Json::array();
  for (const auto& [id, p] : r.elimination_order) elim.push_back({{"model", id}, {"p_value", p}});
  j["eliminated"] = elim;
  Json p = Json::object();
  for (std::size_t i = 0; i < r.model_ids.size(); ++i) p[r.model_ids[i]] = r.mcs_p_values[i];
  j["mcs_p_values"] = p;
  return j;
}

std::string join(const std::vector<std::string>& items, char sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

}  // namespace

std::uint64_t mcs_seed(const RunConfig& cfg, const std::string& label) {
  return substream_seed(cfg.seed, "mcs/" + label);
}

Written run_fit(const RunConfig& cfg, std::ostream& log) {
  const PanelSet set = load_panels(cfg, log);
  Reports reports(cfg, log);
  std::string summary = header_comment("fit", cfg) + "model,variant,maturity,retained_k,retained_l,r2_total\n";
  std::string pointwise = header_comment("fit", cfg) + "model,variant,maturity,delta,r2\n";
  Json report = meta("fit", cfg);
  report["days"] = set.rows();
  Json models = Json::array();

  for (const auto& configured : cfg.model_specs()) {
    if (!configured.functional()) continue;
    std::vector<std::pair<std::string, ModelSpec>> variants{{"configured", configured}};
    const bool already_four = configured.k_rule.mode == ComponentRule::Mode::Fixed && configured.k_rule.count == 4;
    if (!already_four) variants.emplace_back("K4", fixed_four(configured));

    for (const auto& [variant, spec] : variants) {
      const auto model = fit_model(set, spec);
      const auto ks = model->retained_k();
      const auto ls = model->retained_l();
      Json entry{{"model", configured.id}, {"variant", variant}};
      Json per = Json::array();
      std::vector<double> wcv;
      if (spec.family == ModelFamily::Multilevel) {
        const MultilevelFit ml = fit_multilevel(set, spec);
        for (std::size_t j = 0; j < set.size(); ++j) wcv.push_back(within_cluster_variability(ml, j));
      }
      for (std::size_t j = 0; j < set.size(); ++j) {
        const RSquared r2 = r_squared(set[j], model->fitted(j));
        const std::string l = ls.empty() ? "" : std::to_string(ls[j]);
        summary += configured.id + "," + variant + "," + set[j].maturity() + "," + std::to_string(ks[j]) + "," + l +
                   "," + cell(r2.total) + "\n";
        for (std::size_t k = 0; k < set.grid().size(); ++k)
          pointwise += configured.id + "," + variant + "," + set[j].maturity() + "," +
                       format_double(set.grid().points()[k]) + "," +
                       cell(r2.pointwise[static_cast<Eigen::Index>(k)]) + "\n";
        Json m{{"maturity", set[j].maturity()}, {"retained_k", ks[j]}, {"r2_total", number(r2.total)}};
        if (!ls.empty()) m["retained_l"] = ls[j];
        if (!wcv.empty()) m["within_cluster_variability"] = wcv[j];
        per.push_back(m);
      }
      entry["maturities"] = per;
      models.push_back(entry);
    }
  }
  report["models"] = models;
  reports.write("fit_summary.csv", summary);
  reports.write("fit_r2.csv", pointwise);
  reports.write_json("fit.json", report);
  return reports.done();
}

namespace {

void write_backtest(const RunConfig& cfg, const PanelSet& set, const BacktestResult& result, Reports& reports) {
  std::string errors = header_comment("backtest", cfg) + "horizon,model,maturity,delta,mafe,msfe\n";
  std::string summary =
      header_comment("backtest", cfg) + "horizon,model,maturity,forecasts,mafe,msfe,mme_u,mme_o\n";
  Json report = meta("backtest", cfg);
  report["days"] = set.rows();
  report["initial_train"] = cfg.initial_train;
  report["refit_every"] = cfg.refit_every;
  Json horizons = Json::array();

  for (int h : cfg.horizons) {
    Json hj{{"horizon", h}};
    Json models = Json::array();
    for (const auto& spec : cfg.model_specs()) {
      const ForecastTrack& track = result.track(spec.id, h);
      Json mj{{"model", spec.id}, {"forecasts", track.bundles.size()}};
      Json mats = Json::array();
      for (std::size_t j = 0; j < set.size(); ++j) {
        std::vector<Curve> actual, forecast;
        for (const auto& b : track.bundles) {
          actual.push_back(set[j].row(b.origin_index - 1 + static_cast<std::size_t>(h)));
          forecast.push_back(b.forecasts[j]);
        }
        for (std::size_t k = 0; k < set.grid().size(); ++k) {
          double abs_sum = 0.0, sq_sum = 0.0;
          for (std::size_t r = 0; r < actual.size(); ++r) {
            const double e = actual[r][static_cast<Eigen::Index>(k)] - forecast[r][static_cast<Eigen::Index>(k)];
            abs_sum += std::abs(e);
            sq_sum += e * e;
          }
          const double count = static_cast<double>(actual.size());
          errors += std::to_string(h) + "," + spec.id + "," + set[j].maturity() + "," +
                    format_double(set.grid().points()[k]) + "," + format_double(abs_sum / count) + "," +
                    format_double(sq_sum / count) + "\n";
        }
        const double a = mean_mafe(actual, forecast);
        const double s = mean_msfe(actual, forecast);
        const double u = mme(actual, forecast, MmeFlavor::Under);
        const double o = mme(actual, forecast, MmeFlavor::Over);
        summary += std::to_string(h) + "," + spec.id + "," + set[j].maturity() + "," +
                   std::to_string(actual.size()) + "," + format_double(a) + "," + format_double(s) + "," +
                   format_double(u) + "," + format_double(o) + "\n";
        mats.push_back({{"maturity", set[j].maturity()}, {"mafe", a}, {"msfe", s}, {"mme_u", u}, {"mme_o", o}});
      }
      mj["maturities"] = mats;
      models.push_back(mj);
    }
    hj["models"] = models;
    horizons.push_back(hj);
  }
  report["horizons"] = horizons;

  for (const auto& loss : result.losses)
    reports.write("losses/" + to_string(loss.metric) + "_h" + std::to_string(loss.horizon) + "_" +
                      file_token(loss.maturity) + ".csv",
                  header_comment("backtest", cfg) + loss_csv(loss));
  reports.write("errors_by_delta.csv", errors);
  reports.write("error_summary.csv", summary);
  reports.write_json("backtest.json", report);
}

}  // namespace

Written run_backtest_reports(const RunConfig& cfg, std::ostream& log) {
  const PanelSet set = load_panels(cfg, log);
  const BacktestResult result = run_backtest(set, cfg.plan());
  Reports reports(cfg, log);
  write_backtest(cfg, set, result, reports);
  return reports.done();
}

Written run_mcs_reports(const RunConfig& cfg, std::ostream& log) {
  Reports reports(cfg, log);
  Json report = meta("mcs", cfg);
  report["metric"] = to_string(cfg.mcs_metric);
  report["alpha"] = cfg.mcs.alpha;
  report["n_bootstrap"] = cfg.mcs.n_bootstrap;

  if (!cfg.losses_path.empty()) {
    const LossMatrix losses = read_loss_csv(cfg.losses_path);
    Json runs = Json::array();
    for (auto stat : cfg.mcs_statistics) {
      McsConfig mc = cfg.mcs;
      mc.statistic = stat;
      mc.seed = mcs_seed(cfg, "file/" + statistic_name(stat));
      Json r = mcs_json(model_confidence_set(losses, mc));
      r["statistic"] = statistic_name(stat);
      runs.push_back(r);
    }
    report["source"] = "loss file";
    report["runs"] = runs;
    reports.write_json("mcs.json", report);
    return reports.done();
  }

  const PanelSet set = load_panels(cfg, log);
  const BacktestResult result = run_backtest(set, cfg.plan());
  std::string table = header_comment("mcs", cfg) + "horizon,maturity,statistic,superior_set,eliminated\n";
  Json runs = Json::array();
  for (int h : cfg.horizons)
    for (const auto& panel : set) {
      const LossMatrix& losses = result.loss(cfg.mcs_metric, panel.maturity(), h);
      for (auto stat : cfg.mcs_statistics) {
        McsConfig mc = cfg.mcs;
        mc.statistic = stat;
        const std::string label = "h" + std::to_string(h) + "/" + panel.maturity() + "/" + statistic_name(stat);
        mc.seed = mcs_seed(cfg, label);
        const McsResult r = model_confidence_set(losses, mc);
        std::vector<std::string> eliminated;
        for (const auto& e : r.elimination_order) eliminated.push_back(e.first);
        table += std::to_string(h) + "," + panel.maturity() + "," + statistic_name(stat) + "," +
                 join(r.superior_set, ';') + "," + join(eliminated, ';') + "\n";
        Json rj = mcs_json(r);
        rj["horizon"] = h;
        rj["maturity"] = panel.maturity();
        rj["statistic"] = statistic_name(stat);
        runs.push_back(rj);
      }
    }
  report["source"] = "backtest";
  report["runs"] = runs;
  reports.write("mcs_table.csv", table);
  reports.write_json("mcs.json", report);
  return reports.done();
}

Written run_stationarity_reports(const RunConfig& cfg, std::ostream& log) {
  const PanelSet set = load_panels(cfg, log);
  Reports reports(cfg, log);
  std::string table = header_comment("stationarity", cfg) + "maturity,statistic,p_value,components,lrv_lag\n";
  Json report = meta("stationarity", cfg);
  report["n_mc"] = cfg.stationarity_draws;
  Json rows = Json::array();
  for (const auto& panel : set) {
    const auto r = stationarity_test(panel, cfg.stationarity_draws,
                                     substream_seed(cfg.seed, "stationarity/" + panel.maturity()));
    table += panel.maturity() + "," + format_double(r.statistic) + "," + format_double(r.p_value) + "," +
             std::to_string(r.components) + "," + std::to_string(r.lrv_lag) + "\n";
    rows.push_back({{"maturity", panel.maturity()},
                    {"statistic", r.statistic},
                    {"p_value", r.p_value},
                    {"components", r.components},
                    {"lrv_lag", r.lrv_lag}});
  }
  report["tests"] = rows;
  reports.write("stationarity.csv", table);
  reports.write_json("stationarity.json", report);
  return reports.done();
}

Written run_trade_reports(const RunConfig& cfg, std::ostream& log) {
  if (cfg.market_path.empty()) throw Error("config does not name a market file ([data] market)");
  const MarketSeries market = read_market_csv(cfg.market_path);
  const PanelSet set = load_panels(cfg, log);

  const std::string model_id = cfg.trade_model.empty() ? cfg.model_specs().front().id : cfg.trade_model;
  BacktestPlan plan;
  plan.initial_train_size = cfg.initial_train;
  plan.horizons = {1};
  plan.refit_every = cfg.refit_every;
  plan.models = {ModelSpec::parse(model_id)};
  const BacktestResult bt = run_backtest(set, plan);
  const StrategyResult strategy =
      straddle_strategy(bt.track(plan.models.front().id, 1).bundles, set, market, cfg.trading);
  if (strategy.zero_premium_days)
    log << "warning: " << strategy.zero_premium_days << " book-days had zero entry premium and were left flat\n";

  Reports reports(cfg, log);
  std::string trades = header_comment("trade", cfg) + "date,book,signal,entry,exit,return\n";
  std::string stats =
      header_comment("trade", cfg) + "book,sample,count,mean,t_stat,one_sided_p,sharpe,sortino\n";
  Json report = meta("trade", cfg);
  report["model"] = plan.models.front().id;
  report["trim"] = cfg.trim_fraction;
  Json books = Json::array();

  std::vector<const TradeLedger*> ledgers;
  for (const auto& l : strategy.per_maturity) ledgers.push_back(&l);
  ledgers.push_back(&strategy.portfolio);
  for (const TradeLedger* ledger : ledgers) {
    for (const auto& r : ledger->records)
      trades += r.date + "," + ledger->maturity + "," + std::to_string(static_cast<int>(r.signal)) + "," +
                format_double(r.entry) + "," + format_double(r.exit) + "," + format_double(r.ret) + "\n";
    Json bj{{"book", ledger->maturity}, {"active_days", ledger->active_days()}};
    for (const auto& [label, fraction] : {std::pair<std::string, double>{"full", 0.0}, {"trimmed", cfg.trim_fraction}}) {
      try {
        const PerformanceStats s = performance_stats(*ledger, fraction);
        stats += ledger->maturity + "," + label + "," + std::to_string(s.count) + "," + cell(s.mean) + "," +
                 cell(s.t_stat) + "," + cell(s.one_sided_p) + "," + cell(s.sharpe) + "," + cell(s.sortino) + "\n";
        bj[label] = {{"count", s.count},         {"mean", number(s.mean)},     {"t_stat", number(s.t_stat)},
                     {"one_sided_p", number(s.one_sided_p)}, {"sharpe", number(s.sharpe)}, {"sortino", number(s.sortino)}};
      } catch (const Error& e) {
        stats += ledger->maturity + "," + label + ",0,NA,NA,NA,NA,NA\n";
        bj[label] = {{"error", e.what()}};
      }
    }
    books.push_back(bj);
  }
  report["books"] = books;
  reports.write("trades.csv", trades);
  reports.write("trade_stats.csv", stats);
  reports.write_json("trade.json", report);
  return reports.done();
}

Written run_synth(const RunConfig& cfg, std::ostream& log) {
  SynthOptions options;
  options.days = cfg.synth_days;
  options.maturities = cfg.synth_maturities;
  const SynthData data = synthesize(options, cfg.seed);
  Reports reports(cfg, log);
  reports.write("iv.csv", iv_csv(data.panels));
  reports.write("market.csv", market_csv(data.market));
  return reports.done();
}

Written run_pipeline(const std::string& command, const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  if (command == "fit") return run_fit(cfg, log);
  if (command == "backtest") return run_backtest_reports(cfg, log);
  if (command == "mcs") return run_mcs_reports(cfg, log);
  if (command == "stationarity") return run_stationarity_reports(cfg, log);
  if (command == "trade") return run_trade_reports(cfg, log);
  if (command == "synth") return run_synth(cfg, log);
  throw Error("unknown command '" + command + "'");
}

}  // namespace ivfts
