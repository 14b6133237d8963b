// Implementations behind the CLI subcommands (synth / train / backtest /
// report). Kept in the library so tests can drive the exact pipeline the
// binary runs.
#pragma once

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "spreadcast/backtest.hpp"
#include "spreadcast/calendar_features.hpp"
#include "spreadcast/checkpoint.hpp"
#include "spreadcast/market_data.hpp"
#include "spreadcast/metrics_report.hpp"
#include "spreadcast/run_config.hpp"
#include "spreadcast/walkforward.hpp"

namespace spreadcast {

struct RunOptions {
    std::filesystem::path out_dir;
    std::string setting = "all";  // A..G or "all"
    std::string strategy = "all"; // T1..T7 or "all"
    std::optional<uint64_t> seed; // overrides the config seed
};

inline uint64_t effective_seed(const RunConfig& cfg, const RunOptions& opt) {
    return opt.seed.value_or(cfg.seed);
}

inline std::vector<TrainingSetting> selected_settings(const RunConfig& cfg,
                                                      const std::string& selector) {
    std::vector<TrainingSetting> out;
    if (selector == "all") {
        for (const auto& label : detail::split_list(cfg.settings)) {
            out.push_back(setting_by_label(label));
        }
    } else {
        out.push_back(setting_by_label(selector));
    }
    if (out.empty()) throw ConfigError("no settings selected");
    return out;
}

inline std::vector<StrategyId> selected_strategies(const std::string& selector) {
    if (selector == "all") {
        return {kAllStrategies.begin(), kAllStrategies.end()};
    }
    return {parse_strategy(selector)};
}

namespace detail {

inline std::set<CalDay> holidays_for(const RunConfig& cfg, DayRange range) {
    if (!cfg.holidays_file.empty()) {
        return load_holidays_file(cfg.holidays_file);
    }
    return nerc_holidays(range.first.year(), range.last.year());
}

inline std::filesystem::path predictions_path(const RunOptions& opt, const std::string& label) {
    return opt.out_dir / ("predictions_" + label + ".csv");
}

} // namespace detail

// synth: write a synthetic dataset to <out>/prices.csv and <out>/forecasts.csv.
inline void cmd_synth(const RunConfig& cfg, const RunOptions& opt, std::ostream& os = std::cout) {
    SynthConfig synth = cfg.synth;
    synth.seed = effective_seed(cfg, opt);
    const MarketDataset ds = generate_synthetic(synth);
    save_dataset(ds, opt.out_dir / "prices.csv", opt.out_dir / "forecasts.csv");
    os << "synth: " << ds.n_days() << " days (" << ds.date_range().to_string() << "), "
       << ds.forecasts().size() << " forecast series -> " << opt.out_dir.string() << "\n";
}

// train: hyperparameter search + walk-forward per setting; writes
// predictions_<label>.csv and model_<label>.ckpt.
inline void cmd_train(const RunConfig& cfg, const RunOptions& opt, std::ostream& os = std::cout) {
    cfg.require_dates();
    const MarketDataset ds = load_dataset(cfg.require_prices(), cfg.require_forecasts());
    const uint64_t seed = effective_seed(cfg, opt);

    WalkForwardOptions wf_opts;
    wf_opts.quantizer = cfg.quantizer;
    wf_opts.holidays = detail::holidays_for(cfg, ds.date_range());

    const WalkForwardPlan plan =
        make_plan(ds.date_range(), *cfg.initial_train_end, *cfg.test_start, *cfg.test_end);
    os << "train: " << ds.n_days() << " days loaded, " << plan.steps.size()
       << " walk-forward steps\n";

    for (const TrainingSetting& setting : selected_settings(cfg, opt.setting)) {
        const uint64_t setting_seed =
            mix_seed(seed, static_cast<uint64_t>(setting.label.empty() ? 0 : setting.label[0]));
        const SearchResult search =
            search_hyperparams(ds, setting, plan, cfg.n_trials, setting_seed, wf_opts);
        os << "setting " << setting.label << ": best trial " << search.best_index << " (layers="
           << search.best.n_layers << ", dropout=" << fmt6(search.best.pe_dropout)
           << ", lr=" << fmt6(search.best.learning_rate)
           << ", wd=" << fmt6(search.best.weight_decay) << ")\n";

        ModelParams final_params;
        const PredictionLog log =
            run_walkforward(ds, setting, search.best, plan, setting_seed, wf_opts, &final_params);
        for (const auto& step : log.steps) {
            os << "  step " << step.index << " train " << step.train_used.to_string()
               << (step.truncated ? " (truncated)" : "") << " val_loss "
               << fmt6(step.best_val_loss) << " train_loss " << fmt6(step.final_train_loss)
               << " epochs " << step.epochs_run << "\n";
        }
        save_prediction_log(log, detail::predictions_path(opt, setting.label));
        save_checkpoint(final_params, opt.out_dir / ("model_" + setting.label + ".ckpt"));
    }
}

// backtest: apply the selected strategies to each setting's prediction log;
// writes backtest_<label>.csv and blotter_<label>.csv.
inline void cmd_backtest(const RunConfig& cfg, const RunOptions& opt,
                         std::ostream& os = std::cout) {
    const std::vector<StrategyId> strategies = selected_strategies(opt.strategy);
    for (const TrainingSetting& setting : selected_settings(cfg, opt.setting)) {
        const PredictionLog log =
            load_prediction_log(detail::predictions_path(opt, setting.label), setting.label);
        const ActualSpreads actuals = ActualSpreads::from_log(log);
        std::vector<BacktestResult> results;
        results.reserve(strategies.size());
        for (const StrategyId s : strategies) {
            results.push_back(run_backtest(s, log, cfg.uplift, actuals));
            os << "backtest " << setting.label << " " << strategy_name(s) << ": total "
               << fmt6(results.back().total) << " over " << results.back().daily.size()
               << " days\n";
        }
        write_backtest_csv(results, opt.out_dir / ("backtest_" + setting.label + ".csv"));
        write_blotter_csv(results, opt.out_dir / ("blotter_" + setting.label + ".csv"));
    }
}

// report: metrics + confusion matrices + profit curves under <out>/report/.
inline void cmd_report(const RunConfig& cfg, const RunOptions& opt,
                       std::ostream& os = std::cout) {
    const std::vector<StrategyId> strategies = selected_strategies(opt.strategy);
    ReportBundle bundle;
    bundle.seed = effective_seed(cfg, opt);
    bundle.config_hash = cfg.config_hash;
    for (const TrainingSetting& setting : selected_settings(cfg, opt.setting)) {
        const PredictionLog log =
            load_prediction_log(detail::predictions_path(opt, setting.label), setting.label);
        bundle.settings.push_back(build_setting_report(setting, log, strategies, cfg.uplift));
    }
    const auto written = emit_report(bundle, opt.out_dir / "report");
    os << "report: wrote " << written.size() << " files under "
       << (opt.out_dir / "report").string() << "\n";
}

} // namespace spreadcast
