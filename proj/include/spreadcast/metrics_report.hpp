// Classification metrics over prediction logs (per-hour 5x5 confusion
// matrices, accuracy, macro precision/recall/F1) and deterministic report
// emission.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spreadcast/backtest.hpp"
#include "spreadcast/csv.hpp"
#include "spreadcast/errors.hpp"
#include "spreadcast/walkforward.hpp"

namespace spreadcast {

inline constexpr int kAllHours = -1;

// rows = true class, columns = argmax-predicted class.
struct ConfusionMatrix {
    std::array<std::array<int64_t, kNumClasses>, kNumClasses> counts{};
    int hour_tag = kAllHours; // 0-23 or kAllHours

    int64_t total() const {
        int64_t t = 0;
        for (const auto& row : counts) {
            for (const int64_t c : row) t += c;
        }
        return t;
    }

    int64_t trace() const {
        int64_t t = 0;
        for (int c = 0; c < kNumClasses; ++c) {
            t += counts[static_cast<size_t>(c)][static_cast<size_t>(c)];
        }
        return t;
    }

    int64_t row_sum(int cls) const {
        int64_t t = 0;
        for (const int64_t c : counts[static_cast<size_t>(cls)]) t += c;
        return t;
    }

    int64_t col_sum(int cls) const {
        int64_t t = 0;
        for (int r = 0; r < kNumClasses; ++r) {
            t += counts[static_cast<size_t>(r)][static_cast<size_t>(cls)];
        }
        return t;
    }
};

// Confusion counts for one hour of the day, or pooled over all hours.
inline ConfusionMatrix confusion(const PredictionLog& log, int hour_filter) {
    if (hour_filter != kAllHours && (hour_filter < 0 || hour_filter >= kHoursPerDay)) {
        throw std::invalid_argument("hour filter must be 0..23 or kAllHours");
    }
    ConfusionMatrix m;
    m.hour_tag = hour_filter;
    for (const auto& e : log.entries) {
        if (hour_filter != kAllHours && e.hour != hour_filter) continue;
        int pred = 0;
        for (int c = 1; c < kNumClasses; ++c) {
            if (e.probs[static_cast<size_t>(c)] > e.probs[static_cast<size_t>(pred)]) pred = c;
        }
        ++m.counts[static_cast<size_t>(e.true_class.index())][static_cast<size_t>(pred)];
    }
    if (m.total() == 0) {
        throw DataError("no log entries for hour filter " + std::to_string(hour_filter));
    }
    return m;
}

struct MetricSummary {
    double accuracy = 0.0;
    double macro_precision = 0.0;
    double macro_recall = 0.0;
    double macro_f1 = 0.0;
};

// Column-wise precision for one class; 0 when the column is empty.
inline double precision_at(const ConfusionMatrix& m, SpreadClass c) {
    const int64_t col = m.col_sum(c.index());
    if (col == 0) return 0.0;
    return static_cast<double>(m.counts[static_cast<size_t>(c.index())][static_cast<size_t>(c.index())]) /
           static_cast<double>(col);
}

// Macro scores average over all 5 classes; a class with an empty column/row
// contributes 0 rather than being excluded.
inline MetricSummary macro_scores(const ConfusionMatrix& m) {
    const int64_t total = m.total();
    if (total == 0) throw std::invalid_argument("macro_scores: empty confusion matrix");
    MetricSummary s;
    s.accuracy = static_cast<double>(m.trace()) / static_cast<double>(total);
    for (int c = 0; c < kNumClasses; ++c) {
        const double diag =
            static_cast<double>(m.counts[static_cast<size_t>(c)][static_cast<size_t>(c)]);
        const int64_t col = m.col_sum(c);
        const int64_t row = m.row_sum(c);
        const double precision = col > 0 ? diag / static_cast<double>(col) : 0.0;
        const double recall = row > 0 ? diag / static_cast<double>(row) : 0.0;
        const double f1 =
            (precision + recall) > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        s.macro_precision += precision / kNumClasses;
        s.macro_recall += recall / kNumClasses;
        s.macro_f1 += f1 / kNumClasses;
    }
    return s;
}

inline std::vector<std::pair<CalDay, double>> cumulative_profit_series(const BacktestResult& r) {
    std::vector<std::pair<CalDay, double>> series;
    series.reserve(r.daily.size());
    for (size_t i = 0; i < r.daily.size(); ++i) {
        series.emplace_back(r.daily[i].date, r.cumulative[i]);
    }
    return series;
}

// ---------------------------------------------------------------------------
// Report bundle and emission
// ---------------------------------------------------------------------------

struct SettingReport {
    TrainingSetting setting;
    MetricSummary metrics;
    ConfusionMatrix all_hours;
    std::vector<ConfusionMatrix> hourly; // 24 matrices
    std::vector<BacktestResult> backtests;
};

struct ReportBundle {
    std::vector<SettingReport> settings;
    uint64_t seed = 0;
    std::string config_hash;
};

inline SettingReport build_setting_report(const TrainingSetting& setting, const PredictionLog& log,
                                          std::span<const StrategyId> strategies, double uplift) {
    SettingReport rep;
    rep.setting = setting;
    rep.all_hours = confusion(log, kAllHours);
    rep.metrics = macro_scores(rep.all_hours);
    rep.hourly.reserve(kHoursPerDay);
    for (int h = 0; h < kHoursPerDay; ++h) {
        rep.hourly.push_back(confusion(log, h));
    }
    const ActualSpreads actuals = ActualSpreads::from_log(log);
    for (const StrategyId s : strategies) {
        rep.backtests.push_back(run_backtest(s, log, uplift, actuals));
    }
    return rep;
}

namespace detail {

inline void write_confusion_csv(const ConfusionMatrix& m, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "true_class,pred_0,pred_1,pred_2,pred_3,pred_4\n";
    for (int t = 0; t < kNumClasses; ++t) {
        out << t;
        for (int p = 0; p < kNumClasses; ++p) {
            out << ',' << m.counts[static_cast<size_t>(t)][static_cast<size_t>(p)];
        }
        out << '\n';
    }
}

inline std::string hour_file_tag(int hour) {
    char buf[8];
    std::snprintf(buf, sizeof(buf), "h%02d", hour);
    return buf;
}

} // namespace detail

// Writes the bundle under `out_dir`:
//   summary.csv           one row per setting, Table-style columns
//   summary.json          machine-readable copy with metadata
//   <label>/confusion_all.csv, <label>/confusion_h00..h23.csv
//   <label>/profits_T#.csv
// Output is deterministic: identical bundles reproduce identical bytes.
inline std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                                      const std::filesystem::path& out_dir) {
    std::vector<std::filesystem::path> written;
    std::filesystem::create_directories(out_dir);

    {
        const std::filesystem::path path = out_dir / "summary.csv";
        std::ofstream out = open_output(path);
        out << "setting,L,S,F,Acc,Pre,Rec,F1,T1,T2,T3,T4,T5,T6,T7\n";
        for (const auto& rep : bundle.settings) {
            out << rep.setting.label << ',' << rep.setting.lagging << ','
                << rep.setting.window_name() << ',' << (rep.setting.finetune ? "Yes" : "No") << ','
                << fmt6(rep.metrics.accuracy) << ',' << fmt6(rep.metrics.macro_precision) << ','
                << fmt6(rep.metrics.macro_recall) << ',' << fmt6(rep.metrics.macro_f1);
            std::map<StrategyId, double> totals;
            for (const auto& bt : rep.backtests) totals[bt.strategy] = bt.total;
            for (const StrategyId s : kAllStrategies) {
                out << ',';
                const auto it = totals.find(s);
                out << (it != totals.end() ? fmt6(it->second) : "");
            }
            out << '\n';
        }
        written.push_back(path);
    }

    {
        nlohmann::ordered_json j;
        j["seed"] = bundle.seed;
        j["config_hash"] = bundle.config_hash;
        j["settings"] = nlohmann::ordered_json::array();
        for (const auto& rep : bundle.settings) {
            nlohmann::ordered_json js;
            js["label"] = rep.setting.label;
            js["lagging"] = rep.setting.lagging;
            js["train_window"] = rep.setting.window_name();
            js["finetune"] = rep.setting.finetune;
            js["accuracy"] = rep.metrics.accuracy;
            js["macro_precision"] = rep.metrics.macro_precision;
            js["macro_recall"] = rep.metrics.macro_recall;
            js["macro_f1"] = rep.metrics.macro_f1;
            js["scored_hours"] = rep.all_hours.total();
            nlohmann::ordered_json profits;
            for (const auto& bt : rep.backtests) {
                profits[std::string(strategy_name(bt.strategy))] = bt.total;
            }
            js["cumulative_profit"] = profits;
            j["settings"].push_back(js);
        }
        const std::filesystem::path path = out_dir / "summary.json";
        std::ofstream out = open_output(path);
        out << j.dump(2) << '\n';
        written.push_back(path);
    }

    for (const auto& rep : bundle.settings) {
        const std::filesystem::path dir = out_dir / rep.setting.label;
        std::filesystem::create_directories(dir);
        detail::write_confusion_csv(rep.all_hours, dir / "confusion_all.csv");
        written.push_back(dir / "confusion_all.csv");
        for (int h = 0; h < kHoursPerDay; ++h) {
            const auto path = dir / ("confusion_" + detail::hour_file_tag(h) + ".csv");
            detail::write_confusion_csv(rep.hourly[static_cast<size_t>(h)], path);
            written.push_back(path);
        }
        for (const auto& bt : rep.backtests) {
            const auto path =
                dir / ("profits_" + std::string(strategy_name(bt.strategy)) + ".csv");
            write_backtest_csv(std::span<const BacktestResult>(&bt, 1), path);
            written.push_back(path);
        }
    }
    return written;
}

} // namespace spreadcast
