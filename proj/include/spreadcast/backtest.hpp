// Virtual-bidding backtest: strategies T1-T7 convert predictions (or ground
// truth) into daily trade decisions, which settle against realized spreads
// under a flat uplift cost and a 1 MWh/day budget.
//
// Assumptions baked in: bids always clear, trades never move the price, and
// the daily budget splits evenly across the selected hours.
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spreadcast/csv.hpp"
#include "spreadcast/errors.hpp"
#include "spreadcast/forecaster.hpp"
#include "spreadcast/market_data.hpp"
#include "spreadcast/walkforward.hpp"

namespace spreadcast {

inline constexpr double kDefaultUplift = 5.0; // $/MWh
inline constexpr double kDailyBudgetMwh = 1.0;
inline constexpr int kPeakHour = 19; // hour-beginning 19, the paper's signal hour

enum class StrategyId { T1, T2, T3, T4, T5, T6, T7 };

inline constexpr std::array<StrategyId, 7> kAllStrategies = {
    StrategyId::T1, StrategyId::T2, StrategyId::T3, StrategyId::T4,
    StrategyId::T5, StrategyId::T6, StrategyId::T7};

inline std::string_view strategy_name(StrategyId s) {
    switch (s) {
        case StrategyId::T1: return "T1";
        case StrategyId::T2: return "T2";
        case StrategyId::T3: return "T3";
        case StrategyId::T4: return "T4";
        case StrategyId::T5: return "T5";
        case StrategyId::T6: return "T6";
        case StrategyId::T7: return "T7";
    }
    return "?";
}

inline StrategyId parse_strategy(std::string_view s) {
    for (const StrategyId id : kAllStrategies) {
        if (strategy_name(id) == s) return id;
    }
    throw std::invalid_argument("unknown strategy: '" + std::string(s) + "' (expected T1..T7)");
}

// T6/T7 are oracles: they consume true classes instead of predictions.
inline bool strategy_uses_truth(StrategyId s) {
    return s == StrategyId::T6 || s == StrategyId::T7;
}

struct TradeDecision {
    CalDay date;
    int hour = 0;
    int direction = 0;   // -1 short-real-time (INC), +1 long-real-time (DEC)
    double volume = 0.0; // MWh
};

struct TradeRecord {
    CalDay date;
    int hour = 0;
    int direction = 0;
    double volume = 0.0;
    double realized_spread = 0.0; // sced - dam, $/MWh
    double net_profit = 0.0;      // volume * (direction * spread - uplift)
};

struct DailyProfit {
    CalDay date;
    double profit = 0.0;
};

struct BacktestResult {
    StrategyId strategy = StrategyId::T1;
    std::vector<DailyProfit> daily;
    std::vector<double> cumulative;
    double total = 0.0;
    std::vector<TradeRecord> trades;
};

// Daily trade selection. T1-T5 require `pred`; T6-T7 require `truth`.
// The 1 MWh budget splits evenly over the selected hours.
inline std::vector<TradeDecision> decide_trades(StrategyId strategy, CalDay date,
                                                const HourlyDistribution* pred,
                                                const std::array<SpreadClass, kHoursPerDay>* truth) {
    if (strategy_uses_truth(strategy)) {
        if (truth == nullptr) {
            throw std::invalid_argument(std::string(strategy_name(strategy)) +
                                        " needs true classes");
        }
    } else if (pred == nullptr) {
        throw std::invalid_argument(std::string(strategy_name(strategy)) +
                                    " needs a predicted distribution");
    }

    // Collect (hour, direction) picks per strategy.
    std::vector<std::pair<int, int>> picks;
    auto consider_pred_hour = [&](int hour, bool require_class0, bool require_majority) {
        const SpreadClass top = pred->argmax(hour);
        const int dir = class_direction(top);
        if (dir == 0) return;
        if (require_class0 && top.index() != 0) return;
        if (require_majority && !(pred->probs(hour, top.index()) > 0.5)) return;
        picks.emplace_back(hour, dir);
    };
    auto consider_truth_hour = [&](int hour) {
        const int dir = class_direction((*truth)[static_cast<size_t>(hour)]);
        if (dir != 0) picks.emplace_back(hour, dir);
    };

    switch (strategy) {
        case StrategyId::T1:
            for (int h = 0; h < kHoursPerDay; ++h) consider_pred_hour(h, false, false);
            break;
        case StrategyId::T2:
            for (int h = 0; h < kHoursPerDay; ++h) consider_pred_hour(h, false, true);
            break;
        case StrategyId::T3:
            consider_pred_hour(kPeakHour, false, false);
            break;
        case StrategyId::T4:
            consider_pred_hour(kPeakHour, true, false);
            break;
        case StrategyId::T5:
            consider_pred_hour(kPeakHour, true, true);
            break;
        case StrategyId::T6:
            for (int h = 0; h < kHoursPerDay; ++h) consider_truth_hour(h);
            break;
        case StrategyId::T7:
            consider_truth_hour(kPeakHour);
            break;
    }

    std::vector<TradeDecision> decisions;
    if (picks.empty()) return decisions;
    const double volume = kDailyBudgetMwh / static_cast<double>(picks.size());
    decisions.reserve(picks.size());
    for (const auto& [hour, dir] : picks) {
        decisions.push_back({date, hour, dir, volume});
    }
    return decisions;
}

// Settles decisions against the realized spreads of one day. Every decision
// fills (always-cleared assumption). A NaN spread marks a missing actual.
inline std::vector<TradeRecord> settle(std::span<const TradeDecision> decisions,
                                       const std::array<double, kHoursPerDay>& realized_spreads,
                                       double uplift) {
    std::vector<TradeRecord> records;
    records.reserve(decisions.size());
    for (const TradeDecision& d : decisions) {
        const double spread = realized_spreads[static_cast<size_t>(d.hour)];
        if (!std::isfinite(spread)) {
            throw DataError("missing actual price for " + d.date.to_string() + " hour " +
                            std::to_string(d.hour));
        }
        TradeRecord r;
        r.date = d.date;
        r.hour = d.hour;
        r.direction = d.direction;
        r.volume = d.volume;
        r.realized_spread = spread;
        r.net_profit = d.volume * (d.direction * spread - uplift);
        records.push_back(r);
    }
    return records;
}

// Realized spreads per day, the settlement source for a backtest.
struct ActualSpreads {
    std::map<CalDay, std::array<double, kHoursPerDay>> by_day;

    static ActualSpreads from_dataset(const MarketDataset& ds) {
        ActualSpreads a;
        const DayRange range = ds.date_range();
        for (CalDay d = range.first; d <= range.last; ++d) {
            auto& day = a.by_day[d];
            for (int h = 0; h < kHoursPerDay; ++h) day[static_cast<size_t>(h)] = ds.spread(d, h);
        }
        return a;
    }

    // A prediction log carries the realized spread alongside each prediction,
    // so it can settle itself.
    static ActualSpreads from_log(const PredictionLog& log) {
        ActualSpreads a;
        for (const auto& e : log.entries) {
            auto [it, inserted] = a.by_day.try_emplace(e.date);
            if (inserted) it->second.fill(std::numeric_limits<double>::quiet_NaN());
            it->second[static_cast<size_t>(e.hour)] = e.true_spread;
        }
        return a;
    }
};

namespace detail {

struct LogDay {
    CalDay date;
    HourlyDistribution pred;
    std::array<SpreadClass, kHoursPerDay> truth{};
};

// Groups a prediction log into whole days; every day must have exactly the
// 24 hours and days must be contiguous.
inline std::vector<LogDay> group_log_days(const PredictionLog& log) {
    if (log.entries.empty()) throw DataError("prediction log is empty");
    std::vector<LogDay> days;
    size_t i = 0;
    while (i < log.entries.size()) {
        LogDay day;
        day.date = log.entries[i].date;
        for (int h = 0; h < kHoursPerDay; ++h, ++i) {
            if (i >= log.entries.size() || log.entries[i].date != day.date ||
                log.entries[i].hour != h) {
                throw DataError("prediction log day " + day.date.to_string() +
                                " is missing hour " + std::to_string(h));
            }
            const auto& e = log.entries[i];
            for (int c = 0; c < kNumClasses; ++c) {
                day.pred.probs(h, c) = e.probs[static_cast<size_t>(c)];
            }
            day.truth[static_cast<size_t>(h)] = e.true_class;
        }
        if (!days.empty() && day.date != days.back().date + 1) {
            throw DataError("prediction log days are not contiguous at " + day.date.to_string());
        }
        days.push_back(day);
    }
    return days;
}

} // namespace detail

// Full backtest of one strategy over a prediction log: decide daily, settle
// against the actuals, accumulate. Days without trades contribute zero.
inline BacktestResult run_backtest(StrategyId strategy, const PredictionLog& log, double uplift,
                                   const ActualSpreads& actuals) {
    BacktestResult result;
    result.strategy = strategy;
    const std::vector<detail::LogDay> days = detail::group_log_days(log);
    double cumulative = 0.0;
    for (const auto& day : days) {
        const auto it = actuals.by_day.find(day.date);
        if (it == actuals.by_day.end()) {
            throw DataError("no actuals for " + day.date.to_string());
        }
        const std::vector<TradeDecision> decisions =
            decide_trades(strategy, day.date, &day.pred, &day.truth);
        const std::vector<TradeRecord> records = settle(decisions, it->second, uplift);
        double profit = 0.0;
        for (const auto& r : records) profit += r.net_profit;
        result.daily.push_back({day.date, profit});
        cumulative += profit;
        result.cumulative.push_back(cumulative);
        result.trades.insert(result.trades.end(), records.begin(), records.end());
    }
    result.total = cumulative;
    return result;
}

// 'strategy,date,daily_profit,cumulative_profit', stacked over strategies.
inline void write_backtest_csv(std::span<const BacktestResult> results,
                               const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "strategy,date,daily_profit,cumulative_profit\n";
    for (const auto& r : results) {
        for (size_t i = 0; i < r.daily.size(); ++i) {
            out << strategy_name(r.strategy) << ',' << r.daily[i].date.to_string() << ','
                << fmt6(r.daily[i].profit) << ',' << fmt6(r.cumulative[i]) << '\n';
        }
    }
}

// 'strategy,date,hour,direction,volume,realized_spread,net_profit'.
inline void write_blotter_csv(std::span<const BacktestResult> results,
                              const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << "strategy,date,hour,direction,volume,realized_spread,net_profit\n";
    for (const auto& r : results) {
        for (const auto& t : r.trades) {
            out << strategy_name(r.strategy) << ',' << t.date.to_string() << ',' << t.hour << ','
                << t.direction << ',' << fmt6(t.volume) << ',' << fmt6(t.realized_spread) << ','
                << fmt6(t.net_profit) << '\n';
        }
    }
}

} // namespace spreadcast
