// Minimal library walkthrough: synthesize a small dataset, train one weekly
// step, and settle the oracle strategies against the realized spreads.
#include <iostream>

#include "spreadcast/spreadcast.hpp"

int main() {
    using namespace spreadcast;

    SynthConfig synth;
    synth.n_days = 120;
    synth.seed = 7;
    const MarketDataset ds = generate_synthetic(synth);
    std::cout << "dataset: " << ds.date_range().to_string() << ", "
              << ds.forecasts().size() << " forecast series\n";

    const DayRange range = ds.date_range();
    const CalDay train_end = range.last - 15; // 7 val + 1 gap + 7 test
    const WalkForwardPlan plan = make_plan(range, train_end, train_end + 9, range.last);

    WalkForwardOptions opts;
    opts.holidays = nerc_holidays(range.first.year(), range.last.year());
    opts.max_epochs = 40;
    opts.d_model = 32;
    opts.ff_width = 64;

    const TrainingSetting setting = setting_by_label("A");
    const SearchResult search = search_hyperparams(ds, setting, plan, 3, 42, opts);
    std::cout << "search: best trial " << search.best_index
              << " val_loss " << search.trials[static_cast<size_t>(search.best_index)].val_loss
              << "\n";

    const PredictionLog log = run_walkforward(ds, setting, search.best, plan, 42, opts);
    std::cout << "predicted " << log.entries.size() / 24 << " test days\n";

    const ActualSpreads actuals = ActualSpreads::from_log(log);
    for (const StrategyId s : {StrategyId::T3, StrategyId::T6, StrategyId::T7}) {
        const BacktestResult r = run_backtest(s, log, kDefaultUplift, actuals);
        std::cout << strategy_name(s) << " cumulative profit: $" << r.total << "\n";
    }
    return 0;
}
