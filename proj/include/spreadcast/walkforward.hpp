// Weekly walk-forward protocol: window planning with a one-day gap, the
// training-setting axes (lagging / train-window / finetune), seeded random
// hyperparameter search scored on the step-0 validation window, and the
// weekly retrain-and-predict loop that emits out-of-sample predictions.
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "spreadcast/csv.hpp"
#include "spreadcast/errors.hpp"
#include "spreadcast/feature_pipeline.hpp"
#include "spreadcast/forecaster.hpp"
#include "spreadcast/market_data.hpp"

namespace spreadcast {

inline constexpr int kTestStride = 7; // the model is updated every 7 days
inline constexpr int kValidationDays = 7;
inline constexpr int kGapDays = 1;

// One row of the settings table: lagging, train-window size, finetune flag.
struct TrainingSetting {
    static constexpr int kAllHistory = -1;

    int lagging = 1;
    int train_window = 90; // days, or kAllHistory
    bool finetune = false;
    std::string label = "A";

    std::string window_name() const {
        return train_window == kAllHistory ? "All" : std::to_string(train_window);
    }
};

// Settings A..G: laggings 1-3, windows {90, 180, 360, All}, scratch/finetune.
inline std::vector<TrainingSetting> table_settings() {
    return {
        {1, 90, false, "A"},
        {2, 90, false, "B"},
        {3, 90, false, "C"},
        {1, 180, false, "D"},
        {1, 360, false, "E"},
        {1, TrainingSetting::kAllHistory, false, "F"},
        {1, 90, true, "G"},
    };
}

inline TrainingSetting setting_by_label(const std::string& label) {
    for (const auto& s : table_settings()) {
        if (s.label == label) return s;
    }
    throw std::invalid_argument("unknown setting label: '" + label + "' (expected A..G)");
}

struct WalkForwardStep {
    DayRange train;      // full history available to this step (window applied later)
    DayRange validation; // 7 days right after the train end
    CalDay gap;          // the one-day gap before the test window
    DayRange test;       // 7 days (last step may be shorter)
};

struct WalkForwardPlan {
    std::vector<WalkForwardStep> steps;
    CalDay history_start; // earliest day usable as training data
};

// Lays out the weekly windows. Step 0 is train ..initial_train_end, then 7
// validation days, one gap day, and the first 7-day test window starting at
// test_start; later steps shift every window forward by 7 days.
inline WalkForwardPlan make_plan(DayRange dataset_range, CalDay initial_train_end,
                                 CalDay test_start, CalDay test_end) {
    if (test_start != initial_train_end + kValidationDays + kGapDays + 1) {
        throw PlanError("test_start " + test_start.to_string() + " must be " +
                        std::to_string(kValidationDays + kGapDays + 1) + " days after train end " +
                        initial_train_end.to_string());
    }
    if (test_start > test_end) {
        throw PlanError("empty test period " + test_start.to_string() + ".." +
                        test_end.to_string());
    }
    if (dataset_range.first >= initial_train_end) {
        throw PlanError("initial train range " + dataset_range.first.to_string() + ".." +
                        initial_train_end.to_string() + " is empty or a single day");
    }
    if (!dataset_range.contains(DayRange{dataset_range.first, test_end})) {
        throw PlanError("test period ends " + test_end.to_string() + ", after dataset end " +
                        dataset_range.last.to_string());
    }

    WalkForwardPlan plan;
    plan.history_start = dataset_range.first;
    const int n_test_days = test_end - test_start + 1;
    const int n_steps = (n_test_days + kTestStride - 1) / kTestStride;
    plan.steps.reserve(static_cast<size_t>(n_steps));
    for (int k = 0; k < n_steps; ++k) {
        WalkForwardStep step;
        const CalDay train_end = initial_train_end + k * kTestStride;
        step.train = {dataset_range.first, train_end};
        step.validation = {train_end + 1, train_end + kValidationDays};
        step.gap = train_end + kValidationDays + 1;
        const CalDay t0 = test_start + k * kTestStride;
        step.test = {t0, std::min(t0 + kTestStride - 1, test_end)};
        plan.steps.push_back(step);
    }
    return plan;
}

struct TrainRangeResolution {
    DayRange range;
    bool truncated = false; // window exceeded the available history
};

// Applies the setting's window to a step: ALL keeps the whole history,
// otherwise the last `train_window` days ending at the step's train end.
// A window longer than the available history truncates and flags a warning.
inline TrainRangeResolution resolve_train_range(const WalkForwardStep& step,
                                                const TrainingSetting& setting,
                                                CalDay history_start) {
    TrainRangeResolution res;
    if (setting.train_window == TrainingSetting::kAllHistory) {
        res.range = {history_start, step.train.last};
        return res;
    }
    if (setting.train_window < 1) {
        throw std::invalid_argument("train_window must be >= 1 or kAllHistory");
    }
    CalDay start = step.train.last - (setting.train_window - 1);
    if (start < history_start) {
        start = history_start;
        res.truncated = true;
    }
    res.range = {start, step.train.last};
    return res;
}

// ---------------------------------------------------------------------------
// Hyperparameter search
// ---------------------------------------------------------------------------

struct HyperParams {
    int n_layers = 2;
    double pe_dropout = 0.1;
    double learning_rate = 1e-3;
    double weight_decay = 1e-5;
};

// Search ranges (paper leaves them unspecified): layers 1-4, dropout [0, 0.5],
// learning rate and weight decay log-uniform.
struct SearchRanges {
    int min_layers = 1, max_layers = 4;
    double max_dropout = 0.5;
    double lr_lo = 1e-5, lr_hi = 1e-2;
    double wd_lo = 1e-6, wd_hi = 1e-2;
};

struct TrialResult {
    int index = 0;
    HyperParams hp;
    double val_loss = std::numeric_limits<double>::infinity();
};

struct SearchResult {
    HyperParams best;
    int best_index = 0;
    std::vector<TrialResult> trials;
};

// Fixed (non-searched) architecture constants and the training budget shared
// by search trials and weekly retrains.
struct WalkForwardOptions {
    QuantizerConfig quantizer{};
    std::set<CalDay> holidays;
    int d_model = 64;
    int n_heads = 4;
    int ff_width = 128;
    int max_epochs = 200;
    int patience = 20;
    int batch_size = 0; // 0 = auto
    int n_threads = 0;  // trial parallelism; 0 = hardware concurrency
};

namespace detail {

// Runs fn(i) for i in [0, n) on up to n_threads workers. Each index is
// independent; results must be written to per-index slots. The first worker
// exception is rethrown on the calling thread after all workers join.
template <typename Fn>
void parallel_for(int n, int n_threads, Fn&& fn) {
    if (n_threads <= 0) {
        n_threads = static_cast<int>(std::thread::hardware_concurrency());
        if (n_threads <= 0) n_threads = 1;
    }
    n_threads = std::min(n_threads, n);
    if (n_threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> workers;
    workers.reserve(static_cast<size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        workers.emplace_back([&] {
            try {
                for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    if (error) std::rethrow_exception(error);
}

inline ModelConfig model_config_for(const WalkForwardOptions& opts, const HyperParams& hp,
                                    int lagging, int input_width, uint64_t init_seed) {
    ModelConfig mc;
    mc.d_model = opts.d_model;
    mc.n_heads = opts.n_heads;
    mc.ff_width = opts.ff_width;
    mc.n_layers = hp.n_layers;
    mc.pe_dropout = hp.pe_dropout;
    mc.lagging = lagging;
    mc.input_width = input_width;
    mc.seed = init_seed;
    return mc;
}

inline TrainConfig train_config_for(const WalkForwardOptions& opts, const HyperParams& hp,
                                    uint64_t seed) {
    TrainConfig tc;
    tc.learning_rate = hp.learning_rate;
    tc.weight_decay = hp.weight_decay;
    tc.max_epochs = opts.max_epochs;
    tc.patience = opts.patience;
    tc.batch_size = opts.batch_size;
    tc.seed = seed;
    return tc;
}

// NaN-safe "a beats b": finite losses win over non-finite ones.
inline bool loss_improves(double a, double b) {
    if (!std::isfinite(a)) return false;
    if (!std::isfinite(b)) return true;
    return a < b;
}

} // namespace detail

// Seeded random search over the declared ranges. Every trial trains on the
// step-0 train window (after applying the setting) and is scored by step-0
// validation loss; ties break toward the earlier trial index. Trials run
// concurrently but the drawn sequence and the winner depend only on the seed.
inline SearchResult search_hyperparams(const MarketDataset& ds, const TrainingSetting& setting,
                                       const WalkForwardPlan& plan, int n_trials, uint64_t seed,
                                       const WalkForwardOptions& opts = {},
                                       const SearchRanges& ranges = {}) {
    if (n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
    if (plan.steps.empty()) throw PlanError("plan has no steps");

    const WalkForwardStep& step0 = plan.steps.front();
    const TrainRangeResolution res = resolve_train_range(step0, setting, plan.history_start);
    const ScalerParams scaler = fit_scaler(ds, res.range);
    const std::vector<ModelSample> train_samples =
        build_dataset(ds, res.range, setting.lagging, scaler, opts.quantizer, opts.holidays);
    const std::vector<ModelSample> val_samples =
        build_dataset(ds, step0.validation, setting.lagging, scaler, opts.quantizer, opts.holidays);
    if (train_samples.empty()) {
        throw DataError("hyperparameter search: no eligible training samples in " +
                        res.range.to_string());
    }
    const int input_width = static_cast<int>(train_samples.front().features.cols());

    // Draw every trial's hyperparameters up front so the sequence is
    // independent of execution order.
    Rng hp_rng(mix_seed(seed, 0xa11ULL));
    std::vector<TrialResult> trials(static_cast<size_t>(n_trials));
    for (int i = 0; i < n_trials; ++i) {
        HyperParams hp;
        hp.n_layers = hp_rng.uniform_int(ranges.min_layers, ranges.max_layers);
        hp.pe_dropout = hp_rng.uniform(0.0, ranges.max_dropout);
        hp.learning_rate = hp_rng.log_uniform(ranges.lr_lo, ranges.lr_hi);
        hp.weight_decay = hp_rng.log_uniform(ranges.wd_lo, ranges.wd_hi);
        trials[static_cast<size_t>(i)] = {i, hp, std::numeric_limits<double>::infinity()};
    }

    detail::parallel_for(n_trials, opts.n_threads, [&](int i) {
        TrialResult& trial = trials[static_cast<size_t>(i)];
        const ModelConfig mc =
            detail::model_config_for(opts, trial.hp, setting.lagging, input_width,
                                     mix_seed(seed, static_cast<uint64_t>(i), 1));
        const TrainConfig tc = detail::train_config_for(
            opts, trial.hp, mix_seed(seed, static_cast<uint64_t>(i), 2));
        const TrainResult tr = train(init_model(mc), train_samples, val_samples, tc);
        trial.val_loss = tr.best_val_loss;
    });

    SearchResult result;
    result.trials = trials;
    int best = 0;
    for (int i = 1; i < n_trials; ++i) {
        if (detail::loss_improves(trials[static_cast<size_t>(i)].val_loss,
                                  trials[static_cast<size_t>(best)].val_loss)) {
            best = i;
        }
    }
    result.best = trials[static_cast<size_t>(best)].hp;
    result.best_index = best;
    return result;
}

// ---------------------------------------------------------------------------
// Weekly loop and prediction log
// ---------------------------------------------------------------------------

struct PredictionEntry {
    CalDay date;
    int hour = 0;
    std::array<double, kNumClasses> probs{};
    SpreadClass true_class;
    double true_spread = 0.0;
};

struct StepInfo {
    int index = 0;
    DayRange train_used;
    bool truncated = false;
    HyperParams hp;
    double best_val_loss = 0.0;
    double final_train_loss = 0.0;
    int epochs_run = 0;
};

// Out-of-sample predictions over the whole test period, one row per
// (date, hour), plus per-week training metadata.
struct PredictionLog {
    std::string setting_label;
    std::vector<PredictionEntry> entries; // sorted by (date, hour)
    std::vector<StepInfo> steps;

    DayRange covered_range() const {
        if (entries.empty()) throw DataError("prediction log is empty");
        return {entries.front().date, entries.back().date};
    }
};

// Runs the full weekly loop for one setting with fixed hyperparameters:
// refit scaler on the step's train window, rebuild samples, train (warm-started
// from the previous week's weights under finetune, otherwise a fresh
// step-seeded init), keep the lowest-validation-loss snapshot, and predict the
// step's test days. Returns the assembled log; `final_params` (if non-null)
// receives the last step's selected weights.
inline PredictionLog run_walkforward(const MarketDataset& ds, const TrainingSetting& setting,
                                     const HyperParams& hp, const WalkForwardPlan& plan,
                                     uint64_t seed, const WalkForwardOptions& opts = {},
                                     ModelParams* final_params = nullptr) {
    if (plan.steps.empty()) throw PlanError("plan has no steps");

    PredictionLog log;
    log.setting_label = setting.label;
    std::optional<ModelParams> carried;

    for (size_t k = 0; k < plan.steps.size(); ++k) {
        const WalkForwardStep& step = plan.steps[k];
        const TrainRangeResolution res = resolve_train_range(step, setting, plan.history_start);
        const ScalerParams scaler = fit_scaler(ds, res.range);
        const std::vector<ModelSample> train_samples =
            build_dataset(ds, res.range, setting.lagging, scaler, opts.quantizer, opts.holidays);
        const std::vector<ModelSample> val_samples = build_dataset(
            ds, step.validation, setting.lagging, scaler, opts.quantizer, opts.holidays);
        if (train_samples.empty()) {
            throw DataError("walk-forward step " + std::to_string(k) +
                            ": no eligible training samples in " + res.range.to_string());
        }
        const int input_width = static_cast<int>(train_samples.front().features.cols());

        ModelParams start_params = [&] {
            if (setting.finetune && carried.has_value()) return *carried;
            const ModelConfig mc = detail::model_config_for(
                opts, hp, setting.lagging, input_width, mix_seed(seed, k, 1));
            return init_model(mc);
        }();
        const TrainConfig tc = detail::train_config_for(opts, hp, mix_seed(seed, k, 2));
        const TrainResult tr = train(start_params, train_samples, val_samples, tc);
        carried = tr.params;

        StepInfo info;
        info.index = static_cast<int>(k);
        info.train_used = res.range;
        info.truncated = res.truncated;
        info.hp = hp;
        info.best_val_loss = tr.best_val_loss;
        info.final_train_loss = tr.history.empty() ? 0.0 : tr.history.back().train_loss;
        info.epochs_run = static_cast<int>(tr.history.size());
        log.steps.push_back(info);

        for (CalDay d = step.test.first; d <= step.test.last; ++d) {
            const ModelSample sample =
                build_sample(ds, d, setting.lagging, scaler, opts.quantizer, opts.holidays);
            const HourlyDistribution dist = predict_proba(tr.params, sample);
            for (int h = 0; h < kHoursPerDay; ++h) {
                PredictionEntry e;
                e.date = d;
                e.hour = h;
                for (int c = 0; c < kNumClasses; ++c) e.probs[static_cast<size_t>(c)] = dist.probs(h, c);
                e.true_spread = ds.spread(d, h);
                e.true_class = quantize(e.true_spread, opts.quantizer);
                log.entries.push_back(e);
            }
        }
    }

    if (final_params != nullptr && carried.has_value()) {
        *final_params = *carried;
    }
    return log;
}

// ---------------------------------------------------------------------------
// Prediction log CSV: the contract between forecasting and backtesting
// ---------------------------------------------------------------------------

inline constexpr const char* kPredictionLogHeader =
    "date,hour,p0,p1,p2,p3,p4,true_class,true_spread";

inline void save_prediction_log(const PredictionLog& log, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out << kPredictionLogHeader << '\n';
    for (const auto& e : log.entries) {
        out << e.date.to_string() << ',' << e.hour;
        for (const double p : e.probs) out << ',' << fmt6(p);
        out << ',' << e.true_class.index() << ',' << fmt6(e.true_spread) << '\n';
    }
}

// Loads a prediction log written by save_prediction_log (or an external
// model honoring the same schema). Rows are sorted; duplicates are rejected.
inline PredictionLog load_prediction_log(const std::filesystem::path& path,
                                         std::string setting_label = "") {
    CsvReader r(path);
    r.expect_header(kPredictionLogHeader);
    PredictionLog log;
    log.setting_label = std::move(setting_label);
    std::vector<std::string> f;
    while (r.next_row(f)) {
        if (f.size() != 9) r.fail("expected 9 fields, got " + std::to_string(f.size()));
        PredictionEntry e;
        try {
            e.date = CalDay::parse(f[0]);
        } catch (const std::invalid_argument& ex) {
            r.fail(ex.what());
        }
        const long hour = parse_int_field(r, f[1], "hour");
        if (hour < 0 || hour >= kHoursPerDay) r.fail("hour out of range: " + f[1]);
        e.hour = static_cast<int>(hour);
        double total = 0.0;
        for (int c = 0; c < kNumClasses; ++c) {
            e.probs[static_cast<size_t>(c)] =
                parse_double_field(r, f[static_cast<size_t>(2 + c)], "probability");
            if (e.probs[static_cast<size_t>(c)] < 0.0) r.fail("negative probability");
            total += e.probs[static_cast<size_t>(c)];
        }
        if (std::abs(total - 1.0) > 1e-3) r.fail("probabilities sum to " + fmt6(total));
        const long cls = parse_int_field(r, f[7], "true_class");
        if (cls < 0 || cls >= kNumClasses) r.fail("true_class out of range: " + f[7]);
        e.true_class = SpreadClass(static_cast<int>(cls));
        e.true_spread = parse_double_field(r, f[8], "true_spread");
        log.entries.push_back(e);
    }
    std::sort(log.entries.begin(), log.entries.end(), [](const auto& a, const auto& b) {
        return a.date != b.date ? a.date < b.date : a.hour < b.hour;
    });
    for (size_t i = 1; i < log.entries.size(); ++i) {
        if (log.entries[i].date == log.entries[i - 1].date &&
            log.entries[i].hour == log.entries[i - 1].hour) {
            throw DataError(path.string() + ": duplicate row for (" +
                            log.entries[i].date.to_string() + ", hour " +
                            std::to_string(log.entries[i].hour) + ")");
        }
    }
    return log;
}

} // namespace spreadcast
