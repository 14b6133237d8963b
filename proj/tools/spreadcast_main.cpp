// spreadcast CLI: synth / train / backtest / report.
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spreadcast/pipeline.hpp"

namespace {

struct SubArgs {
    std::string config_path;
    std::string out_dir;
    std::string setting = "all";
    std::string strategy = "all";
    std::optional<uint64_t> seed;
    bool has_seed = false;
    uint64_t seed_value = 0;
};

void add_common_flags(CLI::App* cmd, SubArgs& args, bool with_setting, bool with_strategy) {
    cmd->add_option("--config", args.config_path, "Run configuration file")->required();
    cmd->add_option("--out", args.out_dir, "Output directory")->required();
    if (with_setting) {
        cmd->add_option("--setting", args.setting, "Training setting A..G, or 'all'");
    }
    if (with_strategy) {
        cmd->add_option("--strategy", args.strategy, "Trading strategy T1..T7, or 'all'");
    }
    cmd->add_option("--seed", args.seed_value, "Seed override")->each([&args](const std::string&) {
        args.has_seed = true;
    });
}

spreadcast::RunOptions to_options(const SubArgs& args) {
    spreadcast::RunOptions opt;
    opt.out_dir = args.out_dir;
    opt.setting = args.setting;
    opt.strategy = args.strategy;
    if (args.has_seed) opt.seed = args.seed_value;
    return opt;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Price-spread forecasting and virtual-bidding backtest pipeline"};
    app.require_subcommand(1);

    SubArgs synth_args, train_args, backtest_args, report_args;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic dataset as CSV");
    add_common_flags(synth, synth_args, false, false);
    CLI::App* train =
        app.add_subcommand("train", "Hyperparameter search + weekly walk-forward predictions");
    add_common_flags(train, train_args, true, false);
    CLI::App* backtest =
        app.add_subcommand("backtest", "Apply trading strategies to prediction logs");
    add_common_flags(backtest, backtest_args, true, true);
    CLI::App* report = app.add_subcommand("report", "Metrics, confusion matrices, profit curves");
    add_common_flags(report, report_args, true, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            const auto cfg = spreadcast::load_run_config(synth_args.config_path);
            spreadcast::cmd_synth(cfg, to_options(synth_args));
        } else if (train->parsed()) {
            const auto cfg = spreadcast::load_run_config(train_args.config_path);
            spreadcast::cmd_train(cfg, to_options(train_args));
        } else if (backtest->parsed()) {
            const auto cfg = spreadcast::load_run_config(backtest_args.config_path);
            spreadcast::cmd_backtest(cfg, to_options(backtest_args));
        } else if (report->parsed()) {
            const auto cfg = spreadcast::load_run_config(report_args.config_path);
            spreadcast::cmd_report(cfg, to_options(report_args));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
