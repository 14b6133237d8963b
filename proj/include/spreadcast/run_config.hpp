// Run configuration: a plain "key = value" text file supplying data paths,
// quantizer thresholds, walk-forward dates, zone counts and seeds.
#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "spreadcast/dates.hpp"
#include "spreadcast/errors.hpp"
#include "spreadcast/market_data.hpp"
#include "spreadcast/spread_quantizer.hpp"

namespace spreadcast {

inline std::string fnv1a_hex(std::string_view bytes) {
    uint64_t h = 1469598103934665603ULL;
    for (const char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ULL;
    }
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct RunConfig {
    // Data inputs (paths as written in the file).
    std::vector<std::string> prices_csv;    // exactly one expected
    std::vector<std::string> forecasts_csv; // one or more, comma separated
    std::string holidays_file;              // optional

    QuantizerConfig quantizer{};
    double uplift = 5.0;

    // Walk-forward dates; required by the train command.
    std::optional<CalDay> initial_train_end;
    std::optional<CalDay> test_start;
    std::optional<CalDay> test_end;

    int n_trials = 50;
    uint64_t seed = 0;
    std::string settings = "A,B,C,D,E,F,G"; // what '--setting all' expands to

    SynthConfig synth{};

    std::string config_hash; // FNV-1a of the file bytes

    void require_dates() const {
        if (!initial_train_end || !test_start || !test_end) {
            throw ConfigError(
                "config must set initial_train_end, test_start and test_end for this command");
        }
    }

    std::filesystem::path require_prices() const {
        if (prices_csv.size() != 1) {
            throw ConfigError("config must set prices_csv to exactly one path");
        }
        return prices_csv.front();
    }

    std::vector<std::filesystem::path> require_forecasts() const {
        if (forecasts_csv.empty()) {
            throw ConfigError("config must set forecasts_csv to at least one path");
        }
        return {forecasts_csv.begin(), forecasts_csv.end()};
    }
};

namespace detail {

inline std::string trim(std::string s) {
    const auto is_space = [](char c) { return c == ' ' || c == '\t'; };
    size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return s.substr(b, e - b);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

} // namespace detail

inline RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string content = buffer.str();

    RunConfig cfg;
    cfg.config_hash = fnv1a_hex(content);

    std::stringstream lines(content);
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& what) -> void {
        throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": " + what);
    };
    auto parse_date = [&](const std::string& v) -> CalDay {
        try {
            return CalDay::parse(v);
        } catch (const std::invalid_argument& e) {
            fail(e.what());
            return CalDay{};
        }
    };
    auto parse_num = [&](const std::string& v) -> double {
        char* end = nullptr;
        const double x = std::strtod(v.c_str(), &end);
        if (end == v.c_str() || *end != '\0') fail("bad number '" + v + "'");
        return x;
    };

    while (std::getline(lines, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string trimmed = detail::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const size_t eq = trimmed.find('=');
        if (eq == std::string::npos) fail("expected 'key = value'");
        const std::string key = detail::trim(trimmed.substr(0, eq));
        const std::string value = detail::trim(trimmed.substr(eq + 1));
        if (key.empty()) fail("empty key");

        if (key == "prices_csv") {
            cfg.prices_csv = detail::split_list(value);
        } else if (key == "forecasts_csv") {
            cfg.forecasts_csv = detail::split_list(value);
        } else if (key == "holidays_file") {
            cfg.holidays_file = value;
        } else if (key == "thresholds") {
            const auto parts = detail::split_list(value);
            if (parts.size() != 4) fail("thresholds needs 4 comma-separated numbers");
            for (size_t i = 0; i < 4; ++i) cfg.quantizer.thresholds[i] = parse_num(parts[i]);
            try {
                cfg.quantizer.validate();
            } catch (const std::invalid_argument& e) {
                fail(e.what());
            }
        } else if (key == "uplift") {
            cfg.uplift = parse_num(value);
        } else if (key == "initial_train_end") {
            cfg.initial_train_end = parse_date(value);
        } else if (key == "test_start") {
            cfg.test_start = parse_date(value);
        } else if (key == "test_end") {
            cfg.test_end = parse_date(value);
        } else if (key == "n_trials") {
            cfg.n_trials = static_cast<int>(parse_num(value));
            if (cfg.n_trials < 1) fail("n_trials must be >= 1");
        } else if (key == "seed") {
            cfg.seed = static_cast<uint64_t>(parse_num(value));
        } else if (key == "settings") {
            cfg.settings = value;
        } else if (key == "synth_days") {
            cfg.synth.n_days = static_cast<int>(parse_num(value));
        } else if (key == "synth_load_zones") {
            cfg.synth.n_load_zones = static_cast<int>(parse_num(value));
        } else if (key == "synth_solar_zones") {
            cfg.synth.n_solar_zones = static_cast<int>(parse_num(value));
        } else if (key == "synth_wind_zones") {
            cfg.synth.n_wind_zones = static_cast<int>(parse_num(value));
        } else if (key == "synth_volatility") {
            cfg.synth.volatility = parse_num(value);
        } else if (key == "synth_start") {
            cfg.synth.start = parse_date(value);
        } else {
            fail("unknown key '" + key + "'");
        }
    }
    return cfg;
}

} // namespace spreadcast
