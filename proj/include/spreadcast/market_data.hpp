// Hourly market data: CSV ingestion with alignment validation, slicing, and a
// seeded synthetic generator used for tests and demos.
//
// CSV schemas:
//   prices:    date,hour,dam_price,sced_price
//   forecasts: date,hour,kind,zone,mw
// Dates are ISO-8601, hours are hour-beginning 0-23.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "spreadcast/csv.hpp"
#include "spreadcast/dates.hpp"
#include "spreadcast/errors.hpp"
#include "spreadcast/rng.hpp"

namespace spreadcast {

inline constexpr int kHoursPerDay = 24;

enum class ForecastKind { load, solar, wind };

inline std::string_view kind_name(ForecastKind k) {
    switch (k) {
        case ForecastKind::load: return "load";
        case ForecastKind::solar: return "solar";
        case ForecastKind::wind: return "wind";
    }
    return "?";
}

inline ForecastKind parse_kind(std::string_view s) {
    if (s == "load") return ForecastKind::load;
    if (s == "solar") return ForecastKind::solar;
    if (s == "wind") return ForecastKind::wind;
    throw std::invalid_argument("unknown forecast kind: '" + std::string(s) + "'");
}

struct HourlyMarketRecord {
    CalDay date;
    int hour = 0; // hour-beginning, 0-23
    double dam_price = 0.0;
    double sced_price = 0.0;
};

// One zonal forecast series on the dataset's (date, hour) grid.
// values[(d - first) * 24 + h] is the MW forecast for hour h of day d.
struct ZoneForecastSeries {
    ForecastKind kind = ForecastKind::load;
    std::string zone;
    CalDay first;
    std::vector<double> values;

    std::string name() const { return std::string(kind_name(kind)) + ":" + zone; }

    double at(CalDay d, int hour) const {
        return values[static_cast<size_t>((d - first) * kHoursPerDay + hour)];
    }
};

// Aligned hourly dataset. Invariants: records sorted by (date, hour), exactly
// 24 records per day over a contiguous date range, every forecast series on
// the identical grid, all values finite.
class MarketDataset {
public:
    MarketDataset(std::vector<HourlyMarketRecord> records, std::vector<ZoneForecastSeries> forecasts)
        : records_(std::move(records)), forecasts_(std::move(forecasts)) {
        validate();
    }

    DayRange date_range() const { return {first_, first_ + (n_days_ - 1)}; }
    int n_days() const { return n_days_; }

    const std::vector<HourlyMarketRecord>& records() const { return records_; }
    const std::vector<ZoneForecastSeries>& forecasts() const { return forecasts_; }

    double dam(CalDay d, int hour) const { return record_at(d, hour).dam_price; }
    double sced(CalDay d, int hour) const { return record_at(d, hour).sced_price; }

    // Realized price spread, $/MWh: real-time (SCED) minus day-ahead (DAM).
    double spread(CalDay d, int hour) const {
        const HourlyMarketRecord& r = record_at(d, hour);
        return r.sced_price - r.dam_price;
    }

    size_t zone_count(ForecastKind k) const {
        size_t n = 0;
        for (const auto& s : forecasts_) {
            if (s.kind == k) ++n;
        }
        return n;
    }

private:
    const HourlyMarketRecord& record_at(CalDay d, int hour) const {
        if (d < first_ || d > first_ + (n_days_ - 1) || hour < 0 || hour >= kHoursPerDay) {
            throw std::out_of_range("price lookup outside dataset: " + d.to_string() + " h" +
                                    std::to_string(hour));
        }
        return records_[static_cast<size_t>((d - first_) * kHoursPerDay + hour)];
    }

    void validate() {
        if (records_.empty()) throw AlignmentError("dataset has no price records");
        std::sort(records_.begin(), records_.end(), [](const auto& a, const auto& b) {
            return a.date != b.date ? a.date < b.date : a.hour < b.hour;
        });
        if (records_.size() % kHoursPerDay != 0) {
            throw AlignmentError("price records do not form whole days");
        }
        first_ = records_.front().date;
        n_days_ = static_cast<int>(records_.size()) / kHoursPerDay;
        for (int d = 0; d < n_days_; ++d) {
            for (int h = 0; h < kHoursPerDay; ++h) {
                const auto& r = records_[static_cast<size_t>(d * kHoursPerDay + h)];
                if (r.date != first_ + d || r.hour != h) {
                    throw AlignmentError("prices: missing cell (" + (first_ + d).to_string() +
                                         ", hour " + std::to_string(h) + ")");
                }
                if (!std::isfinite(r.dam_price) || !std::isfinite(r.sced_price)) {
                    throw AlignmentError("prices: non-finite value at " + r.date.to_string());
                }
            }
        }
        const size_t cells = static_cast<size_t>(n_days_) * kHoursPerDay;
        std::sort(forecasts_.begin(), forecasts_.end(), [](const auto& a, const auto& b) {
            return a.kind != b.kind ? a.kind < b.kind : a.zone < b.zone;
        });
        for (const auto& s : forecasts_) {
            if (s.first != first_ || s.values.size() != cells) {
                throw AlignmentError("series " + s.name() + " is not on the dataset grid");
            }
            for (const double v : s.values) {
                if (!std::isfinite(v)) {
                    throw AlignmentError("series " + s.name() + " has a non-finite value");
                }
            }
        }
    }

    std::vector<HourlyMarketRecord> records_;
    std::vector<ZoneForecastSeries> forecasts_;
    CalDay first_;
    int n_days_ = 0;
};

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

namespace detail {

struct CellKey {
    CalDay date;
    int hour;
    friend auto operator<=>(const CellKey&, const CellKey&) = default;
};

// Per-series staging area while files are parsed.
struct SeriesDraft {
    std::map<CellKey, double> cells;
};

inline CellKey parse_cell(CsvReader& r, const std::string& date_s, const std::string& hour_s) {
    CalDay date;
    try {
        date = CalDay::parse(date_s);
    } catch (const std::invalid_argument& e) {
        r.fail(e.what());
    }
    const long hour = parse_int_field(r, hour_s, "hour");
    if (hour < 0 || hour >= kHoursPerDay) {
        r.fail("hour out of range [0,23]: " + hour_s);
    }
    return CellKey{date, static_cast<int>(hour)};
}

// Maximal contiguous run of complete days (all 24 hours present), trimming
// incomplete leading/trailing days. Interior gaps are reported by the caller's
// completeness check, so only the outer trim happens here.
inline bool complete_span(const std::map<CellKey, double>& cells, DayRange& out) {
    std::map<CalDay, int> per_day;
    for (const auto& [key, value] : cells) {
        (void)value;
        per_day[key.date] += 1;
    }
    CalDay lo, hi;
    bool found = false;
    for (const auto& [day, count] : per_day) {
        if (count != kHoursPerDay) continue;
        if (!found) {
            lo = hi = day;
            found = true;
        } else {
            if (day < lo) lo = day;
            if (day > hi) hi = day;
        }
    }
    if (found) out = {lo, hi};
    return found;
}

} // namespace detail

// Loads and validates a dataset. The resulting date range is the maximal span
// over which every series (prices and all forecasts) is complete; incomplete
// leading/trailing days are dropped. A hole inside that span raises an
// AlignmentError naming the series and the first missing (date, hour).
inline MarketDataset load_dataset(const std::filesystem::path& price_path,
                                  const std::vector<std::filesystem::path>& forecast_paths) {
    using detail::CellKey;

    // Prices.
    std::map<CellKey, std::pair<double, double>> price_cells;
    {
        CsvReader r(price_path);
        r.expect_header("date,hour,dam_price,sced_price");
        std::vector<std::string> f;
        while (r.next_row(f)) {
            if (f.size() != 4) r.fail("expected 4 fields, got " + std::to_string(f.size()));
            const CellKey key = detail::parse_cell(r, f[0], f[1]);
            const double dam = parse_double_field(r, f[2], "dam_price");
            const double sced = parse_double_field(r, f[3], "sced_price");
            if (!price_cells.emplace(key, std::make_pair(dam, sced)).second) {
                r.fail("duplicate price row for (" + key.date.to_string() + ", hour " +
                       std::to_string(key.hour) + ")");
            }
        }
    }
    if (price_cells.empty()) {
        throw AlignmentError(price_path.string() + ": no price rows");
    }

    // Forecast series, keyed by (kind, zone) across all files.
    std::map<std::pair<ForecastKind, std::string>, detail::SeriesDraft> drafts;
    for (const auto& path : forecast_paths) {
        CsvReader r(path);
        r.expect_header("date,hour,kind,zone,mw");
        std::vector<std::string> f;
        while (r.next_row(f)) {
            if (f.size() != 5) r.fail("expected 5 fields, got " + std::to_string(f.size()));
            const CellKey key = detail::parse_cell(r, f[0], f[1]);
            ForecastKind kind;
            try {
                kind = parse_kind(f[2]);
            } catch (const std::invalid_argument& e) {
                r.fail(e.what());
            }
            const double mw = parse_double_field(r, f[4], "mw");
            if (kind == ForecastKind::load && mw <= 0.0) r.fail("load must be > 0, got " + f[4]);
            if (kind != ForecastKind::load && mw < 0.0) r.fail("mw must be >= 0, got " + f[4]);
            auto& draft = drafts[{kind, f[3]}];
            if (!draft.cells.emplace(key, mw).second) {
                r.fail("duplicate forecast row for " + std::string(kind_name(kind)) + ":" + f[3] +
                       " (" + key.date.to_string() + ", hour " + std::to_string(key.hour) + ")");
            }
        }
    }

    // Intersect complete spans.
    DayRange span{};
    {
        std::map<detail::CellKey, double> flat;
        for (const auto& [key, value] : price_cells) flat.emplace(key, value.first);
        if (!detail::complete_span(flat, span)) {
            throw AlignmentError("prices: no complete day (24 hours) found");
        }
    }
    for (const auto& [key, draft] : drafts) {
        DayRange s{};
        const std::string name = std::string(kind_name(key.first)) + ":" + key.second;
        if (!detail::complete_span(draft.cells, s)) {
            throw AlignmentError(name + ": no complete day (24 hours) found");
        }
        span.first = std::max(span.first, s.first);
        span.last = std::min(span.last, s.last);
    }
    if (!span.valid()) {
        throw AlignmentError("series have no common complete date range");
    }

    // Materialize over the span; any hole inside it is an alignment error.
    std::vector<HourlyMarketRecord> records;
    records.reserve(static_cast<size_t>(span.size()) * kHoursPerDay);
    for (CalDay d = span.first; d <= span.last; ++d) {
        for (int h = 0; h < kHoursPerDay; ++h) {
            const auto it = price_cells.find({d, h});
            if (it == price_cells.end()) {
                throw AlignmentError("prices: missing cell (" + d.to_string() + ", hour " +
                                     std::to_string(h) + ")");
            }
            records.push_back({d, h, it->second.first, it->second.second});
        }
    }
    std::vector<ZoneForecastSeries> series;
    series.reserve(drafts.size());
    for (const auto& [key, draft] : drafts) {
        ZoneForecastSeries s;
        s.kind = key.first;
        s.zone = key.second;
        s.first = span.first;
        s.values.reserve(static_cast<size_t>(span.size()) * kHoursPerDay);
        for (CalDay d = span.first; d <= span.last; ++d) {
            for (int h = 0; h < kHoursPerDay; ++h) {
                const auto it = draft.cells.find({d, h});
                if (it == draft.cells.end()) {
                    throw AlignmentError(s.name() + ": missing cell (" + d.to_string() +
                                         ", hour " + std::to_string(h) + ")");
                }
                s.values.push_back(it->second);
            }
        }
        series.push_back(std::move(s));
    }
    return MarketDataset(std::move(records), std::move(series));
}

// Writes the dataset back out in the ingestion schemas (6 decimal places).
inline void save_dataset(const MarketDataset& ds, const std::filesystem::path& price_path,
                         const std::filesystem::path& forecast_path) {
    {
        std::ofstream out = open_output(price_path);
        out << "date,hour,dam_price,sced_price\n";
        for (const auto& r : ds.records()) {
            out << r.date.to_string() << ',' << r.hour << ',' << fmt6(r.dam_price) << ','
                << fmt6(r.sced_price) << '\n';
        }
    }
    {
        std::ofstream out = open_output(forecast_path);
        out << "date,hour,kind,zone,mw\n";
        for (const auto& s : ds.forecasts()) {
            const DayRange range = ds.date_range();
            for (CalDay d = range.first; d <= range.last; ++d) {
                for (int h = 0; h < kHoursPerDay; ++h) {
                    out << d.to_string() << ',' << h << ',' << kind_name(s.kind) << ',' << s.zone
                        << ',' << fmt6(s.at(d, h)) << '\n';
                }
            }
        }
    }
}

// Returns the sub-dataset covering [start, end].
inline MarketDataset slice_days(const MarketDataset& ds, CalDay start, CalDay end) {
    if (start > end) {
        throw std::out_of_range("slice_days: start " + start.to_string() + " after end " +
                                end.to_string());
    }
    if (!ds.date_range().contains(DayRange{start, end})) {
        throw std::out_of_range("slice_days: [" + start.to_string() + ", " + end.to_string() +
                                "] outside dataset range " + ds.date_range().to_string());
    }
    std::vector<HourlyMarketRecord> records;
    records.reserve(static_cast<size_t>(end - start + 1) * kHoursPerDay);
    for (const auto& r : ds.records()) {
        if (r.date >= start && r.date <= end) records.push_back(r);
    }
    std::vector<ZoneForecastSeries> series;
    series.reserve(ds.forecasts().size());
    for (const auto& s : ds.forecasts()) {
        ZoneForecastSeries sub;
        sub.kind = s.kind;
        sub.zone = s.zone;
        sub.first = start;
        for (CalDay d = start; d <= end; ++d) {
            for (int h = 0; h < kHoursPerDay; ++h) {
                sub.values.push_back(s.at(d, h));
            }
        }
        series.push_back(std::move(sub));
    }
    return MarketDataset(std::move(records), std::move(series));
}

// ---------------------------------------------------------------------------
// Synthetic generator
// ---------------------------------------------------------------------------

struct SynthConfig {
    int n_days = 420;
    int n_load_zones = 2;
    int n_solar_zones = 1;
    int n_wind_zones = 1;
    uint64_t seed = 0;
    double volatility = 1.0; // scales every stochastic term
    CalDay start = CalDay::from_ymd(2023, 1, 1);

    void validate() const {
        if (n_days < 40) throw std::invalid_argument("synth: n_days must be >= 40");
        if (n_load_zones < 1 || n_solar_zones < 1 || n_wind_zones < 1) {
            throw std::invalid_argument("synth: zone counts must be >= 1");
        }
        if (!(volatility > 0.0) || !std::isfinite(volatility)) {
            throw std::invalid_argument("synth: volatility must be positive and finite");
        }
    }
};

// Seasonal + diurnal sinusoids with seeded noise and an evening spike regime.
// Deterministic for a fixed config. Properties relied on elsewhere:
//   - solar is exactly 0 outside the 06-20 daylight window,
//   - most spreads fall in the neutral band [-5, 5),
//   - hour 19 carries occasional large negative spreads whose likelihood rises
//     with the evening net load, so the signal is learnable from the inputs.
inline MarketDataset generate_synthetic(const SynthConfig& cfg) {
    cfg.validate();
    Rng rng(mix_seed(cfg.seed, 0x5eedULL));
    const double vol = cfg.volatility;

    std::vector<ZoneForecastSeries> series;
    auto add_series = [&](ForecastKind kind, int count, const char* prefix) {
        for (int z = 0; z < count; ++z) {
            ZoneForecastSeries s;
            s.kind = kind;
            s.zone = prefix + std::to_string(z);
            s.first = cfg.start;
            s.values.assign(static_cast<size_t>(cfg.n_days) * kHoursPerDay, 0.0);
            series.push_back(std::move(s));
        }
    };
    add_series(ForecastKind::load, cfg.n_load_zones, "LZ");
    add_series(ForecastKind::solar, cfg.n_solar_zones, "SZ");
    add_series(ForecastKind::wind, cfg.n_wind_zones, "WZ");
    auto* load0 = &series[0];
    auto* solar0 = &series[static_cast<size_t>(cfg.n_load_zones)];
    auto* wind0 = &series[static_cast<size_t>(cfg.n_load_zones + cfg.n_solar_zones)];

    // Slow mean-reverting wind state per zone.
    std::vector<double> wind_state(static_cast<size_t>(cfg.n_wind_zones), 0.0);

    std::vector<HourlyMarketRecord> records;
    records.reserve(static_cast<size_t>(cfg.n_days) * kHoursPerDay);

    double total_base_load = 0.0;
    for (int z = 0; z < cfg.n_load_zones; ++z) total_base_load += 900.0 + 400.0 * z;

    for (int di = 0; di < cfg.n_days; ++di) {
        const CalDay date = cfg.start + di;
        const double years = di / 365.25;
        // Annual cycle peaking in mid-July (day-of-year ~196).
        const int doy = date - CalDay::from_ymd(date.year(), 1, 1);
        const double season = std::cos(2.0 * std::numbers::pi * (doy - 196) / 365.25);
        const bool weekend = date.day_of_week() >= 5;
        // Occasional cold-snap / heat-wave days lift the whole load profile;
        // these occur year-round and are visible in the load forecast.
        const double snap = rng.uniform() < 0.08 ? 0.10 + 0.15 * rng.uniform() : 0.0;
        const double day_level = (1.0 + 0.04 * vol * rng.gaussian()) * (1.0 + snap);

        // Load.
        for (int z = 0; z < cfg.n_load_zones; ++z) {
            const double base = 900.0 + 400.0 * z;
            for (int h = 0; h < kHoursPerDay; ++h) {
                const double evening = std::exp(-0.5 * std::pow((h - 17.5) / 3.6, 2.0));
                const double morning = std::exp(-0.5 * std::pow((h - 8.0) / 2.5, 2.0));
                const double diurnal = 0.72 + 0.30 * evening + 0.10 * morning;
                double v = base * (1.0 + 0.12 * season) * (weekend ? 0.92 : 1.0) * diurnal *
                           day_level * (1.0 + 0.02 * vol * rng.gaussian());
                load0[z].values[static_cast<size_t>(di) * kHoursPerDay + h] = std::max(v, 1.0);
            }
        }

        // Solar: zero outside the 06-20 daylight window; capacity grows year on year.
        for (int z = 0; z < cfg.n_solar_zones; ++z) {
            const double cap = (320.0 + 180.0 * z) * (1.0 + 0.25 * years);
            const double daylight = 0.75 + 0.25 * season;
            const double cloud = 0.45 + 0.55 * rng.uniform();
            for (int h = 0; h < kHoursPerDay; ++h) {
                double v = 0.0;
                if (h >= 6 && h <= 20) {
                    const double shape = std::sin(std::numbers::pi * (h - 6) / 14.0);
                    v = cap * daylight * cloud * shape * (1.0 + 0.06 * vol * rng.gaussian());
                    v = std::max(v, 0.0);
                }
                solar0[z].values[static_cast<size_t>(di) * kHoursPerDay + h] = v;
            }
        }

        // Wind: slow AR(1) level plus hourly jitter.
        for (int z = 0; z < cfg.n_wind_zones; ++z) {
            const double cap = (260.0 + 140.0 * z) * (1.0 + 0.18 * years);
            auto& state = wind_state[static_cast<size_t>(z)];
            state = 0.85 * state + 0.15 * rng.gaussian();
            const double level = 0.45 + 0.35 * std::tanh(state);
            for (int h = 0; h < kHoursPerDay; ++h) {
                double v = cap * level * (1.0 + 0.10 * vol * rng.gaussian());
                wind0[z].values[static_cast<size_t>(di) * kHoursPerDay + h] = std::max(v, 0.0);
            }
        }

        // Prices. DAM follows the normalized net load; the spread is mostly a
        // tight noise band with occasional heavy-tailed excursions, plus the
        // evening spike regime at hour 19.
        double net19 = 0.0;
        std::array<double, kHoursPerDay> net{};
        for (int h = 0; h < kHoursPerDay; ++h) {
            double load_sum = 0.0, renew_sum = 0.0;
            for (int z = 0; z < cfg.n_load_zones; ++z) {
                load_sum += load0[z].values[static_cast<size_t>(di) * kHoursPerDay + h];
            }
            for (int z = 0; z < cfg.n_solar_zones; ++z) {
                renew_sum += solar0[z].values[static_cast<size_t>(di) * kHoursPerDay + h];
            }
            for (int z = 0; z < cfg.n_wind_zones; ++z) {
                renew_sum += wind0[z].values[static_cast<size_t>(di) * kHoursPerDay + h];
            }
            net[static_cast<size_t>(h)] = (load_sum - renew_sum) / total_base_load;
        }
        net19 = net[19];

        // Evening scarcity: spike probability follows a steep logistic in the
        // hour-19 net load, so high-net-load days are strongly spike-prone and
        // the regime is recoverable from the forecast inputs.
        const double p_spike = 0.03 + 0.78 / (1.0 + std::exp(-40.0 * (net19 - 0.97)));
        const bool spike = rng.uniform() < p_spike;
        const double spike_mag = 13.0 + 18.0 * vol * (-std::log(1.0 - rng.uniform()));
        const double shoulder = rng.uniform();

        for (int h = 0; h < kHoursPerDay; ++h) {
            const double dam = 14.0 + 52.0 * net[static_cast<size_t>(h)] + 2.0 * vol * rng.gaussian();
            double spread = (rng.uniform() < 0.92 ? 3.2 : 10.0) * vol * rng.gaussian();
            if (rng.uniform() < 0.01) {
                spread += 8.0 + 12.0 * vol * (-std::log(1.0 - rng.uniform()));
            }
            if (spike) {
                if (h == 19) spread -= spike_mag;
                if (h == 18) spread -= 0.45 * spike_mag * shoulder;
                if (h == 20) spread -= 0.30 * spike_mag * shoulder;
            }
            records.push_back({date, h, dam, dam + spread});
        }
    }

    return MarketDataset(std::move(records), std::move(series));
}

} // namespace spreadcast
