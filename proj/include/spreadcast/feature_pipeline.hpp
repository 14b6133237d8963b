// Turns a MarketDataset into model-ready samples: robust IQR scaling of the
// forecast series, per-day feature vector assembly, lag-window construction
// and spread masking.
//
// Day feature vector layout (fixed order, width D):
//   [0,8)                calendar block (CalendarFeatures order)
//   [8, 8+24*n_load)     scaled load, zone-major (24 hours per zone)
//   [..., +24*n_solar)   scaled solar, zone-major
//   [..., +24*n_wind)    scaled wind, zone-major
//   [D-24, D)            realized spread in raw dollars (masked to 0 for the
//                        last two positions of every sample)
#pragma once

#include <algorithm>
#include <array>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "spreadcast/calendar_features.hpp"
#include "spreadcast/market_data.hpp"
#include "spreadcast/spread_quantizer.hpp"

namespace spreadcast {

// Linear-interpolation quantile of an unsorted sample, p in [0, 1].
// For {1,2,3,4,5}: q(0.25) = 2, q(0.5) = 3, q(0.75) = 4.
inline double quantile_linear(std::vector<double> values, double p) {
    if (values.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const size_t lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

// Per-feature robust location/scale for the forecast series. Degenerate
// features (IQR == 0) fall back to unit scale.
struct ScalerParams {
    std::vector<std::string> names; // dataset series order, e.g. "load:LZ0"
    std::vector<double> medians;
    std::vector<double> iqrs;

    size_t index_of(std::string_view name) const {
        for (size_t i = 0; i < names.size(); ++i) {
            if (names[i] == name) return i;
        }
        throw std::invalid_argument("unknown feature: '" + std::string(name) + "'");
    }
};

// Median and IQR per forecast series, computed over the given training days only.
inline ScalerParams fit_scaler(const MarketDataset& ds, DayRange train_range) {
    if (!train_range.valid()) {
        throw std::invalid_argument("fit_scaler: empty day range");
    }
    if (!ds.date_range().contains(train_range)) {
        throw std::invalid_argument("fit_scaler: range " + train_range.to_string() +
                                    " outside dataset " + ds.date_range().to_string());
    }
    ScalerParams params;
    for (const auto& s : ds.forecasts()) {
        std::vector<double> values;
        values.reserve(static_cast<size_t>(train_range.size()) * kHoursPerDay);
        for (CalDay d = train_range.first; d <= train_range.last; ++d) {
            for (int h = 0; h < kHoursPerDay; ++h) {
                values.push_back(s.at(d, h));
            }
        }
        const double median = quantile_linear(values, 0.5);
        double iqr = quantile_linear(values, 0.75) - quantile_linear(values, 0.25);
        if (iqr == 0.0) iqr = 1.0;
        params.names.push_back(s.name());
        params.medians.push_back(median);
        params.iqrs.push_back(iqr);
    }
    return params;
}

inline double apply_scaler(double x, const ScalerParams& params, size_t feature_idx) {
    if (feature_idx >= params.names.size()) {
        throw std::invalid_argument("feature index out of range");
    }
    return (x - params.medians[feature_idx]) / params.iqrs[feature_idx];
}

inline double apply_scaler(double x, const ScalerParams& params, std::string_view name) {
    return apply_scaler(x, params, params.index_of(name));
}

inline double invert_scaler(double scaled, const ScalerParams& params, size_t feature_idx) {
    if (feature_idx >= params.names.size()) {
        throw std::invalid_argument("feature index out of range");
    }
    return scaled * params.iqrs[feature_idx] + params.medians[feature_idx];
}

// Widths and offsets of the day feature vector for a dataset's zone counts.
struct FeatureLayout {
    int n_load = 0;
    int n_solar = 0;
    int n_wind = 0;

    static FeatureLayout of(const MarketDataset& ds) {
        return {static_cast<int>(ds.zone_count(ForecastKind::load)),
                static_cast<int>(ds.zone_count(ForecastKind::solar)),
                static_cast<int>(ds.zone_count(ForecastKind::wind))};
    }

    int forecast_offset() const { return CalendarFeatures::kSize; }
    int spread_offset() const {
        return CalendarFeatures::kSize + kHoursPerDay * (n_load + n_solar + n_wind);
    }
    int day_width() const { return spread_offset() + kHoursPerDay; }
};

// One training/inference sample: a (lagging+1)-day sequence of day feature
// vectors for days T-lagging+1 .. T+1 plus the 24 class labels of day T+1.
struct ModelSample {
    Eigen::MatrixXd features; // (lagging+1) x D, one row per day, last row = T+1
    std::array<SpreadClass, kHoursPerDay> labels{};
    CalDay target_date;
};

// Builds the sample targeting `target` (day T+1). Historical positions carry
// the realized spread in raw dollars; positions T and T+1 carry zeros because
// neither day's spread is known at bid submission.
inline ModelSample build_sample(const MarketDataset& ds, CalDay target, int lagging,
                                const ScalerParams& scaler, const QuantizerConfig& quantizer,
                                const std::set<CalDay>& holidays) {
    if (lagging < 1 || lagging > 3) {
        throw std::invalid_argument("lagging must be in {1,2,3}");
    }
    const DayRange needed{target - lagging, target};
    if (!ds.date_range().contains(needed)) {
        throw std::out_of_range("build_sample: days " + needed.to_string() +
                                " outside dataset " + ds.date_range().to_string());
    }
    const FeatureLayout layout = FeatureLayout::of(ds);
    if (scaler.names.size() != ds.forecasts().size()) {
        throw std::invalid_argument("scaler does not match dataset series");
    }

    ModelSample sample;
    sample.target_date = target;
    const int seq_len = lagging + 1;
    sample.features.setZero(seq_len, layout.day_width());

    for (int pos = 0; pos < seq_len; ++pos) {
        const CalDay day = target - (lagging - pos);
        auto row = sample.features.row(pos);

        const auto cal = day_features(day, holidays).as_array();
        for (int i = 0; i < CalendarFeatures::kSize; ++i) row(i) = cal[static_cast<size_t>(i)];

        int col = layout.forecast_offset();
        for (size_t si = 0; si < ds.forecasts().size(); ++si) {
            const auto& s = ds.forecasts()[si];
            for (int h = 0; h < kHoursPerDay; ++h) {
                row(col++) = apply_scaler(s.at(day, h), scaler, si);
            }
        }

        // Spread block: realized dollars for strictly historical positions,
        // zeros for T and T+1.
        if (pos < seq_len - 2) {
            for (int h = 0; h < kHoursPerDay; ++h) {
                row(layout.spread_offset() + h) = ds.spread(day, h);
            }
        }
    }

    for (int h = 0; h < kHoursPerDay; ++h) {
        sample.labels[static_cast<size_t>(h)] = quantize(ds.spread(target, h), quantizer);
    }
    return sample;
}

// One sample per eligible target day in `targets`, ordered by date. With
// `skip_ineligible` set, targets lacking history (or a T+1 outside the
// dataset) are silently dropped; otherwise they raise.
inline std::vector<ModelSample> build_dataset(const MarketDataset& ds, DayRange targets,
                                              int lagging, const ScalerParams& scaler,
                                              const QuantizerConfig& quantizer,
                                              const std::set<CalDay>& holidays,
                                              bool skip_ineligible = true) {
    std::vector<ModelSample> samples;
    if (!targets.valid()) return samples;
    for (CalDay target = targets.first; target <= targets.last; ++target) {
        const bool eligible = ds.date_range().contains(DayRange{target - lagging, target});
        if (!eligible) {
            if (skip_ineligible) continue;
            throw std::out_of_range("build_dataset: target " + target.to_string() +
                                    " lacks history in dataset " + ds.date_range().to_string());
        }
        samples.push_back(build_sample(ds, target, lagging, scaler, quantizer, holidays));
    }
    return samples;
}

} // namespace spreadcast
