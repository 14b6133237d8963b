// Per-day time-information features: holiday flag, year trend, and cyclical
// encodings of month, day-of-month and day-of-week.
#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

#include "spreadcast/dates.hpp"
#include "spreadcast/errors.hpp"

namespace spreadcast {

// Anchor for the linear year feature: year_scaled = year - 2023.
inline constexpr int kYearAnchor = 2023;

struct CalendarFeatures {
    double holiday_flag = 0.0; // 0 or 1
    double year_scaled = 0.0;  // year - 2023, carries the renewable-growth trend
    double month_sin = 0.0, month_cos = 1.0;
    double dom_sin = 0.0, dom_cos = 1.0;
    double dow_sin = 0.0, dow_cos = 1.0;

    static constexpr int kSize = 8;

    std::array<double, kSize> as_array() const {
        return {holiday_flag, year_scaled, month_sin, month_cos,
                dom_sin,      dom_cos,     dow_sin,   dow_cos};
    }
};

// (sin(2*pi*value/period), cos(2*pi*value/period)).
inline std::pair<double, double> cyclical_encode(int value, int period) {
    if (period <= 0) {
        throw std::invalid_argument("cyclical_encode: period must be >= 1");
    }
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(value) / period;
    return {std::sin(angle), std::cos(angle)};
}

namespace detail {

inline CalDay nth_weekday_of_month(int year, unsigned month, int weekday_mon0, int n) {
    CalDay d = CalDay::from_ymd(year, month, 1);
    while (d.day_of_week() != weekday_mon0) ++d;
    return d + 7 * (n - 1);
}

inline CalDay last_weekday_of_month(int year, unsigned month, int weekday_mon0) {
    // Walk back from the last day of the month.
    CalDay d = (month == 12) ? CalDay::from_ymd(year + 1, 1, 1) - 1
                             : CalDay::from_ymd(year, month + 1, 1) - 1;
    while (d.day_of_week() != weekday_mon0) d -= 1;
    return d;
}

} // namespace detail

// The six NERC holidays of one year (observed on their actual dates).
inline std::set<CalDay> nerc_holidays(int year) {
    constexpr int kMonday = 0, kThursday = 3;
    return {
        CalDay::from_ymd(year, 1, 1),                      // New Year's Day
        detail::last_weekday_of_month(year, 5, kMonday),   // Memorial Day
        CalDay::from_ymd(year, 7, 4),                      // Independence Day
        detail::nth_weekday_of_month(year, 9, kMonday, 1), // Labor Day
        detail::nth_weekday_of_month(year, 11, kThursday, 4), // Thanksgiving
        CalDay::from_ymd(year, 12, 25),                    // Christmas
    };
}

inline std::set<CalDay> nerc_holidays(int first_year, int last_year) {
    std::set<CalDay> all;
    for (int y = first_year; y <= last_year; ++y) {
        all.merge(nerc_holidays(y));
    }
    return all;
}

// Holidays file: one ISO-8601 date per line; '#' starts a comment.
inline std::set<CalDay> load_holidays_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in.is_open()) {
        throw ParseError("cannot open holidays file: " + path.string());
    }
    std::set<CalDay> days;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && (line.back() == ' ' || line.back() == '\t')) line.pop_back();
        size_t start = 0;
        while (start < line.size() && (line[start] == ' ' || line[start] == '\t')) ++start;
        line.erase(0, start);
        if (line.empty()) continue;
        try {
            days.insert(CalDay::parse(line));
        } catch (const std::invalid_argument& e) {
            throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return days;
}

// Month encoded with period 12 (values 1-12), day-of-month with period 31,
// day-of-week with period 7 (Monday = 0).
inline CalendarFeatures day_features(CalDay date, const std::set<CalDay>& holidays) {
    CalendarFeatures f;
    f.holiday_flag = holidays.count(date) ? 1.0 : 0.0;
    f.year_scaled = static_cast<double>(date.year() - kYearAnchor);
    std::tie(f.month_sin, f.month_cos) = cyclical_encode(static_cast<int>(date.month()), 12);
    std::tie(f.dom_sin, f.dom_cos) = cyclical_encode(static_cast<int>(date.day_of_month()), 31);
    std::tie(f.dow_sin, f.dow_cos) = cyclical_encode(date.day_of_week(), 7);
    return f;
}

} // namespace spreadcast
