// Calendar-day arithmetic on a plain day grid (no timezones, no DST).
#pragma once

#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace spreadcast {

// A calendar day, stored as days since 1970-01-01.
class CalDay {
public:
    constexpr CalDay() = default;
    constexpr explicit CalDay(int32_t days_since_epoch) : days_(days_since_epoch) {}

    static CalDay from_ymd(int year, unsigned month, unsigned day) {
        const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                              std::chrono::day{day}};
        if (!ymd.ok()) {
            throw std::invalid_argument("invalid calendar date: " + std::to_string(year) + "-" +
                                        std::to_string(month) + "-" + std::to_string(day));
        }
        return CalDay(static_cast<int32_t>(std::chrono::sys_days{ymd}.time_since_epoch().count()));
    }

    // Parses strict ISO-8601 "YYYY-MM-DD".
    static CalDay parse(std::string_view text) {
        int y = 0;
        unsigned m = 0, d = 0;
        char tail = '\0';
        const std::string s(text);
        if (std::sscanf(s.c_str(), "%d-%u-%u%c", &y, &m, &d, &tail) != 3 || s.size() != 10 ||
            s[4] != '-' || s[7] != '-') {
            throw std::invalid_argument("invalid ISO date: '" + s + "'");
        }
        return from_ymd(y, m, d);
    }

    constexpr int32_t count() const { return days_; }

    int year() const { return static_cast<int>(ymd().year()); }
    unsigned month() const { return static_cast<unsigned>(ymd().month()); }
    unsigned day_of_month() const { return static_cast<unsigned>(ymd().day()); }

    // Monday = 0 ... Sunday = 6.
    int day_of_week() const {
        const std::chrono::weekday wd{std::chrono::sys_days{std::chrono::days{days_}}};
        return static_cast<int>(wd.iso_encoding()) - 1;
    }

    std::string to_string() const {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", year(), month(), day_of_month());
        return buf;
    }

    friend constexpr auto operator<=>(CalDay, CalDay) = default;

    constexpr CalDay& operator+=(int days) { days_ += days; return *this; }
    constexpr CalDay& operator-=(int days) { days_ -= days; return *this; }
    friend constexpr CalDay operator+(CalDay d, int n) { return CalDay(d.days_ + n); }
    friend constexpr CalDay operator-(CalDay d, int n) { return CalDay(d.days_ - n); }
    friend constexpr int operator-(CalDay a, CalDay b) { return a.days_ - b.days_; }
    constexpr CalDay& operator++() { ++days_; return *this; }

private:
    std::chrono::year_month_day ymd() const {
        return std::chrono::year_month_day{std::chrono::sys_days{std::chrono::days{days_}}};
    }

    int32_t days_ = 0;
};

// Inclusive day range [first, last].
struct DayRange {
    CalDay first;
    CalDay last;

    constexpr int size() const { return last - first + 1; }
    constexpr bool valid() const { return first <= last; }
    constexpr bool contains(CalDay d) const { return first <= d && d <= last; }
    constexpr bool contains(DayRange r) const { return contains(r.first) && contains(r.last); }

    std::string to_string() const { return first.to_string() + ".." + last.to_string(); }

    friend constexpr bool operator==(DayRange, DayRange) = default;
};

} // namespace spreadcast
