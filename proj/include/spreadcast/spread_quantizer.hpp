// Quantization of the hourly SCED-DAM price spread into 5 ordinal classes.
//
// Default class intervals, $/MWh, left-closed:
//   0: (-inf, -12)   1: [-12, -5)   2: [-5, 5)   3: [5, 12)   4: [12, +inf)
// Class 2 is the neutral (no-trade) band.
#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace spreadcast {

inline constexpr int kNumClasses = 5;
inline constexpr int kNeutralClass = 2;

// One of the five ordinal spread classes.
class SpreadClass {
public:
    constexpr SpreadClass() = default;
    explicit SpreadClass(int index) : index_(index) {
        if (index < 0 || index >= kNumClasses) {
            throw std::invalid_argument("spread class index out of range: " + std::to_string(index));
        }
    }

    constexpr int index() const { return index_; }
    constexpr bool is_neutral() const { return index_ == kNeutralClass; }

    friend constexpr auto operator<=>(SpreadClass, SpreadClass) = default;

private:
    int index_ = 0;
};

// The four boundaries separating the five classes; must be strictly increasing.
struct QuantizerConfig {
    std::array<double, 4> thresholds{-12.0, -5.0, 5.0, 12.0};

    void validate() const {
        for (size_t i = 0; i < thresholds.size(); ++i) {
            if (!std::isfinite(thresholds[i])) {
                throw std::invalid_argument("quantizer threshold must be finite");
            }
            if (i > 0 && thresholds[i] <= thresholds[i - 1]) {
                throw std::invalid_argument("quantizer thresholds must be strictly increasing");
            }
        }
    }
};

// Maps a finite spread to its class. Boundaries are left-closed: a spread equal
// to a threshold belongs to the class above it.
inline SpreadClass quantize(double spread, const QuantizerConfig& q = {}) {
    if (!std::isfinite(spread)) {
        throw std::invalid_argument("cannot quantize non-finite spread");
    }
    int idx = 0;
    for (const double t : q.thresholds) {
        if (spread >= t) ++idx;
    }
    return SpreadClass(idx);
}

// Trade direction implied by a predicted class: negative-spread classes take the
// short-real-time side (virtual supply offer), positive-spread classes the long
// side (virtual demand bid), neutral trades nothing.
inline int class_direction(SpreadClass c) {
    if (c.index() < kNeutralClass) return -1;
    if (c.index() > kNeutralClass) return +1;
    return 0;
}

// Interval [lower, upper) covered by a class; outer classes are unbounded.
inline std::pair<double, double> class_bounds(SpreadClass c, const QuantizerConfig& q = {}) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const int i = c.index();
    const double lo = (i == 0) ? -inf : q.thresholds[static_cast<size_t>(i - 1)];
    const double hi = (i == kNumClasses - 1) ? inf : q.thresholds[static_cast<size_t>(i)];
    return {lo, hi};
}

} // namespace spreadcast
