// Exception types shared across the library.
#pragma once

#include <stdexcept>
#include <string>

namespace spreadcast {

// Malformed input text (CSV rows, config lines). Carries file/line context in the message.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Series present but not covering the same (date, hour) grid.
struct AlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid model/run configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor/sample dimensions inconsistent with the model configuration.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Inconsistent walk-forward window layout.
struct PlanError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Well-formed but unusable data (missing actuals, duplicate log rows, ...).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace spreadcast
