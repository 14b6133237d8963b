// Minimal CSV helpers. Files produced here use no quoting or embedded commas,
// so a plain split is sufficient.
#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spreadcast/errors.hpp"

namespace spreadcast {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
        const size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

// Row-by-row reader that tracks 1-based line numbers for error messages.
class CsvReader {
public:
    explicit CsvReader(const std::filesystem::path& path) : path_(path.string()), in_(path) {
        if (!in_.is_open()) {
            throw ParseError("cannot open CSV file: " + path_);
        }
    }

    // Reads the next non-empty row. Returns false at end of file.
    bool next_row(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            fields = split_csv_line(line);
            return true;
        }
        return false;
    }

    int line_no() const { return line_no_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path_ + ":" + std::to_string(line_no_) + ": " + what);
    }

    void expect_header(const std::string& expected) {
        std::vector<std::string> fields;
        if (!next_row(fields)) fail("empty file, expected header '" + expected + "'");
        std::string got;
        for (size_t i = 0; i < fields.size(); ++i) {
            if (i) got += ',';
            got += fields[i];
        }
        if (got != expected) fail("bad header '" + got + "', expected '" + expected + "'");
    }

private:
    std::string path_;
    std::ifstream in_;
    int line_no_ = 0;
};

inline double parse_double_field(const CsvReader& r, const std::string& s, const char* what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0') {
        throw ParseError(r.path() + ":" + std::to_string(r.line_no()) + ": bad " +
                         std::string(what) + " '" + s + "'");
    }
    if (!std::isfinite(v)) {
        throw ParseError(r.path() + ":" + std::to_string(r.line_no()) + ": non-finite " +
                         std::string(what) + " '" + s + "'");
    }
    return v;
}

inline long parse_int_field(const CsvReader& r, const std::string& s, const char* what) {
    const char* begin = s.c_str();
    char* end = nullptr;
    const long v = std::strtol(begin, &end, 10);
    if (end == begin || *end != '\0') {
        throw ParseError(r.path() + ":" + std::to_string(r.line_no()) + ": bad " +
                         std::string(what) + " '" + s + "'");
    }
    return v;
}

// All numeric CSV output is written with 6 decimal places.
inline std::string fmt6(double v) {
    if (v == 0.0) v = 0.0; // collapse negative zero
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

inline std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out.is_open()) {
        throw DataError("cannot open output file: " + path.string());
    }
    return out;
}

} // namespace spreadcast
