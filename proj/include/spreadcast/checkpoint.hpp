// Versioned binary model checkpoints. Raw little-endian doubles so a
// save/load cycle reproduces every parameter bit for bit.
#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "spreadcast/csv.hpp"
#include "spreadcast/errors.hpp"
#include "spreadcast/forecaster.hpp"

namespace spreadcast {

namespace detail {

inline constexpr char kCheckpointMagic[8] = {'S', 'P', 'C', 'K', 'P', 'T', '0', '1'};

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw DataError("truncated checkpoint: " + path);
    }
    return v;
}

} // namespace detail

inline void save_checkpoint(const ModelParams& params, const std::filesystem::path& path) {
    std::ofstream out = open_output(path);
    out.write(detail::kCheckpointMagic, sizeof(detail::kCheckpointMagic));

    const ModelConfig& c = params.config;
    detail::write_pod(out, static_cast<int32_t>(c.d_model));
    detail::write_pod(out, static_cast<int32_t>(c.n_layers));
    detail::write_pod(out, static_cast<int32_t>(c.n_heads));
    detail::write_pod(out, static_cast<int32_t>(c.ff_width));
    detail::write_pod(out, c.pe_dropout);
    detail::write_pod(out, static_cast<int32_t>(c.lagging));
    detail::write_pod(out, static_cast<int32_t>(c.input_width));
    detail::write_pod(out, static_cast<uint64_t>(c.seed));

    uint32_t n_tensors = 0;
    params.for_each([&](const std::string&, const Eigen::MatrixXd&) { ++n_tensors; });
    detail::write_pod(out, n_tensors);

    params.for_each([&](const std::string& name, const Eigen::MatrixXd& m) {
        detail::write_pod(out, static_cast<uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        detail::write_pod(out, static_cast<uint32_t>(m.rows()));
        detail::write_pod(out, static_cast<uint32_t>(m.cols()));
        out.write(reinterpret_cast<const char*>(m.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(m.size())));
    });
    if (!out.good()) {
        throw DataError("failed writing checkpoint: " + path.string());
    }
}

inline ModelParams load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.is_open()) {
        throw DataError("cannot open checkpoint: " + path.string());
    }
    const std::string p = path.string();

    char magic[sizeof(detail::kCheckpointMagic)];
    if (!in.read(magic, sizeof(magic)) ||
        std::memcmp(magic, detail::kCheckpointMagic, sizeof(magic)) != 0) {
        throw DataError("not a spreadcast checkpoint: " + p);
    }

    ModelConfig c;
    c.d_model = detail::read_pod<int32_t>(in, p);
    c.n_layers = detail::read_pod<int32_t>(in, p);
    c.n_heads = detail::read_pod<int32_t>(in, p);
    c.ff_width = detail::read_pod<int32_t>(in, p);
    c.pe_dropout = detail::read_pod<double>(in, p);
    c.lagging = detail::read_pod<int32_t>(in, p);
    c.input_width = detail::read_pod<int32_t>(in, p);
    c.seed = detail::read_pod<uint64_t>(in, p);
    c.validate();

    // Shape the parameter structure from the config, then fill tensors by name.
    ModelParams params = init_model(c);
    const uint32_t n_tensors = detail::read_pod<uint32_t>(in, p);
    uint32_t filled = 0;
    for (uint32_t t = 0; t < n_tensors; ++t) {
        const uint32_t name_len = detail::read_pod<uint32_t>(in, p);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len)) throw DataError("truncated checkpoint: " + p);
        const uint32_t rows = detail::read_pod<uint32_t>(in, p);
        const uint32_t cols = detail::read_pod<uint32_t>(in, p);
        bool matched = false;
        params.for_each([&](const std::string& n, Eigen::MatrixXd& m) {
            if (n != name) return;
            matched = true;
            if (m.rows() != static_cast<Eigen::Index>(rows) ||
                m.cols() != static_cast<Eigen::Index>(cols)) {
                throw DataError("checkpoint tensor '" + name + "' has shape " +
                                std::to_string(rows) + "x" + std::to_string(cols) +
                                ", expected " + std::to_string(m.rows()) + "x" +
                                std::to_string(m.cols()) + ": " + p);
            }
            if (!in.read(reinterpret_cast<char*>(m.data()),
                         static_cast<std::streamsize>(sizeof(double) *
                                                      static_cast<size_t>(m.size())))) {
                throw DataError("truncated checkpoint: " + p);
            }
        });
        if (!matched) throw DataError("unknown checkpoint tensor '" + name + "': " + p);
        ++filled;
    }
    uint32_t expected = 0;
    params.for_each([&](const std::string&, const Eigen::MatrixXd&) { ++expected; });
    if (filled != expected) {
        throw DataError("checkpoint tensor count mismatch: " + p);
    }
    return params;
}

} // namespace spreadcast
