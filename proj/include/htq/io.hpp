#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "htq/codebook.hpp"
#include "htq/common.hpp"
#include "htq/histogram.hpp"
#include "htq/tail.hpp"

namespace htq {

using ordered_json = nlohmann::ordered_json;

inline std::vector<uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrKind::IoError, "cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                               std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file_bytes(const std::string& path, std::span<const uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrKind::IoError, "cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    require(out.good(), ErrKind::IoError, "short write to " + path);
}

inline void write_file_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    require(out.good(), ErrKind::IoError, "cannot open " + path + " for writing");
    out << text;
    require(out.good(), ErrKind::IoError, "short write to " + path);
}

// Gradient dumps: flat little-endian f32, or one value per line (CSV).

inline std::vector<double> read_f32_dump(const std::string& path) {
    auto bytes = read_file_bytes(path);
    require(bytes.size() % 4 == 0, ErrKind::ParseError, path + ": size not a multiple of 4");
    std::vector<double> values(bytes.size() / 4);
    for (size_t i = 0; i < values.size(); ++i) {
        uint32_t u = static_cast<uint32_t>(bytes[4 * i]) |
                     (static_cast<uint32_t>(bytes[4 * i + 1]) << 8) |
                     (static_cast<uint32_t>(bytes[4 * i + 2]) << 16) |
                     (static_cast<uint32_t>(bytes[4 * i + 3]) << 24);
        values[i] = static_cast<double>(std::bit_cast<float>(u));
    }
    return values;
}

inline void write_f32_dump(const std::string& path, std::span<const double> values) {
    std::vector<uint8_t> bytes(values.size() * 4);
    for (size_t i = 0; i < values.size(); ++i) {
        uint32_t u = std::bit_cast<uint32_t>(static_cast<float>(values[i]));
        bytes[4 * i] = static_cast<uint8_t>(u & 0xff);
        bytes[4 * i + 1] = static_cast<uint8_t>((u >> 8) & 0xff);
        bytes[4 * i + 2] = static_cast<uint8_t>((u >> 16) & 0xff);
        bytes[4 * i + 3] = static_cast<uint8_t>((u >> 24) & 0xff);
    }
    write_file_bytes(path, bytes);
}

inline std::vector<double> read_csv_dump(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrKind::IoError, "cannot open " + path);
    std::vector<double> values;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        try {
            size_t used = 0;
            double v = std::stod(line, &used);
            while (used < line.size() && (line[used] == ' ' || line[used] == '\r')) ++used;
            require(used == line.size(), ErrKind::ParseError, "trailing junk");
            values.push_back(v);
        } catch (const HtqError&) {
            raise(ErrKind::ParseError, path + ":" + std::to_string(line_no) + ": not a number");
        } catch (const std::exception&) {
            raise(ErrKind::ParseError, path + ":" + std::to_string(line_no) + ": not a number");
        }
    }
    return values;
}

// Format detection by extension; ".csv" is text, anything else is f32 binary.
inline std::vector<double> read_gradient_dump(const std::string& path, const std::string& format = "auto") {
    std::string fmt = format;
    if (fmt == "auto")
        fmt = path.size() >= 4 && path.substr(path.size() - 4) == ".csv" ? "csv" : "f32";
    if (fmt == "csv") return read_csv_dump(path);
    if (fmt == "f32") return read_f32_dump(path);
    raise(ErrKind::UsageError, "unknown dump format: " + fmt);
}

// Fitted-tail report: {gamma, g_min, rho, n_tail}, plus gamma_clamped /
// gamma_raw only when the MLE landed outside (3, 5].

inline ordered_json tail_to_json(const TailFitReport& r) {
    ordered_json j;
    j["gamma"] = r.tail.gamma;
    j["g_min"] = r.tail.g_min;
    j["rho"] = r.tail.rho;
    j["n_tail"] = r.n_tail;
    if (r.gamma_clamped) {
        j["gamma_clamped"] = true;
        j["gamma_raw"] = r.gamma_raw;
    }
    return j;
}

inline PowerLawTail tail_from_json(const ordered_json& j) {
    PowerLawTail t;
    try {
        t.gamma = j.at("gamma").get<double>();
        t.g_min = j.at("g_min").get<double>();
        t.rho = j.at("rho").get<double>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrKind::ParseError, std::string("bad tail JSON: ") + e.what());
    }
    validate_tail(t);
    return t;
}

inline PowerLawTail read_tail_json(const std::string& path) {
    auto bytes = read_file_bytes(path);
    ordered_json j = ordered_json::parse(bytes.begin(), bytes.end(), nullptr, false);
    require(!j.is_discarded(), ErrKind::ParseError, path + ": invalid JSON");
    return tail_from_json(j);
}

inline ordered_json histogram_to_json(const DensityHistogram& h) {
    ordered_json j;
    j["edges"] = h.edges();
    j["mass"] = h.mass();
    j["symmetric"] = h.symmetric();
    return j;
}

inline DensityHistogram histogram_from_json(const ordered_json& j) {
    try {
        return DensityHistogram(j.at("edges").get<std::vector<double>>(),
                                j.at("mass").get<std::vector<double>>(),
                                j.value("symmetric", false));
    } catch (const nlohmann::json::exception& e) {
        raise(ErrKind::ParseError, std::string("bad histogram JSON: ") + e.what());
    }
}

inline DensityHistogram read_histogram_json(const std::string& path) {
    auto bytes = read_file_bytes(path);
    ordered_json j = ordered_json::parse(bytes.begin(), bytes.end(), nullptr, false);
    require(!j.is_discarded(), ErrKind::ParseError, path + ": invalid JSON");
    return histogram_from_json(j);
}

inline ordered_json codebook_to_json(const Codebook& cb) {
    ordered_json j;
    j["levels"] = cb.levels;
    j["bits"] = cb.bits;
    return j;
}

inline Codebook codebook_from_json(const ordered_json& j) {
    Codebook cb;
    try {
        cb.levels = j.at("levels").get<std::vector<double>>();
        cb.bits = j.at("bits").get<int>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrKind::ParseError, std::string("bad codebook JSON: ") + e.what());
    }
    require(cb.levels.size() >= 2, ErrKind::ParseError, "codebook needs at least 2 levels");
    return cb;
}

}  // namespace htq
