#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "rydsim/errors.hpp"

namespace rydsim {

// Shortest decimal representation that round-trips to the same double.
// Used for every numeric field we write, so outputs are byte-identical for
// identical (config, seed) pairs.
inline std::string format_double(double x) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw NumericError("format_double: to_chars failed");
    return std::string(buf, ptr);
}

inline double parse_double(std::string_view s) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ValidationError("parse_double: bad numeric field '" + std::string(s) + "'");
    return x;
}

class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    void add_row(const std::vector<double>& row) {
        if (row.size() != columns_.size())
            throw ShapeError("csv row width " + std::to_string(row.size()) +
                             " != header width " + std::to_string(columns_.size()));
        rows_.push_back(row);
    }

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }

    std::string str() const {
        std::ostringstream os;
        for (std::size_t c = 0; c < columns_.size(); ++c) {
            if (c) os << ',';
            os << columns_[c];
        }
        os << '\n';
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) os << ',';
                os << format_double(row[c]);
            }
            os << '\n';
        }
        return os.str();
    }

    void write(const std::filesystem::path& path) const {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw ResourceError("cannot open for write: " + path.string());
        f << str();
        if (!f) throw ResourceError("write failed: " + path.string());
    }

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ResourceError("cannot open: " + path.string());
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ResourceError("cannot open for write: " + path.string());
    f << text;
    if (!f) throw ResourceError("write failed: " + path.string());
}

}  // namespace rydsim
