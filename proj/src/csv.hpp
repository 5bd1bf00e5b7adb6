#pragma once

// Minimal CSV support for the pipeline's flat numeric files. Fields never
// contain commas or quotes, so no quoting layer is needed; writers emit
// LF line endings and shortest round-trip float formatting so identical
// data always produces identical bytes.

#include "fuse/errors.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace fuse::csv {

struct Table {
    std::string file;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;  // row index 0 = first data row

    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        raise(ErrorCode::MalformedRow, file + ": missing column '" + std::string(name) + "'");
    }
};

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    fields.push_back(std::move(field));
    return fields;
}

inline Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) raise(ErrorCode::MissingFile, "cannot open " + path.string());
    Table table;
    table.file = path.filename().string();
    std::string line;
    if (!std::getline(in, line)) {
        raise(ErrorCode::MalformedRow, table.file + ": empty file");
    }
    table.header = split_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        table.rows.push_back(split_line(line));
    }
    return table;
}

// Row numbers in errors are 1-based data rows (header excluded).

inline double parse_double(const Table& t, std::size_t row, std::size_t col) {
    const std::string& s = t.rows[row][col];
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        raise(ErrorCode::MalformedRow,
              t.file + " row " + std::to_string(row + 1) + ": bad number '" + s + "'");
    }
    return value;
}

inline long parse_int(const Table& t, std::size_t row, std::size_t col) {
    const std::string& s = t.rows[row][col];
    long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        raise(ErrorCode::MalformedRow,
              t.file + " row " + std::to_string(row + 1) + ": bad integer '" + s + "'");
    }
    return value;
}

inline void expect_width(const Table& t, std::size_t row, std::size_t width) {
    if (t.rows[row].size() != width) {
        raise(ErrorCode::MalformedRow,
              t.file + " row " + std::to_string(row + 1) + ": expected " +
                  std::to_string(width) + " fields, got " + std::to_string(t.rows[row].size()));
    }
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

class Writer {
public:
    explicit Writer(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) raise(ErrorCode::IoFailure, "cannot write " + path.string());
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

}  // namespace fuse::csv
