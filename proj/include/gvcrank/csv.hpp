#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <system_error>
#include <vector>

#include "gvcrank/errors.hpp"

namespace gvcrank {

/// Shortest decimal representation that round-trips to the same double.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace csv {

/// Parses RFC-4180-style CSV: quoted fields, doubled quotes inside quotes,
/// CRLF and LF line endings. Rows may have differing lengths; callers check.
inline std::vector<std::vector<std::string>> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string cell;
    bool quoted = false;
    bool cell_was_quoted = false;
    std::size_t line = 1, col = 1;

    auto end_cell = [&] {
        row.push_back(std::move(cell));
        cell.clear();
        cell_was_quoted = false;
    };
    auto end_row = [&] {
        end_cell();
        rows.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < data.size(); ++i) {
        char c = data[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < data.size() && data[i + 1] == '"') {
                    cell += '"';
                    ++i;
                    col += 2;
                } else {
                    quoted = false;
                    ++col;
                }
            } else {
                cell += c;
                if (c == '\n') { ++line; col = 1; } else { ++col; }
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!cell.empty() || cell_was_quoted) {
                    throw ParseError("unexpected quote inside unquoted field", line, col);
                }
                quoted = true;
                cell_was_quoted = true;
                ++col;
                break;
            case ',':
                end_cell();
                ++col;
                break;
            case '\r':
                if (i + 1 < data.size() && data[i + 1] == '\n') break;  // swallowed with the \n
                [[fallthrough]];
            case '\n':
                end_row();
                ++line;
                col = 1;
                break;
            default:
                cell += c;
                ++col;
        }
    }
    if (quoted) throw ParseError("unterminated quoted field", line, col);
    if (!cell.empty() || cell_was_quoted || !row.empty()) end_row();
    return rows;
}

/// Parses a full cell as a double; the whole cell must be consumed.
inline double parse_number(const std::string& cell, std::size_t row, std::size_t col) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
    if (first == last) throw ParseError("empty numeric cell", row, col);
    double value = 0.0;
    auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) {
        throw ParseError("not a number: '" + cell + "'", row, col);
    }
    return value;
}

inline std::string quote_if_needed(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

}  // namespace csv

/// Writes content to path atomically (temp file + rename).
inline void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

}  // namespace gvcrank
