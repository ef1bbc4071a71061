#pragma once

// RFC 4180 style CSV: comma separated, double-quote quoting, "" escapes, LF or CRLF rows.

#include <string>
#include <string_view>
#include <vector>

#include "ubsr/core/error.hpp"

namespace ubsr::csv {

using Row = std::vector<std::string>;

inline std::vector<Row> parse(std::string_view text) {
    std::vector<Row> rows;
    Row row;
    std::string cell;
    bool quoted = false;
    bool cell_started = false;
    std::size_t line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                if (c == '\n') ++line;
                cell.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!cell.empty()) throw IoError("csv line " + std::to_string(line) + ": stray quote");
                quoted = true;
                cell_started = true;
                break;
            case ',':
                row.push_back(std::move(cell));
                cell.clear();
                cell_started = true;
                break;
            case '\r': break;
            case '\n':
                if (cell_started || !cell.empty() || !row.empty()) {
                    row.push_back(std::move(cell));
                    rows.push_back(std::move(row));
                }
                row.clear();
                cell.clear();
                cell_started = false;
                ++line;
                break;
            default:
                cell.push_back(c);
                cell_started = true;
        }
    }
    if (quoted) throw IoError("csv: unterminated quoted field");
    if (cell_started || !cell.empty() || !row.empty()) {
        row.push_back(std::move(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string quote(std::string_view cell) {
    if (cell.find_first_of(",\"\r\n") == std::string_view::npos && (cell.empty() || (cell.front() != ' ' && cell.back() != ' ')))
        return std::string(cell);
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

inline std::string format(const std::vector<Row>& rows) {
    std::string out;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out.push_back(',');
            out += quote(row[i]);
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace ubsr::csv
