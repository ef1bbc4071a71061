#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/core/table.hpp"
#include "ubsr/io/parquet.hpp"

namespace ubsr {

enum class TableFormat { Parquet, Jsonl };

inline TableFormat parse_table_format(std::string_view s) {
    if (s == "parquet") return TableFormat::Parquet;
    if (s == "jsonl") return TableFormat::Jsonl;
    throw Error("unknown table format '" + std::string(s) + "' (expected parquet|jsonl)");
}

inline std::string_view extension(TableFormat f) { return f == TableFormat::Parquet ? ".parquet" : ".jsonl"; }

/// Column type hints for JSON Lines, which cannot distinguish an empty list of ints from
/// an empty list of strings.
using SchemaHint = std::map<std::string, ColumnType, std::less<>>;

namespace jsonl {

inline std::string write_string(const Table& t) {
    t.check_rectangular();
    std::string out;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        nlohmann::ordered_json row = nlohmann::ordered_json::object();
        for (const auto& c : t.columns()) {
            switch (c.type()) {
                case ColumnType::Int64: row[c.name] = c.values<std::int64_t>()[r]; break;
                case ColumnType::Double: row[c.name] = c.values<double>()[r]; break;
                case ColumnType::String: row[c.name] = c.values<std::string>()[r]; break;
                case ColumnType::Int64List: row[c.name] = c.values<Int64List>()[r]; break;
                case ColumnType::StringList: row[c.name] = c.values<StringList>()[r]; break;
            }
        }
        out += row.dump();
        out += '\n';
    }
    return out;
}

inline ColumnType infer_type(const std::string& name, const std::vector<nlohmann::ordered_json>& rows,
                             const SchemaHint& hint) {
    if (auto it = hint.find(name); it != hint.end()) return it->second;
    bool any_float = false, any_array = false, array_strings = false, any_string = false;
    for (const auto& row : rows) {
        auto it = row.find(name);
        if (it == row.end()) continue;
        if (it->is_number_float()) any_float = true;
        if (it->is_string()) any_string = true;
        if (it->is_array()) {
            any_array = true;
            for (const auto& e : *it)
                if (e.is_string()) array_strings = true;
        }
    }
    if (any_array) return array_strings ? ColumnType::StringList : ColumnType::Int64List;
    if (any_string) return ColumnType::String;
    return any_float ? ColumnType::Double : ColumnType::Int64;
}

inline Table read_string(const std::string& text, const SchemaHint& hint = {}) {
    std::vector<nlohmann::ordered_json> rows;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto j = nlohmann::ordered_json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) throw IoError("jsonl line " + std::to_string(lineno) + ": not a JSON object");
        rows.push_back(std::move(j));
    }
    Table t;
    if (rows.empty()) {
        for (const auto& [name, type] : hint) t.add_column(name, type);
        return t;
    }
    std::vector<std::string> names;
    for (auto it = rows.front().begin(); it != rows.front().end(); ++it) names.push_back(it.key());
    for (const auto& name : names) {
        Column col(name, infer_type(name, rows, hint));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            auto it = rows[r].find(name);
            if (it == rows[r].end()) throw IoError("jsonl row " + std::to_string(r + 1) + ": missing key '" + name + "'");
            try {
                switch (col.type()) {
                    case ColumnType::Int64: col.values<std::int64_t>().push_back(it->get<std::int64_t>()); break;
                    case ColumnType::Double: col.values<double>().push_back(it->get<double>()); break;
                    case ColumnType::String: col.values<std::string>().push_back(it->get<std::string>()); break;
                    case ColumnType::Int64List: col.values<Int64List>().push_back(it->get<Int64List>()); break;
                    case ColumnType::StringList: col.values<StringList>().push_back(it->get<StringList>()); break;
                }
            } catch (const nlohmann::json::exception& e) {
                throw IoError("jsonl row " + std::to_string(r + 1) + ", key '" + name + "': " + e.what());
            }
        }
        t.add_column(std::move(col));
    }
    return t;
}

}  // namespace jsonl

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a sibling temp file and renames it into place.
inline void write_text_file_atomic(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

inline void write_table(const Table& t, const std::filesystem::path& path, TableFormat fmt) {
    if (fmt == TableFormat::Parquet)
        write_text_file_atomic(path, parquet::write_bytes(t));
    else
        write_text_file_atomic(path, jsonl::write_string(t));
}

inline Table read_table(const std::filesystem::path& path, const SchemaHint& hint = {}) {
    const auto ext = path.extension().string();
    if (ext == ".jsonl" || ext == ".json") return jsonl::read_string(read_text_file(path), hint);
    return parquet::read_file(path);
}

}  // namespace ubsr
