#pragma once

// Profile output directory layout: nodes, edges and metrics tables plus the pending
// and error CSVs.

#include <filesystem>
#include <string>

#include "ubsr/core/error.hpp"
#include "ubsr/core/ir.hpp"
#include "ubsr/io/table_io.hpp"

namespace ubsr {

inline const SchemaHint& node_table_hint() {
    static const SchemaHint h = {{"doc_id", ColumnType::String},        {"id", ColumnType::Int64},
                                 {"code_snippet", ColumnType::String},  {"node_type", ColumnType::String},
                                 {"parents", ColumnType::Int64List},    {"children", ColumnType::Int64List},
                                 {"info", ColumnType::String},          {"language", ColumnType::String},
                                 {"original_code", ColumnType::String}, {"loc_original_code", ColumnType::Int64}};
    return h;
}

inline const SchemaHint& edge_table_hint() {
    static const SchemaHint h = {{"doc_id", ColumnType::String},
                                 {"source", ColumnType::Int64},
                                 {"target", ColumnType::Int64},
                                 {"directed_relation", ColumnType::String},
                                 {"metadata", ColumnType::String}};
    return h;
}

inline std::filesystem::path table_path(const std::filesystem::path& dir, std::string_view stem, TableFormat fmt) {
    return dir / (std::string(stem) + std::string(extension(fmt)));
}

/// `<dir>/<stem>.parquet` or `<dir>/<stem>.jsonl`, whichever exists.
inline std::filesystem::path find_table(const std::filesystem::path& dir, std::string_view stem) {
    for (auto fmt : {TableFormat::Parquet, TableFormat::Jsonl}) {
        auto p = table_path(dir, stem, fmt);
        if (std::filesystem::exists(p)) return p;
    }
    throw IoError("no " + std::string(stem) + " table (.parquet or .jsonl) in " + dir.string());
}

/// JSON Lines cannot tell an all-empty concept list column from an id list; concept
/// columns are always string lists.
inline void fix_concept_columns(Table& t) {
    for (const auto& c : t.columns()) {
        if (c.name.rfind("concept_", 0) != 0 || c.type() != ColumnType::Int64List) continue;
        Column fixed(c.name, ColumnType::StringList);
        for (const auto& v : c.values<Int64List>()) {
            if (!v.empty()) throw SchemaError("column '" + c.name + "' must hold strings");
            fixed.values<StringList>().emplace_back();
        }
        t.set_column(std::move(fixed));
        fix_concept_columns(t);
        return;
    }
}

inline Table read_node_table(const std::filesystem::path& dir) {
    Table t = read_table(find_table(dir, "nodes"), node_table_hint());
    fix_concept_columns(t);
    check_columns(t, columns::kNodeTable, "node table");
    return t;
}

inline Table read_edge_table(const std::filesystem::path& dir) {
    Table t = read_table(find_table(dir, "edges"), edge_table_hint());
    check_columns(t, columns::kEdgeTable, "edge table");
    return t;
}

}  // namespace ubsr
