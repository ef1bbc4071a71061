#pragma once

#include <cstdint>
#include <deque>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "ubsr/core/error.hpp"

namespace ubsr {

enum class ColumnType { Int64, Double, String, Int64List, StringList };

inline const char* column_type_name(ColumnType t) {
    switch (t) {
        case ColumnType::Int64: return "int64";
        case ColumnType::Double: return "double";
        case ColumnType::String: return "string";
        case ColumnType::Int64List: return "list<int64>";
        case ColumnType::StringList: return "list<string>";
    }
    return "?";
}

using Int64List = std::vector<std::int64_t>;
using StringList = std::vector<std::string>;

/// One named, typed column. Storage is a vector of the column's element type.
struct Column {
    using Storage = std::variant<std::vector<std::int64_t>, std::vector<double>, std::vector<std::string>,
                                 std::vector<Int64List>, std::vector<StringList>>;

    std::string name;
    Storage data;

    Column() = default;
    Column(std::string n, ColumnType t) : name(std::move(n)) { reset(t); }

    ColumnType type() const { return static_cast<ColumnType>(data.index()); }

    std::size_t size() const {
        return std::visit([](const auto& v) { return v.size(); }, data);
    }

    template <typename T>
    std::vector<T>& values() { return std::get<std::vector<T>>(data); }
    template <typename T>
    const std::vector<T>& values() const { return std::get<std::vector<T>>(data); }

    bool operator==(const Column&) const = default;

private:
    void reset(ColumnType t) {
        switch (t) {
            case ColumnType::Int64: data = std::vector<std::int64_t>{}; break;
            case ColumnType::Double: data = std::vector<double>{}; break;
            case ColumnType::String: data = std::vector<std::string>{}; break;
            case ColumnType::Int64List: data = std::vector<Int64List>{}; break;
            case ColumnType::StringList: data = std::vector<StringList>{}; break;
        }
    }
};

/// A column-major table. All columns have the same length.
class Table {
public:
    Table() = default;

    Column& add_column(std::string name, ColumnType type) {
        if (find(name) != nullptr) throw SchemaError("duplicate column: " + name);
        if (!columns_.empty() && columns_.front().size() != 0)
            throw SchemaError("cannot add empty column '" + name + "' to a non-empty table");
        columns_.emplace_back(std::move(name), type);
        return columns_.back();
    }

    void add_column(Column col) {
        if (find(col.name) != nullptr) throw SchemaError("duplicate column: " + col.name);
        if (!columns_.empty() && col.size() != rows())
            throw SchemaError("column '" + col.name + "' length mismatch");
        columns_.push_back(std::move(col));
    }

    /// Replaces a column of the same name or appends it.
    void set_column(Column col) {
        if (!columns_.empty() && col.size() != rows())
            throw SchemaError("column '" + col.name + "' length mismatch");
        for (auto& c : columns_) {
            if (c.name == col.name) {
                c = std::move(col);
                return;
            }
        }
        columns_.push_back(std::move(col));
    }

    const Column* find(std::string_view name) const {
        for (const auto& c : columns_)
            if (c.name == name) return &c;
        return nullptr;
    }
    Column* find(std::string_view name) {
        for (auto& c : columns_)
            if (c.name == name) return &c;
        return nullptr;
    }

    const Column& column(std::string_view name) const {
        const Column* c = find(name);
        if (c == nullptr) throw SchemaError("missing column: " + std::string(name));
        return *c;
    }
    Column& column(std::string_view name) {
        Column* c = find(name);
        if (c == nullptr) throw SchemaError("missing column: " + std::string(name));
        return *c;
    }

    /// Typed accessor; throws SchemaError when the column is missing or has another type.
    template <typename T>
    const std::vector<T>& get(std::string_view name) const {
        const Column& c = column(name);
        if (!std::holds_alternative<std::vector<T>>(c.data))
            throw SchemaError("column '" + std::string(name) + "' has type " + column_type_name(c.type()));
        return std::get<std::vector<T>>(c.data);
    }
    template <typename T>
    std::vector<T>& get(std::string_view name) {
        Column& c = column(name);
        if (!std::holds_alternative<std::vector<T>>(c.data))
            throw SchemaError("column '" + std::string(name) + "' has type " + column_type_name(c.type()));
        return std::get<std::vector<T>>(c.data);
    }

    std::size_t rows() const { return columns_.empty() ? 0 : columns_.front().size(); }
    const std::deque<Column>& columns() const { return columns_; }

    std::vector<std::string> column_names() const {
        std::vector<std::string> out;
        out.reserve(columns_.size());
        for (const auto& c : columns_) out.push_back(c.name);
        return out;
    }

    void check_rectangular() const {
        for (const auto& c : columns_)
            if (c.size() != rows()) throw SchemaError("column '" + c.name + "' length mismatch");
    }

    bool operator==(const Table&) const = default;

private:
    std::deque<Column> columns_;  // deque: references from add_column stay valid
};

}  // namespace ubsr
