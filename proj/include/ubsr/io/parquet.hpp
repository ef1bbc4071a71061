#pragma once

// Minimal Parquet codec for ubsr::Table.
//
// Writer: one row group, one data page (v1) per column, PLAIN values, RLE levels, no
// compression. String columns carry the UTF8 annotation; list columns use the standard
// three-level LIST layout (required group / repeated group "list" / required "element").
//
// Reader: accepts files produced by the writer and other uncompressed, non-dictionary,
// v1-page files (e.g. pyarrow with compression=None, use_dictionary=False). Nulls read as
// the element type's default value.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "ubsr/core/error.hpp"
#include "ubsr/core/table.hpp"
#include "ubsr/io/thrift_compact.hpp"

namespace ubsr::parquet {

namespace detail {

enum PhysicalType : std::int32_t { kBoolean = 0, kInt32 = 1, kInt64 = 2, kFloat = 4, kDouble = 5, kByteArray = 6 };
enum Repetition : std::int32_t { kRequired = 0, kOptional = 1, kRepeated = 2 };
enum Converted : std::int32_t { kUtf8 = 0, kListAnnotation = 3 };
enum Encoding : std::int32_t { kPlain = 0, kRle = 3 };
constexpr std::int32_t kDataPage = 0;
constexpr char kMagic[] = "PAR1";

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}
inline std::uint32_t get_u32(const char* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
}
inline std::uint64_t get_u64(const char* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(p[i])) << (8 * i);
    return v;
}
inline void put_varint(std::string& out, std::uint64_t v) {
    while (v >= 0x80) {
        out.push_back(static_cast<char>((v & 0x7F) | 0x80));
        v >>= 7;
    }
    out.push_back(static_cast<char>(v));
}

/// RLE-only encoding of a level stream with bit width 1, prefixed by its byte length.
inline void put_levels(std::string& out, const std::vector<std::uint8_t>& levels) {
    std::string enc;
    std::size_t i = 0;
    while (i < levels.size()) {
        std::size_t j = i;
        while (j < levels.size() && levels[j] == levels[i]) ++j;
        put_varint(enc, (j - i) << 1);
        enc.push_back(static_cast<char>(levels[i]));
        i = j;
    }
    put_u32(out, static_cast<std::uint32_t>(enc.size()));
    out += enc;
}

/// Decodes `count` levels of the RLE/bit-packed hybrid encoding.
inline std::vector<std::uint32_t> decode_levels(const char*& p, const char* end, int bit_width, std::size_t count) {
    if (end - p < 4) throw IoError("parquet: truncated level header");
    std::uint32_t len = get_u32(p);
    p += 4;
    const char* q = p;
    const char* stop = p + len;
    if (stop > end) throw IoError("parquet: truncated levels");
    std::vector<std::uint32_t> out;
    out.reserve(count);
    const int byte_width = (bit_width + 7) / 8;
    while (out.size() < count && q < stop) {
        std::uint64_t header = 0;
        for (int shift = 0;; shift += 7) {
            if (q >= stop) throw IoError("parquet: truncated level run");
            auto b = static_cast<std::uint8_t>(*q++);
            header |= static_cast<std::uint64_t>(b & 0x7F) << shift;
            if ((b & 0x80) == 0) break;
        }
        if (header & 1) {
            std::size_t values = (header >> 1) * 8;
            std::size_t nbytes = (header >> 1) * static_cast<std::size_t>(bit_width);
            if (static_cast<std::size_t>(stop - q) < nbytes) throw IoError("parquet: truncated bit-packed run");
            for (std::size_t k = 0; k < values && out.size() < count; ++k) {
                std::uint32_t v = 0;
                for (int b = 0; b < bit_width; ++b) {
                    std::size_t bit = k * bit_width + b;
                    if ((static_cast<std::uint8_t>(q[bit / 8]) >> (bit % 8)) & 1) v |= 1u << b;
                }
                out.push_back(v);
            }
            q += nbytes;
        } else {
            std::size_t run = header >> 1;
            std::uint32_t v = 0;
            for (int b = 0; b < byte_width; ++b) v |= static_cast<std::uint32_t>(static_cast<std::uint8_t>(*q++)) << (8 * b);
            for (std::size_t k = 0; k < run && out.size() < count; ++k) out.push_back(v);
        }
    }
    if (out.size() < count) throw IoError("parquet: level stream shorter than value count");
    p = stop;
    return out;
}

inline int bit_width_for(int max_level) {
    int w = 0;
    while ((1 << w) <= max_level) ++w;
    return w;
}

struct EncodedColumn {
    std::int32_t physical = kInt64;
    bool is_list = false;
    std::size_t num_values = 0;  // level entries
    std::string page_body;       // levels + values
};

inline void plain_value(std::string& out, std::int64_t v) { put_u64(out, static_cast<std::uint64_t>(v)); }
inline void plain_value(std::string& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(out, bits);
}
inline void plain_value(std::string& out, const std::string& v) {
    put_u32(out, static_cast<std::uint32_t>(v.size()));
    out += v;
}

template <typename T>
EncodedColumn encode_scalar(const std::vector<T>& values, std::int32_t physical) {
    EncodedColumn c;
    c.physical = physical;
    c.num_values = values.size();
    for (const auto& v : values) plain_value(c.page_body, v);
    return c;
}

template <typename T>
EncodedColumn encode_list(const std::vector<std::vector<T>>& rows, std::int32_t physical) {
    EncodedColumn c;
    c.physical = physical;
    c.is_list = true;
    std::vector<std::uint8_t> rep, def;
    std::string values;
    for (const auto& row : rows) {
        if (row.empty()) {
            rep.push_back(0);
            def.push_back(0);
            continue;
        }
        for (std::size_t i = 0; i < row.size(); ++i) {
            rep.push_back(i == 0 ? 0 : 1);
            def.push_back(1);
            plain_value(values, row[i]);
        }
    }
    c.num_values = rep.size();
    put_levels(c.page_body, rep);
    put_levels(c.page_body, def);
    c.page_body += values;
    return c;
}

inline EncodedColumn encode(const Column& col) {
    switch (col.type()) {
        case ColumnType::Int64: return encode_scalar(col.values<std::int64_t>(), kInt64);
        case ColumnType::Double: return encode_scalar(col.values<double>(), kDouble);
        case ColumnType::String: return encode_scalar(col.values<std::string>(), kByteArray);
        case ColumnType::Int64List: return encode_list(col.values<Int64List>(), kInt64);
        case ColumnType::StringList: return encode_list(col.values<StringList>(), kByteArray);
    }
    throw SchemaError("unsupported column type");
}

}  // namespace detail

/// Serializes a table to Parquet bytes.
inline std::string write_bytes(const Table& table) {
    using namespace detail;
    table.check_rectangular();
    std::string file(kMagic, 4);

    struct ChunkMeta {
        std::int32_t physical;
        std::vector<std::string> path;
        std::size_t num_values;
        std::int64_t offset;
        std::int64_t size;
    };
    std::vector<ChunkMeta> chunks;

    const bool has_rows = table.rows() > 0;
    if (has_rows) {
        for (const auto& col : table.columns()) {
            EncodedColumn enc = encode(col);
            thrift::CompactWriter h;
            h.field_i32(1, kDataPage);
            h.field_i32(2, static_cast<std::int32_t>(enc.page_body.size()));
            h.field_i32(3, static_cast<std::int32_t>(enc.page_body.size()));
            h.begin_struct(5);
            h.field_i32(1, static_cast<std::int32_t>(enc.num_values));
            h.field_i32(2, kPlain);
            h.field_i32(3, kRle);
            h.field_i32(4, kRle);
            h.end_struct();
            h.end_message();
            ChunkMeta m;
            m.physical = enc.physical;
            m.path = enc.is_list ? std::vector<std::string>{col.name, "list", "element"}
                                 : std::vector<std::string>{col.name};
            m.num_values = enc.num_values;
            m.offset = static_cast<std::int64_t>(file.size());
            m.size = static_cast<std::int64_t>(h.bytes().size() + enc.page_body.size());
            file += h.bytes();
            file += enc.page_body;
            chunks.push_back(std::move(m));
        }
    }

    thrift::CompactWriter f;
    f.field_i32(1, 1);
    // Flattened schema: root, then each column (list columns expand to three elements).
    std::size_t schema_count = 1;
    for (const auto& col : table.columns())
        schema_count += (col.type() == ColumnType::Int64List || col.type() == ColumnType::StringList) ? 3 : 1;
    f.begin_list(2, thrift::kStruct, schema_count);
    f.begin_elem_struct();
    f.field_binary(4, "schema");
    f.field_i32(5, static_cast<std::int32_t>(table.columns().size()));
    f.end_elem_struct();
    for (const auto& col : table.columns()) {
        const bool list = col.type() == ColumnType::Int64List || col.type() == ColumnType::StringList;
        const bool str = col.type() == ColumnType::String || col.type() == ColumnType::StringList;
        const std::int32_t phys = col.type() == ColumnType::Double ? kDouble : str ? kByteArray : kInt64;
        if (list) {
            f.begin_elem_struct();
            f.field_i32(3, kRequired);
            f.field_binary(4, col.name);
            f.field_i32(5, 1);
            f.field_i32(6, kListAnnotation);
            f.end_elem_struct();
            f.begin_elem_struct();
            f.field_i32(3, kRepeated);
            f.field_binary(4, "list");
            f.field_i32(5, 1);
            f.end_elem_struct();
        }
        f.begin_elem_struct();
        f.field_i32(1, phys);
        f.field_i32(3, kRequired);
        f.field_binary(4, list ? "element" : col.name);
        if (str) f.field_i32(6, kUtf8);
        f.end_elem_struct();
    }
    f.field_i64(3, static_cast<std::int64_t>(table.rows()));
    f.begin_list(4, thrift::kStruct, has_rows ? 1 : 0);
    if (has_rows) {
        f.begin_elem_struct();
        f.begin_list(1, thrift::kStruct, chunks.size());
        std::int64_t total = 0;
        for (const auto& m : chunks) {
            total += m.size;
            f.begin_elem_struct();
            f.field_i64(2, m.offset);
            f.begin_struct(3);
            f.field_i32(1, m.physical);
            f.begin_list(2, thrift::kI32, 2);
            f.elem_i32(kPlain);
            f.elem_i32(kRle);
            f.begin_list(3, thrift::kBinary, m.path.size());
            for (const auto& p : m.path) f.elem_binary(p);
            f.field_i32(4, 0);
            f.field_i64(5, static_cast<std::int64_t>(m.num_values));
            f.field_i64(6, m.size);
            f.field_i64(7, m.size);
            f.field_i64(9, m.offset);
            f.end_struct();
            f.end_elem_struct();
        }
        f.field_i64(2, total);
        f.field_i64(3, static_cast<std::int64_t>(table.rows()));
        f.end_elem_struct();
    }
    f.field_binary(6, "ubsr-profiler");
    f.end_message();

    file += f.bytes();
    put_u32(file, static_cast<std::uint32_t>(f.bytes().size()));
    file.append(kMagic, 4);
    return file;
}

namespace detail {

struct LeafInfo {
    std::string name;
    std::int32_t physical = kInt64;
    bool is_string = false;
    bool is_list = false;
    int max_def = 0;
    int max_rep = 0;
};

inline std::vector<LeafInfo> read_schema(const thrift::List& schema) {
    std::vector<LeafInfo> out;
    std::size_t pos = 1;
    const auto el = [&](std::size_t i) -> const thrift::Struct& {
        if (i >= schema.size()) throw IoError("parquet: schema truncated");
        return schema[i].as_struct();
    };
    const auto rep_of = [](const thrift::Struct& s) { return thrift::int_or(s, 3, kRequired); };
    const auto children = [](const thrift::Struct& s) { return thrift::int_or(s, 5, 0); };
    std::int64_t top = children(el(0));
    for (std::int64_t c = 0; c < top; ++c) {
        const auto& s = el(pos++);
        LeafInfo leaf;
        leaf.name = thrift::require(s, 4, "SchemaElement.name").as_string();
        int def = rep_of(s) == kOptional ? 1 : 0;
        if (children(s) == 0) {
            if (rep_of(s) == kRepeated) throw IoError("parquet: repeated primitive column unsupported: " + leaf.name);
            leaf.physical = static_cast<std::int32_t>(thrift::require(s, 1, "SchemaElement.type").as_int());
            leaf.is_string = thrift::int_or(s, 6, -1) == kUtf8 || leaf.physical == kByteArray;
            leaf.max_def = def;
        } else {
            if (children(s) != 1) throw IoError("parquet: nested group column unsupported: " + leaf.name);
            const auto& mid = el(pos++);
            if (rep_of(mid) != kRepeated || children(mid) != 1)
                throw IoError("parquet: only LIST groups are supported: " + leaf.name);
            const auto& elem = el(pos++);
            if (children(elem) != 0) throw IoError("parquet: nested list unsupported: " + leaf.name);
            leaf.is_list = true;
            leaf.max_rep = 1;
            leaf.max_def = def + 1 + (rep_of(elem) == kOptional ? 1 : 0);
            leaf.physical = static_cast<std::int32_t>(thrift::require(elem, 1, "SchemaElement.type").as_int());
            leaf.is_string = thrift::int_or(elem, 6, -1) == kUtf8 || leaf.physical == kByteArray;
        }
        out.push_back(std::move(leaf));
    }
    return out;
}

inline ColumnType column_type_of(const LeafInfo& leaf) {
    if (leaf.physical == kByteArray) return leaf.is_list ? ColumnType::StringList : ColumnType::String;
    if (leaf.physical == kDouble || leaf.physical == kFloat) {
        if (leaf.is_list) throw IoError("parquet: list of floating point unsupported: " + leaf.name);
        return ColumnType::Double;
    }
    if (leaf.physical == kInt64 || leaf.physical == kInt32 || leaf.physical == kBoolean)
        return leaf.is_list ? ColumnType::Int64List : ColumnType::Int64;
    throw IoError("parquet: unsupported physical type for " + leaf.name);
}

struct PlainCursor {
    const char* p;
    const char* end;
    std::int32_t physical;
    int bool_bit = 0;

    std::int64_t next_int() {
        if (physical == kBoolean) {
            if (p >= end) throw IoError("parquet: truncated boolean values");
            std::int64_t v = (static_cast<std::uint8_t>(*p) >> bool_bit) & 1;
            if (++bool_bit == 8) {
                bool_bit = 0;
                ++p;
            }
            return v;
        }
        if (physical == kInt32) {
            need(4);
            auto v = static_cast<std::int32_t>(get_u32(p));
            p += 4;
            return v;
        }
        need(8);
        auto v = static_cast<std::int64_t>(get_u64(p));
        p += 8;
        return v;
    }
    double next_double() {
        if (physical == kFloat) {
            need(4);
            float f;
            std::uint32_t bits = get_u32(p);
            std::memcpy(&f, &bits, 4);
            p += 4;
            return f;
        }
        need(8);
        std::uint64_t bits = get_u64(p);
        double d;
        std::memcpy(&d, &bits, 8);
        p += 8;
        return d;
    }
    std::string next_string() {
        need(4);
        std::uint32_t n = get_u32(p);
        p += 4;
        need(n);
        std::string s(p, n);
        p += n;
        return s;
    }
    void need(std::size_t n) const {
        if (static_cast<std::size_t>(end - p) < n) throw IoError("parquet: truncated values");
    }
};

}  // namespace detail

/// Parses Parquet bytes back into a table.
inline Table read_bytes(const std::string& data) {
    using namespace detail;
    if (data.size() < 12 || data.compare(0, 4, kMagic) != 0 || data.compare(data.size() - 4, 4, kMagic) != 0)
        throw IoError("parquet: bad magic");
    std::uint32_t footer_len = get_u32(data.data() + data.size() - 8);
    if (footer_len > data.size() - 12) throw IoError("parquet: bad footer length");
    const char* footer = data.data() + data.size() - 8 - footer_len;
    thrift::CompactReader fr(footer, footer_len);
    thrift::Struct meta = fr.read_struct();

    auto leaves = read_schema(thrift::require(meta, 2, "FileMetaData.schema").as_list());
    Table table;
    for (const auto& leaf : leaves) table.add_column(leaf.name, column_type_of(leaf));

    const thrift::Value* groups = thrift::field(meta, 4);
    if (groups == nullptr) return table;
    std::vector<Column> cols;
    for (const auto& c : table.columns()) cols.push_back(c);

    for (const auto& rg_val : groups->as_list()) {
        const auto& rg = rg_val.as_struct();
        const auto& chunks = thrift::require(rg, 1, "RowGroup.columns").as_list();
        if (chunks.size() != leaves.size()) throw IoError("parquet: column chunk count mismatch");
        for (std::size_t ci = 0; ci < chunks.size(); ++ci) {
            const auto& leaf = leaves[ci];
            const auto& cmeta = thrift::require(chunks[ci].as_struct(), 3, "ColumnChunk.meta_data").as_struct();
            if (thrift::int_or(cmeta, 4, 0) != 0) throw IoError("parquet: compressed column unsupported: " + leaf.name);
            std::int64_t remaining = thrift::require(cmeta, 5, "ColumnMetaData.num_values").as_int();
            std::int64_t offset = thrift::require(cmeta, 9, "ColumnMetaData.data_page_offset").as_int();
            if (const auto* dict = thrift::field(cmeta, 11)) offset = std::min(offset, dict->as_int());
            Column& col = cols[ci];
            bool row_open = false;
            while (remaining > 0) {
                if (offset < 0 || static_cast<std::size_t>(offset) >= data.size())
                    throw IoError("parquet: page offset out of range");
                thrift::CompactReader hr(data.data() + offset, data.size() - static_cast<std::size_t>(offset));
                thrift::Struct ph = hr.read_struct();
                const char* body = data.data() + offset + hr.consumed(data.data() + offset);
                std::int64_t csize = thrift::require(ph, 3, "PageHeader.compressed_page_size").as_int();
                const char* body_end = body + csize;
                if (body_end > data.data() + data.size()) throw IoError("parquet: page exceeds file");
                offset = body_end - data.data();
                std::int64_t ptype = thrift::require(ph, 1, "PageHeader.type").as_int();
                if (ptype == 2) throw IoError("parquet: dictionary encoding unsupported: " + leaf.name);
                if (ptype != kDataPage) throw IoError("parquet: unsupported page type " + std::to_string(ptype));
                const auto& dph = thrift::require(ph, 5, "PageHeader.data_page_header").as_struct();
                auto n = static_cast<std::size_t>(thrift::require(dph, 1, "DataPageHeader.num_values").as_int());
                if (thrift::int_or(dph, 2, kPlain) != kPlain) throw IoError("parquet: non-PLAIN encoding: " + leaf.name);

                const char* p = body;
                std::vector<std::uint32_t> rep, def;
                if (leaf.max_rep > 0) rep = decode_levels(p, body_end, bit_width_for(leaf.max_rep), n);
                if (leaf.max_def > 0) def = decode_levels(p, body_end, bit_width_for(leaf.max_def), n);
                PlainCursor cur{p, body_end, leaf.physical};
                for (std::size_t i = 0; i < n; ++i) {
                    const bool present = leaf.max_def == 0 || def[i] == static_cast<std::uint32_t>(leaf.max_def);
                    if (!leaf.is_list) {
                        switch (col.type()) {
                            case ColumnType::Int64: col.values<std::int64_t>().push_back(present ? cur.next_int() : 0); break;
                            case ColumnType::Double: col.values<double>().push_back(present ? cur.next_double() : 0.0); break;
                            default: col.values<std::string>().push_back(present ? cur.next_string() : std::string{}); break;
                        }
                        continue;
                    }
                    const bool new_row = rep.empty() || rep[i] == 0 || !row_open;
                    if (col.type() == ColumnType::Int64List) {
                        auto& rows = col.values<Int64List>();
                        if (new_row) rows.emplace_back();
                        if (present) rows.back().push_back(cur.next_int());
                    } else {
                        auto& rows = col.values<StringList>();
                        if (new_row) rows.emplace_back();
                        if (present) rows.back().push_back(cur.next_string());
                    }
                    row_open = true;
                }
                remaining -= static_cast<std::int64_t>(n);
            }
        }
    }
    Table out;
    for (auto& c : cols) out.add_column(std::move(c));
    out.check_rectangular();
    return out;
}

inline void write_file(const Table& table, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    const std::string bytes = write_bytes(table);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

inline Table read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return read_bytes(bytes);
}

}  // namespace ubsr::parquet
