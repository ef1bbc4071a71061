#pragma once

// Just enough of the Thrift compact protocol to write and read Parquet footers and page headers.

#include <cstdint>
#include <cstring>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "ubsr/core/error.hpp"

namespace ubsr::thrift {

enum Type : std::uint8_t {
    kStop = 0,
    kTrue = 1,
    kFalse = 2,
    kByte = 3,
    kI16 = 4,
    kI32 = 5,
    kI64 = 6,
    kDouble = 7,
    kBinary = 8,
    kList = 9,
    kSet = 10,
    kMap = 11,
    kStruct = 12,
};

class CompactWriter {
public:
    const std::string& bytes() const { return buf_; }

    void field_i32(std::int16_t id, std::int32_t v) {
        field_header(id, kI32);
        varint(zigzag(v));
    }
    void field_i64(std::int16_t id, std::int64_t v) {
        field_header(id, kI64);
        varint(zigzag(v));
    }
    void field_binary(std::int16_t id, std::string_view s) {
        field_header(id, kBinary);
        binary(s);
    }
    void begin_struct(std::int16_t id) {
        field_header(id, kStruct);
        push();
    }
    void end_struct() {
        buf_.push_back(0);
        pop();
    }
    void begin_list(std::int16_t id, Type elem, std::size_t size) {
        field_header(id, kList);
        if (size < 15) {
            buf_.push_back(static_cast<char>((size << 4) | elem));
        } else {
            buf_.push_back(static_cast<char>(0xF0 | elem));
            varint(size);
        }
    }
    // Elements of a list.
    void elem_i32(std::int32_t v) { varint(zigzag(v)); }
    void elem_binary(std::string_view s) { binary(s); }
    void begin_elem_struct() { push(); }
    void end_elem_struct() { end_struct(); }
    /// Closes the outermost (message-level) struct.
    void end_message() { buf_.push_back(0); }

private:
    static std::uint64_t zigzag(std::int64_t v) {
        return (static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63);
    }
    void varint(std::uint64_t v) {
        while (v >= 0x80) {
            buf_.push_back(static_cast<char>((v & 0x7F) | 0x80));
            v >>= 7;
        }
        buf_.push_back(static_cast<char>(v));
    }
    void binary(std::string_view s) {
        varint(s.size());
        buf_.append(s);
    }
    void field_header(std::int16_t id, Type t) {
        int delta = id - last_;
        if (delta > 0 && delta <= 15) {
            buf_.push_back(static_cast<char>((delta << 4) | t));
        } else {
            buf_.push_back(static_cast<char>(t));
            varint(zigzag(id));
        }
        last_ = id;
    }
    void push() {
        stack_.push_back(last_);
        last_ = 0;
    }
    void pop() {
        last_ = stack_.back();
        stack_.pop_back();
    }

    std::string buf_;
    std::int16_t last_ = 0;
    std::vector<std::int16_t> stack_;
};

struct Value;
using Struct = std::map<std::int16_t, Value>;
using List = std::vector<Value>;

/// Decoded compact-protocol value. Integers of every width are widened to int64.
struct Value {
    std::variant<std::monostate, bool, std::int64_t, double, std::string, std::shared_ptr<List>, std::shared_ptr<Struct>>
        v;

    std::int64_t as_int() const {
        if (auto p = std::get_if<std::int64_t>(&v)) return *p;
        throw IoError("thrift: expected integer");
    }
    const std::string& as_string() const {
        if (auto p = std::get_if<std::string>(&v)) return *p;
        throw IoError("thrift: expected binary");
    }
    const List& as_list() const {
        if (auto p = std::get_if<std::shared_ptr<List>>(&v)) return **p;
        throw IoError("thrift: expected list");
    }
    const Struct& as_struct() const {
        if (auto p = std::get_if<std::shared_ptr<Struct>>(&v)) return **p;
        throw IoError("thrift: expected struct");
    }
};

inline const Value* field(const Struct& s, std::int16_t id) {
    auto it = s.find(id);
    return it == s.end() ? nullptr : &it->second;
}
inline const Value& require(const Struct& s, std::int16_t id, const char* what) {
    const Value* v = field(s, id);
    if (v == nullptr) throw IoError(std::string("thrift: missing required field ") + what);
    return *v;
}
inline std::int64_t int_or(const Struct& s, std::int16_t id, std::int64_t dflt) {
    const Value* v = field(s, id);
    return v ? v->as_int() : dflt;
}

class CompactReader {
public:
    CompactReader(const char* data, std::size_t size) : p_(data), end_(data + size) {}

    Struct read_struct() {
        Struct out;
        std::int16_t last = 0;
        while (true) {
            std::uint8_t b = byte();
            if (b == kStop) break;
            auto type = static_cast<Type>(b & 0x0F);
            int delta = b >> 4;
            std::int16_t id = delta != 0 ? static_cast<std::int16_t>(last + delta)
                                         : static_cast<std::int16_t>(unzigzag(varint()));
            last = id;
            if (type == kTrue || type == kFalse) {
                out[id] = Value{type == kTrue};
            } else {
                out[id] = read_value(type);
            }
        }
        return out;
    }

    std::size_t consumed(const char* base) const { return static_cast<std::size_t>(p_ - base); }

private:
    Value read_value(Type t) {
        switch (t) {
            case kByte: return Value{static_cast<std::int64_t>(static_cast<std::int8_t>(byte()))};
            case kI16:
            case kI32:
            case kI64: return Value{unzigzag(varint())};
            case kDouble: {
                need(8);
                double d;
                std::memcpy(&d, p_, 8);
                p_ += 8;
                return Value{d};
            }
            case kBinary: {
                auto n = varint();
                need(n);
                std::string s(p_, n);
                p_ += n;
                return Value{std::move(s)};
            }
            case kList:
            case kSet: {
                std::uint8_t h = byte();
                std::uint64_t n = h >> 4;
                if (n == 15) n = varint();
                auto et = static_cast<Type>(h & 0x0F);
                auto list = std::make_shared<List>();
                for (std::uint64_t i = 0; i < n; ++i) {
                    if (et == kTrue || et == kFalse) {
                        list->push_back(Value{byte() == kTrue});
                    } else {
                        list->push_back(read_value(et));
                    }
                }
                return Value{list};
            }
            case kMap: {
                auto n = varint();
                auto list = std::make_shared<List>();
                if (n > 0) {
                    std::uint8_t kv = byte();
                    for (std::uint64_t i = 0; i < n; ++i) {
                        list->push_back(read_value(static_cast<Type>(kv >> 4)));
                        list->push_back(read_value(static_cast<Type>(kv & 0x0F)));
                    }
                }
                return Value{list};
            }
            case kStruct: return Value{std::make_shared<Struct>(read_struct())};
            default: throw IoError("thrift: unsupported type " + std::to_string(t));
        }
    }
    void need(std::uint64_t n) {
        if (static_cast<std::uint64_t>(end_ - p_) < n) throw IoError("thrift: truncated input");
    }
    std::uint8_t byte() {
        need(1);
        return static_cast<std::uint8_t>(*p_++);
    }
    std::uint64_t varint() {
        std::uint64_t v = 0;
        for (int shift = 0; shift < 64; shift += 7) {
            std::uint8_t b = byte();
            v |= static_cast<std::uint64_t>(b & 0x7F) << shift;
            if ((b & 0x80) == 0) return v;
        }
        throw IoError("thrift: varint too long");
    }
    static std::int64_t unzigzag(std::uint64_t v) {
        return static_cast<std::int64_t>(v >> 1) ^ -static_cast<std::int64_t>(v & 1);
    }

    const char* p_;
    const char* end_;
};

}  // namespace ubsr::thrift
