#pragma once

// Declarative extractor programs: a closed set of text stages that pull a concept's
// canonical value out of a matched node's source span.

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"

namespace ubsr {

namespace stage {
struct SplitOnce {
    std::string sep;
    std::int64_t index = 0;
    bool operator==(const SplitOnce&) const = default;
};
struct SplitAll {
    std::string sep;
    bool operator==(const SplitAll&) const = default;
};
struct TokenAt {
    std::string sep;
    std::int64_t index = 0;
    bool operator==(const TokenAt&) const = default;
};
struct SegmentAt {
    std::string sep;
    std::int64_t index = 0;
    bool operator==(const SegmentAt&) const = default;
};
struct Trim {
    bool operator==(const Trim&) const = default;
};
struct StripPrefix {
    std::string text;
    bool operator==(const StripPrefix&) const = default;
};
struct RegexCapture {
    std::string pattern;
    std::int64_t group = 1;
    std::shared_ptr<const std::regex> compiled;
    bool operator==(const RegexCapture& o) const { return pattern == o.pattern && group == o.group; }
};
struct Dedup {
    bool operator==(const Dedup&) const = default;
};
struct Join {
    std::string sep;
    bool operator==(const Join&) const = default;
};
}  // namespace stage

using Stage = std::variant<stage::SplitOnce, stage::SplitAll, stage::TokenAt, stage::SegmentAt, stage::Trim,
                           stage::StripPrefix, stage::RegexCapture, stage::Dedup, stage::Join>;

inline const std::vector<std::string>& stage_names() {
    static const std::vector<std::string> names = {"split_once", "split_all",      "token_at", "segment_at", "trim",
                                                   "strip_prefix", "regex_capture", "dedup",    "join"};
    return names;
}

inline std::string_view stage_name(const Stage& s) { return stage_names()[s.index()]; }

struct ExtractorProgram {
    std::vector<Stage> stages;
    bool operator==(const ExtractorProgram&) const = default;
};

namespace detail {

inline std::vector<std::string> py_split(std::string_view s, std::string_view sep, std::size_t max_splits) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (out.size() < max_splits) {
        std::size_t hit = s.find(sep, pos);
        if (hit == std::string_view::npos) break;
        out.emplace_back(s.substr(pos, hit - pos));
        pos = hit + sep.size();
    }
    out.emplace_back(s.substr(pos));
    return out;
}

inline std::string py_strip(std::string_view s) {
    constexpr std::string_view ws = " \t\n\r\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    return std::string(s.substr(b, e - b + 1));
}

inline const std::string& pick(const std::vector<std::string>& parts, std::int64_t index, std::size_t stage_idx,
                               std::string_view op) {
    const auto n = static_cast<std::int64_t>(parts.size());
    const std::int64_t i = index < 0 ? n + index : index;
    if (i < 0 || i >= n)
        throw ExtractionError(stage_idx, std::string(op) + ": index " + std::to_string(index) + " out of range (" +
                                             std::to_string(n) + " pieces)");
    return parts[static_cast<std::size_t>(i)];
}

// std::regex matches recursively; long inputs can exhaust the stack.
inline constexpr std::size_t kRegexInputLimit = 16 * 1024;

inline void require_sep(const std::string& sep, std::string_view op) {
    if (sep.empty()) throw SchemaError(std::string(op) + ": empty separator");
}

}  // namespace detail

using ExtractValue = std::variant<std::string, std::vector<std::string>>;

/// Runs the program over a matched node's source text. Scalar stages lift element-wise over
/// lists; the final value must be a scalar.
inline std::string run_extractor(const ExtractorProgram& program, std::string_view code_snippet) {
    ExtractValue value = std::string(code_snippet);
    for (std::size_t k = 0; k < program.stages.size(); ++k) {
        const Stage& st = program.stages[k];
        auto scalar = [&](auto fn) {
            if (auto* s = std::get_if<std::string>(&value)) {
                value = fn(*s);
            } else {
                auto& list = std::get<std::vector<std::string>>(value);
                for (auto& e : list) e = fn(e);
            }
        };
        std::visit(
            [&](const auto& s) {
                using T = std::decay_t<decltype(s)>;
                if constexpr (std::is_same_v<T, stage::SplitOnce>) {
                    scalar([&](const std::string& x) {
                        return detail::pick(detail::py_split(x, s.sep, 1), s.index, k, "split_once");
                    });
                } else if constexpr (std::is_same_v<T, stage::SplitAll>) {
                    std::vector<std::string> out;
                    if (auto* x = std::get_if<std::string>(&value)) {
                        out = detail::py_split(*x, s.sep, std::string::npos);
                    } else {
                        for (const auto& e : std::get<std::vector<std::string>>(value))
                            for (auto& p : detail::py_split(e, s.sep, std::string::npos)) out.push_back(std::move(p));
                    }
                    value = std::move(out);
                } else if constexpr (std::is_same_v<T, stage::TokenAt>) {
                    scalar([&](const std::string& x) {
                        auto parts = detail::py_split(x, s.sep, std::string::npos);
                        parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
                        return detail::pick(parts, s.index, k, "token_at");
                    });
                } else if constexpr (std::is_same_v<T, stage::SegmentAt>) {
                    scalar([&](const std::string& x) {
                        return detail::pick(detail::py_split(x, s.sep, std::string::npos), s.index, k, "segment_at");
                    });
                } else if constexpr (std::is_same_v<T, stage::Trim>) {
                    scalar([](const std::string& x) { return detail::py_strip(x); });
                } else if constexpr (std::is_same_v<T, stage::StripPrefix>) {
                    scalar([&](const std::string& x) {
                        return x.compare(0, s.text.size(), s.text) == 0 ? x.substr(s.text.size()) : x;
                    });
                } else if constexpr (std::is_same_v<T, stage::RegexCapture>) {
                    scalar([&](const std::string& x) {
                        if (x.size() > detail::kRegexInputLimit)
                            throw ExtractionError(k, "regex_capture: input longer than " +
                                                         std::to_string(detail::kRegexInputLimit) + " bytes");
                        std::smatch m;
                        if (!std::regex_search(x, m, *s.compiled))
                            throw ExtractionError(k, "regex_capture: pattern '" + s.pattern + "' did not match");
                        if (s.group < 0 || static_cast<std::size_t>(s.group) >= m.size())
                            throw ExtractionError(k, "regex_capture: no group " + std::to_string(s.group));
                        return m[static_cast<std::size_t>(s.group)].str();
                    });
                } else if constexpr (std::is_same_v<T, stage::Dedup>) {
                    if (auto* list = std::get_if<std::vector<std::string>>(&value)) {
                        std::vector<std::string> out;
                        for (auto& e : *list)
                            if (std::find(out.begin(), out.end(), e) == out.end()) out.push_back(std::move(e));
                        value = std::move(out);
                    }
                } else if constexpr (std::is_same_v<T, stage::Join>) {
                    if (auto* list = std::get_if<std::vector<std::string>>(&value)) {
                        std::string out;
                        for (std::size_t i = 0; i < list->size(); ++i) {
                            if (i) out += s.sep;
                            out += (*list)[i];
                        }
                        value = std::move(out);
                    }
                }
            },
            st);
    }
    if (!std::holds_alternative<std::string>(value))
        throw ExtractionError(program.stages.size(), "final value is a list; add a join stage");
    return std::get<std::string>(std::move(value));
}

// ---- JSON encoding -------------------------------------------------------------------

inline nlohmann::json to_json(const Stage& st) {
    nlohmann::json j;
    j["op"] = std::string(stage_name(st));
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, stage::SplitOnce> || std::is_same_v<T, stage::TokenAt> ||
                          std::is_same_v<T, stage::SegmentAt>) {
                j["sep"] = s.sep;
                j["index"] = s.index;
            } else if constexpr (std::is_same_v<T, stage::SplitAll> || std::is_same_v<T, stage::Join>) {
                j["sep"] = s.sep;
            } else if constexpr (std::is_same_v<T, stage::StripPrefix>) {
                j["text"] = s.text;
            } else if constexpr (std::is_same_v<T, stage::RegexCapture>) {
                j["pattern"] = s.pattern;
                if (s.group != 1) j["group"] = s.group;  // 1 is the default
            }
        },
        st);
    return j;
}

inline nlohmann::json to_json(const ExtractorProgram& p) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& s : p.stages) a.push_back(to_json(s));
    return a;
}

inline stage::RegexCapture make_regex_capture(std::string pattern, std::int64_t group) {
    stage::RegexCapture r{std::move(pattern), group, nullptr};
    try {
        r.compiled = std::make_shared<const std::regex>(r.pattern, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
        throw SchemaError("regex_capture: bad pattern '" + r.pattern + "': " + e.what());
    }
    if (group < 0 || static_cast<std::size_t>(group) > r.compiled->mark_count())
        throw SchemaError("regex_capture: group " + std::to_string(group) + " not in pattern '" + r.pattern + "'");
    return r;
}

/// Decodes one stage; unknown ops and missing or extra parameters are schema errors.
inline Stage stage_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("op") || !j["op"].is_string())
        throw SchemaError("extractor stage must be an object with a string 'op'");
    const std::string op = j["op"].get<std::string>();
    auto str = [&](const char* key) {
        if (!j.contains(key) || !j[key].is_string())
            throw SchemaError("extractor stage '" + op + "' needs string parameter '" + key + "'");
        return j[key].get<std::string>();
    };
    auto num = [&](const char* key, std::optional<std::int64_t> def = std::nullopt) -> std::int64_t {
        if (!j.contains(key)) {
            if (def) return *def;
            throw SchemaError("extractor stage '" + op + "' needs integer parameter '" + key + "'");
        }
        if (!j[key].is_number_integer())
            throw SchemaError("extractor stage '" + op + "': parameter '" + key + "' must be an integer");
        return j[key].get<std::int64_t>();
    };
    auto only = [&](std::initializer_list<const char*> keys) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() == "op") continue;
            if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; }))
                throw SchemaError("extractor stage '" + op + "': unexpected parameter '" + it.key() + "'");
        }
    };
    if (op == "split_once") {
        only({"sep", "index"});
        stage::SplitOnce s{str("sep"), num("index")};
        detail::require_sep(s.sep, op);
        return s;
    }
    if (op == "split_all") {
        only({"sep"});
        stage::SplitAll s{str("sep")};
        detail::require_sep(s.sep, op);
        return s;
    }
    if (op == "token_at") {
        only({"sep", "index"});
        stage::TokenAt s{str("sep"), num("index")};
        detail::require_sep(s.sep, op);
        return s;
    }
    if (op == "segment_at") {
        only({"sep", "index"});
        stage::SegmentAt s{str("sep"), num("index")};
        detail::require_sep(s.sep, op);
        return s;
    }
    if (op == "trim") {
        only({});
        return stage::Trim{};
    }
    if (op == "strip_prefix") {
        only({"text"});
        return stage::StripPrefix{str("text")};
    }
    if (op == "regex_capture") {
        only({"pattern", "group"});
        return make_regex_capture(str("pattern"), num("group", 1));
    }
    if (op == "dedup") {
        only({});
        return stage::Dedup{};
    }
    if (op == "join") {
        only({"sep"});
        return stage::Join{str("sep")};
    }
    throw SchemaError("unknown extractor stage op '" + op + "'");
}

inline ExtractorProgram program_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw SchemaError("extractor must be an array of stages");
    ExtractorProgram p;
    for (const auto& s : j) p.stages.push_back(stage_from_json(s));
    return p;
}

}  // namespace ubsr
