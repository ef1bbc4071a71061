#pragma once

// Base syntactic rule database: (language, ast_node_type) -> UBSR node type + extractor.
// One JSON file per language, `<dir>/<language>.json`, plus a `VERSION` sidecar.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/core/ir.hpp"
#include "ubsr/frontend/parser.hpp"
#include "ubsr/frontend/registry.hpp"
#include "ubsr/io/table_io.hpp"
#include "ubsr/rules/extractor.hpp"

namespace ubsr {

struct SyntacticRule {
    std::string language;
    std::string ast_node_type;
    UbsrNodeType ubsr_node_type = UbsrNodeType::Package;
    ExtractorProgram extractor;
    std::string test_snippet;
    std::string expected;

    bool operator==(const SyntacticRule&) const = default;
};

/// The JSON object stored under the rule's node type (language and key are implied).
inline nlohmann::json rule_body_to_json(const SyntacticRule& r) {
    return {{"ubsr_node_type", std::string(to_string(r.ubsr_node_type))},
            {"extractor", to_json(r.extractor)},
            {"test_snippet", r.test_snippet},
            {"expected", r.expected}};
}

inline SyntacticRule rule_from_json(const nlohmann::json& body, std::string language, std::string ast_node_type) {
    const std::string where = language + "/" + ast_node_type;
    if (!body.is_object()) throw SchemaError("rule " + where + ": expected an object");
    for (const char* key : {"ubsr_node_type", "extractor", "test_snippet", "expected"})
        if (!body.contains(key)) throw SchemaError("rule " + where + ": missing field '" + key + "'");
    for (auto it = body.begin(); it != body.end(); ++it)
        if (it.key() != "ubsr_node_type" && it.key() != "extractor" && it.key() != "test_snippet" &&
            it.key() != "expected")
            throw SchemaError("rule " + where + ": unexpected field '" + it.key() + "'");
    SyntacticRule r;
    r.language = std::move(language);
    r.ast_node_type = std::move(ast_node_type);
    if (!body["ubsr_node_type"].is_string()) throw SchemaError("rule " + where + ": ubsr_node_type must be a string");
    auto t = parse_node_type(body["ubsr_node_type"].get<std::string>());
    if (!t) throw SchemaError("rule " + where + ": unknown ubsr_node_type '" + body["ubsr_node_type"].get<std::string>() + "'");
    if (*t == UbsrNodeType::Root) throw SchemaError("rule " + where + ": ubsr_node_type must not be ubsr_root");
    r.ubsr_node_type = *t;
    try {
        r.extractor = program_from_json(body["extractor"]);
    } catch (const SchemaError& e) {
        throw SchemaError("rule " + where + ": " + e.what());
    }
    if (!body["test_snippet"].is_string() || !body["expected"].is_string())
        throw SchemaError("rule " + where + ": test_snippet and expected must be strings");
    r.test_snippet = body["test_snippet"].get<std::string>();
    r.expected = body["expected"].get<std::string>();
    if (r.ast_node_type.empty()) throw SchemaError("rule " + where + ": empty ast_node_type");
    return r;
}

class RuleDatabase {
public:
    using Key = std::pair<std::string, std::string>;  // (language, ast_node_type)

    void add(SyntacticRule r) {
        if (r.ubsr_node_type == UbsrNodeType::Root) throw SchemaError("rule must not map to ubsr_root");
        Key k{r.language, r.ast_node_type};
        if (rules_.count(k))
            throw DuplicateKeyError("duplicate rule key (" + r.language + ", " + r.ast_node_type + ")");
        rules_.emplace(std::move(k), std::move(r));
    }

    const SyntacticRule* lookup(std::string_view language, std::string_view ast_node_type) const {
        auto it = rules_.find(Key{std::string(language), std::string(ast_node_type)});
        return it == rules_.end() ? nullptr : &it->second;
    }

    std::vector<const SyntacticRule*> rules_for(std::string_view language) const {
        std::vector<const SyntacticRule*> out;
        for (const auto& [k, r] : rules_)
            if (k.first == language) out.push_back(&r);
        return out;
    }

    std::vector<std::string> languages() const {
        std::set<std::string> s;
        for (const auto& [k, r] : rules_) s.insert(k.first);
        return {s.begin(), s.end()};
    }

    bool has_language(std::string_view language) const {
        auto it = rules_.lower_bound(Key{std::string(language), std::string()});
        return it != rules_.end() && it->first.first == language;
    }

    /// Parse-time concept tags for one language.
    ConceptTagMap tag_map(std::string_view language) const {
        ConceptTagMap m;
        for (const auto* r : rules_for(language)) {
            auto c = concept_of(r->ubsr_node_type);
            if (c) m[r->ast_node_type].insert(*c);
        }
        return m;
    }

    nlohmann::json language_json(std::string_view language) const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto* r : rules_for(language)) j[r->ast_node_type] = rule_body_to_json(*r);
        return j;
    }

    std::size_t size() const { return rules_.size(); }
    std::int64_t version() const { return version_; }
    void set_version(std::int64_t v) { version_ = v; }

    bool operator==(const RuleDatabase&) const = default;

private:
    std::map<Key, SyntacticRule> rules_;
    std::int64_t version_ = 0;
};

/// Canonical file text: keys sorted, two-space indent, trailing newline.
inline std::string canonical_rule_text(const RuleDatabase& db, std::string_view language) {
    return db.language_json(language).dump(2) + "\n";
}

namespace detail {

// Parses JSON rejecting duplicate top-level keys (the default parser keeps the last one).
inline nlohmann::json parse_rule_json(const std::string& text, const std::string& where) {
    std::set<std::string> keys;
    std::string dup;
    auto cb = [&](int depth, nlohmann::json::parse_event_t ev, nlohmann::json& parsed) {
        if (ev == nlohmann::json::parse_event_t::key && depth == 1) {
            auto k = parsed.get<std::string>();
            if (!keys.insert(k).second && dup.empty()) dup = k;
        }
        return true;
    };
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text, cb);
    } catch (const nlohmann::json::parse_error& e) {
        throw RuleFileError(where + ": malformed JSON: " + e.what());
    }
    if (!dup.empty()) throw DuplicateKeyError(where + ": duplicate rule key '" + dup + "'");
    if (!j.is_object()) throw RuleFileError(where + ": top level must be an object");
    return j;
}

}  // namespace detail

/// Adds the rules of one language file's text to `db`.
inline void load_rule_text(RuleDatabase& db, const std::string& text, const std::string& language,
                           const std::string& where) {
    auto j = detail::parse_rule_json(text, where);
    for (auto it = j.begin(); it != j.end(); ++it) {
        try {
            db.add(rule_from_json(it.value(), language, it.key()));
        } catch (const SchemaError& e) {
            throw RuleFileError(where + ": " + e.what());
        }
    }
}

inline std::int64_t read_version_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) return 0;
    const std::string s = read_text_file(path);
    try {
        std::size_t used = 0;
        auto v = std::stoll(s, &used);
        if (s.find_first_not_of(" \t\r\n", used) != std::string::npos || v < 0) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw RuleFileError(path.string() + ": malformed version stamp '" + s + "'");
    }
}

/// Loads every `<language>.json` in `dir` (languages must be registered) and `dir/VERSION`.
inline RuleDatabase load_rules(const std::filesystem::path& dir,
                               const LanguageRegistry& registry = LanguageRegistry::builtin()) {
    if (!std::filesystem::is_directory(dir)) throw IoError("rules directory not found: " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    RuleDatabase db;
    for (const auto& f : files) {
        const std::string lang = f.stem().string();
        if (!registry.contains(lang)) throw RuleFileError(f.string() + ": '" + lang + "' is not a registered language");
        load_rule_text(db, read_text_file(f), lang, f.string());
    }
    db.set_version(read_version_file(dir / "VERSION"));
    return db;
}

inline void save_language(const RuleDatabase& db, const std::filesystem::path& dir, std::string_view language) {
    write_text_file_atomic(dir / (std::string(language) + ".json"), canonical_rule_text(db, language));
}

/// Writes one canonical file per language present in `db`, then the version stamp.
inline void save_rules(const RuleDatabase& db, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    for (const auto& lang : db.languages()) save_language(db, dir, lang);
    write_text_file_atomic(dir / "VERSION", std::to_string(db.version()) + "\n");
}

}  // namespace ubsr
