#pragma once

// Language registry: the 21 supported languages grouped into three syntactic paradigms,
// with the exemplar ("known") flag and the base concepts each language exposes.

#include <algorithm>
#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/core/ir.hpp"
#include "ubsr/io/table_io.hpp"

namespace ubsr {

enum class Paradigm { CLike, ScriptingDynamic, FunctionalExpression };

inline std::string_view to_string(Paradigm p) {
    switch (p) {
        case Paradigm::CLike: return "c_like";
        case Paradigm::ScriptingDynamic: return "scripting_dynamic";
        case Paradigm::FunctionalExpression: return "functional_expression";
    }
    return "";
}

inline std::optional<Paradigm> parse_paradigm(std::string_view s) {
    if (s == "c_like") return Paradigm::CLike;
    if (s == "scripting_dynamic") return Paradigm::ScriptingDynamic;
    if (s == "functional_expression") return Paradigm::FunctionalExpression;
    return std::nullopt;
}

/// A base syntactic concept; each maps to exactly one non-root UBSR node type.
enum class Concept : std::uint8_t { Package = 0, Function = 1, Comment = 2 };

inline constexpr std::array<Concept, 3> kAllConcepts = {Concept::Package, Concept::Function, Concept::Comment};

inline std::string_view to_string(Concept c) {
    switch (c) {
        case Concept::Package: return "package";
        case Concept::Function: return "function";
        case Concept::Comment: return "comment";
    }
    return "";
}

inline std::optional<Concept> parse_concept(std::string_view s) {
    if (s == "package") return Concept::Package;
    if (s == "function") return Concept::Function;
    if (s == "comment") return Concept::Comment;
    return std::nullopt;
}

inline UbsrNodeType node_type_of(Concept c) {
    switch (c) {
        case Concept::Package: return UbsrNodeType::Package;
        case Concept::Function: return UbsrNodeType::Function;
        case Concept::Comment: return UbsrNodeType::Comment;
    }
    return UbsrNodeType::Root;
}

inline std::optional<Concept> concept_of(UbsrNodeType t) {
    switch (t) {
        case UbsrNodeType::Package: return Concept::Package;
        case UbsrNodeType::Function: return Concept::Function;
        case UbsrNodeType::Comment: return Concept::Comment;
        case UbsrNodeType::Root: return std::nullopt;
    }
    return std::nullopt;
}

/// Small value-type set of concepts.
class ConceptSet {
public:
    ConceptSet() = default;
    ConceptSet(std::initializer_list<Concept> cs) {
        for (Concept c : cs) insert(c);
    }
    void insert(Concept c) { bits_ |= bit(c); }
    bool contains(Concept c) const { return (bits_ & bit(c)) != 0; }
    bool intersects(const ConceptSet& o) const { return (bits_ & o.bits_) != 0; }
    bool empty() const { return bits_ == 0; }
    std::vector<Concept> items() const {
        std::vector<Concept> out;
        for (Concept c : kAllConcepts)
            if (contains(c)) out.push_back(c);
        return out;
    }
    bool operator==(const ConceptSet&) const = default;

private:
    static std::uint8_t bit(Concept c) { return static_cast<std::uint8_t>(1u << static_cast<unsigned>(c)); }
    std::uint8_t bits_ = 0;
};

struct LanguageEntry {
    std::string language;  // canonical lowercase id
    std::string display_name;
    Paradigm paradigm = Paradigm::CLike;
    bool known = false;
    ConceptSet supported_concepts;
    std::vector<std::string> extensions;

    bool operator==(const LanguageEntry&) const = default;
};

inline nlohmann::json to_json(const LanguageEntry& e) {
    nlohmann::json concepts = nlohmann::json::array();
    for (Concept c : e.supported_concepts.items()) concepts.push_back(std::string(to_string(c)));
    return {{"language", e.language},
            {"display_name", e.display_name},
            {"paradigm", std::string(to_string(e.paradigm))},
            {"known", e.known},
            {"supported_concepts", concepts},
            {"extensions", e.extensions}};
}

class LanguageRegistry {
public:
    LanguageRegistry() = default;
    LanguageRegistry(std::string version, std::vector<LanguageEntry> entries)
        : version_(std::move(version)), entries_(std::move(entries)) {
        for (std::size_t i = 0; i < entries_.size(); ++i)
            for (std::size_t j = 0; j < i; ++j)
                if (entries_[i].language == entries_[j].language)
                    throw SchemaError("registry: duplicate language " + entries_[i].language);
    }

    /// The compiled-in registry; `languages.json` mirrors it.
    static const LanguageRegistry& builtin() {
        static const LanguageRegistry reg = [] {
            using P = Paradigm;
            const ConceptSet all{Concept::Package, Concept::Function, Concept::Comment};
            const ConceptSet no_function{Concept::Package, Concept::Comment};
            const ConceptSet no_comment{Concept::Package, Concept::Function};
            std::vector<LanguageEntry> e = {
                {"c", "C", P::CLike, true, all, {".c", ".h"}},
                {"java", "Java", P::CLike, true, all, {".java"}},
                {"csharp", "C#", P::CLike, false, all, {".cs"}},
                {"cpp", "CPP", P::CLike, false, all, {".cpp", ".cc", ".cxx", ".hpp", ".hh", ".hxx"}},
                {"objc", "Objective C", P::CLike, false, all, {".m", ".mm"}},
                {"rust", "Rust", P::CLike, false, all, {".rs"}},
                {"go", "Golang", P::CLike, false, all, {".go"}},
                {"kotlin", "Kotlin", P::CLike, false, all, {".kt", ".kts"}},
                {"python", "Python", P::ScriptingDynamic, true, all, {".py"}},
                {"javascript", "JavaScript", P::ScriptingDynamic, true, all, {".js", ".mjs", ".cjs"}},
                {"dart", "Dart", P::ScriptingDynamic, false, all, {".dart"}},
                {"typescript", "Typescript", P::ScriptingDynamic, false, all, {".ts"}},
                {"qml", "QML", P::ScriptingDynamic, false, no_function, {".qml"}},
                {"perl", "Perl", P::ScriptingDynamic, false, no_comment, {".pl", ".pm"}},
                {"haskell", "Haskell", P::FunctionalExpression, true, all, {".hs"}},
                {"elm", "Elm", P::FunctionalExpression, true, all, {".elm"}},
                {"agda", "Agda", P::FunctionalExpression, false, all, {".agda"}},
                {"d", "D", P::FunctionalExpression, false, all, {".d"}},
                {"nim", "Nim", P::FunctionalExpression, false, all, {".nim"}},
                {"scala", "Scala", P::FunctionalExpression, false, all, {".scala", ".sc"}},
                {"ocaml", "Ocaml", P::FunctionalExpression, false, no_function, {".ml", ".mli"}},
            };
            return LanguageRegistry("1", std::move(e));
        }();
        return reg;
    }

    static LanguageRegistry from_json(const nlohmann::json& j) {
        if (!j.is_object() || !j.contains("languages") || !j["languages"].is_array())
            throw SchemaError("registry: expected an object with a 'languages' array");
        std::vector<LanguageEntry> entries;
        for (const auto& item : j["languages"]) {
            LanguageEntry e;
            e.language = item.at("language").get<std::string>();
            e.display_name = item.value("display_name", e.language);
            auto p = parse_paradigm(item.at("paradigm").get<std::string>());
            if (!p) throw SchemaError("registry: unknown paradigm for " + e.language);
            e.paradigm = *p;
            e.known = item.value("known", false);
            for (const auto& c : item.at("supported_concepts")) {
                auto cc = parse_concept(c.get<std::string>());
                if (!cc) throw SchemaError("registry: unknown concept for " + e.language);
                e.supported_concepts.insert(*cc);
            }
            e.extensions = item.value("extensions", std::vector<std::string>{});
            entries.push_back(std::move(e));
        }
        return LanguageRegistry(j.value("version", "1"), std::move(entries));
    }

    static LanguageRegistry load(const std::filesystem::path& path) {
        auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
        if (j.is_discarded()) throw SchemaError("registry: malformed JSON in " + path.string());
        return from_json(j);
    }

    nlohmann::json to_json() const {
        nlohmann::json langs = nlohmann::json::array();
        for (const auto& e : entries_) langs.push_back(ubsr::to_json(e));
        return {{"version", version_}, {"languages", langs}};
    }

    const std::vector<LanguageEntry>& entries() const { return entries_; }
    const std::string& version() const { return version_; }

    const LanguageEntry* find(std::string_view lang) const {
        for (const auto& e : entries_)
            if (e.language == lang) return &e;
        return nullptr;
    }
    const LanguageEntry& at(std::string_view lang) const {
        const auto* e = find(lang);
        if (e == nullptr) throw UnknownLanguageError(std::string(lang));
        return *e;
    }
    bool contains(std::string_view lang) const { return find(lang) != nullptr; }

    /// Language by file extension (case-insensitive), if any.
    std::optional<std::string> detect(const std::filesystem::path& path) const {
        std::string ext = path.extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (ext.empty()) return std::nullopt;
        for (const auto& e : entries_)
            if (std::find(e.extensions.begin(), e.extensions.end(), ext) != e.extensions.end()) return e.language;
        return std::nullopt;
    }

    std::vector<std::string> known_languages(std::optional<Paradigm> paradigm = std::nullopt) const {
        std::vector<std::string> out;
        for (const auto& e : entries_)
            if (e.known && (!paradigm || e.paradigm == *paradigm)) out.push_back(e.language);
        return out;
    }

private:
    std::string version_ = "1";
    std::vector<LanguageEntry> entries_;
};

}  // namespace ubsr
