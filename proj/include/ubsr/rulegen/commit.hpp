#pragma once

// Human-gated commits into the rule databases. Commits are optimistic single-writer: the
// caller names the version it read, a lock file serializes writers, and a stale version is
// a conflict. Files are replaced atomically and the version stamp is written last.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ubsr/core/error.hpp"
#include "ubsr/frontend/registry.hpp"
#include "ubsr/io/table_io.hpp"
#include "ubsr/rulegen/base_rule.hpp"
#include "ubsr/rulegen/semantic_prompts.hpp"
#include "ubsr/rules/rule_db.hpp"
#include "ubsr/semantic/semantic.hpp"

namespace ubsr {

/// Exclusive lock file, removed on destruction.
class CommitLock {
public:
    explicit CommitLock(std::filesystem::path path) : path_(std::move(path)) {
        std::FILE* f = std::fopen(path_.c_str(), "wx");
        if (f == nullptr) throw ConflictError("another commit holds " + path_.string());
        std::fclose(f);
    }
    ~CommitLock() {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
    }
    CommitLock(const CommitLock&) = delete;
    CommitLock& operator=(const CommitLock&) = delete;

private:
    std::filesystem::path path_;
};

namespace detail {

inline void check_version(std::int64_t current, std::int64_t expected, const std::string& what) {
    if (current != expected)
        throw ConflictError(what + " is at version " + std::to_string(current) + ", commit was prepared against " +
                            std::to_string(expected));
}

}  // namespace detail

inline std::filesystem::path semantic_version_path(const std::filesystem::path& csv_path) {
    return csv_path.string() + ".version";
}

inline std::int64_t semantic_db_version(const std::filesystem::path& csv_path) {
    return read_version_file(semantic_version_path(csv_path));
}

/// Adds an accepted candidate to `rules_dir/<language>.json`; returns the new version.
inline std::int64_t commit_rule(const std::filesystem::path& rules_dir, const ValidationReport& report,
                                std::int64_t expected_version,
                                const LanguageRegistry& registry = LanguageRegistry::builtin()) {
    if (!report.accepted) throw RejectedCandidateError("candidate rule was not accepted by validation");
    const SyntacticRule& rule = report.rule;
    const LanguageEntry& lang = registry.at(rule.language);
    if (auto c = concept_of(rule.ubsr_node_type); !c || !lang.supported_concepts.contains(*c))
        throw SchemaError("language '" + rule.language + "' has no " + std::string(to_string(rule.ubsr_node_type)) +
                          " concept");
    if (!std::filesystem::is_directory(rules_dir)) throw IoError("rules directory not found: " + rules_dir.string());

    CommitLock lock(rules_dir / ".lock");
    const std::int64_t current = read_version_file(rules_dir / "VERSION");
    detail::check_version(current, expected_version, "rule database " + rules_dir.string());
    RuleDatabase db;
    const auto file = rules_dir / (rule.language + ".json");
    if (std::filesystem::exists(file)) load_rule_text(db, read_text_file(file), rule.language, file.string());
    db.add(rule);
    save_language(db, rules_dir, rule.language);
    write_text_file_atomic(rules_dir / "VERSION", std::to_string(current + 1) + "\n");
    return current + 1;
}

/// Merges parsed mapping rows for `dimension` into the CSV database; returns the new version.
/// A row may fill an unmapped dimension of an existing rule; a different concept for an
/// already mapped package is a conflict.
inline std::int64_t commit_semantic_rows(const std::filesystem::path& csv_path, const std::vector<MappingRow>& rows,
                                         const std::string& dimension, std::int64_t expected_version,
                                         const ConceptList* list = nullptr) {
    if (dimension.empty()) throw SchemaError("semantic commit needs a dimension");
    if (list && list->dimension != dimension)
        throw SchemaError("concept list is for '" + list->dimension + "', not '" + dimension + "'");
    CommitLock lock(csv_path.string() + ".lock");
    const std::int64_t current = semantic_db_version(csv_path);
    detail::check_version(current, expected_version, "semantic database " + csv_path.string());

    SemanticRuleSet existing = std::filesystem::exists(csv_path) ? load_semantic_rules(csv_path) : SemanticRuleSet{};
    std::vector<std::string> dims = existing.dimensions();
    if (!existing.has_dimension(dimension)) dims.push_back(dimension);

    std::vector<SemanticRule> merged = existing.rules();
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    for (std::size_t i = 0; i < merged.size(); ++i) index[{merged[i].language, merged[i].package_name}] = i;
    for (const auto& row : rows) {
        const std::string pkg = normalize_package(row.package);
        auto [it, fresh] = index.try_emplace({row.language, pkg}, merged.size());
        if (fresh) {
            merged.push_back({pkg, row.language, {{dimension, row.concept_}}});
            continue;
        }
        auto& concepts = merged[it->second].concepts;
        auto [c, added] = concepts.try_emplace(dimension, row.concept_);
        if (!added && c->second != row.concept_)
            throw ConflictError("(" + pkg + ", " + row.language + ") is already mapped to '" + c->second + "' for " +
                                dimension + ", not '" + row.concept_ + "'");
    }

    SemanticRuleSet out(dims);
    for (const auto& d : dims)
        if (const auto* l = existing.concept_list(d)) out.set_concept_list(*l);
    if (list) out.set_concept_list(*list);
    for (auto& r : merged) out.add(std::move(r));

    if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path());
    write_text_file_atomic(csv_path, semantic_rules_to_csv(out));
    write_text_file_atomic(semantic_version_path(csv_path), std::to_string(current + 1) + "\n");
    return current + 1;
}

}  // namespace ubsr
