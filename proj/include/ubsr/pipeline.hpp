#pragma once

// The online profiling path end to end: extract a corpus, compute syntactic metrics,
// annotate semantic concepts and write the output directory.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ubsr/core/error.hpp"
#include "ubsr/core/ir.hpp"
#include "ubsr/extract/extractor.hpp"
#include "ubsr/frontend/grammar.hpp"
#include "ubsr/frontend/registry.hpp"
#include "ubsr/io/table_io.hpp"
#include "ubsr/io/ubsr_io.hpp"
#include "ubsr/metrics/syntactic.hpp"
#include "ubsr/rules/rule_db.hpp"
#include "ubsr/semantic/semantic.hpp"

namespace ubsr {

inline constexpr std::string_view kDefaultDimension = "functionality";

struct ProfileOptions {
    std::filesystem::path input_dir;
    std::filesystem::path rules_dir;
    std::filesystem::path grammars_dir;
    std::optional<std::filesystem::path> semantic_db;  // none: every package is pending
    std::string dimension = std::string(kDefaultDimension);
    std::filesystem::path out_dir;
    TableFormat format = TableFormat::Parquet;
    std::optional<std::string> language_override;
    CommentScope comment_scope = CommentScope::Transitive;
    ExtractionOptions extraction;
};

struct ProfileSummary {
    std::size_t files = 0;
    std::size_t failed = 0;
    std::size_t nodes = 0;
    std::size_t pending = 0;
};

/// Adds the per-document concept lists (from root rows) to the metrics table, in row order.
inline void attach_concepts(Table& metrics, const Table& annotated_nodes, const std::string& dimension) {
    const auto col = concept_column(dimension);
    const auto& type = annotated_nodes.get<std::string>("node_type");
    const auto& values = annotated_nodes.get<StringList>(col);
    Column out(col, ColumnType::StringList);
    for (std::size_t r = 0; r < annotated_nodes.rows(); ++r)
        if (type[r] == to_string(UbsrNodeType::Root)) out.values<StringList>().push_back(values[r]);
    metrics.set_column(std::move(out));
}

/// Writes nodes/edges/metrics tables plus pending.csv and errors.csv under `out_dir`.
/// An existing pending.csv there is merged with the new unknowns.
inline ProfileSummary run_profile(const ProfileOptions& o, const LanguageRegistry& registry = LanguageRegistry::builtin()) {
    if (!std::filesystem::is_directory(o.rules_dir)) throw IoError("rules directory not found: " + o.rules_dir.string());
    if (!std::filesystem::is_directory(o.grammars_dir))
        throw IoError("grammars directory not found: " + o.grammars_dir.string());
    const auto rules = load_rules(o.rules_dir, registry);
    const auto grammars = GrammarSet::load_dir(o.grammars_dir);
    SemanticRuleSet rs = o.semantic_db ? load_semantic_rules(*o.semantic_db) : SemanticRuleSet({o.dimension});
    if (!rs.has_dimension(o.dimension))
        throw SchemaError("semantic database has no column " + concept_column(o.dimension));

    const auto inputs = collect_inputs(o.input_dir, registry, o.extraction.languages, o.language_override);
    const ExtractionContext ctx{grammars, rules, registry};
    auto result = extract_corpus(inputs, ctx, o.extraction);

    auto annotated = annotate(result.tables.nodes, rs, o.dimension);
    Table metrics = metrics_table(profile_rows(annotated.table, o.comment_scope));
    attach_concepts(metrics, annotated.table, o.dimension);

    std::filesystem::create_directories(o.out_dir);
    write_table(annotated.table, table_path(o.out_dir, "nodes", o.format), o.format);
    write_table(result.tables.edges, table_path(o.out_dir, "edges", o.format), o.format);
    write_table(metrics, table_path(o.out_dir, "metrics", o.format), o.format);
    const auto pending_path = o.out_dir / "pending.csv";
    std::vector<PendingPackage> existing;
    if (std::filesystem::exists(pending_path)) existing = pending_from_csv(read_text_file(pending_path));
    const auto pending = merge_pending(existing, annotated.pending, rs, o.dimension);
    write_text_file_atomic(pending_path, pending_to_csv(pending));
    write_text_file_atomic(o.out_dir / "errors.csv", error_log_csv(result.error_log));

    return {metrics.rows(), result.error_log.size(), annotated.table.rows(), pending.size()};
}

}  // namespace ubsr
