#pragma once

// Online extraction: parse, walk the tree, and turn every rule-matched node into a UBSR
// concept node linked under the nearest matched ancestor (or the root).

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/core/ir.hpp"
#include "ubsr/frontend/grammar.hpp"
#include "ubsr/frontend/parser.hpp"
#include "ubsr/frontend/registry.hpp"
#include "ubsr/io/csv.hpp"
#include "ubsr/io/table_io.hpp"
#include "ubsr/rules/rule_db.hpp"

namespace ubsr {

enum class OnError { SkipFile, FailFast };

inline OnError parse_on_error(std::string_view s) {
    if (s == "skip_file") return OnError::SkipFile;
    if (s == "fail_fast") return OnError::FailFast;
    throw SchemaError("unknown on_error policy '" + std::string(s) + "' (expected skip_file or fail_fast)");
}

struct ExtractionOptions {
    std::vector<std::string> languages;  // empty: all
    OnError on_error = OnError::SkipFile;
    bool include_unmatched_stats = false;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Everything extraction reads; shared read-only across worker threads.
struct ExtractionContext {
    const GrammarSet& grammars;
    const RuleDatabase& rules;
    const LanguageRegistry& registry = LanguageRegistry::builtin();
};

/// A rule whose extractor failed on one node; the node is still emitted with its raw span.
struct NodeError {
    NodeId node = 0;
    std::string ast_node_type;
    std::size_t stage = 0;
    std::string message;
};

namespace detail {

class Walker {
public:
    Walker(const ExtractionContext& ctx, std::string_view code, std::string_view language, bool stats)
        : ctx_(ctx), code_(code), language_(language), stats_(stats) {}

    UbsrDocument run(const TreeNode& root, std::string source_path, std::vector<NodeError>* errors) {
        errors_ = errors;
        doc_.source_path = std::move(source_path);
        UbsrNode r;
        r.id = 0;
        r.node_type = UbsrNodeType::Root;
        r.code_snippet = "ubsr_root " + language_;
        r.metadata.language = language_;
        r.metadata.original_code = std::string(code_);
        r.metadata.loc_original_code = count_lines(code_);
        doc_.nodes.push_back(std::move(r));
        for (const auto& c : root.children) visit(c, 0);
        if (stats_) doc_.nodes[0].metadata.info = nlohmann::json{{"unmatched_node_types", unmatched_}}.dump();
        return std::move(doc_);
    }

private:
    // Pre-order: a matched node takes the next id before its descendants are visited.
    void visit(const TreeNode& n, NodeId parent) {
        NodeId next_parent = parent;
        if (const SyntacticRule* rule = ctx_.rules.lookup(language_, n.node_type)) {
            const NodeId id = static_cast<NodeId>(doc_.nodes.size());
            const std::string span(code_.substr(n.byte_span.start, n.byte_span.size()));
            UbsrNode u;
            u.id = id;
            u.node_type = rule->ubsr_node_type;
            u.parents = {parent};
            std::string value;
            try {
                value = run_extractor(rule->extractor, span);
            } catch (const ExtractionError& e) {
                value = span;
                u.metadata.info = "extractor_error:" + std::to_string(e.stage);
                if (errors_) errors_->push_back({id, n.node_type, e.stage, e.what()});
            }
            u.code_snippet = std::string(to_string(rule->ubsr_node_type)) + " " + value;
            u.metadata.language = language_;
            u.metadata.original_code = span;
            u.metadata.loc_original_code = count_lines(span);
            doc_.nodes[static_cast<std::size_t>(parent)].children.push_back(id);
            doc_.edges.push_back(UbsrEdge{parent, id, std::string(kParentRelation), {}});
            doc_.nodes.push_back(std::move(u));
            next_parent = id;
        } else if (stats_) {
            ++unmatched_[n.node_type];
        }
        for (const auto& c : n.children) visit(c, next_parent);
    }

    const ExtractionContext& ctx_;
    std::string_view code_;
    std::string language_;
    bool stats_;
    UbsrDocument doc_;
    std::vector<NodeError>* errors_ = nullptr;
    std::map<std::string, std::int64_t> unmatched_;
};

}  // namespace detail

/// Extracts one code sample. `source_path` becomes the document's doc_id.
inline UbsrDocument extract(std::string_view code, std::string_view language, const ExtractionContext& ctx,
                            std::string source_path = {}, std::vector<NodeError>* errors = nullptr,
                            bool include_unmatched_stats = false) {
    if (!ctx.registry.contains(language)) throw UnknownLanguageError(std::string(language));
    if (!ctx.rules.has_language(language))
        throw RuleFileError("no syntactic rules loaded for language: " + std::string(language));
    ParseTree tree = parse(code, language, ctx.grammars, nullptr, ctx.registry);
    return detail::Walker(ctx, code, language, include_unmatched_stats)
        .run(tree.root, std::move(source_path), errors);
}

// ---- corpus ----------------------------------------------------------------------------

struct SourceInput {
    std::string path;  // doc_id
    std::string code;
    std::string language;
};

struct FileError {
    std::string path;
    std::string reason;
    bool operator==(const FileError&) const = default;
};

struct CorpusResult {
    UbsrTables tables;
    std::vector<FileError> error_log;
};

/// Walks `dir` recursively and reads every file whose language is known, in path order.
/// doc_ids are paths relative to `dir`. `language_override` forces one language for all files.
inline std::vector<SourceInput> collect_inputs(const std::filesystem::path& dir, const LanguageRegistry& registry,
                                               const std::vector<std::string>& languages = {},
                                               const std::optional<std::string>& language_override = std::nullopt) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw IoError("input directory not found: " + dir.string());
    if (language_override && !registry.contains(*language_override))
        throw UnknownLanguageError(*language_override);
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<SourceInput> out;
    for (const auto& f : files) {
        auto lang = language_override ? language_override : registry.detect(f);
        if (!lang) continue;
        if (!languages.empty() && std::find(languages.begin(), languages.end(), *lang) == languages.end()) continue;
        out.push_back({fs::relative(f, dir).generic_string(), read_text_file(f), *lang});
    }
    return out;
}

/// Extracts every input (possibly in parallel) and concatenates the tables in input order.
/// Under skip_file a failing file is logged and left out; under fail_fast the first failure
/// in input order is rethrown.
inline CorpusResult extract_corpus(const std::vector<SourceInput>& inputs, const ExtractionContext& ctx,
                                   const ExtractionOptions& options = {}) {
    struct Slot {
        std::optional<UbsrDocument> doc;
        std::exception_ptr failure;
        std::string reason;
        bool filtered = false;
    };
    std::vector<Slot> slots(inputs.size());
    auto work = [&](std::size_t i) {
        const auto& in = inputs[i];
        auto& slot = slots[i];
        if (!options.languages.empty() &&
            std::find(options.languages.begin(), options.languages.end(), in.language) == options.languages.end()) {
            slot.filtered = true;
            return;
        }
        try {
            std::vector<NodeError> node_errors;
            auto doc = extract(in.code, in.language, ctx, in.path, &node_errors, options.include_unmatched_stats);
            if (options.on_error == OnError::FailFast && !node_errors.empty())
                throw ExtractionError(node_errors.front().stage,
                                      in.path + ": node " + std::to_string(node_errors.front().node) + " (" +
                                          node_errors.front().ast_node_type + "): " + node_errors.front().message);
            slot.doc = std::move(doc);
        } catch (const std::exception& e) {
            slot.failure = std::current_exception();
            slot.reason = e.what();
        }
    };

    unsigned n_threads = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, inputs.size()));
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i) work(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < n_threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < inputs.size(); i = next++) work(i);
            });
        for (auto& th : pool) th.join();
    }

    CorpusResult result{{make_node_table(), make_edge_table()}, {}};
    std::set<std::string> seen;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        auto& slot = slots[i];
        if (slot.filtered) continue;
        if (slot.failure) {
            if (options.on_error == OnError::FailFast) std::rethrow_exception(slot.failure);
            result.error_log.push_back({inputs[i].path, slot.reason});
            continue;
        }
        if (!seen.insert(inputs[i].path).second) throw SchemaError("duplicate input path: " + inputs[i].path);
        append_document(result.tables, *slot.doc);
    }
    return result;
}

inline std::string error_log_csv(const std::vector<FileError>& log) {
    std::vector<csv::Row> rows{{"path", "reason"}};
    for (const auto& e : log) rows.push_back({e.path, e.reason});
    return csv::format(rows);
}

}  // namespace ubsr
