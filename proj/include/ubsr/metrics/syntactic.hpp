#pragma once

// Higher-order syntactic concepts derived from UBSR documents and node tables.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "ubsr/core/error.hpp"
#include "ubsr/core/ir.hpp"
#include "ubsr/core/table.hpp"

namespace ubsr {

/// Which comment nodes count toward total_comment_loc: only the root's direct children
/// (the literal reading of the CCR query) or every comment in the document.
enum class CommentScope { Direct, Transitive };

inline CommentScope parse_comment_scope(std::string_view s) {
    if (s == "direct") return CommentScope::Direct;
    if (s == "transitive") return CommentScope::Transitive;
    throw SchemaError("unknown comments_scope '" + std::string(s) + "' (expected direct or transitive)");
}

/// loc_snippet / total_comment_loc, or 0 when there is no comment LOC.
inline double ccr_value(std::int64_t loc_snippet, std::int64_t total_comment_loc) {
    return total_comment_loc > 0 ? static_cast<double>(loc_snippet) / static_cast<double>(total_comment_loc) : 0.0;
}

inline std::int64_t total_comment_loc(const UbsrDocument& doc, CommentScope scope = CommentScope::Transitive) {
    std::int64_t total = 0;
    if (scope == CommentScope::Direct) {
        for (NodeId c : doc.root().children) {
            const UbsrNode* n = doc.find(c);
            if (n && n->node_type == UbsrNodeType::Comment) total += n->metadata.loc_original_code;
        }
    } else {
        for (const auto& n : doc.nodes)
            if (n.node_type == UbsrNodeType::Comment) total += n.metadata.loc_original_code;
    }
    return total;
}

inline double compute_ccr(const UbsrDocument& doc, CommentScope scope = CommentScope::Transitive) {
    return ccr_value(doc.root().metadata.loc_original_code, total_comment_loc(doc, scope));
}

struct SyntacticProfileRow {
    std::string doc_id;
    std::string language;
    std::int64_t loc_snippet = 0;
    std::int64_t package_count = 0;
    std::int64_t function_count = 0;
    std::int64_t comment_count = 0;
    std::int64_t total_comment_loc = 0;
    double ccr = 0.0;
    double mean_function_loc = 0.0;

    bool operator==(const SyntacticProfileRow&) const = default;
};

/// One row per doc_id, in order of first appearance in the node table.
inline std::vector<SyntacticProfileRow> profile_rows(const Table& node_table,
                                                     CommentScope scope = CommentScope::Transitive) {
    check_columns(node_table, columns::kNodeTable, "node table");
    const auto& doc = node_table.get<std::string>("doc_id");
    const auto& type = node_table.get<std::string>("node_type");
    const auto& parents = node_table.get<Int64List>("parents");
    const auto& language = node_table.get<std::string>("language");
    const auto& loc = node_table.get<std::int64_t>("loc_original_code");
    const auto& ids = node_table.get<std::int64_t>("id");

    struct Acc {
        SyntacticProfileRow row;
        std::int64_t function_loc = 0;
        bool has_root = false;
    };
    std::vector<Acc> accs;
    std::map<std::string, std::size_t, std::less<>> index;
    for (std::size_t r = 0; r < node_table.rows(); ++r) {
        auto [it, fresh] = index.try_emplace(doc[r], accs.size());
        if (fresh) {
            accs.emplace_back();
            accs.back().row.doc_id = doc[r];
        }
        Acc& a = accs[it->second];
        auto t = parse_node_type(type[r]);
        if (!t) throw SchemaError("node table row " + std::to_string(r) + ": unknown node_type '" + type[r] + "'");
        if (loc[r] < 0) throw SchemaError("node table row " + std::to_string(r) + ": negative loc_original_code");
        switch (*t) {
            case UbsrNodeType::Root:
                if (a.has_root || ids[r] != 0) throw SchemaError("document '" + doc[r] + "': malformed root row");
                a.has_root = true;
                a.row.language = language[r];
                a.row.loc_snippet = loc[r];
                break;
            case UbsrNodeType::Package: ++a.row.package_count; break;
            case UbsrNodeType::Function:
                ++a.row.function_count;
                a.function_loc += loc[r];
                break;
            case UbsrNodeType::Comment:
                ++a.row.comment_count;
                if (scope == CommentScope::Transitive || (parents[r].size() == 1 && parents[r][0] == 0))
                    a.row.total_comment_loc += loc[r];
                break;
        }
    }
    std::vector<SyntacticProfileRow> out;
    out.reserve(accs.size());
    for (auto& a : accs) {
        if (!a.has_root) throw SchemaError("document '" + a.row.doc_id + "' has no root row");
        a.row.ccr = ccr_value(a.row.loc_snippet, a.row.total_comment_loc);
        a.row.mean_function_loc = a.row.function_count > 0 ? static_cast<double>(a.function_loc) /
                                                                  static_cast<double>(a.row.function_count)
                                                            : 0.0;
        out.push_back(std::move(a.row));
    }
    return out;
}

inline const std::vector<std::string>& metrics_columns() {
    static const std::vector<std::string> cols = {"doc_id",         "language",       "loc_snippet",
                                                  "package_count",  "function_count", "comment_count",
                                                  "total_comment_loc", "ccr",         "mean_function_loc"};
    return cols;
}

inline Table metrics_table(const std::vector<SyntacticProfileRow>& rows) {
    Column doc("doc_id", ColumnType::String), lang("language", ColumnType::String);
    Column loc("loc_snippet", ColumnType::Int64), pk("package_count", ColumnType::Int64),
        fn("function_count", ColumnType::Int64), cm("comment_count", ColumnType::Int64),
        cl("total_comment_loc", ColumnType::Int64);
    Column ccr("ccr", ColumnType::Double), mf("mean_function_loc", ColumnType::Double);
    for (const auto& r : rows) {
        doc.values<std::string>().push_back(r.doc_id);
        lang.values<std::string>().push_back(r.language);
        loc.values<std::int64_t>().push_back(r.loc_snippet);
        pk.values<std::int64_t>().push_back(r.package_count);
        fn.values<std::int64_t>().push_back(r.function_count);
        cm.values<std::int64_t>().push_back(r.comment_count);
        cl.values<std::int64_t>().push_back(r.total_comment_loc);
        ccr.values<double>().push_back(r.ccr);
        mf.values<double>().push_back(r.mean_function_loc);
    }
    Table t;
    for (auto* c : {&doc, &lang, &loc, &pk, &fn, &cm, &cl, &ccr, &mf}) t.add_column(std::move(*c));
    return t;
}

inline std::vector<SyntacticProfileRow> rows_from_metrics_table(const Table& t) {
    check_columns(t, metrics_columns(), "metrics table");
    std::vector<SyntacticProfileRow> out;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        SyntacticProfileRow x;
        x.doc_id = t.get<std::string>("doc_id")[r];
        x.language = t.get<std::string>("language")[r];
        x.loc_snippet = t.get<std::int64_t>("loc_snippet")[r];
        x.package_count = t.get<std::int64_t>("package_count")[r];
        x.function_count = t.get<std::int64_t>("function_count")[r];
        x.comment_count = t.get<std::int64_t>("comment_count")[r];
        x.total_comment_loc = t.get<std::int64_t>("total_comment_loc")[r];
        x.ccr = t.get<double>("ccr")[r];
        x.mean_function_loc = t.get<double>("mean_function_loc")[r];
        out.push_back(std::move(x));
    }
    return out;
}

}  // namespace ubsr
