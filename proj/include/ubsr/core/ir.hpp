#pragma once

// Unified Base Syntactic Representation: the language-agnostic node/edge graph of one
// code sample, its validation rules, and the wide-table form used for persistence.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/core/table.hpp"

namespace ubsr {

using NodeId = std::int64_t;

enum class UbsrNodeType { Root, Package, Function, Comment };

inline constexpr std::string_view kParentRelation = "parent_node";

inline std::string_view to_string(UbsrNodeType t) {
    switch (t) {
        case UbsrNodeType::Root: return "ubsr_root";
        case UbsrNodeType::Package: return "ubsr_package";
        case UbsrNodeType::Function: return "ubsr_function";
        case UbsrNodeType::Comment: return "ubsr_comment";
    }
    return "";
}

inline std::optional<UbsrNodeType> parse_node_type(std::string_view s) {
    if (s == "ubsr_root") return UbsrNodeType::Root;
    if (s == "ubsr_package") return UbsrNodeType::Package;
    if (s == "ubsr_function") return UbsrNodeType::Function;
    if (s == "ubsr_comment") return UbsrNodeType::Comment;
    return std::nullopt;
}

/// Number of newline-delimited lines: '\n' count, plus one for an unterminated last line.
inline std::int64_t count_lines(std::string_view text) {
    if (text.empty()) return 0;
    auto n = static_cast<std::int64_t>(std::count(text.begin(), text.end(), '\n'));
    return text.back() == '\n' ? n : n + 1;
}

struct NodeMetadata {
    std::string info;
    std::string language;
    std::string original_code;
    std::int64_t loc_original_code = 0;

    bool operator==(const NodeMetadata&) const = default;
};

struct UbsrNode {
    NodeId id = 0;
    std::string code_snippet;
    UbsrNodeType node_type = UbsrNodeType::Root;
    std::vector<NodeId> parents;
    std::vector<NodeId> children;
    NodeMetadata metadata;

    bool operator==(const UbsrNode&) const = default;
};

struct UbsrEdge {
    NodeId source = 0;
    NodeId target = 0;
    std::string directed_relation{kParentRelation};
    std::map<std::string, std::string> metadata;

    bool operator==(const UbsrEdge&) const = default;
};

struct UbsrDocument {
    std::vector<UbsrNode> nodes;
    std::vector<UbsrEdge> edges;
    std::string source_path;

    const UbsrNode* find(NodeId id) const {
        for (const auto& n : nodes)
            if (n.id == id) return &n;
        return nullptr;
    }
    const UbsrNode& root() const {
        const UbsrNode* r = find(0);
        if (r == nullptr || r->node_type != UbsrNodeType::Root) throw SchemaError("document has no root node");
        return *r;
    }

    /// Sorts nodes by id and edges by (source, target); the order tables are written in.
    void canonicalize() {
        std::stable_sort(nodes.begin(), nodes.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
        std::stable_sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
            return std::pair(a.source, a.target) < std::pair(b.source, b.target);
        });
    }

    bool operator==(const UbsrDocument&) const = default;
};

/// Returns every invariant violation; an empty list means the document is well-formed.
inline std::vector<std::string> validate_document(const UbsrDocument& doc) {
    std::vector<std::string> out;
    const auto node_name = [](NodeId id) { return "node " + std::to_string(id); };

    std::unordered_map<NodeId, const UbsrNode*> by_id;
    bool duplicate = false;
    for (const auto& n : doc.nodes) {
        auto [it, fresh] = by_id.emplace(n.id, &n);
        if (!fresh) {
            out.push_back(node_name(n.id) + ": id is not unique");
            duplicate = true;
        }
        if (n.id < 0) out.push_back(node_name(n.id) + ": id is negative");
    }
    // Graph checks are meaningless while ids are ambiguous.
    if (duplicate) return out;

    std::size_t roots = 0;
    for (const auto& n : doc.nodes) {
        if (n.node_type != UbsrNodeType::Root) continue;
        ++roots;
        if (n.id != 0) out.push_back(node_name(n.id) + ": root node must have id 0");
        if (!n.parents.empty()) out.push_back(node_name(n.id) + ": root node must have no parents");
    }
    if (roots != 1)
        out.push_back("document: expected exactly one ubsr_root node, found " + std::to_string(roots));

    for (const auto& n : doc.nodes) {
        if (count_lines(n.metadata.original_code) != n.metadata.loc_original_code)
            out.push_back(node_name(n.id) + ": loc_original_code " + std::to_string(n.metadata.loc_original_code) +
                          " does not match original_code (" +
                          std::to_string(count_lines(n.metadata.original_code)) + " lines)");
        for (NodeId c : n.children) {
            auto it = by_id.find(c);
            if (it == by_id.end()) {
                out.push_back(node_name(n.id) + ": child " + std::to_string(c) + " does not exist");
                continue;
            }
            const auto& ps = it->second->parents;
            if (std::find(ps.begin(), ps.end(), n.id) == ps.end())
                out.push_back(node_name(n.id) + ": lists child " + std::to_string(c) +
                              " but that node does not list it as parent (symmetry)");
        }
        for (NodeId p : n.parents) {
            auto it = by_id.find(p);
            if (it == by_id.end()) {
                out.push_back(node_name(n.id) + ": parent " + std::to_string(p) + " does not exist");
                continue;
            }
            const auto& cs = it->second->children;
            if (std::find(cs.begin(), cs.end(), n.id) == cs.end())
                out.push_back(node_name(n.id) + ": lists parent " + std::to_string(p) +
                              " but that node does not list it as child (symmetry)");
        }
    }

    std::set<std::pair<NodeId, NodeId>> adjacency;
    for (const auto& n : doc.nodes)
        for (NodeId c : n.children)
            if (by_id.count(c)) adjacency.emplace(n.id, c);

    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& e : doc.edges) {
        const std::string name = "edge " + std::to_string(e.source) + "->" + std::to_string(e.target);
        if (e.directed_relation != kParentRelation)
            out.push_back(name + ": unsupported relation '" + e.directed_relation + "'");
        if (!by_id.count(e.source) || !by_id.count(e.target)) {
            out.push_back(name + ": dangling node reference");
            continue;
        }
        if (!seen.emplace(e.source, e.target).second) out.push_back(name + ": duplicate edge");
        if (!adjacency.count({e.source, e.target}))
            out.push_back(name + ": not mirrored by a parent/child entry");
    }
    for (const auto& [s, t] : adjacency)
        if (!seen.count({s, t}))
            out.push_back("edge " + std::to_string(s) + "->" + std::to_string(t) + ": missing for child entry");

    // Acyclicity and reachability over children lists (iterative DFS with colors).
    if (by_id.count(0)) {
        std::unordered_map<NodeId, int> color;
        std::vector<std::pair<NodeId, std::size_t>> stack{{0, 0}};
        color[0] = 1;
        bool cyclic = false;
        while (!stack.empty()) {
            auto& [id, next] = stack.back();
            const auto& kids = by_id.at(id)->children;
            if (next < kids.size()) {
                NodeId c = kids[next++];
                if (!by_id.count(c)) continue;
                int& col = color[c];
                if (col == 1) {
                    if (!cyclic) out.push_back(node_name(c) + ": cycle through children lists");
                    cyclic = true;
                } else if (col == 0) {
                    col = 1;
                    stack.emplace_back(c, 0);
                }
            } else {
                color[id] = 2;
                stack.pop_back();
            }
        }
        for (const auto& n : doc.nodes)
            if (n.id != 0 && color[n.id] == 0) out.push_back(node_name(n.id) + ": not reachable from root");
    }
    return out;
}

namespace columns {
inline const std::vector<std::string> kNodeTable = {"doc_id",   "id",           "code_snippet",   "node_type",
                                                    "parents",  "children",     "info",           "language",
                                                    "original_code", "loc_original_code"};
inline const std::vector<std::string> kEdgeTable = {"doc_id", "source", "target", "directed_relation", "metadata"};
}  // namespace columns

struct UbsrTables {
    Table nodes;
    Table edges;
    bool operator==(const UbsrTables&) const = default;
};

inline Table make_node_table() {
    Table t;
    t.add_column("doc_id", ColumnType::String);
    t.add_column("id", ColumnType::Int64);
    t.add_column("code_snippet", ColumnType::String);
    t.add_column("node_type", ColumnType::String);
    t.add_column("parents", ColumnType::Int64List);
    t.add_column("children", ColumnType::Int64List);
    t.add_column("info", ColumnType::String);
    t.add_column("language", ColumnType::String);
    t.add_column("original_code", ColumnType::String);
    t.add_column("loc_original_code", ColumnType::Int64);
    return t;
}

inline Table make_edge_table() {
    Table t;
    t.add_column("doc_id", ColumnType::String);
    t.add_column("source", ColumnType::Int64);
    t.add_column("target", ColumnType::Int64);
    t.add_column("directed_relation", ColumnType::String);
    t.add_column("metadata", ColumnType::String);
    return t;
}

namespace detail {
inline std::string metadata_to_json(const std::map<std::string, std::string>& m) {
    return nlohmann::json(m).dump();
}
inline std::map<std::string, std::string> metadata_from_json(const std::string& s) {
    if (s.empty()) return {};
    auto j = nlohmann::json::parse(s, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw SchemaError("edge metadata is not a JSON object: " + s);
    std::map<std::string, std::string> out;
    for (auto it = j.begin(); it != j.end(); ++it)
        out[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    return out;
}
}  // namespace detail

/// Appends the rows of one document (canonical order) to existing tables.
inline void append_document(UbsrTables& tables, const UbsrDocument& doc) {
    UbsrDocument d = doc;
    d.canonicalize();
    auto& n = tables.nodes;
    for (const auto& node : d.nodes) {
        n.get<std::string>("doc_id").push_back(d.source_path);
        n.get<std::int64_t>("id").push_back(node.id);
        n.get<std::string>("code_snippet").push_back(node.code_snippet);
        n.get<std::string>("node_type").emplace_back(to_string(node.node_type));
        n.get<Int64List>("parents").push_back(node.parents);
        n.get<Int64List>("children").push_back(node.children);
        n.get<std::string>("info").push_back(node.metadata.info);
        n.get<std::string>("language").push_back(node.metadata.language);
        n.get<std::string>("original_code").push_back(node.metadata.original_code);
        n.get<std::int64_t>("loc_original_code").push_back(node.metadata.loc_original_code);
    }
    auto& e = tables.edges;
    for (const auto& edge : d.edges) {
        e.get<std::string>("doc_id").push_back(d.source_path);
        e.get<std::int64_t>("source").push_back(edge.source);
        e.get<std::int64_t>("target").push_back(edge.target);
        e.get<std::string>("directed_relation").push_back(edge.directed_relation);
        e.get<std::string>("metadata").push_back(detail::metadata_to_json(edge.metadata));
    }
}

/// Flattens documents into node and edge tables. Rejects invalid documents and duplicate
/// source paths (the source path is the doc_id key).
inline UbsrTables to_tabular(const std::vector<UbsrDocument>& docs) {
    UbsrTables t{make_node_table(), make_edge_table()};
    std::set<std::string> paths;
    for (const auto& doc : docs) {
        auto violations = validate_document(doc);
        if (!violations.empty())
            throw SchemaError("invalid document '" + doc.source_path + "': " + violations.front());
        if (!paths.insert(doc.source_path).second)
            throw SchemaError("duplicate doc_id (source path): " + doc.source_path);
        append_document(t, doc);
    }
    return t;
}

inline void check_columns(const Table& t, const std::vector<std::string>& required, std::string_view what) {
    for (const auto& c : required)
        if (t.find(c) == nullptr) throw SchemaError(std::string(what) + " is missing column '" + c + "'");
    t.check_rectangular();
}

/// Rebuilds documents from node and edge tables; documents appear in first-seen doc_id order.
inline std::vector<UbsrDocument> from_tabular(const Table& node_table, const Table& edge_table) {
    check_columns(node_table, columns::kNodeTable, "node table");
    check_columns(edge_table, columns::kEdgeTable, "edge table");

    std::vector<UbsrDocument> docs;
    std::unordered_map<std::string, std::size_t> index;
    const auto& doc_ids = node_table.get<std::string>("doc_id");
    const auto& ids = node_table.get<std::int64_t>("id");
    const auto& snippets = node_table.get<std::string>("code_snippet");
    const auto& types = node_table.get<std::string>("node_type");
    const auto& parents = node_table.get<Int64List>("parents");
    const auto& children = node_table.get<Int64List>("children");
    const auto& infos = node_table.get<std::string>("info");
    const auto& langs = node_table.get<std::string>("language");
    const auto& codes = node_table.get<std::string>("original_code");
    const auto& locs = node_table.get<std::int64_t>("loc_original_code");

    for (std::size_t r = 0; r < node_table.rows(); ++r) {
        auto [it, fresh] = index.emplace(doc_ids[r], docs.size());
        if (fresh) {
            docs.emplace_back();
            docs.back().source_path = doc_ids[r];
        }
        auto type = parse_node_type(types[r]);
        if (!type) throw SchemaError("row " + std::to_string(r) + ": unknown node_type '" + types[r] + "'");
        UbsrNode node;
        node.id = ids[r];
        node.code_snippet = snippets[r];
        node.node_type = *type;
        node.parents = parents[r];
        node.children = children[r];
        node.metadata = {infos[r], langs[r], codes[r], locs[r]};
        docs[it->second].nodes.push_back(std::move(node));
    }

    const auto& e_docs = edge_table.get<std::string>("doc_id");
    const auto& sources = edge_table.get<std::int64_t>("source");
    const auto& targets = edge_table.get<std::int64_t>("target");
    const auto& rels = edge_table.get<std::string>("directed_relation");
    const auto& metas = edge_table.get<std::string>("metadata");
    for (std::size_t r = 0; r < edge_table.rows(); ++r) {
        auto it = index.find(e_docs[r]);
        if (it == index.end())
            throw SchemaError("edge row " + std::to_string(r) + ": dangling reference to document '" + e_docs[r] + "'");
        auto& doc = docs[it->second];
        if (doc.find(sources[r]) == nullptr || doc.find(targets[r]) == nullptr)
            throw SchemaError("edge row " + std::to_string(r) + ": dangling reference " + std::to_string(sources[r]) +
                              "->" + std::to_string(targets[r]) + " in document '" + e_docs[r] + "'");
        doc.edges.push_back({sources[r], targets[r], rels[r], detail::metadata_from_json(metas[r])});
    }
    return docs;
}

inline std::vector<UbsrDocument> from_tabular(const UbsrTables& t) { return from_tabular(t.nodes, t.edges); }

}  // namespace ubsr
