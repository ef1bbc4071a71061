#pragma once

// Concrete syntax trees produced by the parser frontend, plus the two pruning strategies
// and the s-expression rendering used when embedding trees in prompts.

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ubsr/frontend/registry.hpp"

namespace ubsr {

struct ByteSpan {
    std::size_t start = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - start; }
    bool contains(const ByteSpan& o) const { return start <= o.start && o.end <= end; }
    bool operator==(const ByteSpan&) const = default;
};

struct TreeNode {
    std::string node_type;
    ByteSpan byte_span;
    std::vector<TreeNode> children;
    ConceptSet concept_tags;

    bool operator==(const TreeNode&) const = default;
};

struct ParseTree {
    std::string language;
    TreeNode root;

    bool operator==(const ParseTree&) const = default;
};

inline std::size_t node_count(const TreeNode& n) {
    std::size_t total = 1;
    for (const auto& c : n.children) total += node_count(c);
    return total;
}
inline std::size_t node_count(const ParseTree& t) { return node_count(t.root); }

/// Height in edges: a lone root has height 0.
inline std::size_t tree_height(const TreeNode& n) {
    std::size_t h = 0;
    for (const auto& c : n.children) h = std::max(h, tree_height(c) + 1);
    return h;
}
inline std::size_t tree_height(const ParseTree& t) { return tree_height(t.root); }

/// Keeps nodes at edge-depth <= max_depth from the root (root is depth 0, so
/// max_depth = 1 keeps the root and its direct children).
inline ParseTree prune_depth(const ParseTree& tree, std::size_t max_depth) {
    if (max_depth < 1) throw Error("prune_depth: max_depth must be >= 1");
    struct Cut {
        static TreeNode apply(const TreeNode& n, std::size_t remaining) {
            TreeNode out{n.node_type, n.byte_span, {}, n.concept_tags};
            if (remaining == 0) return out;
            out.children.reserve(n.children.size());
            for (const auto& c : n.children) out.children.push_back(apply(c, remaining - 1));
            return out;
        }
    };
    return {tree.language, Cut::apply(tree.root, max_depth)};
}

/// Keeps concept-tagged nodes (those whose tags intersect `concepts`), their ancestors and
/// the root. Subtrees of a kept node are dropped unless they contain tagged nodes themselves.
inline ParseTree prune_concept(const ParseTree& tree, const ConceptSet& concepts) {
    if (concepts.empty()) throw Error("prune_concept: concept set must be non-empty");
    struct Filter {
        const ConceptSet& wanted;
        // Returns true when `n` or a descendant is tagged; `out` receives the kept subtree.
        bool apply(const TreeNode& n, TreeNode& out) const {
            out = TreeNode{n.node_type, n.byte_span, {}, n.concept_tags};
            bool keep = n.concept_tags.intersects(wanted);
            for (const auto& c : n.children) {
                TreeNode kept;
                if (apply(c, kept)) {
                    out.children.push_back(std::move(kept));
                    keep = true;
                }
            }
            return keep;
        }
    };
    ParseTree out{tree.language, {}};
    Filter{concepts}.apply(tree.root, out.root);
    return out;
}

/// Parenthesized node-type rendering, one line per tree: "(module (import_statement (identifier)))".
inline std::string render_sexpr(const TreeNode& n) {
    std::string out = "(" + n.node_type;
    for (const auto& c : n.children) {
        out += ' ';
        out += render_sexpr(c);
    }
    out += ')';
    return out;
}
inline std::string render_sexpr(const ParseTree& t) { return render_sexpr(t.root); }

/// Indented multi-line rendering for human-facing prompt text.
inline std::string render_indented(const TreeNode& n, std::size_t indent = 0) {
    std::string out(indent * 2, ' ');
    out += "(" + n.node_type;
    for (const auto& c : n.children) {
        out += '\n';
        out += render_indented(c, indent + 1);
    }
    out += ')';
    return out;
}

/// Whitespace-delimited token count; the tokenizer-neutral prompt size measure.
inline std::size_t token_count(std::string_view text) {
    std::size_t n = 0;
    bool in_token = false;
    for (char c : text) {
        const bool ws = c == ' ' || c == '\n' || c == '\t' || c == '\r';
        if (!ws && !in_token) ++n;
        in_token = !ws;
    }
    return n;
}

/// Pre-order visit.
template <typename Fn>
void for_each_node(const TreeNode& n, Fn&& fn, std::size_t depth = 0) {
    fn(n, depth);
    for (const auto& c : n.children) for_each_node(c, fn, depth + 1);
}

}  // namespace ubsr
