#pragma once

// Error-tolerant structural parser. Tokens are grouped by bracket matching, split into
// statements according to the grammar's layout, and each statement is classified by
// matching its normalized head text against the grammar's statement rules.

#include <algorithm>
#include <cstddef>
#include <map>
#include <regex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ubsr/frontend/grammar.hpp"
#include "ubsr/frontend/lexer.hpp"
#include "ubsr/frontend/registry.hpp"
#include "ubsr/frontend/tree.hpp"

namespace ubsr {

/// node_type -> concept tags applied during parsing (built from the rule database).
using ConceptTagMap = std::map<std::string, ConceptSet, std::less<>>;

namespace detail {

struct Item {
    TokenKind kind = TokenKind::Punct;
    bool group = false;
    bool matched = true;  // groups: closer found
    bool stray = false;   // unmatched closer
    char open = 0;
    std::size_t begin = 0, end = 0, line = 0, end_line = 0, col = 0;
    bool first_on_line = false;
    std::vector<Item> kids;
};

inline bool is_opener(char c) { return c == '(' || c == '[' || c == '{'; }
inline bool is_closer(char c) { return c == ')' || c == ']' || c == '}'; }
inline char closer_of(char c) { return c == '(' ? ')' : c == '[' ? ']' : '}'; }

inline Item item_of(const Token& t) {
    Item it;
    it.kind = t.kind;
    it.begin = t.begin;
    it.end = t.end;
    it.line = t.line;
    it.end_line = t.end_line;
    it.col = t.col;
    it.first_on_line = t.first_on_line;
    return it;
}

/// Bracket matching over code tokens. An unmatched closer becomes a stray item; an opener
/// left open runs to the point where an enclosing group closes (or the end of input).
inline std::vector<Item> group_tokens(const std::vector<Token>& toks, std::string_view src) {
    std::vector<Item> top;
    std::vector<Item> stack;
    auto sink = [&]() -> std::vector<Item>& { return stack.empty() ? top : stack.back().kids; };
    auto close_open = [&](bool matched, const Token* closer) {
        Item g = std::move(stack.back());
        stack.pop_back();
        g.matched = matched;
        if (closer != nullptr) {
            g.end = closer->end;
            g.end_line = closer->end_line;
        } else if (!g.kids.empty()) {
            g.end = g.kids.back().end;
            g.end_line = g.kids.back().end_line;
        }
        sink().push_back(std::move(g));
    };
    for (const auto& t : toks) {
        const char c = t.kind == TokenKind::Punct ? src[t.begin] : 0;
        if (c != 0 && is_opener(c)) {
            Item g = item_of(t);
            g.group = true;
            g.open = c;
            stack.push_back(std::move(g));
            continue;
        }
        if (c != 0 && is_closer(c)) {
            auto match = std::find_if(stack.rbegin(), stack.rend(), [&](const Item& g) { return closer_of(g.open) == c; });
            if (match == stack.rend()) {
                Item s = item_of(t);
                s.stray = true;
                sink().push_back(std::move(s));
                continue;
            }
            while (closer_of(stack.back().open) != c) close_open(false, nullptr);
            close_open(true, &t);
            continue;
        }
        sink().push_back(item_of(t));
    }
    while (!stack.empty()) close_open(false, nullptr);
    return top;
}

class Parser {
public:
    Parser(const GrammarProfile& g, std::string_view src, const ConceptTagMap* tags)
        : g_(g), src_(src), tags_(tags) {
        sub_grammar_ = g;
        sub_grammar_.directive_prefix.clear();
    }

    ParseTree run() {
        ParseTree tree;
        tree.language = g_.language;
        tree.root.node_type = g_.root_type;
        tree.root.byte_span = {0, src_.size()};
        std::vector<Token> code;
        for (auto& t : tokenize(g_, src_)) (t.is_comment() ? comments_ : code).push_back(t);
        const auto items = group_tokens(code, src_);
        tree.root.children = parse_block(items, 0, items.size(), src_.size());
        for (const auto& c : comments_) insert_comment(tree.root, c);
        if (tags_ != nullptr) apply_tags(tree.root);
        return tree;
    }

private:
    std::string_view text(const Item& it) const { return src_.substr(it.begin, it.end - it.begin); }
    bool is_punct(const Item& it, char c) const {
        return !it.group && !it.stray && it.kind == TokenKind::Punct && src_[it.begin] == c;
    }
    bool is_word(const Item& it) const { return !it.group && !it.stray && it.kind == TokenKind::Word; }
    bool is_brace(const Item& it) const { return it.group && it.open == '{'; }
    bool is_keyword(const Item& it) const { return is_word(it) && g_.keywords.count(text(it)) > 0; }

    std::vector<TreeNode> parse_block(const std::vector<Item>& L, std::size_t a, std::size_t b, std::size_t limit) {
        switch (g_.layout) {
            case Layout::Braces: return parse_braces(L, a, b);
            case Layout::Indent: return parse_indent(L, a, b, limit);
            case Layout::Offside: return parse_offside(L, a, b);
        }
        return {};
    }

    // ---- normalized head text ------------------------------------------------------

    void render(const Item& it, std::string& out, std::size_t& prev_end) const {
        if (out.size() > kHeadCap) return;
        if (!out.empty() && it.begin > prev_end) out.push_back(' ');
        if (it.group) {
            out.push_back(it.open);
            if (it.open == '{') {
                // Block contents never influence classification.
                out.push_back('}');
                prev_end = it.end;
                return;
            }
            prev_end = it.begin + 1;
            std::string inner;
            for (const auto& k : it.kids) render(k, inner, prev_end);
            out += inner;
            if (it.matched) out.push_back(closer_of(it.open));
            prev_end = it.end;
            return;
        }
        if (it.kind == TokenKind::Directive) {
            // Collapse whitespace (including continuation newlines).
            bool space = false;
            for (char c : text(it)) {
                if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\\') {
                    space = true;
                    continue;
                }
                if (space && !out.empty()) out.push_back(' ');
                space = false;
                out.push_back(c);
            }
        } else {
            out += text(it);
        }
        prev_end = it.end;
    }

    std::string head_text(const std::vector<Item>& L, std::size_t a, std::size_t b) const {
        std::string out;
        std::size_t prev_end = a < b ? L[a].begin : 0;
        for (std::size_t i = a; i < b; ++i) render(L[i], out, prev_end);
        if (out.size() > kHeadCap) out.resize(kHeadCap);
        return out;
    }

    const StatementRule* classify(const std::string& head, bool has_body) const {
        for (const auto& r : g_.statements) {
            if (r.body && *r.body != has_body) continue;
            if (std::regex_search(head, r.pattern)) return &r;
        }
        return nullptr;
    }

    // ---- leaves ----------------------------------------------------------------------

    // Length in items of a separator starting at L[i], or 0.
    std::size_t separator_at(const std::vector<Item>& L, std::size_t i, std::size_t b) const {
        for (const auto& sep : g_.name_separators) {
            if (i + sep.size() >= b) continue;
            bool ok = true;
            for (std::size_t k = 0; k < sep.size() && ok; ++k) {
                const Item& p = L[i + k];
                ok = is_punct(p, sep[k]) && p.begin == L[i - 1].end + k;
            }
            const Item& next = L[i + sep.size()];
            if (ok && is_word(next) && next.begin == L[i + sep.size() - 1].end) return sep.size();
        }
        return 0;
    }

    TreeNode leaf(const std::string& type, std::size_t begin, std::size_t end) const {
        return TreeNode{type, {begin, end}, {}, {}};
    }

    TreeNode group_node(const Item& it, const std::string& block_type) {
        TreeNode n;
        n.byte_span = {it.begin, it.end};
        if (it.open == '{' && g_.layout == Layout::Braces) {
            n.node_type = it.matched ? block_type : g_.error_type;
            n.children = parse_braces(it.kids, 0, it.kids.size());
        } else {
            n.node_type = !it.matched          ? g_.error_type
                          : it.open == '('     ? g_.paren_type
                          : it.open == '['     ? g_.bracket_type
                                               : g_.brace_group_type;
            n.children = leaves(it.kids, 0, it.kids.size());
        }
        return n;
    }

    std::vector<TreeNode> leaves(const std::vector<Item>& L, std::size_t a, std::size_t b) {
        std::vector<TreeNode> out;
        for (std::size_t i = a; i < b; ++i) {
            const Item& it = L[i];
            if (it.stray) {
                out.push_back(leaf(g_.error_type, it.begin, it.end));
            } else if (it.group) {
                out.push_back(group_node(it, g_.block_type));
            } else if (it.kind == TokenKind::Word) {
                std::size_t j = i + 1;
                while (j < b) {
                    std::size_t s = separator_at(L, j, b);
                    if (s == 0) break;
                    j += s + 1;
                }
                if (j > i + 1) {
                    out.push_back(leaf(g_.dotted_type, it.begin, L[j - 1].end));
                    i = j - 1;
                } else if (!is_keyword(it)) {
                    out.push_back(leaf(g_.identifier_type, it.begin, it.end));
                }
            } else if (it.kind == TokenKind::Number) {
                out.push_back(leaf(g_.number_type, it.begin, it.end));
            } else if (it.kind == TokenKind::String) {
                out.push_back(leaf(g_.string_type, it.begin, it.end));
            } else if (it.kind == TokenKind::Char) {
                out.push_back(leaf(g_.char_type, it.begin, it.end));
            }
        }
        return out;
    }

    // Splits a paren group's items into list items (by `,`/`;` or line).
    std::vector<TreeNode> list_items(const Item& group, const std::string& type) {
        std::vector<TreeNode> out;
        const auto& K = group.kids;
        std::size_t start = 0;
        auto flush = [&](std::size_t end) {
            if (end > start) {
                TreeNode n{type, {K[start].begin, K[end - 1].end}, leaves(K, start, end), {}};
                out.push_back(std::move(n));
            }
        };
        for (std::size_t i = 0; i < K.size(); ++i) {
            if (is_punct(K[i], ',') || is_punct(K[i], ';')) {
                flush(i);
                start = i + 1;
            } else if (i > start && K[i].line > K[i - 1].end_line) {
                flush(i);
                start = i;
            }
        }
        flush(K.size());
        return out;
    }

    // ---- statements ------------------------------------------------------------------

    /// Builds a statement node over L[a, b). `bodies` are indices of brace items acting as
    /// bodies (braces layout); `suites` are [begin, end) item ranges parsed as nested blocks.
    TreeNode statement(const std::vector<Item>& L, std::size_t a, std::size_t b, std::size_t head_end, bool has_body,
                       const std::vector<std::pair<std::size_t, std::size_t>>& suites, std::size_t end_byte,
                       std::size_t limit) {
        TreeNode n;
        n.byte_span = {L[a].begin, std::max(end_byte, L[b - 1].end)};
        const std::string head = head_text(L, a, head_end);
        const StatementRule* rule = L[a].kind == TokenKind::Directive && !L[a].group
                                        ? classify(head, false)
                                        : classify(head, has_body);
        n.node_type = rule ? rule->type : g_.default_statement;
        const std::string body_type = rule && !rule->body_type.empty() ? rule->body_type : g_.block_type;

        if (!L[a].group && L[a].kind == TokenKind::Directive) {
            auto sub = Lexer(sub_grammar_, src_.substr(0, L[a].end), L[a].begin + g_.directive_prefix.size()).run();
            std::vector<Token> code;
            for (const auto& t : sub)
                if (!t.is_comment()) code.push_back(t);
            auto items = group_tokens(code, src_);
            n.children = leaves(items, 0, items.size());
            return n;
        }

        const bool as_list = rule && !rule->list_item.empty();
        bool listed = false;
        std::size_t suite_idx = 0;
        bool first_body = true;
        for (std::size_t i = a; i < b; ++i) {
            if (suite_idx < suites.size() && i == suites[suite_idx].first) {
                const auto [sa, sb] = suites[suite_idx++];
                const std::size_t block_end =
                    suite_idx == suites.size() ? n.byte_span.end : std::max(L[sb - 1].end, L[sa].begin);
                TreeNode block{first_body ? body_type : g_.block_type, {L[sa].begin, block_end}, {}, {}};
                block.children = parse_block(L, sa, sb, suite_idx == suites.size() ? limit : L[sb].begin);
                first_body = false;
                n.children.push_back(std::move(block));
                i = sb - 1;
                continue;
            }
            const Item& it = L[i];
            if (it.group && it.open == '(' && as_list && !listed) {
                auto items = list_items(it, rule->list_item);
                for (auto& x : items) n.children.push_back(std::move(x));
                listed = true;
                continue;
            }
            if (is_brace(it) && g_.layout == Layout::Braces && has_body && i >= head_end) {
                n.children.push_back(group_node(it, first_body ? body_type : g_.block_type));
                first_body = false;
                continue;
            }
            // Dotted names span several items; let leaves() see the whole run.
            std::size_t j = i + 1;
            if (is_word(it)) {
                const std::size_t stop = suite_idx < suites.size() ? suites[suite_idx].first : b;
                while (j < stop) {
                    std::size_t s = separator_at(L, j, stop);
                    if (s == 0) break;
                    j += s + 1;
                }
            }
            for (auto& x : leaves(L, i, j)) n.children.push_back(std::move(x));
            i = j - 1;
        }
        if (as_list && !listed) {
            // Single-item form: the leaves after the leading keyword form one list item.
            std::vector<TreeNode> kept;
            std::vector<TreeNode> body;
            for (auto& c : n.children) (c.node_type == body_type ? kept : body).push_back(std::move(c));
            if (!body.empty()) {
                TreeNode item{rule->list_item, {body.front().byte_span.start, body.back().byte_span.end}, std::move(body), {}};
                kept.insert(kept.begin(), std::move(item));
            }
            n.children = std::move(kept);
        }
        return n;
    }

    bool is_label(const std::vector<Item>& L, std::size_t i, std::size_t b) const {
        if (i + 1 >= b || !is_word(L[i]) || !g_.labels.count(text(L[i])) || !is_punct(L[i + 1], ':')) return false;
        return !(i + 2 < b && is_punct(L[i + 2], ':') && L[i + 2].begin == L[i + 1].end);
    }

    // Previous item ends with an operator that carries the statement onto the next line.
    bool trailing_operator(const std::vector<Item>& L, std::size_t i) const {
        const Item& p = L[i - 1];
        if (is_word(p)) return g_.continuation_keywords.count(text(p)) > 0;
        if (p.group || p.stray || p.kind != TokenKind::Punct) return false;
        const char c = src_[p.begin];
        const Item* pp = i >= 2 && !L[i - 2].group && L[i - 2].end == p.begin ? &L[i - 2] : nullptr;
        const char pc = pp != nullptr && pp->kind == TokenKind::Punct ? src_[pp->begin] : 0;
        switch (c) {
            case '+':
            case '-': return pc != c;
            case '>': return pc == '=' || pc == '-';
            case '*': return pc != '.';
            case '<':
            case '?':
            case '!':
            case ';':
            case '@':
            case '#':
            case '$': return false;
            default: return true;
        }
    }

    bool leading_continuation(const Item& it) const {
        if (is_word(it)) return g_.continuation_keywords.count(text(it)) > 0;
        if (is_brace(it)) return true;
        if (it.group || it.stray || it.kind != TokenKind::Punct) return false;
        const char c = src_[it.begin];
        return c == '.' || c == '?' || c == ',' || c == '=' || c == ':' || c == '|' || c == '&';
    }

    std::vector<TreeNode> parse_braces(const std::vector<Item>& L, std::size_t a, std::size_t b) {
        std::vector<TreeNode> out;
        std::size_t i = a;
        while (i < b) {
            const std::size_t start = i;
            if (!L[i].group && L[i].kind == TokenKind::Directive) {
                out.push_back(statement(L, i, i + 1, i + 1, false, {}, 0, 0));
                ++i;
                continue;
            }
            if (is_label(L, i, b)) {
                out.push_back(statement(L, i, i + 2, i + 2, false, {}, 0, 0));
                i += 2;
                continue;
            }
            if (is_punct(L[i], ';')) {
                ++i;
                continue;
            }
            std::size_t head_end = b;
            bool continued = false;
            bool after_brace = false;
            while (i < b) {
                const Item& it = L[i];
                if (i > start) {
                    if (!it.group && it.kind == TokenKind::Directive) break;
                    if (it.line > L[i - 1].end_line) {
                        if (g_.line_statement && std::regex_search(head_text(L, start, i), *g_.line_statement)) break;
                        if (after_brace) {
                            if (!leading_continuation(it) || is_brace(it)) break;
                        } else if (g_.newline_terminates && !trailing_operator(L, i) && !leading_continuation(it)) {
                            break;
                        }
                    }
                }
                if (is_punct(it, ';')) {
                    ++i;
                    break;
                }
                if (is_brace(it)) {
                    ++i;
                    if (head_end == b) {
                        if (g_.semicolon_continues &&
                            std::regex_search(head_text(L, start, i - 1), *g_.semicolon_continues)) {
                            continued = true;
                        } else {
                            head_end = i - 1;
                        }
                    }
                    if (!continued) {
                        if (i < b && is_punct(L[i], ';')) {
                            ++i;
                            break;
                        }
                        after_brace = true;
                    }
                    continue;
                }
                after_brace = false;
                ++i;
            }
            const std::size_t end = i;
            const bool has_body = !continued && head_end < end;
            if (!has_body) {
                // A consumed trailing `;` belongs to the statement span but not the head.
                head_end = end;
                if (end > start + 1 && is_punct(L[end - 1], ';')) head_end = end - 1;
            }
            out.push_back(statement(L, start, end, head_end, has_body, {}, 0, 0));
        }
        return out;
    }

    // Extends a statement's end over trailing comments indented deeper than `col`.
    std::size_t extend_over_comments(std::size_t end, std::size_t col, std::size_t limit) const {
        auto it = std::lower_bound(comments_.begin(), comments_.end(), end,
                                   [](const Token& t, std::size_t pos) { return t.begin < pos; });
        for (; it != comments_.end() && it->begin < limit; ++it) {
            if (it->first_on_line && it->col <= col) break;
            end = it->end;
        }
        return end;
    }

    std::vector<TreeNode> parse_indent(const std::vector<Item>& L, std::size_t a, std::size_t b, std::size_t limit) {
        // Logical lines: a new one starts at a line break unless the previous line ends in `\`.
        std::vector<std::size_t> starts;
        for (std::size_t i = a; i < b; ++i)
            if (i == a || (L[i].line > L[i - 1].end_line && !is_punct(L[i - 1], '\\'))) starts.push_back(i);
        starts.push_back(b);

        std::vector<TreeNode> out;
        std::size_t k = 0;
        while (k + 1 < starts.size()) {
            const std::size_t s = starts[k];
            const std::size_t col = L[s].col;
            std::size_t m = k + 1;
            while (m + 1 < starts.size() && L[starts[m]].col > col) ++m;
            const std::size_t e = starts[m];
            const std::size_t head_end = starts[k + 1];
            const std::size_t next = e < b ? L[e].begin : limit;
            std::vector<std::pair<std::size_t, std::size_t>> suites;
            if (head_end < e) suites.emplace_back(head_end, e);
            // Only suites grow over trailing comments; a simple statement keeps its code span.
            const std::size_t end_byte = suites.empty() ? L[e - 1].end : extend_over_comments(L[e - 1].end, col, next);
            out.push_back(statement(L, s, e, head_end, !suites.empty(), suites, end_byte, next));
            k = m;
        }
        return out;
    }

    std::vector<TreeNode> parse_offside(const std::vector<Item>& L, std::size_t a, std::size_t b) {
        std::vector<TreeNode> out;
        if (a >= b) return out;
        const std::size_t base = L[a].col;
        std::size_t i = a;
        while (i < b) {
            const std::size_t start = i++;
            while (i < b && !(L[i].first_on_line && L[i].col <= base)) ++i;
            const std::size_t end = i;
            std::vector<std::pair<std::size_t, std::size_t>> suites;
            std::size_t head_end = end;
            for (std::size_t j = start; j + 1 < end; ++j) {
                if (!is_word(L[j])) continue;
                const auto word = text(L[j]);
                if (std::find(g_.offside_block_keywords.begin(), g_.offside_block_keywords.end(), word) ==
                    g_.offside_block_keywords.end())
                    continue;
                const std::size_t nb = L[j + 1].col;
                if (nb <= base) continue;
                std::size_t k = j + 1;
                while (k < end && !(k > j + 1 && L[k].first_on_line && L[k].col < nb)) ++k;
                if (suites.empty()) head_end = j + 1;
                suites.emplace_back(j + 1, k);
                j = k - 1;
            }
            out.push_back(statement(L, start, end, head_end, !suites.empty(), suites, 0,
                                    end < b ? L[end].begin : src_.size()));
        }
        return out;
    }

    // ---- comments and tags ---------------------------------------------------------------

    void insert_comment(TreeNode& node, const Token& c) {
        for (auto& child : node.children) {
            if (child.byte_span.start <= c.begin && c.end <= child.byte_span.end && is_container(child)) {
                insert_comment(child, c);
                return;
            }
        }
        std::string type = c.kind == TokenKind::LineComment ? g_.line_comment_type : g_.block_comment_type;
        if (c.kind == TokenKind::BlockComment && !g_.block_comments[c.style].type.empty())
            type = g_.block_comments[c.style].type;
        TreeNode leaf_node{std::move(type), {c.begin, c.end}, {}, {}};
        auto pos = std::upper_bound(node.children.begin(), node.children.end(), c.begin,
                                    [](std::size_t b, const TreeNode& n) { return b < n.byte_span.start; });
        node.children.insert(pos, std::move(leaf_node));
    }

    // Leaves cannot hold comments; only nodes with children (or empty blocks/groups) can.
    bool is_container(const TreeNode& n) const {
        if (!n.children.empty()) return true;
        return n.node_type != g_.identifier_type && n.node_type != g_.dotted_type && n.node_type != g_.string_type &&
               n.node_type != g_.number_type && n.node_type != g_.char_type && n.node_type != g_.line_comment_type &&
               n.node_type != g_.block_comment_type;
    }

    void apply_tags(TreeNode& n) const {
        auto it = tags_->find(n.node_type);
        if (it != tags_->end()) n.concept_tags = it->second;
        for (auto& c : n.children) apply_tags(c);
    }

    static constexpr std::size_t kHeadCap = 2000;

    const GrammarProfile& g_;
    GrammarProfile sub_grammar_;
    std::string_view src_;
    const ConceptTagMap* tags_;
    std::vector<Token> comments_;
};

}  // namespace detail

/// Parses `code` with the grammar bundle for `language`. Concept tags come from `tags`
/// (node_type -> concepts), normally derived from the rule database.
inline ParseTree parse(std::string_view code, std::string_view language, const GrammarSet& grammars,
                       const ConceptTagMap* tags = nullptr,
                       const LanguageRegistry& registry = LanguageRegistry::builtin()) {
    if (!registry.contains(language)) throw UnknownLanguageError(std::string(language));
    const GrammarProfile* g = grammars.find(language);
    if (g == nullptr) throw BackendUnavailableError(std::string(language));
    return detail::Parser(*g, code, tags).run();
}

}  // namespace ubsr
