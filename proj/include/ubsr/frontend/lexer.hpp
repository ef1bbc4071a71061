#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ubsr/frontend/grammar.hpp"

namespace ubsr {

enum class TokenKind { Word, Number, String, Char, Punct, Directive, LineComment, BlockComment };

struct Token {
    TokenKind kind = TokenKind::Punct;
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t line = 0;      // zero-based line of `begin`
    std::size_t end_line = 0;  // line of the last byte
    std::size_t col = 0;       // visual column of `begin` (tabs to multiples of 8)
    bool first_on_line = false;
    bool terminated = true;    // false for unterminated strings/comments
    std::size_t style = 0;     // block comments: index into the grammar's block_comments

    bool is_comment() const { return kind == TokenKind::LineComment || kind == TokenKind::BlockComment; }
};

/// Tolerant lexer driven by a grammar profile. Never throws; malformed input yields
/// unterminated tokens instead.
class Lexer {
public:
    Lexer(const GrammarProfile& g, std::string_view src) : g_(g), src_(src) {}

    /// Lexes src[begin, src.size()); positions stay absolute. A resumed lexer never starts
    /// on a fresh line, so directives are not re-detected (used to sub-lex directive bodies).
    Lexer(const GrammarProfile& g, std::string_view src, std::size_t begin) : g_(g), src_(src), pos_(begin) {
        line_ = static_cast<std::size_t>(std::count(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(begin), '\n'));
        line_start_ = find_line_start(begin);
        at_line_start_ = begin == 0;
    }

    std::vector<Token> run() {
        std::vector<Token> out;
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                ++line_;
                line_start_ = pos_ + 1;
                at_line_start_ = true;
                ++pos_;
                continue;
            }
            if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
                ++pos_;
                continue;
            }
            Token t;
            t.begin = pos_;
            t.line = line_;
            t.col = visual_col(pos_);
            t.first_on_line = at_line_start_;
            at_line_start_ = false;
            lex_one(t, out);
            t.end = pos_;
            t.end_line = line_;
            if (t.end > t.begin && src_[t.end - 1] == '\n' && t.end_line > t.line) {
                // Tokens never own their trailing newline.
                --t.end;
                --pos_;
                --line_;
                line_start_ = find_line_start(pos_);
                t.end_line = line_;
            }
            if (t.kind != TokenKind::LineComment && t.kind != TokenKind::BlockComment) last_code_ = out.size();
            out.push_back(t);
        }
        return out;
    }

private:
    std::size_t find_line_start(std::size_t p) const {
        while (p > 0 && src_[p - 1] != '\n') --p;
        return p;
    }

    std::size_t visual_col(std::size_t p) const {
        std::size_t col = 0;
        for (std::size_t i = line_start_; i < p; ++i) col = src_[i] == '\t' ? (col / 8 + 1) * 8 : col + 1;
        return col;
    }

    bool starts_with(std::string_view s, std::size_t at) const {
        return !s.empty() && src_.substr(at, s.size()) == s;
    }

    bool is_word_start(char c) const {
        auto u = static_cast<unsigned char>(c);
        return std::isalpha(u) || u >= 0x80 || g_.word_chars.find(c) != std::string::npos;
    }
    bool is_word_char(char c) const {
        auto u = static_cast<unsigned char>(c);
        return std::isalnum(u) || u >= 0x80 || g_.word_chars.find(c) != std::string::npos ||
               g_.word_continue_chars.find(c) != std::string::npos;
    }
    bool prev_is_word_char(std::size_t p) const { return p > 0 && is_word_char(src_[p - 1]); }

    void advance_to(std::size_t p) {
        for (; pos_ < p && pos_ < src_.size(); ++pos_) {
            if (src_[pos_] == '\n') {
                ++line_;
                line_start_ = pos_ + 1;
            }
        }
    }

    void lex_one(Token& t, const std::vector<Token>& out) {
        const char c = src_[pos_];
        if (!g_.directive_prefix.empty() && t.first_on_line && starts_with(g_.directive_prefix, pos_)) {
            t.kind = TokenKind::Directive;
            lex_directive();
            return;
        }
        if (comment_allowed()) {
            for (std::size_t k = 0; k < g_.block_comments.size(); ++k) {
                const auto& b = g_.block_comments[k];
                if (starts_with(b.open, pos_)) {
                    t.kind = TokenKind::BlockComment;
                    t.style = k;
                    t.terminated = lex_block_comment(b);
                    return;
                }
            }
            for (const auto& l : g_.line_comments) {
                if (starts_with(l, pos_)) {
                    t.kind = TokenKind::LineComment;
                    while (pos_ < src_.size() && src_[pos_] != '\n') ++pos_;
                    return;
                }
            }
        }
        if (lex_raw_string()) {
            t.kind = TokenKind::String;
            return;
        }
        for (const auto& d : g_.strings) {
            if (starts_with(d.open, pos_)) {
                t.kind = TokenKind::String;
                t.terminated = lex_string(d);
                return;
            }
        }
        if (c == '\'' && g_.char_literals && !prev_is_word_char(pos_) && lex_char_literal()) {
            t.kind = TokenKind::Char;
            return;
        }
        if (c == '/' && g_.regex_literals && regex_allowed(out) && lex_regex()) {
            t.kind = TokenKind::String;
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            t.kind = TokenKind::Number;
            while (pos_ < src_.size()) {
                char d = src_[pos_];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_') {
                    ++pos_;
                } else if (d == '.' && pos_ + 1 < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_ + 1]))) {
                    ++pos_;
                } else {
                    break;
                }
            }
            return;
        }
        if (is_word_start(c)) {
            t.kind = TokenKind::Word;
            while (pos_ < src_.size() && is_word_char(src_[pos_])) ++pos_;
            return;
        }
        t.kind = TokenKind::Punct;
        ++pos_;
    }

    bool comment_allowed() const {
        return pos_ == 0 || g_.comment_not_after.find(src_[pos_ - 1]) == std::string::npos;
    }

    void lex_directive() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n') {
                // Backslash continuation joins the next line.
                std::size_t k = pos_;
                while (k > 0 && (src_[k - 1] == ' ' || src_[k - 1] == '\t' || src_[k - 1] == '\r')) --k;
                if (k > 0 && src_[k - 1] == '\\') {
                    advance_to(pos_ + 1);
                    continue;
                }
                break;
            }
            if (c == '"') {
                std::size_t k = pos_ + 1;
                while (k < src_.size() && src_[k] != '"' && src_[k] != '\n') k += src_[k] == '\\' ? 2 : 1;
                advance_to(std::min(k + 1, src_.size()));
                continue;
            }
            bool comment = false;
            for (const auto& b : g_.block_comments) comment = comment || starts_with(b.open, pos_);
            for (const auto& l : g_.line_comments) comment = comment || starts_with(l, pos_);
            if (comment) break;
            ++pos_;
        }
        // Trailing blanks before a comment are not part of the directive.
        while (pos_ > 0 && (src_[pos_ - 1] == ' ' || src_[pos_ - 1] == '\t')) --pos_;
    }

    bool lex_block_comment(const BlockComment& b) {
        advance_to(pos_ + b.open.size());
        int depth = 1;
        while (pos_ < src_.size()) {
            if (b.nested && starts_with(b.open, pos_)) {
                ++depth;
                advance_to(pos_ + b.open.size());
            } else if (starts_with(b.close, pos_)) {
                advance_to(pos_ + b.close.size());
                if (--depth == 0) return true;
            } else {
                advance_to(pos_ + 1);
            }
        }
        return false;
    }

    bool lex_string(const StringDelimiter& d) {
        advance_to(pos_ + d.open.size());
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (c == '\n' && !d.multiline) return false;
            if (d.escape && c == '\\') {
                advance_to(pos_ + 2);
                continue;
            }
            if (starts_with(d.close, pos_)) {
                if (d.doubled_close_escape && starts_with(d.close, pos_ + d.close.size())) {
                    advance_to(pos_ + 2 * d.close.size());
                    continue;
                }
                advance_to(pos_ + d.close.size());
                return true;
            }
            advance_to(pos_ + 1);
        }
        return false;
    }

    bool lex_raw_string() {
        if (g_.raw_strings == "cpp") {
            std::size_t p = pos_;
            if (prev_is_word_char(p)) return false;
            for (std::string_view pre : {"u8R\"", "uR\"", "UR\"", "LR\"", "R\""}) {
                if (!starts_with(pre, p)) continue;
                std::size_t open = p + pre.size();
                std::size_t paren = src_.find('(', open);
                if (paren == std::string_view::npos || paren - open > 16) return false;
                std::string close = ")" + std::string(src_.substr(open, paren - open)) + "\"";
                std::size_t end = src_.find(close, paren + 1);
                advance_to(end == std::string_view::npos ? src_.size() : end + close.size());
                return true;
            }
            return false;
        }
        if (g_.raw_strings == "rust") {
            std::size_t p = pos_;
            if (prev_is_word_char(p)) return false;
            if (starts_with("br", p)) ++p;
            if (p >= src_.size() || src_[p] != 'r') return false;
            std::size_t q = p + 1;
            std::size_t hashes = 0;
            while (q < src_.size() && src_[q] == '#') ++hashes, ++q;
            if (q >= src_.size() || src_[q] != '"') return false;
            std::string close = "\"" + std::string(hashes, '#');
            std::size_t end = src_.find(close, q + 1);
            advance_to(end == std::string_view::npos ? src_.size() : end + close.size());
            return true;
        }
        return false;
    }

    bool lex_char_literal() {
        // 'x', '\n', '\u{1F600}', or a single UTF-8 code point.
        std::size_t p = pos_ + 1;
        if (p >= src_.size() || src_[p] == '\n' || src_[p] == '\'') return false;
        if (src_[p] == '\\') {
            std::size_t q = p + 2;
            while (q < src_.size() && q < p + 12 && src_[q] != '\'' && src_[q] != '\n') ++q;
            if (q < src_.size() && src_[q] == '\'') {
                advance_to(q + 1);
                return true;
            }
            return false;
        }
        auto lead = static_cast<unsigned char>(src_[p]);
        std::size_t width = lead < 0x80 ? 1 : lead >= 0xF0 ? 4 : lead >= 0xE0 ? 3 : 2;
        if (p + width < src_.size() && src_[p + width] == '\'') {
            advance_to(p + width + 1);
            return true;
        }
        return false;
    }

    bool regex_allowed(const std::vector<Token>& out) const {
        if (pos_ + 1 < src_.size() && (src_[pos_ + 1] == '/' || src_[pos_ + 1] == '*')) return false;
        if (out.empty() || last_code_ >= out.size()) return true;
        const Token& prev = out[last_code_];
        std::string_view text = src_.substr(prev.begin, prev.end - prev.begin);
        switch (prev.kind) {
            case TokenKind::Number:
            case TokenKind::String:
            case TokenKind::Char: return false;
            case TokenKind::Word:
                return text == "return" || text == "typeof" || text == "case" || text == "in" || text == "of" ||
                       text == "yield" || text == "await" || text == "void" || text == "delete";
            default: return text != ")" && text != "]" && text != "}";
        }
    }

    bool lex_regex() {
        std::size_t p = pos_ + 1;
        bool in_class = false;
        while (p < src_.size() && src_[p] != '\n') {
            char c = src_[p];
            if (c == '\\') {
                p += 2;
                continue;
            }
            if (c == '[') in_class = true;
            if (c == ']') in_class = false;
            if (c == '/' && !in_class) {
                ++p;
                while (p < src_.size() && std::isalpha(static_cast<unsigned char>(src_[p]))) ++p;
                advance_to(p);
                return true;
            }
            ++p;
        }
        return false;
    }

    const GrammarProfile& g_;
    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 0;
    std::size_t line_start_ = 0;
    bool at_line_start_ = true;
    std::size_t last_code_ = static_cast<std::size_t>(-1);
};

inline std::vector<Token> tokenize(const GrammarProfile& g, std::string_view src) { return Lexer(g, src).run(); }

}  // namespace ubsr
