#pragma once

// Grammar bundles: declarative per-language lexical and statement-classification profiles
// driving the structural parser. One JSON file per language, `<dir>/<language>.json`.

#include <algorithm>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <regex>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/io/table_io.hpp"

namespace ubsr {

enum class Layout {
    Braces,  // `{}` blocks, statements end at `;` (or newline when newline_terminates)
    Indent,  // statements end at newline; more-indented following lines form a body
    Offside  // statements start at the block's base column; continuation lines are indented
};

struct BlockComment {
    std::string open;
    std::string close;
    bool nested = false;
    std::string type;  // node type override (e.g. pragmas sharing comment syntax)
};

struct StringDelimiter {
    std::string open;
    std::string close;
    bool escape = true;
    /// Double-close (e.g. `""` inside C# verbatim strings) stands for one literal close.
    bool doubled_close_escape = false;
    bool multiline = false;
};

struct StatementRule {
    std::string type;
    std::regex pattern;
    std::string pattern_source;
    std::optional<bool> body;  // require (true) / forbid (false) a body block
    std::string body_type;     // overrides the grammar's block node type
    std::string list_item;     // paren groups become lists of items of this type
};

struct GrammarProfile {
    std::string language;
    std::string version;
    std::string root_type = "source_file";
    Layout layout = Layout::Braces;
    bool newline_terminates = false;

    // Lexer
    std::vector<std::string> line_comments;
    std::vector<BlockComment> block_comments;
    std::vector<StringDelimiter> strings;
    bool char_literals = false;
    std::string directive_prefix;  // line-start directive ("#" for the C preprocessor)
    std::string raw_strings;       // "", "cpp", "rust"
    bool regex_literals = false;
    std::string word_chars = "_";
    std::string word_continue_chars;
    std::string comment_not_after;  // comment openers preceded by one of these chars are not comments

    // Node type names
    std::string line_comment_type = "comment";
    std::string block_comment_type = "comment";
    std::string block_type = "block";
    std::string identifier_type = "identifier";
    std::string dotted_type = "dotted_name";
    std::vector<std::string> name_separators = {"."};
    std::string string_type = "string";
    std::string number_type = "number";
    std::string char_type = "character";
    std::string paren_type = "arguments";
    std::string bracket_type = "array";
    std::string brace_group_type = "dictionary";  // non-block braces (indent/offside layouts)
    std::string error_type = "ERROR";

    std::set<std::string, std::less<>> keywords;
    std::set<std::string, std::less<>> labels;               // `public:`-style statement labels
    std::set<std::string, std::less<>> continuation_keywords;  // continue a statement on the next line
    std::vector<std::string> offside_block_keywords;            // open a nested offside block
    std::optional<std::regex> semicolon_continues;  // head pattern: statement runs past `}` to `;`
    std::optional<std::regex> line_statement;       // head pattern: statement ends at end of line
    std::vector<StatementRule> statements;
    std::string default_statement = "expression_statement";
};

namespace detail {

inline std::regex compile_pattern(const std::string& src, const std::string& where) {
    try {
        return std::regex(src, std::regex::ECMAScript | std::regex::optimize);
    } catch (const std::regex_error& e) {
        throw SchemaError(where + ": bad pattern '" + src + "': " + e.what());
    }
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace detail

inline GrammarProfile grammar_from_json(const nlohmann::json& j) {
    GrammarProfile g;
    try {
        g.language = j.at("language").get<std::string>();
        const std::string where = "grammar " + g.language;
        detail::read_opt(j, "version", g.version);
        detail::read_opt(j, "root_type", g.root_type);
        const std::string layout = j.value("layout", "braces");
        if (layout == "braces")
            g.layout = Layout::Braces;
        else if (layout == "indent")
            g.layout = Layout::Indent;
        else if (layout == "offside")
            g.layout = Layout::Offside;
        else
            throw SchemaError(where + ": unknown layout '" + layout + "'");
        detail::read_opt(j, "newline_terminates", g.newline_terminates);

        const nlohmann::json lex = j.value("lexer", nlohmann::json::object());
        detail::read_opt(lex, "line_comments", g.line_comments);
        for (const auto& b : lex.value("block_comments", nlohmann::json::array()))
            g.block_comments.push_back({b.at("open").get<std::string>(), b.at("close").get<std::string>(),
                                        b.value("nested", false), b.value("type", "")});
        for (const auto& s : lex.value("strings", nlohmann::json::array())) {
            StringDelimiter d;
            d.open = s.at("open").get<std::string>();
            d.close = s.value("close", d.open);
            d.escape = s.value("escape", true);
            d.doubled_close_escape = s.value("doubled_close_escape", false);
            d.multiline = s.value("multiline", d.open.size() >= 3 || d.open == "`");
            g.strings.push_back(std::move(d));
        }
        // Longest opener first so `"""` wins over `"`.
        std::stable_sort(g.strings.begin(), g.strings.end(),
                         [](const auto& a, const auto& b) { return a.open.size() > b.open.size(); });
        detail::read_opt(lex, "char_literals", g.char_literals);
        detail::read_opt(lex, "directive_prefix", g.directive_prefix);
        detail::read_opt(lex, "raw_strings", g.raw_strings);
        detail::read_opt(lex, "regex_literals", g.regex_literals);
        detail::read_opt(lex, "word_chars", g.word_chars);
        detail::read_opt(lex, "word_continue_chars", g.word_continue_chars);
        detail::read_opt(lex, "comment_not_after", g.comment_not_after);

        const nlohmann::json nt = j.value("node_types", nlohmann::json::object());
        detail::read_opt(nt, "line_comment", g.line_comment_type);
        detail::read_opt(nt, "block_comment", g.block_comment_type);
        detail::read_opt(nt, "block", g.block_type);
        detail::read_opt(nt, "identifier", g.identifier_type);
        detail::read_opt(nt, "dotted", g.dotted_type);
        detail::read_opt(nt, "string", g.string_type);
        detail::read_opt(nt, "number", g.number_type);
        detail::read_opt(nt, "char", g.char_type);
        detail::read_opt(nt, "paren", g.paren_type);
        detail::read_opt(nt, "bracket", g.bracket_type);
        detail::read_opt(nt, "brace_group", g.brace_group_type);
        detail::read_opt(j, "name_separators", g.name_separators);

        for (const auto& k : j.value("keywords", nlohmann::json::array())) g.keywords.insert(k.get<std::string>());
        for (const auto& k : j.value("labels", nlohmann::json::array())) g.labels.insert(k.get<std::string>());
        for (const auto& k : j.value("continuation_keywords", nlohmann::json::array()))
            g.continuation_keywords.insert(k.get<std::string>());
        detail::read_opt(j, "offside_block_keywords", g.offside_block_keywords);
        if (j.contains("semicolon_continues"))
            g.semicolon_continues = detail::compile_pattern(j["semicolon_continues"].get<std::string>(), where);
        if (j.contains("line_statement"))
            g.line_statement = detail::compile_pattern(j["line_statement"].get<std::string>(), where);

        for (const auto& s : j.value("statements", nlohmann::json::array())) {
            StatementRule r;
            r.type = s.at("type").get<std::string>();
            r.pattern_source = s.at("pattern").get<std::string>();
            r.pattern = detail::compile_pattern(r.pattern_source, where + " statement " + r.type);
            if (s.contains("body")) r.body = s["body"].get<bool>();
            detail::read_opt(s, "body_type", r.body_type);
            detail::read_opt(s, "list_item", r.list_item);
            g.statements.push_back(std::move(r));
        }
        detail::read_opt(j, "default_statement", g.default_statement);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("grammar: " + std::string(e.what()));
    }
    return g;
}

/// Grammar bundles loaded from a directory; immutable after construction.
class GrammarSet {
public:
    GrammarSet() = default;

    static GrammarSet load_dir(const std::filesystem::path& dir) {
        if (!std::filesystem::is_directory(dir)) throw IoError("grammar directory not found: " + dir.string());
        GrammarSet set;
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
            auto j = nlohmann::json::parse(read_text_file(f), nullptr, false);
            if (j.is_discarded()) throw SchemaError("grammar: malformed JSON in " + f.string());
            set.add(grammar_from_json(j));
        }
        return set;
    }

    void add(GrammarProfile g) {
        auto name = g.language;
        grammars_[name] = std::make_shared<const GrammarProfile>(std::move(g));
    }

    const GrammarProfile* find(std::string_view lang) const {
        auto it = grammars_.find(std::string(lang));
        return it == grammars_.end() ? nullptr : it->second.get();
    }

    std::vector<std::string> languages() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : grammars_) out.push_back(k);
        return out;
    }

private:
    std::map<std::string, std::shared_ptr<const GrammarProfile>> grammars_;
};

}  // namespace ubsr
