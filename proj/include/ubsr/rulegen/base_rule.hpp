#pragma once

// Few-shot chain-of-thought prompts for base syntactic rules, response parsing and
// candidate validation.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/frontend/grammar.hpp"
#include "ubsr/frontend/parser.hpp"
#include "ubsr/frontend/registry.hpp"
#include "ubsr/frontend/tree.hpp"
#include "ubsr/rules/extractor.hpp"
#include "ubsr/rules/rule_db.hpp"

namespace ubsr {

enum class PromptKind { BaseRule, ConceptList, SemanticMapping };

inline std::string_view to_string(PromptKind k) {
    switch (k) {
        case PromptKind::BaseRule: return "base_rule";
        case PromptKind::ConceptList: return "concept_list";
        case PromptKind::SemanticMapping: return "semantic_mapping";
    }
    return "?";
}

struct PromptExemplar {
    std::string language;
    std::string code;
    std::string ast;       // rendered pruned AST
    std::string expected;  // expected rule / row text
};

struct PromptTestInput {
    std::string language;
    std::string code;
    std::string ast;
};

struct PromptBundle {
    PromptKind kind = PromptKind::BaseRule;
    std::string system_instruction;
    std::string instruction;
    std::vector<PromptExemplar> exemplars;
    std::optional<PromptTestInput> test_input;
    std::vector<std::pair<std::string, std::string>> packages;  // semantic batches: (name, language)
    std::string response_format;
    std::string rendered;
};

inline nlohmann::json to_json(const PromptBundle& b) {
    nlohmann::json ex = nlohmann::json::array();
    for (const auto& e : b.exemplars)
        ex.push_back({{"language", e.language}, {"code", e.code}, {"ast", e.ast}, {"expected", e.expected}});
    nlohmann::json j = {{"kind", std::string(to_string(b.kind))},
                        {"system_instruction", b.system_instruction},
                        {"instruction", b.instruction},
                        {"exemplars", ex},
                        {"response_format", b.response_format},
                        {"rendered", b.rendered}};
    if (b.test_input)
        j["test_input"] = {{"language", b.test_input->language}, {"code", b.test_input->code}, {"ast", b.test_input->ast}};
    else
        j["test_input"] = nullptr;
    nlohmann::json pk = nlohmann::json::array();
    for (const auto& [n, l] : b.packages) pk.push_back({{"package", n}, {"language", l}});
    j["packages"] = pk;
    return j;
}

// ---- pruning -------------------------------------------------------------------------------

struct Pruning {
    enum class Mode { None, Depth, Concept } mode = Mode::Concept;
    std::size_t depth = 1;

    static Pruning none() { return {Mode::None, 0}; }
    static Pruning by_depth(std::size_t k) { return {Mode::Depth, k}; }
    static Pruning by_concept() { return {Mode::Concept, 0}; }

    std::string str() const {
        switch (mode) {
            case Mode::None: return "none";
            case Mode::Depth: return "depth:" + std::to_string(depth);
            case Mode::Concept: return "concept";
        }
        return "?";
    }
};

/// "none", "concept" or "depth:<k>" (k >= 1).
inline Pruning parse_pruning(std::string_view s) {
    if (s == "none") return Pruning::none();
    if (s == "concept") return Pruning::by_concept();
    if (s.substr(0, 6) == "depth:") {
        std::string n(s.substr(6));
        if (!n.empty() && std::all_of(n.begin(), n.end(), [](char c) { return c >= '0' && c <= '9'; }) && n.size() < 6) {
            auto k = std::stoul(n);
            if (k >= 1) return Pruning::by_depth(k);
        }
    }
    throw SchemaError("bad pruning '" + std::string(s) + "' (expected none, concept or depth:<k>)");
}

/// Fallback depth when concept pruning finds no tagged node (languages without rules yet).
inline constexpr std::size_t kConceptFallbackDepth = 2;

inline ParseTree apply_pruning(const ParseTree& tree, const Pruning& p, std::optional<Concept> concept_) {
    switch (p.mode) {
        case Pruning::Mode::None: return tree;
        case Pruning::Mode::Depth: return prune_depth(tree, p.depth);
        case Pruning::Mode::Concept: {
            ConceptSet wanted;
            if (concept_) wanted.insert(*concept_);
            else for (Concept c : kAllConcepts) wanted.insert(c);
            auto out = prune_concept(tree, wanted);
            if (out.root.children.empty() && !tree.root.children.empty())
                return prune_depth(tree, kConceptFallbackDepth);
            return out;
        }
    }
    return tree;
}

/// Parses `code` with the rule database's tags for `language` and renders the pruned tree.
inline std::string pruned_ast(std::string_view code, const std::string& language, const GrammarSet& grammars,
                              const RuleDatabase& db, const Pruning& p, std::optional<Concept> concept_,
                              const LanguageRegistry& registry = LanguageRegistry::builtin()) {
    auto tags = db.tag_map(language);
    auto tree = parse(code, language, grammars, &tags, registry);
    return render_sexpr(apply_pruning(tree, p, concept_));
}

// ---- base rule prompt ----------------------------------------------------------------------

struct BaseRuleRequest {
    std::string test_language;
    Concept concept_ = Concept::Package;
    std::vector<std::string> exemplar_languages;
    Pruning pruning;
    std::string test_code;
    bool cross_paradigm = false;
};

namespace detail {

inline std::string value_description(Concept c) {
    switch (c) {
        case Concept::Package:
            return "the imported package or module name; several names imported by one statement are joined with \", \"";
        case Concept::Function: return "the name of the defined function";
        case Concept::Comment: return "the comment text with the comment markers removed, trimmed";
    }
    return "";
}

inline std::string describe_stage(const Stage& st) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            auto q = [](const std::string& x) { return nlohmann::json(x).dump(); };
            if constexpr (std::is_same_v<T, stage::SplitOnce>)
                return "split once on " + q(s.sep) + " and keep piece " + std::to_string(s.index);
            else if constexpr (std::is_same_v<T, stage::SplitAll>)
                return "split on every " + q(s.sep) + " into a list";
            else if constexpr (std::is_same_v<T, stage::TokenAt>)
                return "split on " + q(s.sep) + ", drop empty pieces, keep token " + std::to_string(s.index);
            else if constexpr (std::is_same_v<T, stage::SegmentAt>)
                return "split on " + q(s.sep) + " and keep segment " + std::to_string(s.index);
            else if constexpr (std::is_same_v<T, stage::Trim>)
                return "trim surrounding whitespace";
            else if constexpr (std::is_same_v<T, stage::StripPrefix>)
                return "remove the prefix " + q(s.text) + " if present";
            else if constexpr (std::is_same_v<T, stage::RegexCapture>)
                return "take group " + std::to_string(s.group) + " of the first match of " + q(s.pattern);
            else if constexpr (std::is_same_v<T, stage::Dedup>)
                return "drop repeated list items";
            else
                return "join the list with " + q(s.sep);
        },
        st);
}

inline const char* kStageCatalogue =
    "Extractor stages (applied in order to the node's source text; scalar stages apply to each item of a list):\n"
    "- {\"op\": \"split_once\", \"sep\": S, \"index\": I}: split at the first S, keep piece I (0 or 1, negative counts from the end)\n"
    "- {\"op\": \"split_all\", \"sep\": S}: split at every S, giving a list\n"
    "- {\"op\": \"token_at\", \"sep\": S, \"index\": I}: split at every S, drop empty pieces, keep piece I\n"
    "- {\"op\": \"segment_at\", \"sep\": S, \"index\": I}: split at every S, keep piece I\n"
    "- {\"op\": \"trim\"}: remove surrounding whitespace\n"
    "- {\"op\": \"strip_prefix\", \"text\": T}: remove T from the start if present\n"
    "- {\"op\": \"regex_capture\", \"pattern\": P, \"group\": G}: ECMAScript regex search, keep group G (default 1)\n"
    "- {\"op\": \"dedup\"}: drop repeated list items, keeping the first\n"
    "- {\"op\": \"join\", \"sep\": S}: join a list into one string\n"
    "The final value must be a single string.";

inline std::string fence(std::string_view lang, std::string_view body) {
    std::string out = "```";
    out += lang;
    out += '\n';
    out += body;
    if (body.empty() || body.back() != '\n') out += '\n';
    out += "```";
    return out;
}

}  // namespace detail

inline const char* kBaseRuleSystem =
    "You are an expert in programming language grammars and abstract syntax trees. You write deterministic rules "
    "that map language-specific AST nodes to language-agnostic UBSR nodes.";

/// The instruction text is shared by every paradigm; only the concept changes it.
inline std::string base_rule_instruction(Concept c) {
    const std::string concept_name(to_string(c));
    return "Write one base syntactic rule that extracts the " + concept_name +
           " concept from the test input. A rule maps one AST node type of the test language to the UBSR node "
           "type ubsr_" + concept_name +
           " and carries an extractor that turns the source text of a matched node into " + detail::value_description(c) +
           ".\n" + detail::kStageCatalogue +
           "\nReason step by step as in the examples: first name the AST node type that carries the concept, then "
           "derive the extractor stages one at a time and check the value after each stage.\n"
           "Respond with the rule inside a ```json fenced block as an object keyed by the AST node type, with the fields "
           "ubsr_node_type, extractor, test_snippet and expected. After the block write one line `Output: <value>` with "
           "the result of applying the rule to the test input.";
}

inline const char* kBaseRuleResponseFormat =
    "```json {\"<ast_node_type>\": {\"ubsr_node_type\": \"ubsr_<concept>\", \"extractor\": [stages], \"test_snippet\": "
    "string, \"expected\": string}} ``` followed by `Output: <value>`";

/// Step-by-step explanation of an exemplar rule, derived from its stages.
inline std::string exemplar_reasoning(const SyntacticRule& r) {
    std::string out = "The " + std::string(to_string(*concept_of(r.ubsr_node_type))) + " concept is carried by `" +
                      r.ast_node_type + "` nodes.";
    for (std::size_t i = 0; i < r.extractor.stages.size(); ++i)
        out += "\nStep " + std::to_string(i + 1) + ": " + detail::describe_stage(r.extractor.stages[i]) + ".";
    out += "\nThe value is " + nlohmann::json(r.expected).dump() + ".";
    return out;
}

inline std::string rule_json_text(const SyntacticRule& r) {
    nlohmann::json j;
    j[r.ast_node_type] = rule_body_to_json(r);
    return j.dump(2);
}

/// Builds the prompt. Exemplars are the rules of `concept` in each exemplar language, shown
/// with their test snippet, pruned AST, reasoning and rule text.
inline PromptBundle build_base_rule_prompt(const BaseRuleRequest& req, const GrammarSet& grammars,
                                           const RuleDatabase& db,
                                           const LanguageRegistry& registry = LanguageRegistry::builtin()) {
    const LanguageEntry& test = registry.at(req.test_language);
    if (req.exemplar_languages.empty()) throw SchemaError("at least one exemplar language is required");
    for (const auto& lang : req.exemplar_languages) {
        const LanguageEntry* e = registry.find(lang);
        if (e == nullptr || !e->known) throw SchemaError("exemplar language '" + lang + "' is not a known language");
        if (e->paradigm != test.paradigm && !req.cross_paradigm)
            throw ParadigmMismatchError("exemplar language '" + lang + "' (" + std::string(to_string(e->paradigm)) +
                                        ") is not in the paradigm of '" + req.test_language + "' (" +
                                        std::string(to_string(test.paradigm)) + ")");
    }
    if (!test.supported_concepts.contains(req.concept_))
        throw SchemaError("language '" + req.test_language + "' has no " + std::string(to_string(req.concept_)) +
                          " concept");

    PromptBundle b;
    b.kind = PromptKind::BaseRule;
    b.system_instruction = kBaseRuleSystem;
    b.instruction = base_rule_instruction(req.concept_);
    b.response_format = kBaseRuleResponseFormat;
    const UbsrNodeType target = node_type_of(req.concept_);
    for (const auto& lang : req.exemplar_languages) {
        for (const auto* r : db.rules_for(lang)) {
            if (r->ubsr_node_type != target) continue;
            PromptExemplar ex;
            ex.language = lang;
            ex.code = r->test_snippet;
            ex.ast = pruned_ast(r->test_snippet, lang, grammars, db, req.pruning, req.concept_, registry);
            ex.expected = exemplar_reasoning(*r) + "\n" + detail::fence("json", rule_json_text(*r)) +
                          "\nOutput: " + r->expected;
            b.exemplars.push_back(std::move(ex));
        }
    }
    if (b.exemplars.empty())
        throw SchemaError("no exemplar rules for concept " + std::string(to_string(req.concept_)) +
                          " in the chosen exemplar languages");
    b.test_input = PromptTestInput{req.test_language, req.test_code,
                                   pruned_ast(req.test_code, req.test_language, grammars, db, req.pruning,
                                              req.concept_, registry)};

    std::string& out = b.rendered;
    out = "[system]\n" + b.system_instruction + "\n\n[instruction]\n" + b.instruction + "\n";
    for (std::size_t i = 0; i < b.exemplars.size(); ++i) {
        const auto& ex = b.exemplars[i];
        out += "\n[example " + std::to_string(i + 1) + "]\nLanguage: " + ex.language + "\nCode:\n" +
               detail::fence(ex.language, ex.code) + "\nAST (pruning " + req.pruning.str() + "):\n" + ex.ast +
               "\nAnswer:\n" + ex.expected + "\n";
    }
    out += "\n[test input]\nLanguage: " + b.test_input->language + "\nCode:\n" +
           detail::fence(b.test_input->language, b.test_input->code) + "\nAST (pruning " + req.pruning.str() +
           "):\n" + b.test_input->ast + "\nAnswer:\n";
    return b;
}

// ---- response parsing --------------------------------------------------------------------

struct BaseRuleCandidate {
    SyntacticRule rule;
    std::optional<std::string> claimed_output;  // the `Output:` line, if present
};

namespace detail {

/// Bodies of ``` fenced blocks in order.
inline std::vector<std::pair<std::string, std::string>> fenced_blocks(std::string_view text) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t pos = 0;
    while (true) {
        auto open = text.find("```", pos);
        if (open == std::string_view::npos) break;
        auto eol = text.find('\n', open);
        if (eol == std::string_view::npos) break;
        std::string info(text.substr(open + 3, eol - open - 3));
        auto close = text.find("```", eol + 1);
        if (close == std::string_view::npos) break;
        out.emplace_back(py_strip(info), std::string(text.substr(eol + 1, close - eol - 1)));
        pos = close + 3;
    }
    return out;
}

}  // namespace detail

/// Reads the first ```json block (or first block holding a JSON object) as a single-rule
/// object keyed by AST node type.
inline BaseRuleCandidate parse_base_rule_response(std::string_view text, const std::string& language) {
    auto blocks = detail::fenced_blocks(text);
    std::optional<nlohmann::json> obj;
    for (const auto& [info, body] : blocks) {
        if (!info.empty() && info != "json") continue;
        auto j = nlohmann::json::parse(body, nullptr, false);
        if (!j.is_discarded() && j.is_object()) {
            obj = std::move(j);
            break;
        }
    }
    if (!obj) throw ResponseParseError("response has no fenced JSON rule block");
    if (obj->size() != 1)
        throw ResponseParseError("rule block must hold exactly one AST node type, found " + std::to_string(obj->size()));
    BaseRuleCandidate c;
    try {
        c.rule = rule_from_json(obj->begin().value(), language, obj->begin().key());
    } catch (const SchemaError& e) {
        throw ResponseParseError(std::string("invalid rule: ") + e.what());
    }
    constexpr std::string_view marker = "Output:";
    auto last_close = text.rfind("```");
    auto at = text.find(marker, last_close == std::string_view::npos ? 0 : last_close);
    if (at != std::string_view::npos) {
        auto eol = text.find('\n', at);
        c.claimed_output = detail::py_strip(text.substr(at + marker.size(), eol == std::string_view::npos ? eol : eol - at - marker.size()));
    }
    return c;
}

// ---- validation ------------------------------------------------------------------------------

struct TestCase {
    std::string snippet;
    std::string expected;
};

struct CaseOutcome {
    std::string snippet;
    std::string expected;
    std::optional<std::string> actual;
    std::optional<std::size_t> error_stage;
    std::string error;
    bool match = false;
};

struct ValidationReport {
    SyntacticRule rule;
    std::vector<CaseOutcome> outcomes;
    bool accepted = false;
    std::vector<std::string> reasons;
};

/// Accept iff there is at least one case and every case's output equals its expected value.
inline ValidationReport validate_candidate(const SyntacticRule& rule, const std::vector<TestCase>& cases) {
    ValidationReport rep;
    rep.rule = rule;
    if (cases.empty()) rep.reasons.push_back("no test cases");
    for (std::size_t i = 0; i < cases.size(); ++i) {
        CaseOutcome o{cases[i].snippet, cases[i].expected, std::nullopt, std::nullopt, {}, false};
        try {
            o.actual = run_extractor(rule.extractor, cases[i].snippet);
            o.match = *o.actual == cases[i].expected;
            if (!o.match)
                rep.reasons.push_back("case " + std::to_string(i) + ": expected " + nlohmann::json(o.expected).dump() +
                                      ", got " + nlohmann::json(*o.actual).dump());
        } catch (const ExtractionError& e) {
            o.error_stage = e.stage;
            o.error = e.what();
            rep.reasons.push_back("case " + std::to_string(i) + ": " + e.what());
        }
        rep.outcomes.push_back(std::move(o));
    }
    rep.accepted = !cases.empty() && std::all_of(rep.outcomes.begin(), rep.outcomes.end(), [](const auto& o) { return o.match; });
    return rep;
}

inline nlohmann::json to_json(const ValidationReport& r) {
    nlohmann::json outs = nlohmann::json::array();
    for (const auto& o : r.outcomes) {
        nlohmann::json j = {{"snippet", o.snippet}, {"expected", o.expected}, {"match", o.match}};
        j["actual"] = o.actual ? nlohmann::json(*o.actual) : nlohmann::json(nullptr);
        j["error_stage"] = o.error_stage ? nlohmann::json(*o.error_stage) : nlohmann::json(nullptr);
        if (!o.error.empty()) j["error"] = o.error;
        outs.push_back(std::move(j));
    }
    nlohmann::json rule;
    rule[r.rule.ast_node_type] = rule_body_to_json(r.rule);
    return {{"language", r.rule.language},
            {"candidate_rule", rule},
            {"outcomes", outs},
            {"verdict", r.accepted ? "accept" : "reject"},
            {"reasons", r.reasons}};
}

}  // namespace ubsr
