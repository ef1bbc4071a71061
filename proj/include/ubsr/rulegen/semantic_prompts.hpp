#pragma once

// Concept-list and semantic-mapping prompts and their response parsers.

#include <algorithm>
#include <cctype>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ubsr/core/error.hpp"
#include "ubsr/rulegen/base_rule.hpp"
#include "ubsr/rulegen/completer.hpp"
#include "ubsr/semantic/semantic.hpp"

namespace ubsr {

enum class ConceptListPersona { Enterprise, Taxonomist };

inline ConceptListPersona parse_persona(std::string_view s) {
    if (s == "enterprise") return ConceptListPersona::Enterprise;
    if (s == "taxonomist") return ConceptListPersona::Taxonomist;
    throw SchemaError("unknown persona '" + std::string(s) + "' (expected enterprise or taxonomist)");
}

inline const char* kEnterpriseSystem = "You are an enterprise software professional";
inline const char* kTaxonomistSystem = "You are a taxonomist for programming language packages";
inline const char* kMappingSystem =
    "You are a discriminating and conservative programming specialist, responsible for classifying programming "
    "language packages";
inline constexpr std::string_view kEndSentinel = "<end>";
inline constexpr std::size_t kDefaultBatchSize = 30;

inline std::string concept_list_task(std::string_view dimension) {
    return "Your task is to provide a comprehensive, non-overlapping, and flat list of software library concepts based on " +
           std::string(dimension);
}

inline std::string missing_concept_task(std::string_view dimension) {
    return "List all " + std::string(dimension) +
           "-based concepts of software libraries which are missing in this list and have no overlap with any of the "
           "items in this list";
}

inline std::string mapping_task(std::string_view dimension) {
    return "Your task is to categorize the following packages in the given programming languages based on their " +
           std::string(dimension);
}

inline std::string mapping_context(const ConceptList& list) {
    std::string names;
    for (std::size_t i = 0; i < list.concepts.size(); ++i) names += (i ? ", " : "") + list.concepts[i];
    return "Choose the concepts from the following list: " + names +
           ". Given the package name and language in tabular format, add a \"Concept\" column and output the updated "
           "tabular data. Do not include concepts outside of this provided list. If you are absolutely not able to "
           "categorize a package, categorize it as \"Others\". Add <end> at the end of your response.";
}

inline const char* kConceptListFormat = "One concept name per line, each line starting with \"- \".";

namespace detail {

inline std::string bullet_list(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& s : items) out += "- " + s + "\n";
    return out;
}

inline std::string render_sections(const PromptBundle& b, const std::string& context, const std::string& tail) {
    std::string out = "[system]\n" + b.system_instruction + "\n\n[instruction]\n" + b.instruction + "\n";
    if (!context.empty()) out += "\n[context]\n" + context;
    if (!out.empty() && out.back() != '\n') out += '\n';
    out += tail;
    return out;
}

}  // namespace detail

/// First-round (or refinement) concept-list prompt. `previous` is the list from an earlier
/// round; mandatory concepts always appear in the context.
inline PromptBundle build_concept_list_prompt(std::string_view dimension, const std::vector<std::string>& mandatory,
                                              ConceptListPersona persona = ConceptListPersona::Taxonomist,
                                              const std::vector<std::string>& previous = {}) {
    if (detail::py_strip(dimension).empty()) throw SchemaError("concept list prompt needs a dimension");
    PromptBundle b;
    b.kind = PromptKind::ConceptList;
    b.system_instruction = persona == ConceptListPersona::Enterprise ? kEnterpriseSystem : kTaxonomistSystem;
    b.instruction = concept_list_task(dimension) + ".";
    b.response_format = kConceptListFormat;
    std::string ctx;
    if (!mandatory.empty())
        ctx += "The list must include these concepts:\n" + detail::bullet_list(mandatory);
    if (!previous.empty()) ctx += "Refine this earlier list, merging overlapping concepts:\n" + detail::bullet_list(previous);
    b.rendered = detail::render_sections(b, ctx, "\n[response format]\n" + b.response_format + "\n");
    return b;
}

/// Follow-up asking for concepts missing from `current`.
inline PromptBundle build_missing_concept_prompt(std::string_view dimension, const std::vector<std::string>& current,
                                                 ConceptListPersona persona = ConceptListPersona::Taxonomist) {
    if (detail::py_strip(dimension).empty()) throw SchemaError("concept list prompt needs a dimension");
    PromptBundle b;
    b.kind = PromptKind::ConceptList;
    b.system_instruction = persona == ConceptListPersona::Enterprise ? kEnterpriseSystem : kTaxonomistSystem;
    b.instruction = missing_concept_task(dimension) + ":";
    b.response_format = kConceptListFormat;
    b.rendered = detail::render_sections(b, detail::bullet_list(current),
                                         "\n[response format]\n" + std::string(b.response_format) + "\n");
    return b;
}

/// Concept names from a list-style response: bullets and numbering stripped, blanks, duplicates
/// and "Others" dropped. Text after `<end>` is ignored.
inline std::vector<std::string> parse_concept_list_response(std::string_view text) {
    if (auto e = text.find(kEndSentinel); e != std::string_view::npos) text = text.substr(0, e);
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& raw : detail::py_split(text, "\n", std::string::npos)) {
        std::string line = detail::py_strip(raw);
        if (line.rfind("```", 0) == 0) continue;
        std::size_t i = 0;
        if (i < line.size() && (line[i] == '-' || line[i] == '*' || line[i] == '+')) {
            ++i;
        } else {
            while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
            if (i > 0 && i < line.size() && (line[i] == '.' || line[i] == ')')) ++i;
            else i = 0;
        }
        line = detail::py_strip(std::string_view(line).substr(i));
        if (line.empty() || line == kOthers) continue;
        std::string lower = line;
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
        if (lower == "others") continue;
        if (seen.insert(lower).second) out.push_back(line);
    }
    return out;
}

// ---- semantic mapping --------------------------------------------------------------------

struct MappingRow {
    std::string package;
    std::string language;
    std::string concept_;
    bool operator==(const MappingRow&) const = default;
};

inline std::string pipe_table(const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out += "|";
        for (const auto& c : rows[r]) out += " " + c + " |";
        out += "\n";
        if (r == 0) {
            out += "|";
            for (std::size_t i = 0; i < rows[r].size(); ++i) out += " --- |";
            out += "\n";
        }
    }
    return out;
}

/// Order-preserving batches of at most `batch_size` packages, one prompt each.
inline std::vector<PromptBundle> build_semantic_mapping_prompts(
    const std::vector<std::pair<std::string, std::string>>& packages, const ConceptList& list,
    const std::vector<MappingRow>& few_shots, std::size_t batch_size = kDefaultBatchSize) {
    list.validate();
    if (list.concepts.empty()) throw SchemaError("concept list '" + list.dimension + "' is empty");
    if (batch_size == 0) throw SchemaError("batch size must be positive");
    for (const auto& f : few_shots)
        if (!list.admits(f.concept_))
            throw SchemaError("few-shot concept '" + f.concept_ + "' is not in concept list '" + list.dimension + "'");

    std::vector<std::vector<std::string>> shots{{"Package", "Language", "Concept"}};
    for (const auto& f : few_shots) shots.push_back({f.package, f.language, f.concept_});
    std::vector<PromptBundle> out;
    for (std::size_t start = 0; start < packages.size(); start += batch_size) {
        PromptBundle b;
        b.kind = PromptKind::SemanticMapping;
        b.system_instruction = kMappingSystem;
        b.instruction = mapping_task(list.dimension) + ".";
        b.response_format = "The input table with an added Concept column, followed by <end>.";
        const std::size_t end = std::min(packages.size(), start + batch_size);
        b.packages.assign(packages.begin() + static_cast<std::ptrdiff_t>(start),
                          packages.begin() + static_cast<std::ptrdiff_t>(end));
        std::vector<std::vector<std::string>> input{{"Package", "Language"}};
        for (const auto& [n, l] : b.packages) input.push_back({n, l});
        for (const auto& f : few_shots)
            b.exemplars.push_back({f.language, f.package, "", f.concept_});
        std::string tail;
        if (!few_shots.empty()) tail += "\n[examples]\n" + pipe_table(shots);
        tail += "\n[input]\n" + pipe_table(input);
        b.rendered = detail::render_sections(b, mapping_context(list) + "\n", tail);
        out.push_back(std::move(b));
    }
    return out;
}

struct MappingParse {
    std::vector<MappingRow> rows;
    std::vector<std::string> warnings;
    std::vector<std::string> row_errors;
};

/// Reads `| package | language | concept |` rows before `<end>`. Header and separator rows
/// are skipped; a row with the wrong shape is a row error; an out-of-list concept becomes "Others".
inline MappingParse parse_semantic_mapping_response(std::string_view text, const ConceptList& list) {
    auto end = text.find(kEndSentinel);
    if (end == std::string_view::npos) throw TruncatedResponseError("mapping response has no <end> sentinel");
    text = text.substr(0, end);
    MappingParse out;
    auto lower = [](std::string s) {
        std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
        return s;
    };
    auto lines = detail::py_split(text, "\n", std::string::npos);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::string line = detail::py_strip(lines[ln]);
        if (line.empty() || line[0] != '|') continue;  // prose around the table
        std::string body = line.substr(1);
        if (!body.empty() && body.back() == '|') body.pop_back();
        std::vector<std::string> cells;
        for (const auto& c : detail::py_split(body, "|", std::string::npos)) cells.push_back(detail::py_strip(c));
        const bool separator = std::all_of(cells.begin(), cells.end(), [](const std::string& c) {
            return !c.empty() && c.find_first_not_of("-: ") == std::string::npos;
        });
        if (separator) continue;
        if (cells.size() == 3 && lower(cells[0]) == "package" && lower(cells[1]) == "language") continue;
        const std::string where = "line " + std::to_string(ln + 1);
        if (cells.size() != 3) {
            out.row_errors.push_back(where + ": expected 3 cells, found " + std::to_string(cells.size()));
            continue;
        }
        if (cells[0].empty() || cells[1].empty() || cells[2].empty()) {
            out.row_errors.push_back(where + ": empty cell");
            continue;
        }
        MappingRow row{cells[0], cells[1], cells[2]};
        if (!list.admits(row.concept_)) {
            auto it = std::find_if(list.concepts.begin(), list.concepts.end(),
                                   [&](const std::string& c) { return lower(c) == lower(row.concept_); });
            if (it != list.concepts.end()) {
                row.concept_ = *it;
            } else {
                out.warnings.push_back(where + ": concept '" + row.concept_ + "' for " + row.package +
                                       " is not in the list; using Others");
                row.concept_ = std::string(kOthers);
            }
        }
        out.rows.push_back(std::move(row));
    }
    return out;
}

/// Runs every batch through `completer` and concatenates the parsed rows in batch order.
inline MappingParse run_semantic_mapping(const std::vector<std::pair<std::string, std::string>>& packages,
                                         const ConceptList& list, const std::vector<MappingRow>& few_shots,
                                         Completer& completer, const GenerationLimits& limits = {},
                                         std::size_t batch_size = kDefaultBatchSize) {
    MappingParse all;
    for (const auto& b : build_semantic_mapping_prompts(packages, list, few_shots, batch_size)) {
        auto part = parse_semantic_mapping_response(completer.complete(b.rendered, limits), list);
        all.rows.insert(all.rows.end(), part.rows.begin(), part.rows.end());
        all.warnings.insert(all.warnings.end(), part.warnings.begin(), part.warnings.end());
        all.row_errors.insert(all.row_errors.end(), part.row_errors.begin(), part.row_errors.end());
    }
    return all;
}

}  // namespace ubsr
