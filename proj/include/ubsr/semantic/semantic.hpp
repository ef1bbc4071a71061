#pragma once

// Semantic rule sets: (package, language) -> concept per dimension, with a per-language
// prefix tree for lookup, CSV persistence and online annotation of node tables.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/core/ir.hpp"
#include "ubsr/core/table.hpp"
#include "ubsr/io/csv.hpp"
#include "ubsr/io/table_io.hpp"

namespace ubsr {

inline constexpr std::string_view kOthers = "Others";

/// Trim plus ASCII lowercase; rule files store this form.
inline std::string normalize_package(std::string_view s) {
    constexpr std::string_view ws = " \t\n\r\f\v";
    auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(ws);
    std::string out(s.substr(b, e - b + 1));
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

struct ConceptList {
    std::string dimension;
    std::vector<std::string> concepts;

    bool contains(std::string_view c) const {
        return std::find(concepts.begin(), concepts.end(), c) != concepts.end();
    }
    bool admits(std::string_view c) const { return c == kOthers || contains(c); }

    void validate() const {
        if (dimension.empty()) throw SchemaError("concept list has no dimension");
        std::set<std::string> seen;
        for (const auto& c : concepts) {
            if (c.empty()) throw SchemaError("concept list '" + dimension + "': empty concept name");
            if (c == kOthers) throw SchemaError("concept list '" + dimension + "': \"Others\" is implicit");
            if (!seen.insert(c).second) throw SchemaError("concept list '" + dimension + "': duplicate '" + c + "'");
        }
    }

    bool operator==(const ConceptList&) const = default;
};

inline nlohmann::json to_json(const ConceptList& l) { return {{"dimension", l.dimension}, {"concepts", l.concepts}}; }

inline ConceptList concept_list_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("dimension") || !j.contains("concepts") || !j["dimension"].is_string() ||
        !j["concepts"].is_array())
        throw SchemaError("concept list must be {\"dimension\": string, \"concepts\": [string]}");
    ConceptList l;
    l.dimension = j["dimension"].get<std::string>();
    for (const auto& c : j["concepts"]) {
        if (!c.is_string()) throw SchemaError("concept list: concepts must be strings");
        l.concepts.push_back(c.get<std::string>());
    }
    l.validate();
    return l;
}

inline ConceptList load_concept_list(const std::filesystem::path& path) {
    auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded()) throw SchemaError(path.string() + ": malformed JSON");
    return concept_list_from_json(j);
}

/// Exact-match prefix tree from strings to values.
template <typename V>
class Trie {
public:
    Trie() : nodes_(1) {}

    /// Returns false (leaving the old value) when the key already exists.
    bool insert(std::string_view key, V value) {
        std::size_t n = 0;
        for (char c : key) {
            auto it = nodes_[n].next.find(c);
            if (it == nodes_[n].next.end()) {
                nodes_.emplace_back();
                it = nodes_[n].next.emplace(c, nodes_.size() - 1).first;
            }
            n = it->second;
        }
        if (nodes_[n].value) return false;
        nodes_[n].value = std::move(value);
        ++size_;
        return true;
    }

    const V* find(std::string_view key) const {
        auto n = walk(key);
        return n && nodes_[*n].value ? &*nodes_[*n].value : nullptr;
    }

    /// All keys starting with `prefix`, in lexicographic order.
    std::vector<std::string> keys_with_prefix(std::string_view prefix) const {
        std::vector<std::string> out;
        auto n = walk(prefix);
        if (!n) return out;
        std::string key(prefix);
        collect(*n, key, out);
        return out;
    }

    std::size_t size() const { return size_; }

private:
    struct Node {
        std::map<char, std::size_t> next;
        std::optional<V> value;
    };

    std::optional<std::size_t> walk(std::string_view key) const {
        std::size_t n = 0;
        for (char c : key) {
            auto it = nodes_[n].next.find(c);
            if (it == nodes_[n].next.end()) return std::nullopt;
            n = it->second;
        }
        return n;
    }

    void collect(std::size_t n, std::string& key, std::vector<std::string>& out) const {
        if (nodes_[n].value) out.push_back(key);
        for (const auto& [c, child] : nodes_[n].next) {
            key.push_back(c);
            collect(child, key, out);
            key.pop_back();
        }
    }

    std::vector<Node> nodes_;
    std::size_t size_ = 0;
};

struct SemanticRule {
    std::string package_name;
    std::string language;
    std::map<std::string, std::string> concepts;  // dimension -> concept

    bool operator==(const SemanticRule&) const = default;
};

struct PendingPackage {
    std::string package;
    std::string language;
    bool operator==(const PendingPackage&) const = default;
    bool operator<(const PendingPackage& o) const {
        return std::tie(package, language) < std::tie(o.package, o.language);
    }
};

class SemanticRuleSet {
public:
    SemanticRuleSet() = default;
    explicit SemanticRuleSet(std::vector<std::string> dimensions) : dimensions_(std::move(dimensions)) {
        std::set<std::string> s(dimensions_.begin(), dimensions_.end());
        if (s.size() != dimensions_.size()) throw SchemaError("duplicate semantic dimension");
    }

    const std::vector<std::string>& dimensions() const { return dimensions_; }
    bool has_dimension(std::string_view d) const {
        return std::find(dimensions_.begin(), dimensions_.end(), d) != dimensions_.end();
    }

    void add_dimension(const std::string& d) {
        if (!has_dimension(d)) dimensions_.push_back(d);
    }

    /// Concepts for `list.dimension` must come from this list (or be "Others") from now on.
    void set_concept_list(ConceptList list) {
        list.validate();
        add_dimension(list.dimension);
        for (const auto& r : rules_) {
            auto it = r.concepts.find(list.dimension);
            if (it != r.concepts.end() && !list.admits(it->second))
                throw SchemaError("rule (" + r.package_name + ", " + r.language + "): concept '" + it->second +
                                  "' not in concept list '" + list.dimension + "'");
        }
        lists_[list.dimension] = std::move(list);
    }

    const ConceptList* concept_list(std::string_view d) const {
        auto it = lists_.find(std::string(d));
        return it == lists_.end() ? nullptr : &it->second;
    }

    void add(SemanticRule r) {
        r.package_name = normalize_package(r.package_name);
        if (r.package_name.empty()) throw SchemaError("semantic rule with empty package name");
        for (const auto& [d, c] : r.concepts) {
            if (!has_dimension(d)) throw SchemaError("semantic rule uses unknown dimension '" + d + "'");
            if (const auto* l = concept_list(d); l && !l->admits(c))
                throw SchemaError("semantic rule (" + r.package_name + ", " + r.language + "): concept '" + c +
                                  "' not in concept list '" + d + "'");
        }
        if (!index_[r.language].insert(r.package_name, rules_.size()))
            throw DuplicateKeyError("duplicate semantic rule (" + r.package_name + ", " + r.language + ")");
        rules_.push_back(std::move(r));
    }

    const SemanticRule* find(std::string_view package, std::string_view language) const {
        auto it = index_.find(std::string(language));
        if (it == index_.end()) return nullptr;
        const std::size_t* i = it->second.find(normalize_package(package));
        return i ? &rules_[*i] : nullptr;
    }

    /// Exact lookup; absent means the package is unknown for this dimension.
    std::optional<std::string> lookup(std::string_view package, std::string_view language,
                                      std::string_view dimension) const {
        if (!has_dimension(dimension)) throw SchemaError("unknown semantic dimension '" + std::string(dimension) + "'");
        const SemanticRule* r = find(package, language);
        if (!r) return std::nullopt;
        auto it = r->concepts.find(std::string(dimension));
        if (it == r->concepts.end()) return std::nullopt;
        return it->second;
    }

    /// Package names of `language` sharing a prefix (diagnostics only; lookup stays exact).
    std::vector<std::string> packages_with_prefix(std::string_view language, std::string_view prefix) const {
        auto it = index_.find(std::string(language));
        if (it == index_.end()) return {};
        return it->second.keys_with_prefix(normalize_package(prefix));
    }

    const std::vector<SemanticRule>& rules() const { return rules_; }
    std::size_t size() const { return rules_.size(); }

private:
    std::vector<std::string> dimensions_;
    std::vector<SemanticRule> rules_;
    std::map<std::string, Trie<std::size_t>> index_;
    std::map<std::string, ConceptList> lists_;
};

inline std::string concept_column(std::string_view dimension) { return "concept_" + std::string(dimension); }

// ---- CSV ---------------------------------------------------------------------------------

/// Header `package,language,concept_<dim>...`; an empty cell leaves that dimension unmapped.
inline SemanticRuleSet semantic_rules_from_csv(std::string_view text) {
    auto rows = csv::parse(text);
    if (rows.empty()) throw SchemaError("semantic rule CSV is empty (header required)");
    const auto& h = rows.front();
    if (h.size() < 2 || h[0] != "package" || h[1] != "language")
        throw SchemaError("semantic rule CSV header must start with package,language");
    std::vector<std::string> dims;
    for (std::size_t i = 2; i < h.size(); ++i) {
        if (h[i].rfind("concept_", 0) != 0 || h[i].size() == 8)
            throw SchemaError("semantic rule CSV: bad column '" + h[i] + "'");
        dims.push_back(h[i].substr(8));
    }
    SemanticRuleSet rs(dims);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() == 1 && row[0].empty()) continue;
        if (row.size() != h.size())
            throw SchemaError("semantic rule CSV row " + std::to_string(r + 1) + ": expected " +
                              std::to_string(h.size()) + " cells");
        SemanticRule rule{row[0], row[1], {}};
        for (std::size_t i = 0; i < dims.size(); ++i)
            if (!row[i + 2].empty()) rule.concepts[dims[i]] = row[i + 2];
        rs.add(std::move(rule));
    }
    return rs;
}

/// Rows sorted by (language, package) so the file is canonical.
inline std::string semantic_rules_to_csv(const SemanticRuleSet& rs) {
    std::vector<csv::Row> rows;
    csv::Row header{"package", "language"};
    for (const auto& d : rs.dimensions()) header.push_back(concept_column(d));
    rows.push_back(header);
    std::vector<const SemanticRule*> sorted;
    for (const auto& r : rs.rules()) sorted.push_back(&r);
    std::sort(sorted.begin(), sorted.end(), [](const auto* a, const auto* b) {
        return std::tie(a->language, a->package_name) < std::tie(b->language, b->package_name);
    });
    for (const auto* r : sorted) {
        csv::Row row{r->package_name, r->language};
        for (const auto& d : rs.dimensions()) {
            auto it = r->concepts.find(d);
            row.push_back(it == r->concepts.end() ? "" : it->second);
        }
        rows.push_back(std::move(row));
    }
    return csv::format(rows);
}

inline SemanticRuleSet load_semantic_rules(const std::filesystem::path& path) {
    return semantic_rules_from_csv(read_text_file(path));
}

inline std::vector<PendingPackage> pending_from_csv(std::string_view text) {
    auto rows = csv::parse(text);
    std::vector<PendingPackage> out;
    if (rows.empty()) return out;
    if (rows.front() != csv::Row{"package", "language"}) throw SchemaError("pending CSV header must be package,language");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() == 1 && rows[r][0].empty()) continue;
        if (rows[r].size() != 2) throw SchemaError("pending CSV row " + std::to_string(r + 1) + ": expected 2 cells");
        out.push_back({rows[r][0], rows[r][1]});
    }
    return out;
}

inline std::string pending_to_csv(const std::vector<PendingPackage>& pending) {
    std::vector<csv::Row> rows{{"package", "language"}};
    for (const auto& p : pending) rows.push_back({p.package, p.language});
    return csv::format(rows);
}

// ---- annotation ----------------------------------------------------------------------------

/// Splits a package node's code_snippet ("ubsr_package a, c") into normalized names.
inline std::vector<std::string> package_names(std::string_view code_snippet) {
    constexpr std::string_view prefix = "ubsr_package ";
    if (code_snippet.substr(0, prefix.size()) == prefix) code_snippet.remove_prefix(prefix.size());
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        auto hit = code_snippet.find(", ", pos);
        auto name = normalize_package(code_snippet.substr(pos, hit == std::string_view::npos ? hit : hit - pos));
        if (!name.empty()) out.push_back(std::move(name));
        if (hit == std::string_view::npos) break;
        pos = hit + 2;
    }
    return out;
}

struct AnnotationResult {
    Table table;
    std::vector<PendingPackage> pending;
};

/// Sets `concept_<dimension>` on every row: root rows list the concept of each package
/// occurrence in the document (node order); other rows get an empty list. Packages without a
/// mapping go to `pending` once each, in first-seen order. Nodes whose extractor failed are
/// skipped since their value is a raw span.
inline AnnotationResult annotate(const Table& node_table, const SemanticRuleSet& rs, std::string_view dimension) {
    if (!rs.has_dimension(dimension)) throw SchemaError("unknown semantic dimension '" + std::string(dimension) + "'");
    check_columns(node_table, columns::kNodeTable, "node table");
    const auto& doc = node_table.get<std::string>("doc_id");
    const auto& type = node_table.get<std::string>("node_type");
    const auto& snippet = node_table.get<std::string>("code_snippet");
    const auto& language = node_table.get<std::string>("language");
    const auto& info = node_table.get<std::string>("info");
    const auto rows = node_table.rows();

    std::map<std::string, std::vector<std::string>, std::less<>> per_doc;
    std::set<PendingPackage> seen;
    AnnotationResult out{node_table, {}};
    for (std::size_t r = 0; r < rows; ++r) {
        if (type[r] != to_string(UbsrNodeType::Package)) continue;
        if (info[r].rfind("extractor_error:", 0) == 0) continue;
        auto& list = per_doc[doc[r]];
        for (auto& name : package_names(snippet[r])) {
            if (auto c = rs.lookup(name, language[r], dimension)) {
                list.push_back(*c);
            } else {
                PendingPackage p{name, language[r]};
                if (seen.insert(p).second) out.pending.push_back(std::move(p));
            }
        }
    }
    Column col(concept_column(dimension), ColumnType::StringList);
    auto& values = col.values<StringList>();
    values.reserve(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        if (type[r] == to_string(UbsrNodeType::Root)) {
            auto it = per_doc.find(doc[r]);
            values.push_back(it == per_doc.end() ? StringList{} : it->second);
        } else {
            values.emplace_back();
        }
    }
    out.table.set_column(std::move(col));
    return out;
}

/// Union of an existing pending list and new entries, minus anything the rule set now maps
/// for `dimension`; existing order first, no duplicates.
inline std::vector<PendingPackage> merge_pending(const std::vector<PendingPackage>& existing,
                                                 const std::vector<PendingPackage>& fresh, const SemanticRuleSet& rs,
                                                 std::string_view dimension) {
    std::vector<PendingPackage> out;
    std::set<PendingPackage> seen;
    for (const auto* list : {&existing, &fresh})
        for (const auto& p : *list) {
            PendingPackage n{normalize_package(p.package), p.language};
            if (rs.lookup(n.package, n.language, dimension)) continue;
            if (seen.insert(n).second) out.push_back(std::move(n));
        }
    return out;
}

}  // namespace ubsr
