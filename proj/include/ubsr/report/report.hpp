#pragma once

// Corpus-level profiling report: pure aggregation over an (annotated) node table.

#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/core/ir.hpp"
#include "ubsr/core/table.hpp"
#include "ubsr/metrics/syntactic.hpp"
#include "ubsr/rules/extractor.hpp"

namespace ubsr {

inline const std::vector<double>& default_ccr_edges() {
    static const std::vector<double> e = {0, 1, 2, 5, 10, 20, std::numeric_limits<double>::infinity()};
    return e;
}

/// Edges must start at 0, increase strictly and end at inf so the buckets partition [0, inf).
inline void validate_edges(const std::vector<double>& edges) {
    if (edges.size() < 2) throw SchemaError("histogram needs at least two edges");
    if (edges.front() != 0.0) throw SchemaError("histogram edges must start at 0");
    if (!std::isinf(edges.back())) throw SchemaError("histogram edges must end at inf");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1])) throw SchemaError("histogram edges must increase strictly");
}

/// "0,1,2,5,10,20,inf"
inline std::vector<double> parse_edges(std::string_view text) {
    std::vector<double> out;
    for (const auto& part : detail::py_split(text, ",", std::string::npos)) {
        const std::string s = detail::py_strip(part);
        if (s == "inf") {
            out.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        char* end = nullptr;
        double v = std::strtod(s.c_str(), &end);
        if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
            throw SchemaError("bad histogram edge '" + s + "'");
        out.push_back(v);
    }
    validate_edges(out);
    return out;
}

inline std::string format_edge(double e) {
    if (std::isinf(e)) return "inf";
    std::ostringstream os;
    os << e;
    return os.str();
}

struct HistogramBucket {
    double lower = 0;
    double upper = 0;
    std::int64_t count = 0;
    std::string label() const { return "[" + format_edge(lower) + "," + format_edge(upper) + ")"; }
};

struct ProfileReport {
    std::string corpus_id;
    std::optional<std::string> generated_at;
    CommentScope comment_scope = CommentScope::Transitive;
    std::int64_t files = 0;
    std::map<std::string, std::int64_t> nodes_by_type;
    std::map<std::string, std::int64_t> language_distribution;
    std::vector<HistogramBucket> ccr_histogram;
    std::map<std::string, std::map<std::string, std::int64_t>> concept_distribution;
    std::map<std::string, std::int64_t> concept_occurrences;
};

/// ISO-8601 UTC time for a Unix epoch.
inline std::string iso8601_utc(std::int64_t epoch) {
    std::time_t t = static_cast<std::time_t>(epoch);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// The flag value if given, else SOURCE_DATE_EPOCH, else none (never the wall clock).
inline std::optional<std::string> resolve_generated_at(const std::optional<std::string>& flag) {
    if (flag) return flag;
    if (const char* v = std::getenv("SOURCE_DATE_EPOCH"); v && *v) {
        char* end = nullptr;
        long long e = std::strtoll(v, &end, 10);
        if (*end != '\0' || e < 0) throw SchemaError("SOURCE_DATE_EPOCH is not a non-negative integer");
        return iso8601_utc(e);
    }
    return std::nullopt;
}

/// Aggregates the report from the node table. Concept distributions come from every
/// `concept_<dim>` column present (written on root rows by annotation).
inline ProfileReport build_report(const Table& node_table, std::string corpus_id,
                                  const std::vector<double>& edges = default_ccr_edges(),
                                  CommentScope scope = CommentScope::Transitive,
                                  std::optional<std::string> generated_at = std::nullopt) {
    validate_edges(edges);
    ProfileReport rep;
    rep.corpus_id = std::move(corpus_id);
    rep.generated_at = std::move(generated_at);
    rep.comment_scope = scope;
    for (UbsrNodeType t : {UbsrNodeType::Root, UbsrNodeType::Package, UbsrNodeType::Function, UbsrNodeType::Comment})
        rep.nodes_by_type[std::string(to_string(t))] = 0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) rep.ccr_histogram.push_back({edges[i], edges[i + 1], 0});

    const auto rows = profile_rows(node_table, scope);
    rep.files = static_cast<std::int64_t>(rows.size());
    for (const auto& r : rows) {
        ++rep.language_distribution[r.language];
        for (auto& b : rep.ccr_histogram)
            if (r.ccr >= b.lower && r.ccr < b.upper) {
                ++b.count;
                break;
            }
    }
    const auto& type = node_table.get<std::string>("node_type");
    for (const auto& t : type) ++rep.nodes_by_type[t];

    for (const auto& col : node_table.columns()) {
        if (col.name.rfind("concept_", 0) != 0 || col.name.size() == 8) continue;
        if (col.type() != ColumnType::StringList) throw SchemaError("column '" + col.name + "' must be a string list");
        const std::string dim = col.name.substr(8);
        auto& dist = rep.concept_distribution[dim];
        auto& total = rep.concept_occurrences[dim];
        for (std::size_t r = 0; r < node_table.rows(); ++r) {
            if (type[r] != to_string(UbsrNodeType::Root)) continue;
            for (const auto& c : col.values<StringList>()[r]) {
                ++dist[c];
                ++total;
            }
        }
    }
    return rep;
}

inline nlohmann::json to_json(const ProfileReport& r) {
    nlohmann::json edges = nlohmann::json::array();
    nlohmann::json buckets = nlohmann::json::array();
    for (const auto& b : r.ccr_histogram) {
        edges.push_back(b.lower);
        buckets.push_back({{"label", b.label()},
                           {"lower", b.lower},
                           {"upper", std::isinf(b.upper) ? nlohmann::json("inf") : nlohmann::json(b.upper)},
                           {"count", b.count}});
    }
    if (!r.ccr_histogram.empty()) edges.push_back("inf");
    nlohmann::json j;
    j["corpus_id"] = r.corpus_id;
    j["generated_at"] = r.generated_at ? nlohmann::json(*r.generated_at) : nlohmann::json(nullptr);
    j["comment_scope"] = r.comment_scope == CommentScope::Direct ? "direct" : "transitive";
    j["totals"] = {{"files", r.files}, {"nodes", r.nodes_by_type}, {"concept_occurrences", r.concept_occurrences}};
    j["language_distribution"] = r.language_distribution;
    j["ccr_histogram"] = {{"edges", edges}, {"buckets", buckets}};
    j["concept_distribution"] = nlohmann::json::object();
    for (const auto& [d, m] : r.concept_distribution) j["concept_distribution"][d] = m;
    return j;
}

/// Canonical text: sorted keys, two-space indent, trailing newline.
inline std::string report_text(const ProfileReport& r) { return to_json(r).dump(2) + "\n"; }

}  // namespace ubsr
