// Acceptance suite: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <string>

#include "generators.hpp"
#include "import_scripts_oracle.hpp"
#include "oracle.hpp"
#include "test_support.hpp"
#include "ubsr/pipeline.hpp"
#include "ubsr/report/report.hpp"
#include "ubsr/rulegen/commit.hpp"
#include "ubsr/rulegen/semantic_prompts.hpp"

using namespace ubsr;
namespace fs = std::filesystem;
namespace ts = testing_support;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

/// Collects violations; keeps the first few messages.
struct Checker {
    std::size_t failures = 0;
    std::string first;
    void expect(bool cond, const std::string& what) {
        if (cond) return;
        if (failures++ < 3) first += (first.empty() ? "" : "; ") + what;
    }
    Outcome result(const std::string& ok_detail) const {
        if (failures == 0) return {true, ok_detail};
        return {false, std::to_string(failures) + " violation(s): " + first};
    }
};

const ExtractionContext& context() {
    static const ExtractionContext c{ts::grammars(), ts::rules(), LanguageRegistry::builtin()};
    return c;
}

oracle::Counts counts_of(const Table& nodes) {
    oracle::Counts k;
    for (const auto& t : nodes.get<std::string>("node_type")) {
        if (t == "ubsr_package") ++k.packages;
        if (t == "ubsr_function") ++k.functions;
        if (t == "ubsr_comment") ++k.comments;
    }
    return k;
}

Outcome corpora_match_oracles() {
    Checker ck;
    const auto start = std::chrono::steady_clock::now();
    oracle::Counts total;
    std::size_t files = 0;
    for (const auto* name : {"cpp", "typescript", "scala"}) {
        const auto inputs = collect_inputs(ts::corpus_dir(name), LanguageRegistry::builtin());
        const auto result = extract_corpus(inputs, context());
        ck.expect(result.error_log.empty(), std::string(name) + ": extraction errors");
        oracle::Counts want;
        for (const auto& in : inputs) {
            const auto got = counts_of(extract_corpus({in}, context()).tables.nodes);
            const auto exp = oracle::count(in.language, in.code);
            ck.expect(got == exp, std::string(name) + "/" + in.path + " differs from oracle");
            want.packages += exp.packages;
            want.functions += exp.functions;
            want.comments += exp.comments;
            ++files;
        }
        const auto got = counts_of(result.tables.nodes);
        ck.expect(got == want, std::string(name) + ": corpus totals differ");
        total.packages += got.packages;
        total.functions += got.functions;
        total.comments += got.comments;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    ck.expect(secs < 10.0, "runtime " + std::to_string(secs) + " s");
    return ck.result(std::to_string(files) + " files, " + std::to_string(total.packages) + "/" +
                     std::to_string(total.packages) + " packages, " + std::to_string(total.functions) + "/" +
                     std::to_string(total.functions) + " functions, " + std::to_string(total.comments) + "/" +
                     std::to_string(total.comments) + " comments, " + std::to_string(secs).substr(0, 4) + " s");
}

Outcome dsl_goldens() {
    Checker ck;
    auto run = [](const char* node_type, const std::string& code) {
        const auto* r = ts::rules().lookup("python", node_type);
        if (r == nullptr) throw Error(std::string("missing python rule ") + node_type);
        return run_extractor(r->extractor, code);
    };
    const std::vector<std::tuple<const char*, std::string, std::string>> goldens = {
        {"import_statement", "import math", "math"},
        {"import_from_statement", "from os.path import join", "os"},
        {"import_statement", "import a.b, c", "a, c"},
    };
    for (const auto& [type, code, want] : goldens) {
        const auto got = run(type, code);
        ck.expect(got == want, code + " -> " + got);
        const auto script = std::string(type) == "import_statement" ? import_scripts::import_statement(code)
                                                                     : import_scripts::import_from_statement(code);
        ck.expect(script == want, "script transliteration gives " + script + " for " + code);
    }
    return ck.result("3/3 goldens equal and agree with the script transliteration");
}

// Literal form of the reference computation: sum comment lines, divide if positive.
double reference_ccr(const UbsrDocument& d) {
    std::int64_t loc_snippet = 0, total_comment_loc = 0;
    for (const auto& n : d.nodes) {
        if (n.node_type == UbsrNodeType::Root) loc_snippet = n.metadata.loc_original_code;
        if (n.node_type == UbsrNodeType::Comment) total_comment_loc += n.metadata.loc_original_code;
    }
    if (total_comment_loc > 0) return static_cast<double>(loc_snippet) / static_cast<double>(total_comment_loc);
    return 0;
}

Outcome ccr_conformance() {
    Checker ck;
    std::mt19937_64 rng(2024);
    std::vector<UbsrDocument> docs;
    for (int i = 0; i < 1000; ++i) docs.push_back(gen::random_document(rng, "doc" + std::to_string(i), 16));
    std::size_t with_comments = 0;
    for (const auto& d : docs) {
        const double want = reference_ccr(d);
        ck.expect(compute_ccr(d) == want, d.source_path + " compute_ccr");
        with_comments += want > 0;
    }
    const auto rows = profile_rows(to_tabular(docs).nodes);
    ck.expect(rows.size() == docs.size(), "profile row count");
    for (std::size_t i = 0; i < rows.size() && i < docs.size(); ++i)
        ck.expect(rows[i].ccr == reference_ccr(docs[i]), docs[i].source_path + " profile_rows");
    return ck.result("1000 documents (" + std::to_string(with_comments) + " with positive CCR), 0 mismatches");
}

void collect_spans(const TreeNode& n, std::set<std::pair<std::size_t, std::size_t>>& out) {
    out.insert({n.byte_span.start, n.byte_span.end});
    for (const auto& c : n.children) collect_spans(c, out);
}

// Spans of nodes tagged with a wanted concept plus all their ancestors.
bool expected_spans(const TreeNode& n, const ConceptSet& wanted, std::set<std::pair<std::size_t, std::size_t>>& out) {
    bool keep = false;
    for (Concept c : kAllConcepts) keep = keep || (wanted.contains(c) && n.concept_tags.contains(c));
    for (const auto& c : n.children) keep = expected_spans(c, wanted, out) || keep;
    if (keep) out.insert({n.byte_span.start, n.byte_span.end});
    return keep;
}

Outcome pruning_properties() {
    Checker ck;
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> mask(1, 7);
    for (int i = 0; i < 1000; ++i) {
        const auto tree = gen::random_parse_tree(rng, 6);
        const auto full_tokens = token_count(render_sexpr(tree));
        const auto height = tree_height(tree);
        std::size_t prev = 0;
        for (std::size_t k = 1; k <= height + 1; ++k) {
            const auto p = prune_depth(tree, k);
            const auto n = node_count(p);
            ck.expect(n >= prev, "case " + std::to_string(i) + ": node count drops at depth " + std::to_string(k));
            ck.expect(token_count(render_sexpr(p)) <= full_tokens, "case " + std::to_string(i) + ": depth tokens grow");
            prev = n;
        }
        ck.expect(prev == node_count(tree), "case " + std::to_string(i) + ": full depth loses nodes");

        ConceptSet wanted;
        const int m = mask(rng);
        for (int b = 0; b < 3; ++b)
            if (m & (1 << b)) wanted.insert(kAllConcepts[static_cast<std::size_t>(b)]);
        const auto pruned = prune_concept(tree, wanted);
        std::set<std::pair<std::size_t, std::size_t>> want, got;
        expected_spans(tree.root, wanted, want);
        collect_spans(pruned.root, got);
        for (const auto& s : want) ck.expect(got.count(s) == 1, "case " + std::to_string(i) + ": tagged node or ancestor lost");
        ck.expect(token_count(render_sexpr(pruned)) <= full_tokens, "case " + std::to_string(i) + ": concept tokens grow");
    }
    return ck.result("1000 random trees, 0 violations");
}

std::string lower_trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    std::string out = s.substr(b, e - b);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

Outcome semantic_lookup() {
    Checker ck;
    std::mt19937_64 rng(7);
    const std::vector<std::string> langs = {"python", "cpp", "scala"};
    const std::vector<std::string> concepts = {"Mathematics", "Database", "Networking"};
    std::uniform_int_distribution<int> len(1, 5), ch(0, 3), pick(0, 2), size(0, 60), cased(0, 3);
    auto word = [&] {
        std::string s;
        for (int i = len(rng); i > 0; --i) s += static_cast<char>((cased(rng) == 0 ? 'A' : 'a') + ch(rng));
        return s;
    };
    std::size_t pairs = 0, hits = 0;
    for (int set = 0; set < 100; ++set) {
        SemanticRuleSet rs({"functionality"});
        std::vector<SemanticRule> linear;
        for (int i = size(rng); i > 0; --i) {
            SemanticRule r{word(), langs[static_cast<std::size_t>(pick(rng))],
                           {{"functionality", concepts[static_cast<std::size_t>(pick(rng))]}}};
            bool dup = false;
            for (const auto& x : linear) dup = dup || (lower_trim(x.package_name) == lower_trim(r.package_name) && x.language == r.language);
            if (dup) continue;
            linear.push_back(r);
            rs.add(r);
        }
        for (int q = 0; q < 100; ++q, ++pairs) {
            const std::string pkg = (cased(rng) == 0 ? " " : "") + word();
            const auto& lang = langs[static_cast<std::size_t>(pick(rng))];
            std::optional<std::string> want;
            for (const auto& x : linear)
                if (lower_trim(x.package_name) == lower_trim(pkg) && x.language == lang) want = x.concepts.at("functionality");
            const auto got = rs.lookup(pkg, lang, "functionality");
            ck.expect(got == want, "lookup(" + pkg + ", " + lang + ")");
            hits += want.has_value();
        }
    }

    std::vector<SourceInput> in;
    for (const auto* name : {"python", "scala", "cpp", "typescript"})
        for (auto x : collect_inputs(ts::corpus_dir(name), LanguageRegistry::builtin())) {
            x.path = std::string(name) + "/" + x.path;
            in.push_back(x);
        }
    const auto nodes = extract_corpus(in, context()).tables.nodes;
    const auto db = load_semantic_rules(ts::source_dir() / "data/semantic/functionality.csv");
    const auto a = annotate(nodes, db, "functionality");
    const auto b = annotate(a.table, db, "functionality");
    ck.expect(a.table == b.table && a.pending == b.pending, "annotate is not idempotent");
    for (const auto& p : a.pending)
        ck.expect(!db.lookup(p.package, p.language, "functionality"), "pending holds mapped package " + p.package);
    return ck.result(std::to_string(pairs) + " (rule set, query) pairs (" + std::to_string(hits) +
                     " hits), annotate idempotent, " + std::to_string(a.pending.size()) + " pending all unmapped");
}

Outcome batching() {
    Checker ck;
    const ConceptList list{"functionality", {"Database", "Mathematics"}};
    std::vector<std::pair<std::string, std::string>> pkgs;
    for (int i = 0; i < 61; ++i) pkgs.emplace_back("pkg" + std::to_string(i), "python");
    const auto prompts = build_semantic_mapping_prompts(pkgs, list, {});
    std::vector<std::size_t> sizes;
    for (const auto& p : prompts) sizes.push_back(p.packages.size());
    ck.expect(sizes == std::vector<std::size_t>{30, 30, 1}, "batch sizes");

    // Echo completer: answers each batch in order, alternating concepts.
    struct Echo : Completer {
        std::map<std::string, std::string> answers;
        std::string complete(const std::string& prompt, const GenerationLimits&) override { return answers.at(prompt); }
        std::string name() const override { return "echo"; }
    } echo;
    std::vector<MappingRow> want;
    for (const auto& p : prompts) {
        std::string reply = "| Package | Language | Concept |\n| --- | --- | --- |\n";
        for (const auto& [n, l] : p.packages) {
            want.push_back({n, l, list.concepts[want.size() % 2]});
            reply += "| " + n + " | " + l + " | " + want.back().concept_ + " |\n";
        }
        echo.answers[p.rendered] = reply + "<end>\n";
    }
    const auto all = run_semantic_mapping(pkgs, list, {}, echo);
    ck.expect(all.rows == want, "concatenated rows lose order");
    bool truncated = false;
    try {
        parse_semantic_mapping_response("| pkg0 | python | Database |\n", list);
    } catch (const TruncatedResponseError&) {
        truncated = true;
    }
    ck.expect(truncated, "missing <end> accepted");
    for (const auto& p : prompts)
        ck.expect(p.rendered.find("Add <end> at the end of your response.") != std::string::npos, "prompt lacks <end>");
    return ck.result("61 -> [30, 30, 1], 61 rows in order, missing <end> rejected");
}

Outcome offline_pipeline() {
    Checker ck;
    ts::TempDir rules_dir, stub_dir;
    ts::copy_rules(rules_dir.path());
    const auto original = read_text_file(rules_dir / "scala.json");
    const auto* truth = ts::rules().lookup("scala", "import_declaration");
    if (truth == nullptr) throw Error("scala import rule missing");
    RuleDatabase without;
    for (const auto* r : ts::rules().rules_for("scala"))
        if (r->ast_node_type != "import_declaration") without.add(*r);
    save_language(without, rules_dir.path(), "scala");
    const auto reduced = read_text_file(rules_dir / "scala.json");
    const auto db = load_rules(rules_dir.path());

    BaseRuleRequest req{"scala", Concept::Package, {"haskell", "elm"}, Pruning::by_concept(),
                        "import scala.collection.mutable.ListBuffer\n", false};
    const auto bundle = build_base_rule_prompt(req, ts::grammars(), db);
    StubCompleter stub(stub_dir.path());
    nlohmann::json rule_obj;
    rule_obj[truth->ast_node_type] = rule_body_to_json(*truth);
    write_text_file_atomic(stub.response_path(bundle.rendered),
                           "```json\n" + rule_obj.dump(2) + "\n```\nOutput: scala.collection.mutable.ListBuffer\n");
    const auto cand = parse_base_rule_response(stub.complete(bundle.rendered, {}), "scala");
    const auto report = validate_candidate(
        cand.rule, {{cand.rule.test_snippet, cand.rule.expected}, {req.test_code, *cand.claimed_output}});
    ck.expect(report.accepted, "stub candidate rejected");

    // A wrong expectation is rejected and never reaches the files.
    const auto rejected = validate_candidate(cand.rule, {{"import a.b.C", "a"}});
    ck.expect(!rejected.accepted, "wrong candidate accepted");
    bool refused = false;
    try {
        commit_rule(rules_dir.path(), rejected, db.version());
    } catch (const RejectedCandidateError&) {
        refused = true;
    }
    ck.expect(refused && read_text_file(rules_dir / "scala.json") == reduced, "rejected candidate committed");

    bool stale = false;
    try {
        commit_rule(rules_dir.path(), report, db.version() - 1);
    } catch (const ConflictError&) {
        stale = true;
    }
    ck.expect(stale && read_text_file(rules_dir / "scala.json") == reduced, "stale commit accepted");

    const auto v = commit_rule(rules_dir.path(), report, db.version());
    ck.expect(v == db.version() + 1, "version not bumped");
    ck.expect(read_text_file(rules_dir / "scala.json") == original, "committed file differs from the original bytes");
    const auto reloaded = load_rules(rules_dir.path());
    ck.expect(canonical_rule_text(reloaded, "scala") == original, "rule file does not round-trip");
    return ck.result("generate -> parse -> validate -> commit, scala.json restored byte for byte, reject and stale refused");
}

std::string file_bytes(const fs::path& p) { return read_text_file(p); }

Outcome profile_and_report() {
    Checker ck;
    ts::TempDir a, b;
    const auto input = ts::source_dir() / "samples/multilang";
    auto opts = [&](const fs::path& out, unsigned threads) {
        ProfileOptions o;
        o.input_dir = input;
        o.rules_dir = ts::rules_dir();
        o.grammars_dir = ts::grammars_dir();
        o.semantic_db = ts::source_dir() / "data/semantic/functionality.csv";
        o.out_dir = out;
        o.extraction.threads = threads;
        return o;
    };
    run_profile(opts(a.path(), 1));
    run_profile(opts(b.path(), 4));
    for (const auto* f : {"nodes.parquet", "edges.parquet", "metrics.parquet", "pending.csv", "errors.csv"})
        ck.expect(file_bytes(a / f) == file_bytes(b / f), std::string(f) + " differs between runs");
    const auto nodes = read_node_table(a.path());
    const auto rep_a = report_text(build_report(nodes, "multilang", default_ccr_edges(), CommentScope::Transitive, "fixed"));
    const auto rep_b =
        report_text(build_report(read_node_table(b.path()), "multilang", default_ccr_edges(), CommentScope::Transitive, "fixed"));
    ck.expect(rep_a == rep_b, "report text differs between runs");

    // Independent recount straight from the node table columns.
    const auto j = nlohmann::json::parse(rep_a);
    const auto& doc = nodes.get<std::string>("doc_id");
    const auto& type = nodes.get<std::string>("node_type");
    const auto& lang = nodes.get<std::string>("language");
    const auto& loc = nodes.get<std::int64_t>("loc_original_code");
    const auto& concepts = nodes.get<StringList>("concept_functionality");
    std::map<std::string, std::int64_t> root_loc, comment_loc, by_type, langs, concept_counts;
    for (std::size_t r = 0; r < nodes.rows(); ++r) {
        ++by_type[type[r]];
        if (type[r] == "ubsr_root") {
            root_loc[doc[r]] = loc[r];
            ++langs[lang[r]];
            for (const auto& c : concepts[r]) ++concept_counts[c];
        }
        if (type[r] == "ubsr_comment") comment_loc[doc[r]] += loc[r];
    }
    const std::vector<double> edges = {0, 1, 2, 5, 10, 20};
    std::vector<std::int64_t> hist(edges.size(), 0);
    for (const auto& [d, rl] : root_loc) {
        const double ccr = comment_loc[d] > 0 ? double(rl) / double(comment_loc[d]) : 0.0;
        std::size_t k = 0;
        while (k + 1 < edges.size() && ccr >= edges[k + 1]) ++k;
        ++hist[k];
    }
    ck.expect(j["totals"]["files"] == root_loc.size(), "file total");
    ck.expect(root_loc.size() == 21, "expected 21 sample files, got " + std::to_string(root_loc.size()));
    for (const auto& [t, n] : by_type) ck.expect(j["totals"]["nodes"][t] == n, "node total " + t);
    ck.expect(j["language_distribution"] == nlohmann::json(langs), "language distribution");
    for (std::size_t k = 0; k < hist.size(); ++k)
        ck.expect(j["ccr_histogram"]["buckets"][k]["count"] == hist[k], "histogram bucket " + std::to_string(k));
    ck.expect(j["concept_distribution"]["functionality"] == nlohmann::json(concept_counts), "concept distribution");
    return ck.result("21 files in 21 languages, outputs and report byte-identical, aggregates match recount");
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"fixture corpora counts equal per-language oracles", corpora_match_oracles},
        {"extractor DSL import goldens", dsl_goldens},
        {"CCR conformance over generated documents", ccr_conformance},
        {"pruning properties on random trees", pruning_properties},
        {"semantic lookup equivalence, idempotence, pending", semantic_lookup},
        {"mapping batches and <end> sentinel", batching},
        {"offline rule pipeline with stub completer", offline_pipeline},
        {"profile and report determinism with recount", profile_and_report},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.ok;
        std::cout << (o.ok ? "PASS" : "FAIL") << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail << "\n";
    }
    std::cout << criteria.size() - static_cast<std::size_t>(failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
