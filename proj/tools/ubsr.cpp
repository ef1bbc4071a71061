// ubsr: command-line front end for profiling, reporting and offline rule generation.

#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "httplib.h"
#include "ubsr/io/ubsr_io.hpp"
#include "ubsr/pipeline.hpp"
#include "ubsr/report/report.hpp"
#include "ubsr/rulegen/base_rule.hpp"
#include "ubsr/rulegen/commit.hpp"
#include "ubsr/rulegen/completer.hpp"
#include "ubsr/rulegen/semantic_prompts.hpp"
#include "ubsr/studio/http.hpp"

#ifndef UBSR_DATA_DIR
#define UBSR_DATA_DIR "."
#endif

namespace fs = std::filesystem;
using namespace ubsr;

namespace {

fs::path data_path(const char* leaf) { return fs::path(UBSR_DATA_DIR) / leaf; }

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        write_text_file_atomic(out, text);
}

std::string read_input(const std::string& code, const std::string& file) {
    if (!file.empty()) return read_text_file(file);
    return code;
}

struct ProfileArgs {
    std::string input, rules = data_path("rules").string(), grammars = data_path("grammars").string();
    std::string semantic, dimension = std::string(kDefaultDimension), out, format = "parquet";
    std::vector<std::string> languages;
    std::string language, on_error = "skip_file", scope = "transitive";
    unsigned threads = 0;
    bool unmatched = false;
};

int cmd_profile(const ProfileArgs& a) {
    ProfileOptions o;
    o.input_dir = a.input;
    o.rules_dir = a.rules;
    o.grammars_dir = a.grammars;
    if (!a.semantic.empty()) o.semantic_db = a.semantic;
    o.dimension = a.dimension;
    o.out_dir = a.out;
    o.format = parse_table_format(a.format);
    if (!a.language.empty()) o.language_override = a.language;
    o.comment_scope = parse_comment_scope(a.scope);
    o.extraction.languages = a.languages;
    o.extraction.on_error = parse_on_error(a.on_error);
    o.extraction.threads = a.threads;
    o.extraction.include_unmatched_stats = a.unmatched;
    const auto s = run_profile(o);
    std::cerr << "profiled " << s.files << " files (" << s.failed << " failed), " << s.nodes << " nodes, "
              << s.pending << " pending packages -> " << a.out << "\n";
    return 0;
}

struct ReportArgs {
    std::string tables, out, corpus_id, edges = "0,1,2,5,10,20,inf", generated_at, scope = "transitive";
};

int cmd_report(const ReportArgs& a) {
    const auto nodes = read_node_table(a.tables);
    std::optional<std::string> at;
    if (!a.generated_at.empty()) at = a.generated_at;
    const std::string id = a.corpus_id.empty() ? fs::path(a.tables).filename().string() : a.corpus_id;
    const auto rep = build_report(nodes, id, parse_edges(a.edges), parse_comment_scope(a.scope), resolve_generated_at(at));
    emit(report_text(rep), a.out);
    return 0;
}

struct RulegenArgs {
    std::string test_language, concept_, pruning = "concept", test_code, test_file;
    std::vector<std::string> exemplars;
    std::string completer, rules = data_path("rules").string(), grammars = data_path("grammars").string();
    std::string cases_file, prompt_out, report_out;
    bool override_paradigm = false, dry_run = false, commit = false;
};

std::vector<TestCase> load_cases(const std::string& path) {
    auto j = nlohmann::json::parse(read_text_file(path), nullptr, false);
    if (j.is_discarded() || !j.is_array()) throw SchemaError(path + ": expected a JSON array of {snippet, expected}");
    std::vector<TestCase> out;
    for (const auto& c : j) out.push_back({c.at("snippet").get<std::string>(), c.at("expected").get<std::string>()});
    return out;
}

int cmd_rulegen(const RulegenArgs& a) {
    const auto& registry = LanguageRegistry::builtin();
    const auto grammars = GrammarSet::load_dir(a.grammars);
    const auto db = load_rules(a.rules, registry);
    auto concept_ = parse_concept(a.concept_);
    if (!concept_) throw SchemaError("concept must be package, function or comment");
    BaseRuleRequest req{a.test_language, *concept_, a.exemplars, parse_pruning(a.pruning),
                        read_input(a.test_code, a.test_file), a.override_paradigm};
    auto bundle = build_base_rule_prompt(req, grammars, db, registry);
    if (!a.prompt_out.empty()) write_text_file_atomic(a.prompt_out, bundle.rendered);
    if (a.dry_run) {
        if (a.prompt_out.empty()) std::cout << bundle.rendered;
        return 0;
    }
    if (a.completer.empty()) throw Error("--completer is required unless --dry-run");
    auto completer = make_completer(a.completer);
    const std::string response = completer->complete(bundle.rendered, {});
    auto cand = parse_base_rule_response(response, a.test_language);
    std::vector<TestCase> cases{{cand.rule.test_snippet, cand.rule.expected}};
    if (!a.cases_file.empty())
        for (auto& c : load_cases(a.cases_file)) cases.push_back(std::move(c));
    const auto report = validate_candidate(cand.rule, cases);
    emit(to_json(report).dump(2) + "\n", a.report_out);
    if (!report.accepted) {
        std::cerr << "candidate rejected\n";
        return 3;
    }
    if (a.commit) {
        const auto v = commit_rule(a.rules, report, db.version(), registry);
        std::cerr << "committed " << cand.rule.language << "/" << cand.rule.ast_node_type << ", rules version " << v
                  << "\n";
    }
    return 0;
}

struct SemmapArgs {
    std::string pending, concepts, semantic, few_shots, completer, prompts_out, rows_out;
    std::size_t batch_size = kDefaultBatchSize;
    bool dry_run = false, commit = false;
};

std::vector<MappingRow> load_few_shots(const std::string& path) {
    auto rows = csv::parse(read_text_file(path));
    if (rows.empty() || rows.front() != csv::Row{"package", "language", "concept"})
        throw SchemaError(path + ": header must be package,language,concept");
    std::vector<MappingRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() == 1 && rows[r][0].empty()) continue;
        if (rows[r].size() != 3) throw SchemaError(path + ": row " + std::to_string(r + 1) + " needs 3 cells");
        out.push_back({rows[r][0], rows[r][1], rows[r][2]});
    }
    return out;
}

int cmd_semmap(const SemmapArgs& a) {
    const auto list = load_concept_list(a.concepts);
    std::vector<std::pair<std::string, std::string>> packages;
    for (const auto& p : pending_from_csv(read_text_file(a.pending))) packages.emplace_back(p.package, p.language);
    const auto shots = a.few_shots.empty() ? std::vector<MappingRow>{} : load_few_shots(a.few_shots);
    const auto prompts = build_semantic_mapping_prompts(packages, list, shots, a.batch_size);
    if (!a.prompts_out.empty()) {
        fs::create_directories(a.prompts_out);
        for (std::size_t i = 0; i < prompts.size(); ++i)
            write_text_file_atomic(fs::path(a.prompts_out) / ("batch_" + std::to_string(i + 1) + ".txt"),
                                   prompts[i].rendered);
    }
    if (a.dry_run) {
        if (a.prompts_out.empty())
            for (const auto& p : prompts) std::cout << p.rendered << "\n";
        std::cerr << packages.size() << " packages in " << prompts.size() << " batches\n";
        return 0;
    }
    if (a.completer.empty()) throw Error("--completer is required unless --dry-run");
    auto completer = make_completer(a.completer);
    MappingParse all;
    for (const auto& p : prompts) {
        auto part = parse_semantic_mapping_response(completer->complete(p.rendered, {}), list);
        all.rows.insert(all.rows.end(), part.rows.begin(), part.rows.end());
        all.warnings.insert(all.warnings.end(), part.warnings.begin(), part.warnings.end());
        all.row_errors.insert(all.row_errors.end(), part.row_errors.begin(), part.row_errors.end());
    }
    for (const auto& w : all.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& e : all.row_errors) std::cerr << "row error: " << e << "\n";
    std::vector<csv::Row> out{{"package", "language", "concept"}};
    for (const auto& r : all.rows) out.push_back({r.package, r.language, r.concept_});
    emit(csv::format(out), a.rows_out);
    if (a.commit) {
        if (a.semantic.empty()) throw Error("--commit needs --semantic");
        const auto v = commit_semantic_rows(a.semantic, all.rows, list.dimension, semantic_db_version(a.semantic), &list);
        std::cerr << "committed " << all.rows.size() << " rows, semantic version " << v << "\n";
    }
    return 0;
}

struct ConceptsArgs {
    std::string dimension, persona = "taxonomist", previous, completer, out;
    std::vector<std::string> mandatory;
    bool missing = false, dry_run = false;
};

int cmd_concepts(const ConceptsArgs& a) {
    std::vector<std::string> previous;
    if (!a.previous.empty()) previous = load_concept_list(a.previous).concepts;
    const auto persona = parse_persona(a.persona);
    const auto bundle = a.missing ? build_missing_concept_prompt(a.dimension, previous, persona)
                                  : build_concept_list_prompt(a.dimension, a.mandatory, persona, previous);
    if (a.dry_run) {
        std::cout << bundle.rendered;
        return 0;
    }
    if (a.completer.empty()) throw Error("--completer is required unless --dry-run");
    auto concepts = parse_concept_list_response(make_completer(a.completer)->complete(bundle.rendered, {}));
    ConceptList list{a.dimension, {}};
    auto add = [&](const std::string& c) {
        if (!list.contains(c) && c != kOthers) list.concepts.push_back(c);
    };
    if (a.missing)
        for (const auto& c : previous) add(c);
    for (const auto& c : a.mandatory) add(c);
    for (const auto& c : concepts) add(c);
    list.validate();
    emit(to_json(list).dump(2) + "\n", a.out);
    return 0;
}

struct StudioArgs {
    std::string host = "127.0.0.1", rules = data_path("rules").string(), grammars = data_path("grammars").string();
    std::string completer, token, cors_origin = "*";
    int port = 8080;
};

httplib::Server* g_server = nullptr;

int cmd_studio(const StudioArgs& a) {
    studio::Config cfg;
    cfg.rules_dir = a.rules;
    cfg.grammars_dir = a.grammars;
    if (!a.completer.empty()) cfg.completer = make_completer(a.completer);
    if (!a.token.empty()) cfg.bearer_token = a.token;
    else if (const char* t = std::getenv("UBSR_STUDIO_TOKEN")) cfg.bearer_token = std::string(t);
    cfg.cors_origin = a.cors_origin;
    studio::StudioService service(std::move(cfg));
    httplib::Server server;
    studio::mount(server, service);
    g_server = &server;
    std::signal(SIGINT, [](int) {
        if (g_server) g_server->stop();
    });
    std::cerr << "studio listening on " << a.host << ":" << a.port << "\n";
    if (!server.listen(a.host, a.port)) throw IoError("cannot listen on " + a.host + ":" + std::to_string(a.port));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-lingual code data profiler built on UBSR"};
    app.require_subcommand(1);

    ProfileArgs pa;
    auto* profile = app.add_subcommand("profile", "Extract UBSR, syntactic metrics and semantic concepts from a corpus");
    profile->add_option("--input", pa.input, "Corpus directory")->required()->check(CLI::ExistingDirectory);
    profile->add_option("--out", pa.out, "Output directory")->required();
    profile->add_option("--rules", pa.rules, "Syntactic rule directory")->capture_default_str();
    profile->add_option("--grammars", pa.grammars, "Grammar bundle directory")->capture_default_str();
    profile->add_option("--semantic", pa.semantic, "Semantic rule CSV");
    profile->add_option("--dimension", pa.dimension, "Semantic dimension")->capture_default_str();
    profile->add_option("--format", pa.format, "parquet or jsonl")->capture_default_str();
    profile->add_option("--languages", pa.languages, "Only these languages")->delimiter(',');
    profile->add_option("--language", pa.language, "Force one language for every file");
    profile->add_option("--on-error", pa.on_error, "skip_file or fail_fast")->capture_default_str();
    profile->add_option("--comments-scope", pa.scope, "direct or transitive")->capture_default_str();
    profile->add_option("--threads", pa.threads, "Worker threads (0: all cores)");
    profile->add_flag("--unmatched-stats", pa.unmatched, "Record unmatched AST node types on root nodes");

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "Aggregate a profile output directory into a JSON report");
    report->add_option("--tables", ra.tables, "Profile output directory")->required()->check(CLI::ExistingDirectory);
    report->add_option("--out", ra.out, "Report file (default stdout)");
    report->add_option("--corpus-id", ra.corpus_id, "Corpus id (default: directory name)");
    report->add_option("--ccr-edges", ra.edges, "CCR histogram edges")->capture_default_str();
    report->add_option("--generated-at", ra.generated_at, "Timestamp to record (default SOURCE_DATE_EPOCH or null)");
    report->add_option("--comments-scope", ra.scope, "direct or transitive")->capture_default_str();

    RulegenArgs ga;
    auto* rulegen = app.add_subcommand("rulegen", "Generate, validate and optionally commit a base syntactic rule");
    rulegen->add_option("--test-language", ga.test_language)->required();
    rulegen->add_option("--concept", ga.concept_, "package, function or comment")->required();
    rulegen->add_option("--exemplars", ga.exemplars, "Known exemplar languages")->required()->delimiter(',');
    rulegen->add_option("--pruning", ga.pruning, "none, concept or depth:<k>")->capture_default_str();
    auto* code_opt = rulegen->add_option("--test-code", ga.test_code, "Test input code");
    rulegen->add_option("--test-file", ga.test_file, "Test input file")->excludes(code_opt);
    rulegen->add_option("--completer", ga.completer, "stub:<dir> or remote");
    rulegen->add_option("--rules", ga.rules)->capture_default_str();
    rulegen->add_option("--grammars", ga.grammars)->capture_default_str();
    rulegen->add_option("--cases", ga.cases_file, "Extra test cases (JSON array of {snippet, expected})");
    rulegen->add_option("--prompt-out", ga.prompt_out, "Write the rendered prompt here");
    rulegen->add_option("--report-out", ga.report_out, "Write the validation report here (default stdout)");
    rulegen->add_flag("--override", ga.override_paradigm, "Allow exemplars from another paradigm");
    rulegen->add_flag("--dry-run", ga.dry_run, "Only build the prompt");
    rulegen->add_flag("--commit", ga.commit, "Commit the rule when validation accepts it");

    SemmapArgs sa;
    auto* semmap = app.add_subcommand("semmap", "Map pending packages to concepts with the semantic mapping prompt");
    semmap->add_option("--pending", sa.pending, "pending.csv from a profile run")->required();
    semmap->add_option("--concepts", sa.concepts, "Concept list JSON")->required();
    semmap->add_option("--few-shots", sa.few_shots, "Few-shot CSV (package,language,concept)");
    semmap->add_option("--semantic", sa.semantic, "Semantic rule CSV to commit into");
    semmap->add_option("--completer", sa.completer, "stub:<dir> or remote");
    semmap->add_option("--batch-size", sa.batch_size)->capture_default_str();
    semmap->add_option("--prompts-out", sa.prompts_out, "Write one prompt file per batch here");
    semmap->add_option("--rows-out", sa.rows_out, "Write parsed rows CSV here (default stdout)");
    semmap->add_flag("--dry-run", sa.dry_run, "Only build the prompts");
    semmap->add_flag("--commit", sa.commit, "Commit parsed rows into --semantic");

    ConceptsArgs ca;
    auto* concepts = app.add_subcommand("concepts", "Build a concept list for a semantic dimension");
    concepts->add_option("--dimension", ca.dimension)->required();
    concepts->add_option("--mandatory", ca.mandatory, "Concepts that must be included")->delimiter(',');
    concepts->add_option("--persona", ca.persona, "enterprise or taxonomist")->capture_default_str();
    concepts->add_option("--previous", ca.previous, "Concept list JSON from an earlier round");
    concepts->add_option("--completer", ca.completer, "stub:<dir> or remote");
    concepts->add_option("--out", ca.out, "Concept list JSON (default stdout)");
    concepts->add_flag("--missing", ca.missing, "Ask for concepts missing from --previous");
    concepts->add_flag("--dry-run", ca.dry_run, "Only build the prompt");

    StudioArgs ta;
    auto* studio = app.add_subcommand("studio", "Serve the rule-studio HTTP API");
    studio->add_option("--host", ta.host)->capture_default_str();
    studio->add_option("--port", ta.port)->capture_default_str();
    studio->add_option("--rules", ta.rules)->capture_default_str();
    studio->add_option("--grammars", ta.grammars)->capture_default_str();
    studio->add_option("--completer", ta.completer, "stub:<dir> or remote");
    studio->add_option("--token", ta.token, "Bearer token required on every request (or UBSR_STUDIO_TOKEN)");
    studio->add_option("--cors-origin", ta.cors_origin)->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*profile) return cmd_profile(pa);
        if (*report) return cmd_report(ra);
        if (*rulegen) return cmd_rulegen(ga);
        if (*semmap) return cmd_semmap(sa);
        if (*concepts) return cmd_concepts(ca);
        if (*studio) return cmd_studio(ta);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
