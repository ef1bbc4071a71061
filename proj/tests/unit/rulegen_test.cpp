#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ubsr/rulegen/commit.hpp"
#include "ubsr/rulegen/semantic_prompts.hpp"

using namespace ubsr;
using testing_support::grammars;
using testing_support::rules;

namespace {

BaseRuleRequest scala_package() {
    BaseRuleRequest r;
    r.test_language = "scala";
    r.concept_ = Concept::Package;
    r.exemplar_languages = {"haskell", "elm"};
    r.pruning = Pruning::by_concept();
    r.test_code = "import scala.collection.mutable\n";
    return r;
}

ConceptList small_list() { return {"functionality", {"Database", "Mathematics", "Networking"}}; }

std::vector<std::pair<std::string, std::string>> packages(std::size_t n) {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t i = 0; i < n; ++i) out.emplace_back("pkg" + std::to_string(i), "python");
    return out;
}

const char* kGoodResponse =
    "The package concept is carried by import_statement nodes.\n"
    "```json\n"
    "{\"import_statement\": {\"ubsr_node_type\": \"ubsr_package\", \"extractor\": ["
    "{\"op\": \"split_once\", \"sep\": \"import\", \"index\": 1}, {\"op\": \"trim\"}], "
    "\"test_snippet\": \"import math\", \"expected\": \"math\"}}\n"
    "```\n"
    "Output: math\n";

}  // namespace

TEST(BaseRulePrompt, BuildsWithinParadigm) {
    const auto b = build_base_rule_prompt(scala_package(), grammars(), rules());
    EXPECT_EQ(b.kind, PromptKind::BaseRule);
    ASSERT_FALSE(b.exemplars.empty());
    for (const auto& ex : b.exemplars) {
        EXPECT_TRUE(ex.language == "haskell" || ex.language == "elm") << ex.language;
        EXPECT_NE(ex.expected.find("ubsr_package"), std::string::npos);
    }
    ASSERT_TRUE(b.test_input.has_value());
    EXPECT_EQ(b.test_input->language, "scala");
    EXPECT_NE(b.rendered.find("import scala.collection.mutable"), std::string::npos);
    EXPECT_NE(b.rendered.find("AST (pruning concept)"), std::string::npos);
    EXPECT_EQ(build_base_rule_prompt(scala_package(), grammars(), rules()).rendered, b.rendered);
}

TEST(BaseRulePrompt, ParadigmMismatch) {
    BaseRuleRequest r;
    r.test_language = "cpp";
    r.concept_ = Concept::Package;
    r.exemplar_languages = {"python"};
    r.test_code = "#include <vector>\n";
    EXPECT_THROW(build_base_rule_prompt(r, grammars(), rules()), ParadigmMismatchError);
    r.cross_paradigm = true;
    EXPECT_NO_THROW(build_base_rule_prompt(r, grammars(), rules()));
    r.exemplar_languages = {};
    EXPECT_THROW(build_base_rule_prompt(r, grammars(), rules()), SchemaError);
    r.exemplar_languages = {"cobol"};
    EXPECT_THROW(build_base_rule_prompt(r, grammars(), rules()), SchemaError);
    r.test_language = "cobol";
    EXPECT_THROW(build_base_rule_prompt(r, grammars(), rules()), UnknownLanguageError);
}

TEST(BaseRulePrompt, UnsupportedConcept) {
    BaseRuleRequest r;
    r.test_language = "perl";
    r.concept_ = Concept::Comment;
    r.exemplar_languages = {"python"};
    r.test_code = "# hi\n";
    EXPECT_THROW(build_base_rule_prompt(r, grammars(), rules()), SchemaError);
}

TEST(BaseRulePrompt, PruningModes) {
    auto r = scala_package();
    r.pruning = Pruning::none();
    const auto full = build_base_rule_prompt(r, grammars(), rules());
    r.pruning = Pruning::by_depth(1);
    const auto shallow = build_base_rule_prompt(r, grammars(), rules());
    EXPECT_LE(token_count(shallow.test_input->ast), token_count(full.test_input->ast));
    EXPECT_EQ(parse_pruning("depth:3").depth, 3u);
    EXPECT_EQ(parse_pruning("none").mode, Pruning::Mode::None);
    for (const auto* bad : {"depth:0", "depth:", "depth:x", "all", ""}) EXPECT_THROW(parse_pruning(bad), SchemaError) << bad;
}

TEST(PromptText, FixedSentencesAppearVerbatim) {
    const auto cl = build_concept_list_prompt("functionality", {"Mathematics"});
    EXPECT_NE(cl.rendered.find("You are a taxonomist for programming language packages"), std::string::npos);
    EXPECT_NE(cl.rendered.find("Your task is to provide a comprehensive, non-overlapping, and flat list of software "
                               "library concepts based on functionality"),
              std::string::npos);
    EXPECT_NE(build_concept_list_prompt("functionality", {}, ConceptListPersona::Enterprise)
                  .rendered.find("You are an enterprise software professional"),
              std::string::npos);
    const auto miss = build_missing_concept_prompt("functionality", {"Database"});
    EXPECT_NE(miss.rendered.find("List all functionality-based concepts of software libraries which are missing in "
                                 "this list and have no overlap with any of the items in this list"),
              std::string::npos);
    const auto map = build_semantic_mapping_prompts(packages(1), small_list(), {});
    ASSERT_EQ(map.size(), 1u);
    for (const auto* s : {"You are a discriminating and conservative programming specialist, responsible for "
                          "classifying programming language packages",
                          "Your task is to categorize the following packages in the given programming languages "
                          "based on their functionality",
                          "categorize it as \"Others\"", "Add <end> at the end of your response.",
                          "Do not include concepts outside of this provided list."})
        EXPECT_NE(map[0].rendered.find(s), std::string::npos) << s;
}

TEST(ConceptListResponse, Parses) {
    EXPECT_EQ(parse_concept_list_response("- Database\n2. Networking\n* database\n- Others\n\n<end>\n- Late"),
              (std::vector<std::string>{"Database", "Networking"}));
    EXPECT_THROW(build_concept_list_prompt(" ", {}), SchemaError);
    EXPECT_EQ(parse_persona("enterprise"), ConceptListPersona::Enterprise);
    EXPECT_THROW(parse_persona("poet"), SchemaError);
}

TEST(BaseRuleResponse, ParsesFencedRule) {
    const auto c = parse_base_rule_response(kGoodResponse, "python");
    EXPECT_EQ(c.rule.ast_node_type, "import_statement");
    EXPECT_EQ(c.rule.ubsr_node_type, UbsrNodeType::Package);
    EXPECT_EQ(c.claimed_output, "math");
    EXPECT_EQ(run_extractor(c.rule.extractor, "import json"), "json");
}

TEST(BaseRuleResponse, Malformed) {
    EXPECT_THROW(parse_base_rule_response("no block here", "python"), ResponseParseError);
    EXPECT_THROW(parse_base_rule_response("```json\n{\"a\": {\"ubsr_node_type\": \"ubsr_package\", \"test_snippet\": "
                                          "\"\", \"expected\": \"\"}}\n```",
                                          "python"),
                 ResponseParseError);  // no extractor
    EXPECT_THROW(parse_base_rule_response("```json\n{\"a\": {\"ubsr_node_type\": \"ubsr_package\", \"extractor\": "
                                          "[{\"op\": \"exec\"}], \"test_snippet\": \"\", \"expected\": \"\"}}\n```",
                                          "python"),
                 ResponseParseError);
    EXPECT_THROW(parse_base_rule_response("```json\n{}\n```", "python"), ResponseParseError);
}

TEST(Validate, AcceptAndReject) {
    const auto rule = parse_base_rule_response(kGoodResponse, "python").rule;
    const auto ok = validate_candidate(rule, {{"import math", "math"}});
    EXPECT_TRUE(ok.accepted);
    EXPECT_TRUE(ok.reasons.empty());
    const auto bad = validate_candidate(rule, {{"import math", "Math"}});
    EXPECT_FALSE(bad.accepted);
    EXPECT_EQ(bad.outcomes[0].actual, "math");
    const auto err = validate_candidate(rule, {{"x = 1", "x"}});
    EXPECT_FALSE(err.accepted);
    EXPECT_EQ(err.outcomes[0].error_stage, 0u);
    EXPECT_FALSE(validate_candidate(rule, {}).accepted);
    const auto j = to_json(bad);
    EXPECT_EQ(j["verdict"], "reject");
    EXPECT_TRUE(j["candidate_rule"].contains("import_statement"));
}

TEST(SemanticMapping, Batching) {
    auto sizes = [](std::size_t n) {
        std::vector<std::size_t> out;
        for (const auto& b : build_semantic_mapping_prompts(packages(n), small_list(), {})) out.push_back(b.packages.size());
        return out;
    };
    EXPECT_EQ(sizes(61), (std::vector<std::size_t>{30, 30, 1}));
    EXPECT_EQ(sizes(30), (std::vector<std::size_t>{30}));
    EXPECT_TRUE(sizes(0).empty());
    const auto batches = build_semantic_mapping_prompts(packages(61), small_list(), {});
    EXPECT_EQ(batches[1].packages.front().first, "pkg30");
    EXPECT_THROW(build_semantic_mapping_prompts(packages(3), small_list(), {}, 0), SchemaError);
    EXPECT_THROW(build_semantic_mapping_prompts(packages(3), small_list(), {{"x", "python", "Quantum"}}), SchemaError);
}

TEST(SemanticMapping, FewShotsRendered) {
    const auto b = build_semantic_mapping_prompts(packages(2), small_list(), {{"sqlite3", "python", "Database"}});
    EXPECT_NE(b[0].rendered.find("| sqlite3 | python | Database |"), std::string::npos);
    EXPECT_NE(b[0].rendered.find("| pkg1 | python |"), std::string::npos);
}

TEST(SemanticMapping, ParseResponse) {
    const std::string text =
        "Here you go:\n| Package | Language | Concept |\n|---|---|---|\n| numpy | python | mathematics |\n"
        "| requests | python | Networking |\n| spells | python | Quantum Sorcery |\n| broken | python |\n<end>\n"
        "| late | python | Database |\n";
    const auto p = parse_semantic_mapping_response(text, small_list());
    ASSERT_EQ(p.rows.size(), 3u);
    EXPECT_EQ(p.rows[0], (MappingRow{"numpy", "python", "Mathematics"}));
    EXPECT_EQ(p.rows[2].concept_, "Others");
    EXPECT_EQ(p.warnings.size(), 1u);
    EXPECT_EQ(p.row_errors.size(), 1u);
    EXPECT_THROW(parse_semantic_mapping_response("| a | python | Database |\n", small_list()), TruncatedResponseError);
}

TEST(StubCompleter, ServesCannedResponsesByHash) {
    EXPECT_EQ(prompt_hash(""), "cbf29ce484222325");
    EXPECT_EQ(prompt_hash("a"), "af63dc4c8601ec8c");
    testing_support::TempDir tmp;
    const auto batches = build_semantic_mapping_prompts(packages(61), small_list(), {});
    StubCompleter stub(tmp.path());
    for (const auto& b : batches) {
        std::string reply = "| Package | Language | Concept |\n";
        for (const auto& [n, l] : b.packages) reply += "| " + n + " | " + l + " | Database |\n";
        write_text_file_atomic(stub.response_path(b.rendered), reply + "<end>\n");
    }
    auto completer = make_completer("stub:" + tmp.path().string());
    const auto all = run_semantic_mapping(packages(61), small_list(), {}, *completer);
    ASSERT_EQ(all.rows.size(), 61u);
    EXPECT_EQ(all.rows[60].package, "pkg60");
    EXPECT_THROW(stub.complete("unseen prompt", {}), IoError);
    EXPECT_THROW(make_completer("oracle"), Error);
}

TEST(CommitRule, RestoresRemovedRuleByteForByte) {
    testing_support::TempDir tmp;
    testing_support::copy_rules(tmp.path());
    const auto original = read_text_file(tmp / "scala.json");
    const auto* rule = rules().lookup("scala", "import_declaration");
    ASSERT_NE(rule, nullptr);

    RuleDatabase without;
    for (const auto* r : rules().rules_for("scala"))
        if (r->ast_node_type != "import_declaration") without.add(*r);
    save_language(without, tmp.path(), "scala");
    ASSERT_NE(read_text_file(tmp / "scala.json"), original);

    const auto report = validate_candidate(*rule, {{rule->test_snippet, rule->expected}});
    ASSERT_TRUE(report.accepted);
    const auto v = read_version_file(tmp / "VERSION");
    EXPECT_THROW(commit_rule(tmp.path(), report, v + 1), ConflictError);
    EXPECT_EQ(commit_rule(tmp.path(), report, v), v + 1);
    EXPECT_EQ(read_text_file(tmp / "scala.json"), original);
    EXPECT_EQ(read_version_file(tmp / "VERSION"), v + 1);
    EXPECT_FALSE(std::filesystem::exists(tmp / ".lock"));

    EXPECT_THROW(commit_rule(tmp.path(), report, v + 1), DuplicateKeyError);
    auto rejected = report;
    rejected.accepted = false;
    EXPECT_THROW(commit_rule(tmp.path(), rejected, v + 1), RejectedCandidateError);
    EXPECT_EQ(read_version_file(tmp / "VERSION"), v + 1);
}

TEST(CommitRule, HeldLockIsAConflict) {
    testing_support::TempDir tmp;
    testing_support::copy_rules(tmp.path());
    const auto* rule = rules().lookup("python", "import_statement");
    auto report = validate_candidate(*rule, {{rule->test_snippet, rule->expected}});
    report.rule.ast_node_type = "future_import_statement";
    write_text_file_atomic(tmp / ".lock", "");
    EXPECT_THROW(commit_rule(tmp.path(), report, read_version_file(tmp / "VERSION")), ConflictError);
}

TEST(CommitSemantic, MergesAndBumpsVersion) {
    testing_support::TempDir tmp;
    const auto csv = tmp / "functionality.csv";
    const auto list = small_list();
    EXPECT_EQ(commit_semantic_rows(csv, {{"NumPy", "python", "Mathematics"}}, "functionality", 0, &list), 1);
    EXPECT_EQ(commit_semantic_rows(csv, {{"psycopg2", "python", "Database"}, {"numpy", "python", "Mathematics"}},
                                   "functionality", 1, &list),
              2);
    const auto rs = load_semantic_rules(csv);
    EXPECT_EQ(rs.lookup("numpy", "python", "functionality"), "Mathematics");
    EXPECT_EQ(rs.lookup("psycopg2", "python", "functionality"), "Database");
    EXPECT_THROW(commit_semantic_rows(csv, {}, "functionality", 1), ConflictError);
    EXPECT_THROW(commit_semantic_rows(csv, {{"numpy", "python", "Database"}}, "functionality", 2), ConflictError);
    EXPECT_EQ(semantic_db_version(csv), 2);
    // A second dimension extends existing rows.
    EXPECT_EQ(commit_semantic_rows(csv, {{"numpy", "python", "SciPy stack"}}, "framework", 2), 3);
    const auto both = load_semantic_rules(csv);
    EXPECT_EQ(both.lookup("numpy", "python", "framework"), "SciPy stack");
    EXPECT_EQ(both.lookup("numpy", "python", "functionality"), "Mathematics");
}
