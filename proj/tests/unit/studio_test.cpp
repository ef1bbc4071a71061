#include <gtest/gtest.h>

#include "test_support.hpp"
#include "ubsr/studio/service.hpp"

using namespace ubsr;
using namespace ubsr::studio;
using nlohmann::json;

namespace {

struct Fixture {
    testing_support::TempDir rules_dir;
    testing_support::TempDir stub_dir;
    std::unique_ptr<StudioService> service;

    explicit Fixture(std::optional<std::string> token = std::nullopt, bool with_stub = true) {
        testing_support::copy_rules(rules_dir.path());
        // The studio works toward re-deriving scala's import rule.
        RuleDatabase without;
        for (const auto* r : testing_support::rules().rules_for("scala"))
            if (r->ast_node_type != "import_declaration") without.add(*r);
        save_language(without, rules_dir.path(), "scala");
        Config cfg;
        cfg.rules_dir = rules_dir.path();
        cfg.grammars_dir = testing_support::grammars_dir();
        if (with_stub) cfg.completer = std::make_shared<StubCompleter>(stub_dir.path());
        cfg.bearer_token = std::move(token);
        service = std::make_unique<StudioService>(std::move(cfg));
    }

    Response call(const std::string& method, const std::string& path, const json& body = nullptr,
                  std::map<std::string, std::string> headers = {}) {
        return service->handle({method, path, body.is_null() ? "" : body.dump(), std::move(headers)});
    }
};

json generate_body(bool dry) {
    return {{"test_language", "scala"}, {"concept", "package"}, {"exemplars", {"haskell", "elm"}},
            {"pruning", "concept"},     {"test_code", "import scala.collection.mutable\n"}, {"dry", dry}};
}

json scala_rule_json() {
    const auto* r = testing_support::rules().lookup("scala", "import_declaration");
    return {{r->ast_node_type, rule_body_to_json(*r)}};
}

}  // namespace

TEST(Studio, Languages) {
    Fixture f;
    const auto res = f.call("GET", "/languages");
    ASSERT_EQ(res.status, 200);
    ASSERT_EQ(res.body["languages"].size(), 21u);
    bool found = false;
    for (const auto& l : res.body["languages"])
        if (l["language"] == "scala") {
            found = true;
            EXPECT_EQ(l["paradigm"], "functional_expression");
        }
    EXPECT_TRUE(found);
    EXPECT_EQ(res.headers.at("Access-Control-Allow-Origin"), "*");
    EXPECT_EQ(f.call("GET", "/rules/version").body["version"], 1);
}

TEST(Studio, ParsePreview) {
    Fixture f;
    auto res = f.call("POST", "/parse-preview", {{"language", "python"}, {"code", "import math\n"}, {"pruning", "depth:1"}});
    ASSERT_EQ(res.status, 200) << res.body.dump();
    EXPECT_EQ(res.body["ast"], "(module (import_statement))");
    EXPECT_EQ(res.body["pruning"], "depth:1");
    EXPECT_LE(res.body["token_count"].get<int>(), res.body["unpruned_token_count"].get<int>());
    EXPECT_EQ(f.call("POST", "/parse-preview", {{"language", "cobol"}, {"code", ""}}).status, 400);
    res = f.call("POST", "/parse-preview", {{"language", "python"}, {"code", ""}, {"pruning", "depth:0"}});
    EXPECT_EQ(res.status, 400);
    EXPECT_EQ(res.body["code"], "bad_pruning");
    EXPECT_EQ(f.service->handle({"POST", "/parse-preview", "{oops", {}}).status, 400);
    EXPECT_EQ(f.call("GET", "/parse-preview").status, 405);
    EXPECT_EQ(f.call("GET", "/nowhere").status, 404);
}

TEST(Studio, GenerateDryAndStub) {
    Fixture f;
    auto dry = f.call("POST", "/rule/generate", generate_body(true));
    ASSERT_EQ(dry.status, 200) << dry.body.dump();
    EXPECT_TRUE(dry.body["response"].is_null());
    const auto rendered = dry.body["prompt"]["rendered"].get<std::string>();
    EXPECT_NE(rendered.find("import scala.collection.mutable"), std::string::npos);

    // No canned response yet: the completer fails.
    EXPECT_EQ(f.call("POST", "/rule/generate", generate_body(false)).status, 502);

    StubCompleter stub(f.stub_dir.path());
    write_text_file_atomic(stub.response_path(rendered),
                           "```json\n" + scala_rule_json().dump(2) + "\n```\nOutput: scala.collection.mutable\n");
    auto res = f.call("POST", "/rule/generate", generate_body(false));
    ASSERT_EQ(res.status, 200) << res.body.dump();
    EXPECT_EQ(res.body["candidate_rule"], scala_rule_json());
    EXPECT_EQ(res.body["claimed_output"], "scala.collection.mutable");

    auto mismatch = generate_body(true);
    mismatch["exemplars"] = {"python"};
    res = f.call("POST", "/rule/generate", mismatch);
    EXPECT_EQ(res.status, 409);
    EXPECT_EQ(res.body["code"], "paradigm_mismatch");
    mismatch["override"] = true;
    EXPECT_EQ(f.call("POST", "/rule/generate", mismatch).status, 200);
    auto missing = generate_body(true);
    missing.erase("test_code");
    EXPECT_EQ(f.call("POST", "/rule/generate", missing).status, 422);
}

TEST(Studio, GenerateWithoutCompleter) {
    Fixture f(std::nullopt, false);
    EXPECT_EQ(f.call("POST", "/rule/generate", generate_body(true)).status, 200);
    EXPECT_EQ(f.call("POST", "/rule/generate", generate_body(false)).status, 503);
}

TEST(Studio, ValidateAcceptRejectAndInvalid) {
    Fixture f;
    auto ok = f.call("POST", "/rule/validate", {{"language", "scala"}, {"candidate_rule", scala_rule_json()}});
    ASSERT_EQ(ok.status, 200) << ok.body.dump();
    EXPECT_EQ(ok.body["verdict"], "accept");
    EXPECT_TRUE(ok.body["accept_token"].is_string());

    auto bad = f.call("POST", "/rule/validate",
                      {{"language", "scala"},
                       {"candidate_rule", scala_rule_json()},
                       {"test_cases", {{{"snippet", "import a.b"}, {"expected", "zzz"}}}}});
    ASSERT_EQ(bad.status, 200);
    EXPECT_EQ(bad.body["verdict"], "reject");
    EXPECT_TRUE(bad.body["accept_token"].is_null());

    json broken = scala_rule_json();
    broken["import_declaration"]["extractor"] = {{{"op", "exec"}}};
    EXPECT_EQ(f.call("POST", "/rule/validate", {{"language", "scala"}, {"candidate_rule", broken}}).status, 422);
    EXPECT_EQ(f.call("POST", "/rule/validate", {{"language", "scala"}}).status, 422);
}

TEST(Studio, CommitNeedsAcceptTokenAndCurrentVersion) {
    Fixture f;
    const auto original = read_text_file(testing_support::rules_dir() / "scala.json");
    EXPECT_EQ(f.call("POST", "/rule/commit", {{"version", 1}}).status, 403);
    EXPECT_EQ(f.call("POST", "/rule/commit", {{"version", 1}, {"accept_token", "forged"}}).status, 403);

    const auto token = f.call("POST", "/rule/validate", {{"language", "scala"}, {"candidate_rule", scala_rule_json()}})
                           .body["accept_token"]
                           .get<std::string>();
    auto stale = f.call("POST", "/rule/commit", {{"version", 0}, {"accept_token", token}});
    EXPECT_EQ(stale.status, 409);
    EXPECT_EQ(stale.body["code"], "conflict");

    auto done = f.call("POST", "/rule/commit", {{"version", 1}, {"accept_token", token}});
    ASSERT_EQ(done.status, 200) << done.body.dump();
    EXPECT_EQ(done.body["version"], 2);
    EXPECT_EQ(read_text_file(f.rules_dir / "scala.json"), original);
    EXPECT_EQ(f.call("GET", "/rules/version").body["version"], 2);
    // Tokens are single use.
    EXPECT_EQ(f.call("POST", "/rule/commit", {{"version", 2}, {"accept_token", token}}).status, 403);
}

TEST(Studio, CommitRejectsSwappedRule) {
    Fixture f;
    const auto token = f.call("POST", "/rule/validate", {{"language", "scala"}, {"candidate_rule", scala_rule_json()}})
                           .body["accept_token"]
                           .get<std::string>();
    json other = scala_rule_json();
    other["import_declaration"]["expected"] = "something else";
    EXPECT_EQ(f.call("POST", "/rule/commit",
                     {{"version", 1}, {"accept_token", token}, {"language", "scala"}, {"candidate_rule", other}})
                  .status,
              403);
}

TEST(Studio, AcceptTokensExpire) {
    Fixture f;
    auto now = StudioService::Clock::now();
    f.service->set_clock([&] { return now; });
    const auto token = f.call("POST", "/rule/validate", {{"language", "scala"}, {"candidate_rule", scala_rule_json()}})
                           .body["accept_token"]
                           .get<std::string>();
    now += std::chrono::seconds(901);
    EXPECT_EQ(f.call("POST", "/rule/commit", {{"version", 1}, {"accept_token", token}}).status, 403);
}

TEST(Studio, BearerTokenAndPreflight) {
    Fixture f(std::string("s3cret"));
    EXPECT_EQ(f.call("GET", "/languages").status, 401);
    EXPECT_EQ(f.call("GET", "/languages", nullptr, {{"authorization", "Bearer wrong"}}).status, 401);
    EXPECT_EQ(f.call("GET", "/languages", nullptr, {{"authorization", "Bearer s3cret"}}).status, 200);
    const auto pre = f.call("OPTIONS", "/rule/commit");
    EXPECT_EQ(pre.status, 204);
    EXPECT_NE(pre.headers.at("Access-Control-Allow-Headers").find("Authorization"), std::string::npos);
}
