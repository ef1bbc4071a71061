#pragma once

// Rule-studio API. `StudioService::handle` is transport-free so it can be tested directly;
// studio/http.hpp mounts it on an httplib server.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "ubsr/core/error.hpp"
#include "ubsr/frontend/grammar.hpp"
#include "ubsr/frontend/parser.hpp"
#include "ubsr/frontend/registry.hpp"
#include "ubsr/frontend/tree.hpp"
#include "ubsr/rulegen/base_rule.hpp"
#include "ubsr/rulegen/commit.hpp"
#include "ubsr/rulegen/completer.hpp"
#include "ubsr/rules/rule_db.hpp"

namespace ubsr::studio {

struct Request {
    std::string method;
    std::string path;
    std::string body;
    std::map<std::string, std::string> headers;  // lowercase names
};

struct Response {
    int status = 200;
    nlohmann::json body;
    std::map<std::string, std::string> headers;
};

struct Config {
    std::filesystem::path rules_dir;
    std::filesystem::path grammars_dir;
    std::shared_ptr<Completer> completer;    // null: only dry generation
    std::optional<std::string> bearer_token;  // required on every request when set
    std::string cors_origin = "*";
    std::chrono::seconds token_ttl{900};
    GenerationLimits limits;
};

/// Error carrying an HTTP status and a stable code for the `{code, message}` body.
struct HttpError : Error {
    HttpError(int status, std::string code, const std::string& message)
        : Error(message), status(status), code(std::move(code)) {}
    int status;
    std::string code;
};

class StudioService {
public:
    using Clock = std::chrono::steady_clock;

    explicit StudioService(Config cfg, const LanguageRegistry& registry = LanguageRegistry::builtin())
        : cfg_(std::move(cfg)), registry_(registry), grammars_(GrammarSet::load_dir(cfg_.grammars_dir)) {
        if (!std::filesystem::is_directory(cfg_.rules_dir))
            throw IoError("rules directory not found: " + cfg_.rules_dir.string());
    }

    /// Test hook for token expiry.
    void set_clock(std::function<Clock::time_point()> now) { now_ = std::move(now); }

    Response handle(const Request& req) {
        Response res;
        try {
            if (req.method == "OPTIONS") {
                res.status = 204;
                res.body = nullptr;
            } else {
                authorize(req);
                res = route(req);
            }
        } catch (const HttpError& e) {
            res = error(e.status, e.code, e.what());
        } catch (const UnknownLanguageError& e) {
            res = error(400, "unknown_language", e.what());
        } catch (const ParadigmMismatchError& e) {
            res = error(409, "paradigm_mismatch", e.what());
        } catch (const ConflictError& e) {
            res = error(409, "conflict", e.what());
        } catch (const DuplicateKeyError& e) {
            res = error(409, "duplicate_key", e.what());
        } catch (const ResponseParseError& e) {
            res = error(502, "bad_completion", e.what());
        } catch (const SchemaError& e) {
            res = error(422, "invalid_request", e.what());
        } catch (const std::exception& e) {
            res = error(500, "internal", e.what());
        }
        res.headers["Access-Control-Allow-Origin"] = cfg_.cors_origin;
        res.headers["Access-Control-Allow-Headers"] = "Content-Type, Authorization";
        res.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
        return res;
    }

private:
    struct Grant {
        ValidationReport report;
        Clock::time_point expires;
    };

    static Response error(int status, std::string code, std::string message) {
        return {status, {{"code", std::move(code)}, {"message", std::move(message)}}, {}};
    }

    void authorize(const Request& req) const {
        if (!cfg_.bearer_token) return;
        auto it = req.headers.find("authorization");
        if (it == req.headers.end() || it->second != "Bearer " + *cfg_.bearer_token)
            throw HttpError(401, "unauthorized", "missing or wrong bearer token");
    }

    Response route(const Request& req) {
        using Handler = Response (StudioService::*)(const nlohmann::json&);
        static const std::map<std::string, std::pair<std::string, Handler>> routes = {
            {"/languages", {"GET", &StudioService::languages}},
            {"/rules/version", {"GET", &StudioService::rules_version}},
            {"/parse-preview", {"POST", &StudioService::parse_preview}},
            {"/rule/generate", {"POST", &StudioService::generate}},
            {"/rule/validate", {"POST", &StudioService::validate}},
            {"/rule/commit", {"POST", &StudioService::commit}},
        };
        auto it = routes.find(req.path);
        if (it == routes.end()) throw HttpError(404, "not_found", "no route " + req.path);
        if (it->second.first != req.method)
            throw HttpError(405, "method_not_allowed", req.path + " expects " + it->second.first);
        nlohmann::json body = nlohmann::json::object();
        if (req.method == "POST") {
            body = nlohmann::json::parse(req.body, nullptr, false);
            if (body.is_discarded() || !body.is_object())
                throw HttpError(400, "bad_json", "request body must be a JSON object");
        }
        return (this->*(it->second.second))(body);
    }

    template <typename T>
    static T field(const nlohmann::json& body, const char* key, std::optional<T> fallback = std::nullopt) {
        if (!body.contains(key) || body[key].is_null()) {
            if (fallback) return *fallback;
            throw SchemaError(std::string("missing field '") + key + "'");
        }
        try {
            return body[key].get<T>();
        } catch (const nlohmann::json::exception&) {
            throw SchemaError(std::string("field '") + key + "' has the wrong type");
        }
    }

    static Concept concept_field(const nlohmann::json& body) {
        auto c = parse_concept(field<std::string>(body, "concept"));
        if (!c) throw SchemaError("concept must be package, function or comment");
        return *c;
    }

    RuleDatabase snapshot() const { return load_rules(cfg_.rules_dir, registry_); }

    Response languages(const nlohmann::json&) { return {200, registry_.to_json(), {}}; }

    Response rules_version(const nlohmann::json&) {
        return {200, {{"version", read_version_file(cfg_.rules_dir / "VERSION")}}, {}};
    }

    Response parse_preview(const nlohmann::json& body) {
        const auto language = field<std::string>(body, "language");
        if (!registry_.contains(language)) throw HttpError(400, "unknown_language", "unknown language: " + language);
        const auto code = field<std::string>(body, "code", std::string());
        Pruning pruning;
        try {
            pruning = parse_pruning(field<std::string>(body, "pruning", std::string("concept")));
        } catch (const SchemaError& e) {
            throw HttpError(400, "bad_pruning", e.what());
        }
        std::optional<Concept> concept_;
        if (body.contains("concept") && !body["concept"].is_null()) concept_ = concept_field(body);
        const auto db = snapshot();
        const auto tags = db.tag_map(language);
        const auto tree = parse(code, language, grammars_, &tags, registry_);
        const auto full = render_sexpr(tree);
        const auto pruned = render_sexpr(apply_pruning(tree, pruning, concept_));
        return {200,
                {{"language", language},
                 {"pruning", pruning.str()},
                 {"ast", pruned},
                 {"token_count", token_count(pruned)},
                 {"unpruned_token_count", token_count(full)},
                 {"node_count", node_count(apply_pruning(tree, pruning, concept_))}},
                {}};
    }

    Response generate(const nlohmann::json& body) {
        BaseRuleRequest r;
        r.test_language = field<std::string>(body, "test_language");
        if (!registry_.contains(r.test_language))
            throw HttpError(400, "unknown_language", "unknown language: " + r.test_language);
        r.concept_ = concept_field(body);
        r.exemplar_languages = field<std::vector<std::string>>(body, "exemplars");
        r.pruning = parse_pruning(field<std::string>(body, "pruning", std::string("concept")));
        r.test_code = field<std::string>(body, "test_code");
        r.cross_paradigm = field<bool>(body, "override", false);
        const bool dry = field<bool>(body, "dry", false);
        const auto db = snapshot();
        auto bundle = build_base_rule_prompt(r, grammars_, db, registry_);
        nlohmann::json out = {{"prompt", to_json(bundle)}, {"response", nullptr}, {"candidate_rule", nullptr},
                              {"claimed_output", nullptr}, {"language", r.test_language}};
        if (dry) return {200, out, {}};
        if (!cfg_.completer) throw HttpError(503, "no_completer", "no completer configured; use dry mode");
        std::string text;
        try {
            text = cfg_.completer->complete(bundle.rendered, cfg_.limits);
        } catch (const IoError& e) {
            throw HttpError(502, "completer_failed", e.what());
        }
        out["response"] = text;
        auto cand = parse_base_rule_response(text, r.test_language);
        out["candidate_rule"] = {{cand.rule.ast_node_type, rule_body_to_json(cand.rule)}};
        if (cand.claimed_output) out["claimed_output"] = *cand.claimed_output;
        return {200, out, {}};
    }

    static SyntacticRule rule_field(const nlohmann::json& body) {
        const auto language = field<std::string>(body, "language");
        if (!body.contains("candidate_rule") || !body["candidate_rule"].is_object() || body["candidate_rule"].size() != 1)
            throw SchemaError("candidate_rule must be an object with exactly one AST node type");
        const auto& c = body["candidate_rule"];
        return rule_from_json(c.begin().value(), language, c.begin().key());
    }

    Response validate(const nlohmann::json& body) {
        const auto rule = rule_field(body);
        registry_.at(rule.language);
        std::vector<TestCase> cases;
        if (body.contains("test_cases")) {
            if (!body["test_cases"].is_array()) throw SchemaError("test_cases must be an array");
            for (const auto& tc : body["test_cases"]) {
                if (!tc.is_object()) throw SchemaError("each test case must be an object");
                cases.push_back({field<std::string>(tc, "snippet"), field<std::string>(tc, "expected")});
            }
        } else {
            cases.push_back({rule.test_snippet, rule.expected});
        }
        auto report = validate_candidate(rule, cases);
        auto out = to_json(report);
        out["accept_token"] = nullptr;
        if (report.accepted) {
            std::lock_guard<std::mutex> g(mu_);
            prune_expired();
            auto token = new_token();
            grants_[token] = {report, now_() + cfg_.token_ttl};
            out["accept_token"] = token;
            out["expires_in"] = cfg_.token_ttl.count();
        }
        return {200, out, {}};
    }

    Response commit(const nlohmann::json& body) {
        if (!body.contains("accept_token") || !body["accept_token"].is_string())
            throw HttpError(403, "not_accepted", "commit requires an accept token from /rule/validate");
        const auto token = body["accept_token"].get<std::string>();
        const auto version = field<std::int64_t>(body, "version");
        ValidationReport report;
        {
            std::lock_guard<std::mutex> g(mu_);
            prune_expired();
            auto it = grants_.find(token);
            if (it == grants_.end()) throw HttpError(403, "not_accepted", "accept token unknown or expired");
            report = it->second.report;
        }
        if (body.contains("candidate_rule") && !(rule_field(body) == report.rule))
            throw HttpError(403, "not_accepted", "candidate rule differs from the validated one");
        const auto next = commit_rule(cfg_.rules_dir, report, version, registry_);
        {
            std::lock_guard<std::mutex> g(mu_);
            grants_.erase(token);
        }
        return {200,
                {{"version", next}, {"language", report.rule.language}, {"ast_node_type", report.rule.ast_node_type}},
                {}};
    }

    void prune_expired() {
        const auto now = now_();
        for (auto it = grants_.begin(); it != grants_.end();)
            it = it->second.expires <= now ? grants_.erase(it) : std::next(it);
    }

    std::string new_token() {
        static const char* hex = "0123456789abcdef";
        std::string t;
        for (int i = 0; i < 32; ++i) t += hex[rng_() & 15u];
        return t;
    }

    Config cfg_;
    const LanguageRegistry& registry_;
    GrammarSet grammars_;
    std::mutex mu_;
    std::map<std::string, Grant> grants_;
    std::mt19937_64 rng_{std::random_device{}()};
    std::function<Clock::time_point()> now_ = [] { return Clock::now(); };
};

}  // namespace ubsr::studio
