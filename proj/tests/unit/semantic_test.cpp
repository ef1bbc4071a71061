#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"
#include "ubsr/extract/extractor.hpp"
#include "ubsr/semantic/semantic.hpp"

using namespace ubsr;

namespace {

const std::filesystem::path kCsv = testing_support::source_dir() / "data/semantic/functionality.csv";

SemanticRuleSet math_rules() {
    SemanticRuleSet rs({"functionality"});
    rs.add({"math", "python", {{"functionality", "Mathematics"}}});
    rs.add({"json", "python", {{"functionality", "Data Serialization"}}});
    return rs;
}

Table nodes_for(const std::vector<SourceInput>& in) {
    const ExtractionContext ctx{testing_support::grammars(), testing_support::rules(), LanguageRegistry::builtin()};
    return extract_corpus(in, ctx).tables.nodes;
}

const StringList& root_concepts(const Table& t, const std::string& doc) {
    const auto& ids = t.get<std::string>("doc_id");
    const auto& type = t.get<std::string>("node_type");
    for (std::size_t r = 0; r < t.rows(); ++r)
        if (ids[r] == doc && type[r] == "ubsr_root") return t.get<StringList>("concept_functionality")[r];
    throw std::runtime_error("no root for " + doc);
}

}  // namespace

TEST(Trie, ExactAndPrefix) {
    Trie<int> t;
    EXPECT_TRUE(t.insert("numpy", 1));
    EXPECT_TRUE(t.insert("num", 2));
    EXPECT_FALSE(t.insert("num", 3));
    EXPECT_TRUE(t.insert("", 4));
    EXPECT_EQ(*t.find("num"), 2);
    EXPECT_EQ(*t.find(""), 4);
    EXPECT_EQ(t.find("nump"), nullptr);
    EXPECT_EQ(t.find("numpyx"), nullptr);
    EXPECT_EQ(t.keys_with_prefix("nu"), (std::vector<std::string>{"num", "numpy"}));
    EXPECT_EQ(t.size(), 3u);
}

TEST(Trie, EqualsLinearScanOnRandomSets) {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> len(0, 5), ch(0, 3), n(0, 60);
    auto word = [&] {
        std::string s;
        for (int i = len(rng); i > 0; --i) s += static_cast<char>('a' + ch(rng));
        return s;
    };
    for (int round = 0; round < 200; ++round) {
        Trie<int> t;
        std::vector<std::pair<std::string, int>> linear;
        for (int i = n(rng); i > 0; --i) {
            auto w = word();
            bool dup = false;
            for (const auto& [k, v] : linear) dup = dup || k == w;
            EXPECT_EQ(t.insert(w, i), !dup);
            if (!dup) linear.emplace_back(w, i);
        }
        for (int q = 0; q < 20; ++q) {
            const auto w = word();
            const int* hit = nullptr;
            for (const auto& [k, v] : linear)
                if (k == w) hit = &v;
            const int* got = t.find(w);
            ASSERT_EQ(got == nullptr, hit == nullptr) << w;
            if (got) EXPECT_EQ(*got, *hit);
        }
    }
}

TEST(SemanticRules, Lookup) {
    const auto rs = load_semantic_rules(kCsv);
    EXPECT_EQ(rs.lookup("scikit-learn", "python", "functionality"), "Machine Learning");
    EXPECT_EQ(rs.lookup("  NumPy ", "python", "functionality"), "Mathematics");
    EXPECT_FALSE(rs.lookup("frobnicate", "python", "functionality").has_value());
    EXPECT_FALSE(rs.lookup("math", "haskell", "functionality").has_value());
    EXPECT_THROW(rs.lookup("math", "python", "framework"), SchemaError);
}

TEST(SemanticRules, ShippedDatabaseUsesTheConceptList) {
    auto rs = load_semantic_rules(kCsv);
    const auto list = load_concept_list(testing_support::source_dir() / "data/semantic/functionality_concepts.json");
    EXPECT_EQ(list.dimension, "functionality");
    EXPECT_NO_THROW(rs.set_concept_list(list));
    for (const auto& r : rs.rules()) EXPECT_TRUE(list.admits(r.concepts.at("functionality"))) << r.package_name;
}

TEST(SemanticRules, CsvRoundTripIsByteStable) {
    const auto text = read_text_file(kCsv);
    EXPECT_EQ(semantic_rules_to_csv(semantic_rules_from_csv(text)), text);
    SemanticRuleSet rs({"functionality", "framework"});
    rs.add({"a,b", "python", {{"functionality", "Say \"hi\""}}});
    rs.add({"z", "c", {{"framework", "F"}}});
    const auto back = semantic_rules_from_csv(semantic_rules_to_csv(rs));
    EXPECT_EQ(back.dimensions(), rs.dimensions());
    EXPECT_EQ(back.lookup("a,b", "python", "functionality"), "Say \"hi\"");
    EXPECT_FALSE(back.lookup("z", "c", "functionality").has_value());
    EXPECT_EQ(back.lookup("z", "c", "framework"), "F");
}

TEST(SemanticRules, Invariants) {
    SemanticRuleSet rs({"functionality"});
    rs.add({"Math", "python", {{"functionality", "Mathematics"}}});
    EXPECT_EQ(rs.rules()[0].package_name, "math");
    EXPECT_THROW(rs.add({"math ", "python", {{"functionality", "X"}}}), DuplicateKeyError);
    EXPECT_THROW(rs.add({"x", "python", {{"colour", "X"}}}), SchemaError);
    EXPECT_THROW(rs.add({"  ", "python", {}}), SchemaError);
    EXPECT_THROW(rs.set_concept_list({"functionality", {"Database"}}), SchemaError);  // Mathematics not listed
    rs.set_concept_list({"functionality", {"Mathematics", "Database"}});
    EXPECT_THROW(rs.add({"y", "python", {{"functionality", "Quantum"}}}), SchemaError);
    EXPECT_NO_THROW(rs.add({"y", "python", {{"functionality", "Others"}}}));
    EXPECT_THROW(ConceptList({"f", {"A", "A"}}).validate(), SchemaError);
    EXPECT_THROW(ConceptList({"f", {"Others"}}).validate(), SchemaError);
    EXPECT_THROW(semantic_rules_from_csv("pkg,language\n"), SchemaError);
    EXPECT_THROW(semantic_rules_from_csv("package,language,concept_f\nx,python\n"), SchemaError);
}

TEST(PackageNames, SplitsCanonicalJoin) {
    EXPECT_EQ(package_names("ubsr_package a, c"), (std::vector<std::string>{"a", "c"}));
    EXPECT_EQ(package_names("ubsr_package Math"), (std::vector<std::string>{"math"}));
    EXPECT_TRUE(package_names("ubsr_package ").empty());
}

TEST(Annotate, UnknownPackageGoesPending) {
    const auto nodes = nodes_for({{"f.py", "import frobnicate\n", "python"}});
    const auto a = annotate(nodes, math_rules(), "functionality");
    EXPECT_TRUE(root_concepts(a.table, "f.py").empty());
    ASSERT_EQ(a.pending.size(), 1u);
    EXPECT_EQ(a.pending[0], (PendingPackage{"frobnicate", "python"}));
}

TEST(Annotate, KnownPackageMapsToConcept) {
    const auto nodes = nodes_for({{"m.py", "import math\n", "python"}});
    const auto a = annotate(nodes, math_rules(), "functionality");
    EXPECT_EQ(root_concepts(a.table, "m.py"), (StringList{"Mathematics"}));
    EXPECT_TRUE(a.pending.empty());
}

TEST(Annotate, CommaJoinedNamesLookedUpIndividually) {
    const auto nodes = nodes_for({{"j.py", "import math.pi, json, zlib\n", "python"}});
    const auto a = annotate(nodes, math_rules(), "functionality");
    EXPECT_EQ(root_concepts(a.table, "j.py"), (StringList{"Mathematics", "Data Serialization"}));
    ASSERT_EQ(a.pending.size(), 1u);
    EXPECT_EQ(a.pending[0].package, "zlib");
}

TEST(Annotate, IdempotentAndPendingIsClean) {
    std::vector<SourceInput> in;
    for (const auto* name : {"python", "scala", "cpp", "typescript"})
        for (auto x : collect_inputs(testing_support::corpus_dir(name), LanguageRegistry::builtin())) {
            x.path = std::string(name) + "/" + x.path;
            in.push_back(x);
        }
    const auto nodes = nodes_for(in);
    const auto rs = load_semantic_rules(kCsv);
    const auto a = annotate(nodes, rs, "functionality");
    const auto b = annotate(a.table, rs, "functionality");
    EXPECT_EQ(a.table, b.table);
    EXPECT_EQ(a.pending, b.pending);
    std::set<PendingPackage> seen;
    for (const auto& p : a.pending) {
        EXPECT_TRUE(seen.insert(p).second);
        EXPECT_FALSE(rs.lookup(p.package, p.language, "functionality").has_value());
    }
    // Non-root rows carry empty lists; every concept is from the list or Others.
    const auto list = load_concept_list(testing_support::source_dir() / "data/semantic/functionality_concepts.json");
    const auto& type = a.table.get<std::string>("node_type");
    const auto& concepts = a.table.get<StringList>("concept_functionality");
    for (std::size_t r = 0; r < a.table.rows(); ++r) {
        if (type[r] != "ubsr_root") EXPECT_TRUE(concepts[r].empty());
        for (const auto& c : concepts[r]) EXPECT_TRUE(list.admits(c)) << c;
    }
}

TEST(Annotate, UnknownDimension) {
    EXPECT_THROW(annotate(make_node_table(), math_rules(), "framework"), SchemaError);
}

TEST(MergePending, UnionMinusMapped) {
    const std::vector<PendingPackage> existing = {{"zlib", "python"}, {"Math", "python"}, {"x", "c"}};
    const std::vector<PendingPackage> fresh = {{"x", "c"}, {"y", "c"}, {"zlib ", "python"}};
    const auto m = merge_pending(existing, fresh, math_rules(), "functionality");
    EXPECT_EQ(m, (std::vector<PendingPackage>{{"zlib", "python"}, {"x", "c"}, {"y", "c"}}));
    EXPECT_EQ(pending_from_csv(pending_to_csv(m)), m);
    EXPECT_THROW(pending_from_csv("name,lang\n"), SchemaError);
}
