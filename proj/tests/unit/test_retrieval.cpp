#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "paudit/errors.hpp"
#include "paudit/llm_bridge.hpp"
#include "paudit/retrieval.hpp"
#include "paudit/scoring.hpp"
#include "synth.hpp"

using namespace paudit;
using Catch::Approx;

namespace {

QuestionRecord question(std::vector<std::string> gold, std::vector<std::string> distractors) {
    QuestionRecord q;
    q.question_id = "q";
    q.question_text = "?";
    q.expected_answers = {"x"};
    q.gold_source_ids = std::move(gold);
    q.distractor_source_ids = std::move(distractors);
    return q;
}

}  // namespace

TEST_CASE("cosine similarity", "[retrieval]") {
    Eigen::Vector3d a(1, 2, 2), b(2, 1, 2);
    CHECK(cosine_similarity(a, b) == Approx(8.0 / 9.0).epsilon(1e-12));
    CHECK(cosine_similarity(a.normalized(), a.normalized()) == 1.0);
    CHECK(cosine_similarity(Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 3)) == 0.0);
    CHECK_THROWS_AS(cosine_similarity(Eigen::VectorXd(a), Eigen::VectorXd::Ones(2)), DimensionError);
    CHECK_THROWS_AS(cosine_similarity(a, Eigen::Vector3d::Zero()), ZeroVectorError);
    Eigen::Vector3f af(1, 2, 2), bf(2, 1, 2);
    CHECK(cosine_similarity(af, bf) == Approx(8.0f / 9.0f));
}

TEST_CASE("embedding files", "[retrieval]") {
    const auto store = parse_embeddings("dim=4\n# comment\na 1 0 0 0\nb 0 1 0 0\n\nc 1 1 1 1\n", "t");
    CHECK(store.size() == 3);
    CHECK(store.dim() == 4);
    CHECK(store.row("c").sum() == 4.0);
    CHECK_THROWS_AS(store.row("zz"), MissingEmbeddingError);

    try {
        parse_embeddings("dim=4\nshort 1 2 3\n", "t");
        FAIL("expected DimensionError");
    } catch (const DimensionError& e) {
        CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("short"));
    }
    CHECK_THROWS_AS(parse_embeddings("dim=2\nx 1 nan\n", "t"), NonFiniteError);
    CHECK_THROWS_AS(parse_embeddings("dim=2\nx 1 inf\n", "t"), NonFiniteError);
    CHECK_THROWS_AS(parse_embeddings("dim=2\nx 1 1\nx 2 2\n", "t"), DuplicateError);

    const auto dir = synth::temp_dir("emb");
    save_embeddings(dir / "e.txt", store);
    const auto back = load_embeddings(dir / "e.txt");
    CHECK(back.ids() == store.ids());
    CHECK(back.row("b").isApprox(store.row("b")));
}

TEST_CASE("dense retrieval ranks by cosine", "[retrieval]") {
    EmbeddingStore store(2);
    store.insert("q", Eigen::Vector2d(1, 0));
    // cosines 0.9, 0.2, 0.5
    auto at = [](double c) { return Eigen::Vector2d(c, std::sqrt(1 - c * c)); };
    store.insert("a", at(0.9));
    store.insert("b", at(0.2));
    store.insert("c", at(0.5));

    auto r = retrieve_dense(store, question({"a"}, {"b", "c"}), 2);
    CHECK(r.retrieved == std::vector<std::string>{"a", "c"});
    REQUIRE(r.scores.size() == 2);
    CHECK(r.scores[0] == Approx(0.9));

    r = retrieve_dense(store, question({"a"}, {"b", "c"}), 5);
    CHECK(r.retrieved == std::vector<std::string>{"a", "c", "b"});

    EmbeddingStore flat(2);
    flat.insert("q", Eigen::Vector2d(1, 1));
    for (const char* id : {"d", "b", "c", "a"}) flat.insert(id, Eigen::Vector2d(2, 2));
    r = retrieve_dense(flat, question({"d"}, {"b", "c", "a"}), 2);
    CHECK(r.retrieved == std::vector<std::string>{"a", "b"});

    EmbeddingStore partial(2);
    partial.insert("q", Eigen::Vector2d(1, 1));
    partial.insert("a", Eigen::Vector2d(1, 1));
    try {
        retrieve_dense(partial, question({"a"}, {"b", "c"}), 2);
        FAIL("expected MissingEmbeddingError");
    } catch (const MissingEmbeddingError& e) {
        CHECK(e.items() == std::vector<std::string>{"b", "c"});
    }
}

TEST_CASE("oracle and random-negative bounds", "[retrieval]") {
    CHECK(retrieve_oracle(question({"img_1", "img_2"}, {"x"})).retrieved ==
          std::vector<std::string>{"img_1", "img_2"});
    CHECK(retrieve_oracle(question({"txt_5"}, {})).retrieved == std::vector<std::string>{"txt_5"});

    const auto q = question({"g"}, {"d1", "d2", "d3", "d4"});
    const auto a = retrieve_random_negative(q, 42, 2);
    CHECK(a == retrieve_random_negative(q, 42, 2));
    CHECK(a.retrieved.size() == 2);
    CHECK(distractor_count(a.retrieved, q.gold_source_ids) == 2);
    CHECK(retrieve_random_negative(question({"g"}, {"only"}), 1, 2).retrieved == std::vector<std::string>{"only"});
    CHECK_THROWS_AS(retrieve_random_negative(question({"g"}, {}), 1, 2), NoDistractorsError);

    // Different seeds eventually pick different pairs.
    bool differs = false;
    for (std::uint64_t s = 0; s < 20 && !differs; ++s) differs = retrieve_random_negative(q, s, 2) != a;
    CHECK(differs);
}

TEST_CASE("external ranking files", "[retrieval]") {
    const auto dir = synth::temp_dir("rank");
    write_text_file(dir / "r.jsonl", R"({"question_id": "q1", "retrieved": ["img_3", "img_7"]})" "\n");
    const auto rs = load_external_rankings(dir / "r.jsonl", "ext");
    REQUIRE(rs.size() == 1);
    CHECK(rs.at("q1").retrieved == std::vector<std::string>{"img_3", "img_7"});
    CHECK(rs.at("q1").retriever_id == "ext");

    write_text_file(dir / "d.jsonl", R"({"question_id": "q1", "retrieved": ["a"]})" "\n"
                                     R"({"question_id": "q1", "retrieved": ["b"]})" "\n");
    CHECK_THROWS_AS(load_external_rankings(dir / "d.jsonl", "ext"), DuplicateError);

    // Ids cited in a parsed model response survive the ranking file unchanged.
    const auto parsed = parse_llm_response("Yes [img_123, fact_7]");
    RankingSet out{{"q9", {"q9", "icr", parsed.cited_ids, {}}}};
    save_rankings(dir / "icr.jsonl", out);
    CHECK(load_external_rankings(dir / "icr.jsonl", "icr") == out);
}

TEST_CASE("embedding coverage", "[retrieval]") {
    std::mt19937_64 rng(3);
    const Dataset ds = synth::random_dataset(rng, {});
    const EmbeddingStore full = synth::random_store(rng, ds, 4);
    CHECK(check_coverage(full, ds).complete());

    EmbeddingStore some(4);
    some.insert(ds.questions()[0].question_id, Eigen::Vector4d(1, 0, 0, 0));
    const auto cov = check_coverage(some, ds);
    CHECK(cov.missing_questions.size() == ds.questions().size() - 1);
    CHECK(!cov.missing_sources.empty());
}
