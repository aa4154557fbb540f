#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "paudit/errors.hpp"
#include "paudit/complexity.hpp"

using namespace paudit;
using Catch::Approx;

TEST_CASE("syllables", "[complexity]") {
    CHECK(count_syllables("cat") == 1);
    CHECK(count_syllables("window") == 2);
    CHECK(count_syllables("sentence") == 2);
    CHECK(count_syllables("the") == 1);
    CHECK(count_syllables("beautiful") == 3);
    CHECK(count_syllables("Rhythm") == 1);
    CHECK(count_syllables("b") == 1);
}

TEST_CASE("words and sentences", "[complexity]") {
    CHECK(word_count("How tall is it?") == 4);
    CHECK(sentence_count("How tall is it?") == 1);
    CHECK(word_count("") == 0);
    CHECK(sentence_count("") == 0);
    CHECK(sentence_count("A. B.") == 2);
    CHECK(sentence_count("It costs 3.5 dollars") == 1);
    CHECK(words_of("Hello, world -- again!") == std::vector<std::string>{"Hello", "world", "again"});
}

TEST_CASE("readability formulas", "[complexity]") {
    CHECK(fkgl("The cat sat on the mat.") == Approx(-1.45).margin(1e-9));
    CHECK(gfi("The cat sat on the mat.") == Approx(2.4).margin(1e-9));
    CHECK(fkgl("The cat sat on the mat. The cat sat on the mat.") == Approx(fkgl("The cat sat on the mat.")).margin(1e-12));

    const char* fifteen = "the cat sat on a mat and the dog ran to the big red box.";
    REQUIRE(word_count(fifteen) == 15);
    CHECK(fkgl(fifteen) == Approx(2.06).margin(1e-9));

    const char* ten = "The beautiful animal ran to the big red barn today.";
    REQUIRE(word_count(ten) == 10);
    CHECK(gfi(ten) == Approx(12.0).margin(1e-9));

    CHECK(gfi("Beautiful animals.") == Approx(0.4 * 2 + 40).margin(1e-9));
    CHECK_THROWS_AS(fkgl(""), EmptyTextError);
    CHECK_THROWS_AS(gfi("?!"), EmptyTextError);
}

TEST_CASE("complexity bins", "[complexity]") {
    ProfileMap profiles;
    std::vector<JoinedOutcome> outcomes;
    std::mt19937_64 rng(5);
    for (std::size_t bin = 0; bin < 5; ++bin) {
        const double p = 0.9 - 0.15 * static_cast<double>(bin);
        for (std::size_t i = 0; i < 300; ++i) {
            const std::string id = fmt::format("q{}_{:03}", bin, i);
            ComplexityProfile pr;
            pr.question_id = id;
            pr.word_count = 5 * bin + 1 + i % 5;
            profiles[id] = pr;
            outcomes.push_back({id, "r", "m", i % 2 ? 1.0 : 0.0, std::bernoulli_distribution(p)(rng), 0,
                                QuestionModality::TextBased, Category::Other});
        }
    }
    const auto bins = bin_by_complexity(outcomes, profiles, ComplexityMeasure::Words, {1, 6, 11, 16, 21, 26});
    REQUIRE(bins.size() == 5);
    std::size_t total = 0;
    for (std::size_t i = 0; i < bins.size(); ++i) {
        total += bins[i].n;
        CHECK(bins[i].n == 300);
        if (i) CHECK(*bins[i].qa_acc < *bins[i - 1].qa_acc);
    }
    CHECK(total == outcomes.size());

    const auto one = bin_by_complexity(outcomes, profiles, ComplexityMeasure::Words, {0, 100});
    CHECK(*one[0].qa_acc == Approx(outcome_accuracy(outcomes)).margin(1e-12));
    CHECK(*one[0].mean_recall == Approx(mean_recall(outcomes)).margin(1e-12));

    const auto q = quintile_edges(profiles, ComplexityMeasure::Words);
    CHECK(q.front() == 1.0);
    CHECK(q.back() > 25.0);
    const auto qb = bin_by_complexity(outcomes, profiles, ComplexityMeasure::Words, q);
    std::size_t qt = 0;
    for (const auto& b : qb) qt += b.n;
    CHECK(qt == outcomes.size());

    CHECK_THROWS_AS(bin_by_complexity(outcomes, profiles, ComplexityMeasure::Words, {1, 1}), ConfigError);
    CHECK_THROWS_AS(bin_by_complexity(outcomes, profiles, ComplexityMeasure::Words, {1, 10}), CoverageError);
    const auto empty = bin_by_complexity({}, profiles, ComplexityMeasure::Words, {0, 1});
    CHECK_FALSE(empty[0].qa_acc.has_value());
}

TEST_CASE("question profiles", "[complexity]") {
    const auto p = complexity_profile("q", "The beautiful animal ran to the big red barn today.");
    CHECK(p.word_count == 10);
    CHECK(p.sentence_count == 1);
    CHECK(p.complex_word_count == 2);
    CHECK(p.gfi == Approx(12.0));
    CHECK(measure_value(p, ComplexityMeasure::Words) == 10.0);
    CHECK(complexity_profile("e", "").fkgl == 0.0);
}
