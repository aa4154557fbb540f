#include <catch2/catch_amalgamated.hpp>

#include "paudit/errors.hpp"
#include "paudit/scoring.hpp"
#include "synth.hpp"

using namespace paudit;
using Set = std::set<std::string>;

TEST_CASE("category vocabularies", "[scoring]") {
    CHECK(category_vocabulary(Category::YesNo).keywords == Set{"yes", "no"});
    const auto& color = category_vocabulary(Category::Color).keywords;
    CHECK(color.size() == 36);
    for (const char* w : {"teal", "bluewhite", "chrome", "yes"}) CHECK(color.count(w));
    const auto& shape = category_vocabulary(Category::Shape).keywords;
    for (const char* w : {"octogon", "bellshaped", "torus"}) CHECK(shape.count(w));
    CHECK(category_vocabulary(Category::Other).open);
    CHECK(category_vocabulary(Category::Number).admits("42"));
    CHECK(category_vocabulary(Category::Number).admits("100"));
    CHECK_FALSE(category_vocabulary(Category::Number).admits("101"));
}

TEST_CASE("restricted bag of words", "[scoring]") {
    CHECK(tokenize("Yes, it IS.") == std::vector<std::string>{"yes", "it", "is"});
    CHECK(tokenize("caf\xC3\xA9-bar") == std::vector<std::string>{"caf\xC3\xA9", "bar"});
    CHECK(restricted_bow("Yes, it is.", Category::YesNo) == Set{"yes"});
    CHECK(restricted_bow("The rainbow arch", Category::Color) == Set{"rainbow"});
    CHECK(restricted_bow("The rainbow arch", Category::Shape) == Set{"arch"});
    CHECK(restricted_bow("", Category::Other).empty());
    CHECK(restricted_bow("", Category::Number).empty());
    CHECK(restricted_bow("Twenty or 20 or twelve", Category::Number) == Set{"20", "12"});
    CHECK(canonical_number("hundred") == "100");
    CHECK(canonical_number("tower") == "tower");
}

TEST_CASE("qa verdicts", "[scoring]") {
    CHECK(qa_correct("yes", "Yes, the tower is taller.", Category::YesNo));
    CHECK_FALSE(qa_correct("blue", "It is teal.", Category::Color));
    CHECK(qa_correct("two", "There are 2 statues", Category::Number));
    CHECK(qa_verdict("maybe", "yes", Category::YesNo) == QaVerdict::Unscorable);
    CHECK(qa_verdict("red and white", "white", Category::Color) == QaVerdict::Incorrect);

    CHECK(qa_correct("yes", "yes and no", Category::YesNo));
    CHECK_FALSE(qa_correct("yes", "yes and no", Category::YesNo, {true}));
    CHECK(qa_correct("the eiffel tower", "It is the Eiffel Tower in paris", Category::Other, {true}));

    const std::vector<std::string> answers = {"perhaps", "red"};
    CHECK(qa_verdict(answers, "red", Category::Color) == QaVerdict::Correct);
    CHECK(qa_verdict(answers, "blue", Category::Color) == QaVerdict::Incorrect);
    CHECK(qa_verdict(std::vector<std::string>{"perhaps"}, "blue", Category::Color) == QaVerdict::Unscorable);
}

TEST_CASE("accuracy and recall", "[scoring]") {
    CHECK(accuracy(std::vector<bool>{true, true, false, false}) == 0.5);
    CHECK(accuracy(std::vector<bool>{true, true, true}) == 1.0);
    CHECK_THROWS_AS(accuracy(std::vector<bool>{}), EmptySetError);

    CHECK(retrieval_recall({"a", "c"}, {"a", "b"}) == 0.5);
    CHECK(retrieval_recall({"a"}, {"a", "b"}) == 1.0);
    CHECK(retrieval_recall({"x", "y"}, {"a", "b"}) == 0.0);
    CHECK_THROWS_AS(retrieval_recall({}, {"a"}), EmptyRetrievalError);

    CHECK(distractor_count({"a", "c"}, {"a", "b"}) == 1);
    CHECK(distractor_count({"a", "b"}, {"a", "b"}) == 0);
}

TEST_CASE("prediction files", "[scoring]") {
    const auto dir = synth::temp_dir("pred");
    const std::vector<QAPrediction> preds = {{"q1", "m", "yes"}, {"q2", "m", "no"}, {"q1", "n", "no"}};
    save_predictions(dir / "p.jsonl", preds);
    CHECK(load_predictions(dir / "p.jsonl") == preds);

    write_text_file(dir / "dup.jsonl", R"({"question_id":"q1","model_id":"m","generated_answer":"a"})" "\n"
                                       R"({"question_id":"q1","model_id":"m","generated_answer":"b"})" "\n");
    CHECK_THROWS_AS(load_predictions(dir / "dup.jsonl"), DuplicateError);
    write_text_file(dir / "bad.jsonl", R"({"question_id":"q1","model_id":"m"})" "\n");
    CHECK_THROWS_AS(load_predictions(dir / "bad.jsonl"), ParseError);
}
