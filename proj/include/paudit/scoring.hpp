#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "paudit/corpus.hpp"

namespace paudit {

/// Keyword vocabulary of a question category. `open` means every token is
/// admitted (the Other category).
struct CategoryVocabulary {
    Category category;
    std::set<std::string> keywords;
    bool open = false;

    bool admits(const std::string& canonical_token) const;
};

/// Fixed per-category keyword sets. The number set is digits 0-99 plus
/// English number words; words are canonicalized to digits before matching.
const CategoryVocabulary& category_vocabulary(Category c);

/// Lowercased tokens of `text` with non-alphanumeric ASCII mapped to spaces.
/// Bytes >= 0x80 stay inside tokens.
std::vector<std::string> tokenize(std::string_view text);

/// "two" -> "2", "hundred" -> "100"; other tokens unchanged.
std::string canonical_number(const std::string& token);

/// Restricted bag of words: tokenize, canonicalize numbers, keep tokens the
/// category vocabulary admits.
std::set<std::string> restricted_bow(std::string_view text, Category c);

enum class QaVerdict { Correct, Incorrect, Unscorable };
std::string_view to_string(QaVerdict v);

struct ScoringOptions {
    /// Also fail answers that mention category keywords absent from the
    /// expected answer (e.g. "yes and no"). Closed vocabularies only.
    bool strict = false;
};

/// Unscorable when the expected answer has an empty restricted bow;
/// otherwise Correct iff every expected keyword occurs in the generated one.
QaVerdict qa_verdict(std::string_view expected, std::string_view generated, Category c,
                     const ScoringOptions& opts = {});

/// Multi-answer form: Correct if any scorable expected answer matches,
/// Unscorable if none is scorable.
QaVerdict qa_verdict(const std::vector<std::string>& expected, std::string_view generated,
                     Category c, const ScoringOptions& opts = {});

bool qa_correct(std::string_view expected, std::string_view generated, Category c,
                const ScoringOptions& opts = {});

/// Mean of the indicators. Throws EmptySetError on an empty list.
double accuracy(std::span<const bool> outcomes);
double accuracy(const std::vector<bool>& outcomes);

/// |retrieved ∩ gold| / |retrieved|. Throws EmptyRetrievalError.
double retrieval_recall(const std::vector<std::string>& retrieved,
                        const std::vector<std::string>& gold);

/// |retrieved \ gold|.
std::size_t distractor_count(const std::vector<std::string>& retrieved,
                             const std::vector<std::string>& gold);

struct QAPrediction {
    std::string question_id;
    std::string model_id;
    std::string generated_answer;

    bool operator==(const QAPrediction&) const = default;
};

/// Prediction records: `question_id`, `model_id`, `generated_answer`.
/// Throws DuplicateError on a repeated (question_id, model_id) pair.
std::vector<QAPrediction> load_predictions(const std::filesystem::path& path);
void save_predictions(const std::filesystem::path& path, const std::vector<QAPrediction>& preds);
Json to_record(const QAPrediction& p);

}  // namespace paudit
