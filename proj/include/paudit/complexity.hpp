#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paudit/corpus.hpp"
#include "paudit/metrics.hpp"

namespace paudit {

/// Vowel-group heuristic: count maximal runs of a/e/i/o/u/y, minus one for a
/// terminal silent 'e' (a lone 'e' after a consonant) when other groups
/// exist. Never below 1 for a non-empty word.
std::size_t count_syllables(std::string_view word);

/// Whitespace tokens with punctuation stripped; empty tokens dropped.
std::vector<std::string> words_of(std::string_view text);
std::size_t word_count(std::string_view text);

/// Segments ended by '.', '!' or '?' (followed by whitespace or end of
/// text). Non-empty text counts at least one sentence.
std::size_t sentence_count(std::string_view text);

/// Flesch-Kincaid grade level. Throws EmptyTextError when there are no words.
double fkgl(std::string_view text);

/// Gunning-Fog index, complex words having three or more syllables.
/// Throws EmptyTextError when there are no words.
double gfi(std::string_view text);

struct ComplexityProfile {
    std::string question_id;
    std::size_t word_count = 0;
    std::size_t sentence_count = 0;
    std::size_t syllable_count = 0;
    std::size_t complex_word_count = 0;
    double fkgl = 0.0;  // 0 for texts without words
    double gfi = 0.0;
};

ComplexityProfile complexity_profile(std::string_view question_id, std::string_view text);

using ProfileMap = std::map<std::string, ComplexityProfile>;  // by question_id

ProfileMap profile_questions(const Dataset& ds);

enum class ComplexityMeasure { Words, FKGL, GFI };
std::string_view to_string(ComplexityMeasure m);
ComplexityMeasure parse_complexity_measure(std::string_view s);
inline constexpr ComplexityMeasure kAllMeasures[] = {ComplexityMeasure::Words,
                                                     ComplexityMeasure::FKGL,
                                                     ComplexityMeasure::GFI};

double measure_value(const ComplexityProfile& p, ComplexityMeasure m);

struct ComplexityBin {
    double low = 0.0;
    double high = 0.0;
    std::size_t n = 0;
    std::optional<double> qa_acc;       // undefined for empty bins
    std::optional<double> mean_recall;

    bool operator==(const ComplexityBin&) const = default;
};

/// Half-open bins [edges[i], edges[i+1]). Throws ConfigError when edges are
/// not strictly increasing (or fewer than two), CoverageError when a
/// question is missing a profile or falls outside every bin.
std::vector<ComplexityBin> bin_by_complexity(const std::vector<JoinedOutcome>& outcomes,
                                             const ProfileMap& profiles, ComplexityMeasure m,
                                             const std::vector<double>& edges);

/// Quintile edges of the measure over `profiles`, deduplicated; the last
/// edge sits just above the maximum so every value is covered.
std::vector<double> quintile_edges(const ProfileMap& profiles, ComplexityMeasure m);

}  // namespace paudit
