#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "paudit/records.hpp"

namespace paudit {

enum class SourceModality { Text, Image };
enum class Category { YesNo, Color, Shape, Number, Other };
enum class QuestionModality { ImageBased, TextBased };

std::string_view to_string(SourceModality m);
std::string_view to_string(Category c);
std::string_view to_string(QuestionModality m);
SourceModality parse_source_modality(std::string_view s);
Category parse_category(std::string_view s);
QuestionModality parse_question_modality(std::string_view s);

/// A candidate source. For images `body` holds the caption and `media_ref`
/// the image locator.
struct SourceRecord {
    std::string source_id;
    SourceModality modality = SourceModality::Text;
    std::string body;
    std::optional<std::string> media_ref;

    bool operator==(const SourceRecord&) const = default;
};

struct QuestionRecord {
    std::string question_id;
    std::string question_text;
    Category category = Category::Other;
    std::vector<std::string> expected_answers;
    std::vector<std::string> gold_source_ids;
    std::vector<std::string> distractor_source_ids;
    /// Derived from the gold sources when the dataset is built.
    QuestionModality modality = QuestionModality::TextBased;

    /// gold followed by distractors, in record order.
    std::vector<std::string> candidate_ids() const;

    bool operator==(const QuestionRecord&) const = default;
};

/// Immutable after construction. Sources keep file order; lookups go through
/// an id index. Duplicate ids are kept so validation can report them.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<QuestionRecord> questions, std::vector<SourceRecord> sources,
            std::string split_name = {});

    const std::vector<QuestionRecord>& questions() const noexcept { return questions_; }
    const std::vector<SourceRecord>& sources() const noexcept { return sources_; }
    const std::string& split_name() const noexcept { return split_; }

    const SourceRecord* find_source(std::string_view id) const;
    const QuestionRecord* find_question(std::string_view id) const;

    bool operator==(const Dataset& other) const {
        return questions_ == other.questions_ && sources_ == other.sources_ &&
               split_ == other.split_;
    }

private:
    std::vector<QuestionRecord> questions_;
    std::vector<SourceRecord> sources_;
    std::string split_;
    std::unordered_map<std::string, std::size_t> source_index_;
    std::unordered_map<std::string, std::size_t> question_index_;
};

enum class ViolationKind {
    DuplicateQuestionId,
    DuplicateSourceId,
    DanglingSourceId,
    GoldDistractorOverlap,
    EmptyGold,
    EmptyExpectedAnswers,
    EmptyImageCaption,
    ImageGoldCount,
};

std::string_view to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string subject_id;  // question or source id the violation is about
    std::string message;

    bool operator==(const Violation&) const = default;
};

struct ValidationReport {
    std::vector<Violation> violations;

    bool ok() const noexcept { return violations.empty(); }
    std::size_t count(ViolationKind k) const;

    bool operator==(const ValidationReport&) const = default;
};

/// ImageBased iff any gold source is an image. Throws IntegrityError when a
/// gold id does not resolve in `ds`.
QuestionModality classify_modality(const QuestionRecord& q, const Dataset& ds);

/// Lists every invariant violation in one pass; never throws.
ValidationReport validate_dataset(const Dataset& ds);

enum class DatasetFormat { Normalized, WebQARaw };
DatasetFormat parse_dataset_format(std::string_view s);

struct DatasetLocation {
    std::filesystem::path questions;
    /// Required for Normalized; ignored for WebQARaw (sources are inline).
    std::filesystem::path sources;
    DatasetFormat format = DatasetFormat::Normalized;
    /// WebQARaw: keep only records whose "split" equals this (empty = all).
    std::string split;
};

/// Loads and validates. Throws ParseError on malformed input and
/// IntegrityError listing every violation when validation fails.
Dataset load_dataset(const DatasetLocation& where);

/// WebQA release JSON (object keyed by guid) already in memory.
Dataset dataset_from_webqa(const Json& root, std::string_view split, std::string_view context);

Json to_record(const SourceRecord& s);
Json to_record(const QuestionRecord& q);
SourceRecord source_from_record(const Json& rec, std::string_view context);
QuestionRecord question_from_record(const Json& rec, std::string_view context);

/// Writes the normalized question and source files.
void save_dataset(const Dataset& ds, const std::filesystem::path& questions,
                  const std::filesystem::path& sources);

struct ModalityCounts {
    std::size_t text_only = 0;
    std::size_t one_image = 0;
    std::size_t two_image = 0;
    std::size_t other_image = 0;  // image-based with any other gold-image count
};

ModalityCounts modality_counts(const Dataset& ds);

}  // namespace paudit
