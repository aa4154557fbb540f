#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paudit/corpus.hpp"
#include "paudit/retrieval.hpp"
#include "paudit/scoring.hpp"

namespace paudit {

/// One scored question of a (retriever, model) cell.
struct JoinedOutcome {
    std::string question_id;
    std::string retriever_id;
    std::string model_id;
    double recall = 0.0;
    bool qa_correct = false;
    std::size_t distractors = 0;
    QuestionModality modality = QuestionModality::TextBased;
    Category category = Category::Other;

    bool operator==(const JoinedOutcome&) const = default;
};

/// Outcomes sorted by question_id, plus the questions that could not be
/// scored and why.
struct JoinResult {
    std::string retriever_id;
    std::string model_id;
    std::vector<JoinedOutcome> outcomes;
    std::vector<std::string> unscorable;          // expected answer outside the vocabulary
    std::vector<std::string> missing_prediction;  // dataset question without a prediction

    bool operator==(const JoinResult&) const = default;
};

/// Joins one model's predictions with one retriever's rankings. Throws
/// JoinError listing every prediction whose question is unknown or has no
/// ranking, and every ranking that cites an unknown source.
JoinResult join_outcomes(const RankingSet& retrievals, const std::vector<QAPrediction>& predictions,
                         const Dataset& ds, const ScoringOptions& opts = {});

/// Cell artifact records: one per question, with a `status` of
/// scored | unscorable | missing_prediction.
std::vector<Json> to_records(const JoinResult& jr);
JoinResult join_result_from_records(const std::vector<Record>& recs, std::string_view context);
Json to_record(const JoinedOutcome& o);

/// No gold source retrieved.
inline bool retrieval_failed(const JoinedOutcome& o) { return o.recall == 0.0; }

/// P(QA correct | retrieval failed). Throws NoFailuresError when no outcome
/// has a failed retrieval.
double ucr(const std::vector<JoinedOutcome>& outcomes);

/// acc_random / acc_oracle. Throws ZeroOracleError.
double ppr(double acc_random, double acc_oracle);

struct RpaValue {
    double value = 0.0;
    bool out_of_range = false;  // value outside [0, 1]; returned unclamped
};

/// (acc_r - acc_random) / (acc_oracle - acc_random). Throws
/// DegenerateBoundsError when the bounds coincide.
RpaValue rpa(double acc_r, double acc_random, double acc_oracle);

/// How a retrieval counts as a success in the confusion cells.
enum class SuccessRule {
    AnyGold,  // recall > 0, the complement of the UCR failure condition
    AllGold,  // recall == 1
};
std::string_view to_string(SuccessRule r);
SuccessRule parse_success_rule(std::string_view s);

struct ConfusionCounts {
    std::size_t r1q1 = 0;
    std::size_t r1q0 = 0;
    std::size_t r0q1 = 0;
    std::size_t r0q0 = 0;

    std::size_t total() const noexcept { return r1q1 + r1q0 + r0q1 + r0q0; }
    bool operator==(const ConfusionCounts&) const = default;
};

ConfusionCounts confusion_counts(const std::vector<JoinedOutcome>& outcomes,
                                 SuccessRule rule = SuccessRule::AnyGold);

struct DistractorBucket {
    std::size_t n = 0;
    double acc = 0.0;

    bool operator==(const DistractorBucket&) const = default;
};

std::map<std::size_t, DistractorBucket> accuracy_by_distractors(
    const std::vector<JoinedOutcome>& outcomes);

/// A metric that may be undefined for a cell or slice; `reason` is a short
/// code (no_failures, no_bounds, zero_oracle, degenerate_bounds, empty).
struct MaybeMetric {
    std::optional<double> value;
    std::string reason;
    bool out_of_range = false;

    static MaybeMetric of(double v, bool oor = false) { return {v, {}, oor}; }
    static MaybeMetric undefined(std::string why) { return {std::nullopt, std::move(why), false}; }
    bool defined() const noexcept { return value.has_value(); }
    bool operator==(const MaybeMetric&) const = default;
};

struct Interval {
    double low = 0.0;
    double high = 0.0;
    bool operator==(const Interval&) const = default;
};

/// Wilson score interval for `successes` out of `n` trials (n > 0).
Interval wilson_interval(std::size_t successes, std::size_t n, double z = 1.959963984540054);

struct SliceMetrics {
    std::size_t n = 0;
    MaybeMetric acc;
    MaybeMetric ucr;
    MaybeMetric ppr;

    bool operator==(const SliceMetrics&) const = default;
};

struct CategorySlice {
    std::size_t n = 0;
    MaybeMetric acc;
    std::size_t failures = 0;  // outcomes with failed retrieval
    MaybeMetric ucr;
    std::optional<Interval> ucr_ci95;

    bool operator==(const CategorySlice&) const = default;
};

/// Oracle and random-negative outcomes for the same model, when available.
struct BoundRuns {
    const std::vector<JoinedOutcome>* random = nullptr;
    const std::vector<JoinedOutcome>* oracle = nullptr;
};

/// Per-modality acc/ucr/ppr. Empty slices report n = 0 and undefined
/// metrics rather than failing.
std::map<QuestionModality, SliceMetrics> modality_split(const std::vector<JoinedOutcome>& outcomes,
                                                        BoundRuns bounds = {});

struct MetricReport {
    std::string retriever_id;
    std::string model_id;
    std::size_t n_scored = 0;
    std::size_t n_unscorable = 0;
    std::size_t n_missing = 0;
    MaybeMetric acc;
    MaybeMetric mean_recall;
    MaybeMetric ucr;
    MaybeMetric ppr;
    MaybeMetric rpa;
    std::map<QuestionModality, SliceMetrics> per_modality;
    std::map<Category, CategorySlice> per_category;
    ConfusionCounts confusion;
    std::map<std::size_t, DistractorBucket> distractor_curve;

    bool operator==(const MetricReport&) const = default;
};

MetricReport build_metric_report(const JoinResult& cell, BoundRuns bounds = {},
                                 SuccessRule rule = SuccessRule::AnyGold);

/// Mean correctness of a non-empty outcome list.
double outcome_accuracy(const std::vector<JoinedOutcome>& outcomes);
double mean_recall(const std::vector<JoinedOutcome>& outcomes);

}  // namespace paudit
