#include "paudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "paudit/errors.hpp"

namespace paudit {

std::string_view to_string(SuccessRule r) { return r == SuccessRule::AllGold ? "all_gold" : "any_gold"; }

SuccessRule parse_success_rule(std::string_view s) {
    if (s == "any_gold") return SuccessRule::AnyGold;
    if (s == "all_gold") return SuccessRule::AllGold;
    throw ConfigError(fmt::format("unknown success rule '{}' (any_gold|all_gold)", s));
}

JoinResult join_outcomes(const RankingSet& retrievals, const std::vector<QAPrediction>& predictions,
                         const Dataset& ds, const ScoringOptions& opts) {
    JoinResult jr;
    std::vector<std::string> problems;
    std::set<std::string> predicted;

    if (!retrievals.empty()) jr.retriever_id = retrievals.begin()->second.retriever_id;
    if (!predictions.empty()) jr.model_id = predictions.front().model_id;

    for (const auto& p : predictions) {
        if (p.model_id != jr.model_id) {
            problems.push_back(fmt::format("prediction {} is for model '{}', expected '{}'",
                                           p.question_id, p.model_id, jr.model_id));
            continue;
        }
        if (!predicted.insert(p.question_id).second) {
            problems.push_back(fmt::format("duplicate prediction for {}", p.question_id));
            continue;
        }
        const QuestionRecord* q = ds.find_question(p.question_id);
        if (!q) {
            problems.push_back(fmt::format("prediction for unknown question {}", p.question_id));
            continue;
        }
        auto rit = retrievals.find(p.question_id);
        if (rit == retrievals.end()) {
            problems.push_back(fmt::format("no ranking for question {}", p.question_id));
            continue;
        }
        const RankedRetrieval& r = rit->second;
        if (r.retrieved.empty()) {
            problems.push_back(fmt::format("empty ranking for question {}", p.question_id));
            continue;
        }
        bool resolved = true;
        for (const auto& id : r.retrieved) {
            if (!ds.find_source(id)) {
                problems.push_back(
                    fmt::format("ranking for {} cites unknown source {}", p.question_id, id));
                resolved = false;
            }
        }
        if (!resolved) continue;

        const QaVerdict verdict = qa_verdict(q->expected_answers, p.generated_answer, q->category, opts);
        if (verdict == QaVerdict::Unscorable) {
            jr.unscorable.push_back(q->question_id);
            continue;
        }
        jr.outcomes.push_back({q->question_id, r.retriever_id, p.model_id,
                               retrieval_recall(r.retrieved, q->gold_source_ids),
                               verdict == QaVerdict::Correct,
                               distractor_count(r.retrieved, q->gold_source_ids), q->modality,
                               q->category});
    }
    if (!problems.empty())
        throw JoinError(fmt::format("cannot join {} prediction(s):\n  {}", problems.size(),
                                    fmt::join(problems, "\n  ")),
                        problems);

    for (const auto& q : ds.questions())
        if (!predicted.count(q.question_id)) jr.missing_prediction.push_back(q.question_id);

    std::sort(jr.outcomes.begin(), jr.outcomes.end(),
              [](const auto& a, const auto& b) { return a.question_id < b.question_id; });
    std::sort(jr.unscorable.begin(), jr.unscorable.end());
    std::sort(jr.missing_prediction.begin(), jr.missing_prediction.end());
    return jr;
}

Json to_record(const JoinedOutcome& o) {
    return {{"status", "scored"},
            {"question_id", o.question_id},
            {"retriever_id", o.retriever_id},
            {"model_id", o.model_id},
            {"recall", o.recall},
            {"qa_correct", o.qa_correct},
            {"distractors", o.distractors},
            {"modality", std::string(to_string(o.modality))},
            {"category", std::string(to_string(o.category))}};
}

std::vector<Json> to_records(const JoinResult& jr) {
    std::vector<Json> out;
    for (const auto& o : jr.outcomes) out.push_back(to_record(o));
    auto status_line = [&](const char* status, const std::string& qid) {
        out.push_back({{"status", status},
                       {"question_id", qid},
                       {"retriever_id", jr.retriever_id},
                       {"model_id", jr.model_id}});
    };
    for (const auto& q : jr.unscorable) status_line("unscorable", q);
    for (const auto& q : jr.missing_prediction) status_line("missing_prediction", q);
    return out;
}

JoinResult join_result_from_records(const std::vector<Record>& recs, std::string_view context) {
    JoinResult jr;
    for (const auto& rec : recs) {
        const std::string ctx = fmt::format("{}:{}", context, rec.line);
        const Json& j = rec.value;
        const std::string status = required_string(j, "status", ctx);
        const std::string qid = required_string(j, "question_id", ctx);
        jr.retriever_id = required_string(j, "retriever_id", ctx);
        jr.model_id = required_string(j, "model_id", ctx);
        if (status == "unscorable") {
            jr.unscorable.push_back(qid);
        } else if (status == "missing_prediction") {
            jr.missing_prediction.push_back(qid);
        } else if (status == "scored") {
            JoinedOutcome o;
            o.question_id = qid;
            o.retriever_id = jr.retriever_id;
            o.model_id = jr.model_id;
            try {
                o.recall = j.at("recall").get<double>();
                o.qa_correct = j.at("qa_correct").get<bool>();
                o.distractors = j.at("distractors").get<std::size_t>();
                o.modality = parse_question_modality(required_string(j, "modality", ctx));
                o.category = parse_category(required_string(j, "category", ctx));
            } catch (const Json::exception& e) {
                throw ParseError(fmt::format("{}: bad outcome record: {}", ctx, e.what()));
            } catch (const ParseError& e) {
                throw ParseError(fmt::format("{}: {}", ctx, e.what()));
            }
            jr.outcomes.push_back(std::move(o));
        } else {
            throw ParseError(fmt::format("{}: unknown outcome status '{}'", ctx, status));
        }
    }
    std::sort(jr.outcomes.begin(), jr.outcomes.end(),
              [](const auto& a, const auto& b) { return a.question_id < b.question_id; });
    std::sort(jr.unscorable.begin(), jr.unscorable.end());
    std::sort(jr.missing_prediction.begin(), jr.missing_prediction.end());
    return jr;
}

double ucr(const std::vector<JoinedOutcome>& outcomes) {
    std::size_t failed = 0;
    std::size_t failed_correct = 0;
    for (const auto& o : outcomes) {
        if (!retrieval_failed(o)) continue;
        ++failed;
        if (o.qa_correct) ++failed_correct;
    }
    if (failed == 0) throw NoFailuresError("UCR is undefined: no retrieval failures");
    return static_cast<double>(failed_correct) / static_cast<double>(failed);
}

double ppr(double acc_random, double acc_oracle) {
    if (acc_oracle <= 0.0) throw ZeroOracleError("PPR is undefined: oracle accuracy is zero");
    return acc_random / acc_oracle;
}

RpaValue rpa(double acc_r, double acc_random, double acc_oracle) {
    if (acc_oracle == acc_random)
        throw DegenerateBoundsError("RPA is undefined: oracle and random accuracies are equal");
    const double v = (acc_r - acc_random) / (acc_oracle - acc_random);
    return {v, v < 0.0 || v > 1.0};
}

ConfusionCounts confusion_counts(const std::vector<JoinedOutcome>& outcomes, SuccessRule rule) {
    ConfusionCounts c;
    for (const auto& o : outcomes) {
        const bool success = rule == SuccessRule::AnyGold ? o.recall > 0.0 : o.recall == 1.0;
        if (success)
            (o.qa_correct ? c.r1q1 : c.r1q0)++;
        else
            (o.qa_correct ? c.r0q1 : c.r0q0)++;
    }
    return c;
}

std::map<std::size_t, DistractorBucket> accuracy_by_distractors(
    const std::vector<JoinedOutcome>& outcomes) {
    std::map<std::size_t, std::pair<std::size_t, std::size_t>> tally;  // n, correct
    for (const auto& o : outcomes) {
        auto& t = tally[o.distractors];
        ++t.first;
        if (o.qa_correct) ++t.second;
    }
    std::map<std::size_t, DistractorBucket> out;
    for (const auto& [d, t] : tally)
        out[d] = {t.first, static_cast<double>(t.second) / static_cast<double>(t.first)};
    return out;
}

Interval wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) throw EmptySetError("Wilson interval needs at least one trial");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

double outcome_accuracy(const std::vector<JoinedOutcome>& outcomes) {
    if (outcomes.empty()) throw EmptySetError("accuracy of an empty outcome set is undefined");
    const auto hits = std::count_if(outcomes.begin(), outcomes.end(),
                                    [](const JoinedOutcome& o) { return o.qa_correct; });
    return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

double mean_recall(const std::vector<JoinedOutcome>& outcomes) {
    if (outcomes.empty()) throw EmptySetError("mean recall of an empty outcome set is undefined");
    // Summing in sorted order makes the result independent of outcome order.
    std::vector<double> r;
    r.reserve(outcomes.size());
    for (const auto& o : outcomes) r.push_back(o.recall);
    std::sort(r.begin(), r.end());
    double sum = 0.0;
    for (double x : r) sum += x;
    return sum / static_cast<double>(r.size());
}

namespace {

MaybeMetric maybe_acc(const std::vector<JoinedOutcome>& v) {
    return v.empty() ? MaybeMetric::undefined("empty") : MaybeMetric::of(outcome_accuracy(v));
}

MaybeMetric maybe_ucr(const std::vector<JoinedOutcome>& v) {
    if (v.empty()) return MaybeMetric::undefined("empty");
    try {
        return MaybeMetric::of(ucr(v));
    } catch (const NoFailuresError&) {
        return MaybeMetric::undefined("no_failures");
    }
}

MaybeMetric maybe_ppr(const std::vector<JoinedOutcome>* random,
                      const std::vector<JoinedOutcome>* oracle) {
    if (!random || !oracle) return MaybeMetric::undefined("no_bounds");
    if (random->empty() || oracle->empty()) return MaybeMetric::undefined("empty");
    try {
        return MaybeMetric::of(ppr(outcome_accuracy(*random), outcome_accuracy(*oracle)));
    } catch (const ZeroOracleError&) {
        return MaybeMetric::undefined("zero_oracle");
    }
}

template <typename Pred>
std::vector<JoinedOutcome> filter(const std::vector<JoinedOutcome>& v, Pred pred) {
    std::vector<JoinedOutcome> out;
    std::copy_if(v.begin(), v.end(), std::back_inserter(out), pred);
    return out;
}

}  // namespace

std::map<QuestionModality, SliceMetrics> modality_split(const std::vector<JoinedOutcome>& outcomes,
                                                        BoundRuns bounds) {
    std::map<QuestionModality, SliceMetrics> out;
    for (QuestionModality m : {QuestionModality::ImageBased, QuestionModality::TextBased}) {
        auto of_m = [m](const JoinedOutcome& o) { return o.modality == m; };
        const auto slice = filter(outcomes, of_m);
        SliceMetrics s;
        s.n = slice.size();
        s.acc = maybe_acc(slice);
        s.ucr = maybe_ucr(slice);
        if (bounds.random && bounds.oracle) {
            const auto r = filter(*bounds.random, of_m);
            const auto o = filter(*bounds.oracle, of_m);
            s.ppr = maybe_ppr(&r, &o);
        } else {
            s.ppr = MaybeMetric::undefined("no_bounds");
        }
        out.emplace(m, std::move(s));
    }
    return out;
}

MetricReport build_metric_report(const JoinResult& cell, BoundRuns bounds, SuccessRule rule) {
    MetricReport r;
    r.retriever_id = cell.retriever_id;
    r.model_id = cell.model_id;
    r.n_scored = cell.outcomes.size();
    r.n_unscorable = cell.unscorable.size();
    r.n_missing = cell.missing_prediction.size();

    const auto& v = cell.outcomes;
    r.acc = maybe_acc(v);
    r.mean_recall = v.empty() ? MaybeMetric::undefined("empty") : MaybeMetric::of(mean_recall(v));
    r.ucr = maybe_ucr(v);
    r.ppr = maybe_ppr(bounds.random, bounds.oracle);

    if (!bounds.random || !bounds.oracle) {
        r.rpa = MaybeMetric::undefined("no_bounds");
    } else if (v.empty() || bounds.random->empty() || bounds.oracle->empty()) {
        r.rpa = MaybeMetric::undefined("empty");
    } else {
        try {
            const RpaValue x = rpa(outcome_accuracy(v), outcome_accuracy(*bounds.random),
                                   outcome_accuracy(*bounds.oracle));
            r.rpa = MaybeMetric::of(x.value, x.out_of_range);
        } catch (const DegenerateBoundsError&) {
            r.rpa = MaybeMetric::undefined("degenerate_bounds");
        }
    }

    r.per_modality = modality_split(v, bounds);

    for (Category c : {Category::YesNo, Category::Color, Category::Shape, Category::Number,
                       Category::Other}) {
        const auto slice = filter(v, [c](const JoinedOutcome& o) { return o.category == c; });
        if (slice.empty()) continue;
        CategorySlice cs;
        cs.n = slice.size();
        cs.acc = maybe_acc(slice);
        std::size_t failed_correct = 0;
        for (const auto& o : slice) {
            if (!retrieval_failed(o)) continue;
            ++cs.failures;
            if (o.qa_correct) ++failed_correct;
        }
        cs.ucr = maybe_ucr(slice);
        if (cs.failures > 0) cs.ucr_ci95 = wilson_interval(failed_correct, cs.failures);
        r.per_category.emplace(c, std::move(cs));
    }

    r.confusion = confusion_counts(v, rule);
    r.distractor_curve = accuracy_by_distractors(v);
    return r;
}

}  // namespace paudit
