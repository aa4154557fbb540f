#include "paudit/corpus.hpp"

#include <algorithm>
#include <set>
#include <unordered_set>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "paudit/errors.hpp"

namespace paudit {

namespace fs = std::filesystem;

std::string_view to_string(SourceModality m) {
    return m == SourceModality::Image ? "image" : "text";
}

std::string_view to_string(Category c) {
    switch (c) {
        case Category::YesNo: return "yesno";
        case Category::Color: return "color";
        case Category::Shape: return "shape";
        case Category::Number: return "number";
        case Category::Other: return "other";
    }
    return "other";
}

std::string_view to_string(QuestionModality m) {
    return m == QuestionModality::ImageBased ? "image" : "text";
}

SourceModality parse_source_modality(std::string_view s) {
    if (s == "text") return SourceModality::Text;
    if (s == "image") return SourceModality::Image;
    throw ParseError(fmt::format("unknown source modality '{}'", s));
}

Category parse_category(std::string_view s) {
    if (s == "yesno") return Category::YesNo;
    if (s == "color") return Category::Color;
    if (s == "shape") return Category::Shape;
    if (s == "number") return Category::Number;
    if (s == "other") return Category::Other;
    throw ParseError(fmt::format("unknown category '{}'", s));
}

QuestionModality parse_question_modality(std::string_view s) {
    if (s == "image") return QuestionModality::ImageBased;
    if (s == "text") return QuestionModality::TextBased;
    throw ParseError(fmt::format("unknown question modality '{}'", s));
}

DatasetFormat parse_dataset_format(std::string_view s) {
    if (s == "normalized") return DatasetFormat::Normalized;
    if (s == "webqa" || s == "webqa-raw") return DatasetFormat::WebQARaw;
    throw ParseError(fmt::format("unknown dataset format '{}'", s));
}

std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::DuplicateQuestionId: return "duplicate_question_id";
        case ViolationKind::DuplicateSourceId: return "duplicate_source_id";
        case ViolationKind::DanglingSourceId: return "dangling_source_id";
        case ViolationKind::GoldDistractorOverlap: return "gold_distractor_overlap";
        case ViolationKind::EmptyGold: return "empty_gold";
        case ViolationKind::EmptyExpectedAnswers: return "empty_expected_answers";
        case ViolationKind::EmptyImageCaption: return "empty_image_caption";
        case ViolationKind::ImageGoldCount: return "image_gold_count";
    }
    return "unknown";
}

std::vector<std::string> QuestionRecord::candidate_ids() const {
    std::vector<std::string> ids = gold_source_ids;
    ids.insert(ids.end(), distractor_source_ids.begin(), distractor_source_ids.end());
    return ids;
}

Dataset::Dataset(std::vector<QuestionRecord> questions, std::vector<SourceRecord> sources,
                 std::string split_name)
    : questions_(std::move(questions)), sources_(std::move(sources)), split_(std::move(split_name)) {
    for (std::size_t i = 0; i < sources_.size(); ++i)
        source_index_.try_emplace(sources_[i].source_id, i);
    for (std::size_t i = 0; i < questions_.size(); ++i)
        question_index_.try_emplace(questions_[i].question_id, i);

    // Derive modality where the gold ids resolve; unresolved questions are
    // left for validate_dataset to report.
    for (auto& q : questions_) {
        bool resolved = true;
        bool any_image = false;
        for (const auto& id : q.gold_source_ids) {
            const SourceRecord* s = find_source(id);
            if (!s) {
                resolved = false;
                break;
            }
            any_image = any_image || s->modality == SourceModality::Image;
        }
        if (resolved)
            q.modality = any_image ? QuestionModality::ImageBased : QuestionModality::TextBased;
    }
}

const SourceRecord* Dataset::find_source(std::string_view id) const {
    auto it = source_index_.find(std::string(id));
    return it == source_index_.end() ? nullptr : &sources_[it->second];
}

const QuestionRecord* Dataset::find_question(std::string_view id) const {
    auto it = question_index_.find(std::string(id));
    return it == question_index_.end() ? nullptr : &questions_[it->second];
}

std::size_t ValidationReport::count(ViolationKind k) const {
    return static_cast<std::size_t>(std::count_if(violations.begin(), violations.end(),
                                                  [k](const Violation& v) { return v.kind == k; }));
}

QuestionModality classify_modality(const QuestionRecord& q, const Dataset& ds) {
    std::vector<std::string> missing;
    bool any_image = false;
    for (const auto& id : q.gold_source_ids) {
        const SourceRecord* s = ds.find_source(id);
        if (!s)
            missing.push_back(id);
        else if (s->modality == SourceModality::Image)
            any_image = true;
    }
    if (!missing.empty())
        throw IntegrityError(fmt::format("question {} references unknown gold source(s): {}",
                                         q.question_id, fmt::join(missing, ", ")),
                             missing);
    return any_image ? QuestionModality::ImageBased : QuestionModality::TextBased;
}

ValidationReport validate_dataset(const Dataset& ds) {
    ValidationReport report;
    auto add = [&](ViolationKind kind, const std::string& id, std::string msg) {
        report.violations.push_back({kind, id, std::move(msg)});
    };

    std::unordered_set<std::string> seen_sources;
    for (const auto& s : ds.sources()) {
        if (!seen_sources.insert(s.source_id).second)
            add(ViolationKind::DuplicateSourceId, s.source_id,
                fmt::format("source id '{}' appears more than once", s.source_id));
        if (s.modality == SourceModality::Image && s.body.empty())
            add(ViolationKind::EmptyImageCaption, s.source_id,
                fmt::format("image source '{}' has no caption", s.source_id));
    }

    std::unordered_set<std::string> seen_questions;
    for (const auto& q : ds.questions()) {
        const std::string& qid = q.question_id;
        if (!seen_questions.insert(qid).second)
            add(ViolationKind::DuplicateQuestionId, qid,
                fmt::format("question id '{}' appears more than once", qid));
        if (q.expected_answers.empty())
            add(ViolationKind::EmptyExpectedAnswers, qid,
                fmt::format("question '{}' has no expected answers", qid));
        if (q.gold_source_ids.empty())
            add(ViolationKind::EmptyGold, qid, fmt::format("question '{}' has no gold sources", qid));

        std::set<std::string> gold(q.gold_source_ids.begin(), q.gold_source_ids.end());
        for (const auto& d : q.distractor_source_ids)
            if (gold.count(d))
                add(ViolationKind::GoldDistractorOverlap, qid,
                    fmt::format("question '{}' lists '{}' as both gold and distractor", qid, d));

        for (const auto& id : q.candidate_ids())
            if (!ds.find_source(id))
                add(ViolationKind::DanglingSourceId, qid,
                    fmt::format("question '{}' references unknown source '{}'", qid, id));

        std::size_t gold_images = 0;
        for (const auto& id : q.gold_source_ids)
            if (const auto* s = ds.find_source(id); s && s->modality == SourceModality::Image)
                ++gold_images;
        if (gold_images > 2)
            add(ViolationKind::ImageGoldCount, qid,
                fmt::format("image question '{}' has {} gold image sources (expected 1 or 2)", qid,
                            gold_images));
    }
    return report;
}

Json to_record(const SourceRecord& s) {
    Json j = {{"source_id", s.source_id},
              {"modality", std::string(to_string(s.modality))},
              {"body", s.body}};
    if (s.media_ref) j["media_ref"] = *s.media_ref;
    return j;
}

Json to_record(const QuestionRecord& q) {
    return {{"question_id", q.question_id},
            {"question_text", q.question_text},
            {"category", std::string(to_string(q.category))},
            {"expected_answers", q.expected_answers},
            {"gold_source_ids", q.gold_source_ids},
            {"distractor_source_ids", q.distractor_source_ids}};
}

SourceRecord source_from_record(const Json& rec, std::string_view ctx) {
    SourceRecord s;
    s.source_id = required_string(rec, "source_id", ctx);
    try {
        s.modality = parse_source_modality(required_string(rec, "modality", ctx));
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", ctx, e.what()));
    }
    s.body = required_string(rec, "body", ctx);
    s.media_ref = optional_string(rec, "media_ref", ctx);
    return s;
}

QuestionRecord question_from_record(const Json& rec, std::string_view ctx) {
    QuestionRecord q;
    q.question_id = required_string(rec, "question_id", ctx);
    q.question_text = required_string(rec, "question_text", ctx);
    try {
        q.category = parse_category(required_string(rec, "category", ctx));
    } catch (const ParseError& e) {
        throw ParseError(fmt::format("{}: {}", ctx, e.what()));
    }
    q.expected_answers = required_string_list(rec, "expected_answers", ctx);
    q.gold_source_ids = required_string_list(rec, "gold_source_ids", ctx);
    q.distractor_source_ids = required_string_list(rec, "distractor_source_ids", ctx);
    return q;
}

namespace {

Dataset load_normalized(const DatasetLocation& where) {
    if (where.sources.empty())
        throw ParseError("normalized datasets need a sources file alongside the questions file");
    std::vector<QuestionRecord> questions;
    for (const auto& r : read_records(where.questions))
        questions.push_back(question_from_record(r.value, record_context(where.questions, r.line)));
    std::vector<SourceRecord> sources;
    for (const auto& r : read_records(where.sources))
        sources.push_back(source_from_record(r.value, record_context(where.sources, r.line)));
    return Dataset(std::move(questions), std::move(sources), where.split);
}

// WebQA question/answer strings are usually wrapped in literal quotes.
std::string unquote(std::string s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
    return s;
}

std::string json_id(const Json& v, std::string_view ctx, std::string_view field) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw ParseError(fmt::format("{}: field '{}' must be a string or integer id", ctx, field));
}

Category webqa_category(std::string_view qcate) {
    if (qcate == "YesNo") return Category::YesNo;
    if (qcate == "color") return Category::Color;
    if (qcate == "shape") return Category::Shape;
    if (qcate == "number") return Category::Number;
    return Category::Other;
}

}  // namespace

Dataset dataset_from_webqa(const Json& root, std::string_view split, std::string_view context) {
    if (!root.is_object())
        throw ParseError(fmt::format("{}: WebQA file must be an object keyed by guid", context));

    std::vector<QuestionRecord> questions;
    std::vector<SourceRecord> sources;
    std::unordered_set<std::string> have_source;

    for (const auto& [guid, rec] : root.items()) {
        const std::string ctx = fmt::format("{} [{}]", context, guid);
        if (!rec.is_object()) throw ParseError(fmt::format("{}: record is not an object", ctx));
        if (!split.empty()) {
            auto sp = optional_string(rec, "split", ctx);
            if (!sp || *sp != split) continue;
        }

        QuestionRecord q;
        q.question_id = rec.contains("Guid") ? json_id(rec["Guid"], ctx, "Guid") : guid;
        q.question_text = unquote(required_string(rec, "Q", ctx));
        for (auto& a : required_string_list(rec, "A", ctx)) q.expected_answers.push_back(unquote(a));
        q.category = webqa_category(optional_string(rec, "Qcate", ctx).value_or(""));

        auto take_facts = [&](std::string_view field, SourceModality modality,
                              std::vector<std::string>& ids) {
            auto it = rec.find(field);
            if (it == rec.end()) return;
            if (!it->is_array())
                throw ParseError(fmt::format("{}: field '{}' must be a list", ctx, field));
            for (const auto& fact : *it) {
                SourceRecord s;
                s.modality = modality;
                if (modality == SourceModality::Image) {
                    if (!fact.contains("image_id"))
                        throw ParseError(fmt::format("{}: image fact without 'image_id'", ctx));
                    s.source_id = json_id(fact["image_id"], ctx, "image_id");
                    s.body = optional_string(fact, "caption", ctx).value_or("");
                    s.media_ref = optional_string(fact, "imgUrl", ctx);
                    if (!s.media_ref) s.media_ref = optional_string(fact, "url", ctx);
                } else {
                    s.source_id = required_string(fact, "snippet_id", ctx);
                    s.body = required_string(fact, "fact", ctx);
                    s.media_ref = optional_string(fact, "url", ctx);
                }
                ids.push_back(s.source_id);
                // Facts recur across questions; keep the first copy.
                if (have_source.insert(s.source_id).second) sources.push_back(std::move(s));
            }
        };
        take_facts("img_posFacts", SourceModality::Image, q.gold_source_ids);
        take_facts("txt_posFacts", SourceModality::Text, q.gold_source_ids);
        take_facts("img_negFacts", SourceModality::Image, q.distractor_source_ids);
        take_facts("txt_negFacts", SourceModality::Text, q.distractor_source_ids);
        questions.push_back(std::move(q));
    }
    return Dataset(std::move(questions), std::move(sources), std::string(split));
}

Dataset load_dataset(const DatasetLocation& where) {
    Dataset ds;
    if (where.format == DatasetFormat::Normalized) {
        ds = load_normalized(where);
    } else {
        Json root;
        try {
            root = Json::parse(read_text_file(where.questions));
        } catch (const Json::parse_error& e) {
            throw ParseError(fmt::format("{}: malformed WebQA file: {}", where.questions.string(),
                                         e.what()));
        }
        ds = dataset_from_webqa(root, where.split, where.questions.string());
    }

    ValidationReport report = validate_dataset(ds);
    if (!report.ok()) {
        std::vector<std::string> lines;
        for (const auto& v : report.violations)
            lines.push_back(fmt::format("{}: {}", to_string(v.kind), v.message));
        throw IntegrityError(fmt::format("{} dataset violation(s):\n  {}", lines.size(),
                                         fmt::join(lines, "\n  ")),
                             lines);
    }
    return ds;
}

void save_dataset(const Dataset& ds, const fs::path& questions, const fs::path& sources) {
    std::vector<Json> qrecs;
    for (const auto& q : ds.questions()) qrecs.push_back(to_record(q));
    std::vector<Json> srecs;
    for (const auto& s : ds.sources()) srecs.push_back(to_record(s));
    write_records(questions, qrecs);
    write_records(sources, srecs);
}

ModalityCounts modality_counts(const Dataset& ds) {
    ModalityCounts c;
    for (const auto& q : ds.questions()) {
        if (q.modality == QuestionModality::TextBased) {
            ++c.text_only;
            continue;
        }
        std::size_t images = 0;
        for (const auto& id : q.gold_source_ids)
            if (const auto* s = ds.find_source(id); s && s->modality == SourceModality::Image)
                ++images;
        if (images == 1)
            ++c.one_image;
        else if (images == 2)
            ++c.two_image;
        else
            ++c.other_image;
    }
    return c;
}

}  // namespace paudit
