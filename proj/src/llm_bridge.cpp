#include "paudit/llm_bridge.hpp"

#include <set>

#include <fmt/format.h>

#include "paudit/errors.hpp"

namespace paudit {

namespace {

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

std::string Message::render() const {
    if (kind == MessageKind::ImageRef) return fmt::format("[Input_type=image]\nimage_url={}", content);
    return content;
}

std::string MessageSequence::render() const {
    std::string out;
    for (const auto& m : messages) {
        if (!out.empty()) out += "\n\n";
        out += m.role == MessageRole::System ? "system: " : "human: ";
        out += m.render();
    }
    return out;
}

MessageSequence build_retrieval_prompt(const QuestionRecord& q,
                                       const std::vector<SourceRecord>& candidates) {
    MessageSequence seq;
    seq.messages.push_back({MessageRole::System, MessageKind::Text, std::string(kRetrievalInstruction)});
    seq.messages.push_back({MessageRole::Human, MessageKind::Text, "Question: " + q.question_text});

    if (candidates.empty()) {
        seq.warnings.push_back(fmt::format("question {} has no candidate sources", q.question_id));
        return seq;
    }

    std::string facts;
    for (const auto& s : candidates) {
        if (s.modality != SourceModality::Text) continue;
        if (!facts.empty()) facts += ", ";
        facts += fmt::format("{}: {}", s.source_id, s.body);
    }
    if (!facts.empty())
        seq.messages.push_back({MessageRole::Human, MessageKind::Text, "Text Facts:\n[" + facts + "]"});

    for (const auto& s : candidates) {
        if (s.modality != SourceModality::Image) continue;
        if (!s.media_ref || s.media_ref->empty())
            throw MissingMediaRefError(
                fmt::format("image source {} has no media locator", s.source_id));
        seq.messages.push_back({MessageRole::Human, MessageKind::Text,
                                fmt::format("Image_ID: {},\nCaption: {}", s.source_id, s.body)});
        seq.messages.push_back({MessageRole::Human, MessageKind::ImageRef, *s.media_ref});
    }
    return seq;
}

std::vector<SourceRecord> prompt_candidates(const QuestionRecord& q, const Dataset& ds) {
    std::vector<SourceRecord> out;
    std::vector<std::string> missing;
    for (const auto& id : q.candidate_ids()) {
        if (const auto* s = ds.find_source(id))
            out.push_back(*s);
        else
            missing.push_back(id);
    }
    if (!missing.empty())
        throw IntegrityError(fmt::format("question {} has unresolved candidates", q.question_id),
                             missing);
    return out;
}

ParsedResponse parse_llm_response(std::string_view text) {
    ParsedResponse out;
    const auto first_open = text.find('[');
    out.answer_text = std::string(trim(text.substr(0, first_open)));
    if (out.answer_text.empty()) out.parse_warnings.push_back("empty answer before source list");

    std::vector<std::string_view> groups;
    std::size_t pos = first_open;
    while (pos != std::string_view::npos) {
        const auto close = text.find(']', pos + 1);
        const auto next_open = text.find('[', pos + 1);
        if (close == std::string_view::npos) {
            out.parse_warnings.push_back("unclosed '[' in response");
            break;
        }
        if (next_open != std::string_view::npos && next_open < close) {
            out.parse_warnings.push_back("nested or unbalanced '[' in response");
            pos = next_open;
            continue;
        }
        groups.push_back(text.substr(pos + 1, close - pos - 1));
        pos = text.find('[', close + 1);
    }

    if (groups.empty()) {
        out.parse_warnings.push_back("no bracketed source list in response");
        return out;
    }
    if (groups.size() > 1)
        out.parse_warnings.push_back(
            fmt::format("{} bracketed groups in response; using the last", groups.size()));

    std::set<std::string> seen;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        if (seen.insert(cur).second)
            out.cited_ids.push_back(cur);
        else
            out.parse_warnings.push_back(fmt::format("duplicate cited id '{}'", cur));
        cur.clear();
    };
    for (char c : groups.back()) {
        if (c == ',' || c == ' ' || c == '\t' || c == '\n' || c == '\r')
            flush();
        else
            cur.push_back(c);
    }
    flush();
    return out;
}

std::string format_llm_response(std::string_view answer, const std::vector<std::string>& ids) {
    std::string list;
    for (const auto& id : ids) {
        if (!list.empty()) list += ", ";
        list += id;
    }
    return fmt::format("{} [{}]", answer, list);
}

QaServiceRequest make_service_request(const QuestionRecord& q, const std::vector<std::string>& source_ids,
                                      const Dataset& ds) {
    QaServiceRequest r{q.question_id, q.question_text, {}};
    for (const auto& id : source_ids) {
        const auto* s = ds.find_source(id);
        if (!s)
            throw IntegrityError(fmt::format("question {}: unknown source {}", q.question_id, id),
                                 std::vector<std::string>{id});
        r.sources.push_back({s->source_id, s->body, s->media_ref});
    }
    return r;
}

Json to_json(const QaServiceRequest& r) {
    Json sources = Json::array();
    for (const auto& s : r.sources) {
        Json j = {{"source_id", s.source_id}, {"body", s.body}};
        if (s.media_ref) j["media_ref"] = *s.media_ref;
        sources.push_back(std::move(j));
    }
    return {{"question_id", r.question_id}, {"question_text", r.question_text}, {"sources", sources}};
}

}  // namespace paudit
