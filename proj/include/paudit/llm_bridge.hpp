#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "paudit/corpus.hpp"
#include "paudit/scoring.hpp"

namespace paudit {

enum class MessageRole { System, Human };
enum class MessageKind { Text, ImageRef };

/// One chat message. For ImageRef messages `content` is the media locator.
struct Message {
    MessageRole role = MessageRole::Human;
    MessageKind kind = MessageKind::Text;
    std::string content;

    /// Text as it appears in the prompt frame; image references render as
    /// "[Input_type=image]\nimage_url=<locator>".
    std::string render() const;
    bool operator==(const Message&) const = default;
};

struct MessageSequence {
    std::vector<Message> messages;
    std::vector<std::string> warnings;

    /// role-tagged transcript, one "<role>: <text>" block per message.
    std::string render() const;
    bool operator==(const MessageSequence&) const = default;
};

inline constexpr std::string_view kRetrievalInstruction =
    "Answer the question in one word. Then list the Fact_ID or Image_ID of all facts used to "
    "derive the answer in square brackets.";

/// In-context retrieval prompt: system instruction, the question, one message
/// listing all text facts, then a caption message and an image reference per
/// image candidate, in candidate order. Throws MissingMediaRefError for an
/// image candidate without a locator.
MessageSequence build_retrieval_prompt(const QuestionRecord& q,
                                       const std::vector<SourceRecord>& candidates);

/// Candidates of `q` (gold then distractors) resolved in `ds`.
std::vector<SourceRecord> prompt_candidates(const QuestionRecord& q, const Dataset& ds);

struct ParsedResponse {
    std::string answer_text;
    std::vector<std::string> cited_ids;
    std::vector<std::string> parse_warnings;
};

/// Answer is the trimmed text before the first '['; ids come from the last
/// complete bracket group, split on commas and whitespace, first occurrence
/// kept. Total: anomalies become warnings.
ParsedResponse parse_llm_response(std::string_view text);

/// `<answer> [<id>, <id>, ...]`
std::string format_llm_response(std::string_view answer, const std::vector<std::string>& ids);

// ---- QA service client ----------------------------------------------------

struct ServiceSource {
    std::string source_id;
    std::string body;
    std::optional<std::string> media_ref;
};

struct QaServiceRequest {
    std::string question_id;
    std::string question_text;
    std::vector<ServiceSource> sources;
};

QaServiceRequest make_service_request(const QuestionRecord& q, const std::vector<std::string>& source_ids,
                                      const Dataset& ds);
Json to_json(const QaServiceRequest& r);

struct QaClientOptions {
    std::string model_id = "service";
    std::chrono::milliseconds timeout{60'000};
    int max_attempts = 3;
    std::chrono::milliseconds initial_backoff{200};
    std::optional<std::string> bearer_token;
    std::size_t max_in_flight = 4;
};

struct QaServiceReply {
    QAPrediction prediction;
    std::vector<std::string> cited_ids;
    int attempts = 0;
};

/// POSTs the request as JSON to `endpoint` (http[s]://host[:port]/path).
/// Transport failures and 5xx responses are retried with exponential
/// backoff up to `max_attempts`. Throws TransportError, SchemaError (body
/// missing a field, or answering a different question) or TimeoutError.
QaServiceReply query_qa_service(const std::string& endpoint, const QaServiceRequest& request,
                                const QaClientOptions& opts = {});

/// Runs requests with at most `opts.max_in_flight` concurrent calls. Replies
/// are returned in request order, matched by question_id.
std::vector<QaServiceReply> query_qa_service_batch(const std::string& endpoint,
                                                   const std::vector<QaServiceRequest>& requests,
                                                   const QaClientOptions& opts = {});

}  // namespace paudit
