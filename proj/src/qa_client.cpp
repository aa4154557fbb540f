#include <algorithm>
#include <atomic>
#include <exception>
#include <regex>
#include <thread>

#include <fmt/format.h>
#include <httplib.h>

#include "paudit/errors.hpp"
#include "paudit/llm_bridge.hpp"
#include "paudit/logging.hpp"

namespace paudit {

namespace {

struct Endpoint {
    std::string base;  // scheme://host[:port]
    std::string path;
};

Endpoint split_endpoint(const std::string& url) {
    static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(url, m, re))
        throw TransportError(fmt::format("malformed endpoint '{}' (expected http[s]://host[:port]/path)", url));
    return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

QaServiceReply decode_reply(const std::string& body, const QaServiceRequest& req,
                            const QaClientOptions& opts) {
    Json j;
    try {
        j = Json::parse(body);
    } catch (const Json::parse_error& e) {
        throw SchemaError(fmt::format("question {}: response is not JSON: {}", req.question_id, e.what()));
    }
    if (!j.is_object()) throw SchemaError(fmt::format("question {}: response is not an object", req.question_id));
    for (const char* field : {"question_id", "answer"}) {
        auto it = j.find(field);
        if (it == j.end() || !it->is_string())
            throw SchemaError(fmt::format("question {}: response field '{}' missing or not a string",
                                          req.question_id, field));
    }
    if (j["question_id"].get<std::string>() != req.question_id)
        throw SchemaError(fmt::format("question {}: response answers question '{}'", req.question_id,
                                      j["question_id"].get<std::string>()));

    QaServiceReply reply;
    reply.prediction = {req.question_id, opts.model_id, j["answer"].get<std::string>()};
    if (auto it = j.find("cited_ids"); it != j.end() && !it->is_null()) {
        if (!it->is_array()) throw SchemaError(fmt::format("question {}: 'cited_ids' must be a list", req.question_id));
        for (const auto& id : *it) {
            if (!id.is_string())
                throw SchemaError(fmt::format("question {}: 'cited_ids' must hold strings", req.question_id));
            reply.cited_ids.push_back(id.get<std::string>());
        }
    }
    return reply;
}

}  // namespace

QaServiceReply query_qa_service(const std::string& endpoint, const QaServiceRequest& request,
                                const QaClientOptions& opts) {
    const Endpoint ep = split_endpoint(endpoint);
    const std::string body = to_json(request).dump();
    auto log = logger();

    httplib::Client client(ep.base);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(opts.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(opts.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());

    httplib::Headers headers;
    if (opts.bearer_token) headers.emplace("Authorization", "Bearer " + *opts.bearer_token);

    const int attempts = std::max(1, opts.max_attempts);
    auto backoff = opts.initial_backoff;
    bool last_was_timeout = false;
    std::string last_error;

    for (int attempt = 1; attempt <= attempts; ++attempt) {
        log->debug("question {}: POST {} attempt {}/{} request={}", request.question_id, endpoint,
                   attempt, attempts, body);
        auto res = client.Post(ep.path, headers, body, "application/json");
        if (res && res->status >= 200 && res->status < 300) {
            log->debug("question {}: response status {} body={}", request.question_id, res->status,
                       res->body);
            QaServiceReply reply = decode_reply(res->body, request, opts);
            reply.attempts = attempt;
            log->info("question {}: answered after {} attempt(s)", request.question_id, attempt);
            return reply;
        }
        if (res && res->status < 500) {
            throw TransportError(fmt::format("question {}: {} returned HTTP {}", request.question_id,
                                             endpoint, res->status));
        }
        if (res) {
            last_was_timeout = false;
            last_error = fmt::format("HTTP {}", res->status);
        } else {
            const auto err = res.error();
            last_was_timeout = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
            last_error = httplib::to_string(err);
        }
        log->warn("question {}: attempt {}/{} failed ({})", request.question_id, attempt, attempts,
                  last_error);
        if (attempt < attempts) {
            std::this_thread::sleep_for(backoff);
            backoff *= 2;
        }
    }
    const std::string msg = fmt::format("question {}: {} failed after {} attempt(s): {}",
                                        request.question_id, endpoint, attempts, last_error);
    if (last_was_timeout) throw TimeoutError(msg);
    throw TransportError(msg);
}

std::vector<QaServiceReply> query_qa_service_batch(const std::string& endpoint,
                                                   const std::vector<QaServiceRequest>& requests,
                                                   const QaClientOptions& opts) {
    std::vector<QaServiceReply> replies(requests.size());
    std::vector<std::exception_ptr> errors(requests.size());
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < requests.size(); i = next++) {
            try {
                replies[i] = query_qa_service(endpoint, requests[i], opts);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const std::size_t n_threads = std::clamp<std::size_t>(opts.max_in_flight, 1, std::max<std::size_t>(requests.size(), 1));
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return replies;
}

}  // namespace paudit
