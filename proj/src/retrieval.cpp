#include "paudit/retrieval.hpp"

#include <algorithm>
#include <charconv>
#include <random>
#include <set>
#include <sstream>

#include <fmt/ranges.h>

#include "paudit/records.hpp"

namespace paudit {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> distinct(const std::vector<std::string>& ids) {
    std::vector<std::string> out;
    std::set<std::string_view> seen;
    for (const auto& id : ids)
        if (seen.insert(id).second) out.push_back(id);
    return out;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Unbiased draw in [0, n). std::uniform_int_distribution differs between
// standard libraries, which would make rankings platform-dependent.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t limit = std::mt19937_64::max() - (std::mt19937_64::max() % n);
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

double parse_real(std::string_view tok, std::string_view ctx) {
    // strtod accepts "nan"/"inf", which must surface as NonFiniteError, not ParseError.
    std::string s(tok);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size())
        throw ParseError(fmt::format("{}: '{}' is not a number", ctx, tok));
    return v;
}

}  // namespace

std::uint64_t question_seed(std::uint64_t run_seed, std::string_view question_id) {
    return splitmix64(run_seed ^ fnv1a64(question_id));
}

EmbeddingStore parse_embeddings(std::string_view text, std::string_view context) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t lineno = 0;
    std::optional<EmbeddingStore> store;

    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const std::string ctx = fmt::format("{}:{}", context, lineno);

        if (!store) {
            std::string_view head(line);
            head.remove_prefix(first);
            while (!head.empty() && (head.back() == ' ' || head.back() == '\t')) head.remove_suffix(1);
            if (head.substr(0, 4) != "dim=")
                throw ParseError(fmt::format("{}: expected 'dim=<n>' header", ctx));
            long dim = 0;
            auto digits = head.substr(4);
            auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), dim);
            if (ec != std::errc() || p != digits.data() + digits.size() || dim <= 0)
                throw ParseError(fmt::format("{}: bad dimension '{}'", ctx, digits));
            store.emplace(dim);
            continue;
        }

        std::istringstream row(line);
        std::string id;
        row >> id;
        std::vector<double> values;
        std::string tok;
        while (row >> tok) values.push_back(parse_real(tok, ctx));
        if (static_cast<Eigen::Index>(values.size()) != store->dim())
            throw DimensionError(fmt::format("{}: embedding '{}' has {} values, expected {}", ctx, id,
                                             values.size(), store->dim()));
        try {
            store->insert(id, Eigen::Map<const Eigen::VectorXd>(values.data(),
                                                                static_cast<Eigen::Index>(values.size())));
        } catch (const NonFiniteError&) {
            throw NonFiniteError(fmt::format("{}: embedding '{}' has a non-finite value", ctx, id));
        } catch (const DuplicateError&) {
            throw DuplicateError(fmt::format("{}: embedding id '{}' appears twice", ctx, id));
        }
    }
    if (!store) throw ParseError(fmt::format("{}: missing 'dim=<n>' header", context));
    return std::move(*store);
}

EmbeddingStore load_embeddings(const fs::path& path) {
    return parse_embeddings(read_text_file(path), path.string());
}

void save_embeddings(const fs::path& path, const EmbeddingStore& store) {
    std::string out = fmt::format("dim={}\n", store.dim());
    for (const auto& id : store.ids()) {
        out += id;
        for (double v : store.row(id)) out += fmt::format(" {}", v);
        out += '\n';
    }
    write_text_file(path, out);
}

RankedRetrieval retrieve_dense(const EmbeddingStore& store, const QuestionRecord& q, std::size_t k,
                               std::string retriever_id) {
    const std::vector<std::string> candidates = distinct(q.candidate_ids());

    std::vector<std::string> missing;
    if (!store.contains(q.question_id)) missing.push_back(q.question_id);
    for (const auto& id : candidates)
        if (!store.contains(id)) missing.push_back(id);
    if (!missing.empty())
        throw MissingEmbeddingError(fmt::format("question {}: missing embeddings for {}",
                                                q.question_id, fmt::join(missing, ", ")),
                                    missing);

    const auto query = store.row(q.question_id);
    std::vector<std::pair<double, const std::string*>> scored;
    scored.reserve(candidates.size());
    for (const auto& id : candidates) scored.emplace_back(cosine_similarity(query, store.row(id)), &id);

    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return *a.second < *b.second;
    });
    // Re-order runs of near-equal scores by id so ulp-level noise cannot
    // outrank the tie-break.
    for (std::size_t head = 0; head < scored.size();) {
        std::size_t end = head + 1;
        while (end < scored.size() && scored[head].first - scored[end].first <= kScoreTieTolerance) ++end;
        std::sort(scored.begin() + static_cast<std::ptrdiff_t>(head),
                  scored.begin() + static_cast<std::ptrdiff_t>(end),
                  [](const auto& a, const auto& b) { return *a.second < *b.second; });
        head = end;
    }

    RankedRetrieval out{q.question_id, std::move(retriever_id), {}, {}};
    const std::size_t take = std::min(k, scored.size());
    for (std::size_t i = 0; i < take; ++i) {
        out.retrieved.push_back(*scored[i].second);
        out.scores.push_back(scored[i].first);
    }
    return out;
}

RankedRetrieval retrieve_oracle(const QuestionRecord& q, std::string retriever_id) {
    return {q.question_id, std::move(retriever_id), distinct(q.gold_source_ids), {}};
}

RankedRetrieval retrieve_random_negative(const QuestionRecord& q, std::uint64_t run_seed,
                                         std::size_t k, std::string retriever_id) {
    std::vector<std::string> pool = distinct(q.distractor_source_ids);
    if (pool.empty())
        throw NoDistractorsError(
            fmt::format("question {} has no distractor sources to sample", q.question_id));

    std::mt19937_64 rng(question_seed(run_seed, q.question_id));
    const std::size_t take = std::min(k, pool.size());
    for (std::size_t i = 0; i < take; ++i) {
        const auto j = i + static_cast<std::size_t>(bounded(rng, pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    return {q.question_id, std::move(retriever_id), std::move(pool), {}};
}

Json to_record(const RankedRetrieval& r) {
    Json j = {{"question_id", r.question_id}, {"retrieved", r.retrieved}};
    if (!r.scores.empty()) j["scores"] = r.scores;
    return j;
}

RankingSet load_external_rankings(const fs::path& path, std::string_view retriever_id) {
    RankingSet out;
    for (const auto& rec : read_records(path)) {
        const std::string ctx = record_context(path, rec.line);
        RankedRetrieval r;
        r.question_id = required_string(rec.value, "question_id", ctx);
        r.retriever_id = std::string(retriever_id);
        r.retrieved = required_string_list(rec.value, "retrieved", ctx);
        if (std::set<std::string>(r.retrieved.begin(), r.retrieved.end()).size() != r.retrieved.size())
            throw ParseError(fmt::format("{}: retrieved ids must be distinct", ctx));
        if (auto it = rec.value.find("scores"); it != rec.value.end() && !it->is_null()) {
            if (!it->is_array() || it->size() != r.retrieved.size())
                throw ParseError(fmt::format("{}: 'scores' must parallel 'retrieved'", ctx));
            for (const auto& s : *it) {
                if (!s.is_number()) throw ParseError(fmt::format("{}: scores must be numbers", ctx));
                r.scores.push_back(s.get<double>());
            }
        }
        if (out.count(r.question_id))
            throw DuplicateError(
                fmt::format("{}: second ranking for question '{}'", ctx, r.question_id));
        out.emplace(r.question_id, std::move(r));
    }
    return out;
}

void save_rankings(const fs::path& path, const RankingSet& rankings) {
    std::vector<Json> recs;
    recs.reserve(rankings.size());
    for (const auto& [qid, r] : rankings) recs.push_back(to_record(r));
    write_records(path, recs);
}

EmbeddingCoverage check_coverage(const EmbeddingStore& store, const Dataset& ds) {
    EmbeddingCoverage cov;
    std::set<std::string> missing_sources;
    for (const auto& q : ds.questions()) {
        ++cov.questions_checked;
        if (!store.contains(q.question_id)) cov.missing_questions.push_back(q.question_id);
        for (const auto& id : q.candidate_ids())
            if (!store.contains(id)) missing_sources.insert(id);
    }
    cov.missing_sources.assign(missing_sources.begin(), missing_sources.end());
    return cov;
}

}  // namespace paudit
