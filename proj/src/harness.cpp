#include "paudit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <set>
#include <thread>

#include <fmt/format.h>

#include "paudit/errors.hpp"
#include "paudit/llm_bridge.hpp"
#include "paudit/logging.hpp"
#include "paudit/records.hpp"

namespace paudit {

namespace fs = std::filesystem;

std::string_view to_string(RetrieverKind k) {
    switch (k) {
        case RetrieverKind::Dense: return "dense";
        case RetrieverKind::Oracle: return "oracle";
        case RetrieverKind::RandomNegative: return "random_negative";
        case RetrieverKind::External: return "external";
    }
    return "oracle";
}

RetrieverKind parse_retriever_kind(std::string_view s) {
    if (s == "dense") return RetrieverKind::Dense;
    if (s == "oracle") return RetrieverKind::Oracle;
    if (s == "random_negative" || s == "random") return RetrieverKind::RandomNegative;
    if (s == "external") return RetrieverKind::External;
    throw ConfigError(fmt::format("unknown retriever kind '{}' (dense|oracle|random_negative|external)", s));
}

std::size_t RunReport::failed_cells() const {
    return static_cast<std::size_t>(
        std::count_if(cells.begin(), cells.end(), [](const CellReport& c) { return !c.ok(); }));
}

// ---- config ------------------------------------------------------------------

namespace {

void check_keys(const Json& j, std::string_view where, std::initializer_list<std::string_view> allowed) {
    if (!j.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
    for (const auto& [key, value] : j.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(fmt::format("unknown key '{}' in {}", key, where));
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback, std::string_view where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return fallback;
    try {
        return it->get<T>();
    } catch (const Json::exception&) {
        throw ConfigError(fmt::format("{}.{} has the wrong type", where, key));
    }
}

fs::path resolve(const fs::path& base, const std::string& p) {
    if (p.empty()) return {};
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

std::string sanitize(std::string_view id) {
    std::string out;
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                        c == '-' || c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

std::string substitute(std::string pattern, std::string_view retriever, std::string_view model) {
    auto replace_all = [&](std::string_view key, std::string_view value) {
        for (auto pos = pattern.find(key); pos != std::string::npos; pos = pattern.find(key, pos + value.size()))
            pattern.replace(pos, key.size(), value);
    };
    replace_all("{retriever}", retriever);
    replace_all("{model}", model);
    return pattern;
}

}  // namespace

RunConfig run_config_from_json(const Json& j, const fs::path& base_dir) {
    check_keys(j, "config", {"dataset", "retrievers", "models", "metrics", "output_dir", "seed", "threads"});
    RunConfig c;

    const Json ds = j.value("dataset", Json::object());
    check_keys(ds, "dataset", {"questions", "sources", "format", "split"});
    c.dataset.questions = resolve(base_dir, get_or<std::string>(ds, "questions", "", "dataset"));
    c.dataset.sources = resolve(base_dir, get_or<std::string>(ds, "sources", "", "dataset"));
    try {
        c.dataset.format = parse_dataset_format(get_or<std::string>(ds, "format", "normalized", "dataset"));
    } catch (const ParseError& e) {
        throw ConfigError(e.what());
    }
    c.dataset.split = get_or<std::string>(ds, "split", "", "dataset");

    const Json rets = j.value("retrievers", Json::array());
    if (!rets.is_array()) throw ConfigError("retrievers must be a list");
    for (const auto& r : rets) {
        check_keys(r, "retriever", {"id", "kind", "embeddings", "rankings", "k"});
        RetrieverSpec s;
        s.kind = parse_retriever_kind(get_or<std::string>(r, "kind", "", "retriever"));
        s.id = get_or<std::string>(r, "id", std::string(to_string(s.kind)), "retriever");
        s.embeddings = resolve(base_dir, get_or<std::string>(r, "embeddings", "", "retriever"));
        s.rankings = resolve(base_dir, get_or<std::string>(r, "rankings", "", "retriever"));
        const auto k = get_or<long long>(r, "k", static_cast<long long>(kDefaultTopK), "retriever");
        if (k <= 0) throw ConfigError(fmt::format("retriever {}: k must be positive", s.id));
        s.k = static_cast<std::size_t>(k);
        c.retrievers.push_back(std::move(s));
    }

    const Json models = j.value("models", Json::array());
    if (!models.is_array()) throw ConfigError("models must be a list");
    for (const auto& m : models) {
        check_keys(m, "model", {"id", "predictions", "predictions_pattern", "endpoint", "bearer_token_env",
                                "timeout_ms", "max_in_flight"});
        ModelSpec s;
        s.id = get_or<std::string>(m, "id", "", "model");
        if (auto it = m.find("predictions"); it != m.end() && !it->is_null()) {
            if (!it->is_object()) throw ConfigError(fmt::format("model {}: predictions must map retriever ids to files", s.id));
            for (const auto& [rid, path] : it->items()) {
                if (!path.is_string()) throw ConfigError(fmt::format("model {}: prediction path for {} must be a string", s.id, rid));
                s.predictions.emplace(rid, resolve(base_dir, path.get<std::string>()));
            }
        }
        const auto pattern = get_or<std::string>(m, "predictions_pattern", "", "model");
        if (!pattern.empty()) s.predictions_pattern = resolve(base_dir, pattern).string();
        s.endpoint = get_or<std::string>(m, "endpoint", "", "model");
        s.bearer_token_env = get_or<std::string>(m, "bearer_token_env", "", "model");
        s.timeout = std::chrono::milliseconds(get_or<long long>(m, "timeout_ms", 60'000, "model"));
        s.max_in_flight = get_or<std::size_t>(m, "max_in_flight", 4, "model");
        c.models.push_back(std::move(s));
    }

    const Json met = j.value("metrics", Json::object());
    check_keys(met, "metrics", {"strict_scoring", "success_rule", "bounds", "bin_edges"});
    c.metrics.strict_scoring = get_or<bool>(met, "strict_scoring", false, "metrics");
    c.metrics.success_rule = parse_success_rule(get_or<std::string>(met, "success_rule", "any_gold", "metrics"));
    c.metrics.bounds = get_or<bool>(met, "bounds", true, "metrics");
    if (auto it = met.find("bin_edges"); it != met.end() && !it->is_null()) {
        if (!it->is_object()) throw ConfigError("metrics.bin_edges must map measures to edge lists");
        for (const auto& [measure, edges] : it->items()) {
            try {
                c.metrics.bin_edges[parse_complexity_measure(measure)] = edges.get<std::vector<double>>();
            } catch (const Json::exception&) {
                throw ConfigError(fmt::format("metrics.bin_edges.{} must be a list of numbers", measure));
            }
        }
    }

    c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", "paudit-out", "config"));
    if (auto it = j.find("seed"); it != j.end() && !it->is_null()) {
        if (!it->is_number_integer() || (!it->is_number_unsigned() && it->get<long long>() < 0))
            throw ConfigError("seed must be a non-negative integer");
        c.seed = it->get<std::uint64_t>();
    }
    c.threads = get_or<std::size_t>(j, "threads", 0, "config");

    c.canonical = j;
    c.canonical.erase("output_dir");
    c.canonical.erase("threads");
    return c;
}

RunConfig load_run_config(const fs::path& path) {
    Json j;
    try {
        j = Json::parse(read_text_file(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError(fmt::format("{}: malformed config: {}", path.string(), e.what()));
    }
    return run_config_from_json(j, path.parent_path());
}

void validate_config(const RunConfig& c) {
    if (c.dataset.questions.empty()) throw ConfigError("dataset.questions is required");
    if (c.dataset.format == DatasetFormat::Normalized && c.dataset.sources.empty())
        throw ConfigError("dataset.sources is required for the normalized format");
    if (c.retrievers.empty()) throw ConfigError("at least one retriever is required");
    if (c.models.empty()) throw ConfigError("at least one model is required");

    std::set<std::string> rids;
    bool have_oracle = false;
    bool have_random = false;
    for (const auto& r : c.retrievers) {
        if (r.id.empty()) throw ConfigError("retriever id must not be empty");
        if (!rids.insert(r.id).second) throw ConfigError(fmt::format("duplicate retriever id '{}'", r.id));
        if (r.kind == RetrieverKind::Dense && r.embeddings.empty())
            throw ConfigError(fmt::format("dense retriever {} needs 'embeddings'", r.id));
        if (r.kind == RetrieverKind::External && r.rankings.empty())
            throw ConfigError(fmt::format("external retriever {} needs 'rankings'", r.id));
        if (r.kind == RetrieverKind::RandomNegative && !c.seed)
            throw ConfigError(fmt::format("random-negative retriever {} needs a seed (--seed)", r.id));
        have_oracle = have_oracle || r.kind == RetrieverKind::Oracle;
        have_random = have_random || r.kind == RetrieverKind::RandomNegative;
    }
    if (c.metrics.bounds && (!have_oracle || !have_random))
        throw ConfigError(
            "PPR/RPA need an oracle and a random_negative retriever (or set metrics.bounds=false)");

    std::set<std::string> mids;
    for (const auto& m : c.models) {
        if (m.id.empty()) throw ConfigError("model id must not be empty");
        if (!mids.insert(m.id).second) throw ConfigError(fmt::format("duplicate model id '{}'", m.id));
        if (m.online()) continue;
        if (!m.predictions_pattern.empty()) continue;
        for (const auto& r : c.retrievers)
            if (!m.predictions.count(r.id))
                throw ConfigError(fmt::format("model {} has no predictions for retriever {}", m.id, r.id));
    }
    for (const auto& [measure, edges] : c.metrics.bin_edges) {
        if (edges.size() < 2) throw ConfigError(fmt::format("bin_edges.{} needs at least two edges", to_string(measure)));
        for (std::size_t i = 1; i < edges.size(); ++i)
            if (!(edges[i - 1] < edges[i]))
                throw ConfigError(fmt::format("bin_edges.{} must be strictly increasing", to_string(measure)));
    }
}

std::string config_digest(const RunConfig& config) { return hex64(fnv1a64(config.canonical.dump())); }

// ---- artifacts ---------------------------------------------------------------

fs::path rankings_artifact(const fs::path& out, std::string_view retriever) {
    return out / "rankings" / (sanitize(retriever) + ".jsonl");
}

fs::path predictions_artifact(const fs::path& out, std::string_view retriever, std::string_view model) {
    return out / "predictions" / (sanitize(retriever) + "__" + sanitize(model) + ".jsonl");
}

fs::path outcomes_artifact(const fs::path& out, std::string_view retriever, std::string_view model) {
    return out / "cells" / (sanitize(retriever) + "__" + sanitize(model) + ".outcomes.jsonl");
}

RankingSet run_retriever(const RetrieverSpec& spec, const Dataset& ds, std::optional<std::uint64_t> seed) {
    RankingSet out;
    switch (spec.kind) {
        case RetrieverKind::Oracle:
            for (const auto& q : ds.questions()) out.emplace(q.question_id, retrieve_oracle(q, spec.id));
            break;
        case RetrieverKind::RandomNegative:
            if (!seed) throw ConfigError(fmt::format("random-negative retriever {} needs a seed", spec.id));
            for (const auto& q : ds.questions())
                out.emplace(q.question_id, retrieve_random_negative(q, *seed, spec.k, spec.id));
            break;
        case RetrieverKind::Dense: {
            const EmbeddingStore store = load_embeddings(spec.embeddings);
            for (const auto& q : ds.questions()) out.emplace(q.question_id, retrieve_dense(store, q, spec.k, spec.id));
            break;
        }
        case RetrieverKind::External:
            out = load_external_rankings(spec.rankings, spec.id);
            break;
    }
    return out;
}

// ---- run ---------------------------------------------------------------------

namespace {

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    for (auto& t : pool) t.join();
}

struct CellState {
    std::optional<JoinResult> joined;
    std::string error_kind;
    std::string error;
};

void record_error(CellState& cell, std::string_view rid, std::string_view mid, const std::exception& e) {
    const auto* pe = dynamic_cast<const Error*>(&e);
    cell.error_kind = pe ? pe->kind() : "Error";
    cell.error = fmt::format("retriever={} model={}: {}", rid, mid, e.what());
    logger()->error("{}: {}", cell.error_kind, cell.error);
}

std::vector<QAPrediction> offline_predictions(const ModelSpec& m, const RetrieverSpec& r) {
    fs::path path;
    if (auto it = m.predictions.find(r.id); it != m.predictions.end())
        path = it->second;
    else
        path = substitute(m.predictions_pattern, r.id, m.id);

    std::vector<QAPrediction> mine;
    for (auto& p : load_predictions(path))
        if (p.model_id == m.id) mine.push_back(std::move(p));
    if (mine.empty())
        throw JoinError(fmt::format("{} has no predictions for model {}", path.string(), m.id),
                        std::vector<std::string>{m.id});
    return mine;
}

std::vector<QAPrediction> online_predictions(const ModelSpec& m, const RankingSet& rankings,
                                             const Dataset& ds) {
    std::vector<QaServiceRequest> requests;
    for (const auto& [qid, r] : rankings) {
        const QuestionRecord* q = ds.find_question(qid);
        if (!q) throw JoinError(fmt::format("ranking for unknown question {}", qid), std::vector<std::string>{qid});
        requests.push_back(make_service_request(*q, r.retrieved, ds));
    }
    QaClientOptions opts;
    opts.model_id = m.id;
    opts.timeout = m.timeout;
    opts.max_in_flight = m.max_in_flight;
    if (!m.bearer_token_env.empty())
        if (const char* tok = std::getenv(m.bearer_token_env.c_str())) opts.bearer_token = tok;

    std::vector<QAPrediction> out;
    for (auto& reply : query_qa_service_batch(m.endpoint, requests, opts)) out.push_back(std::move(reply.prediction));
    return out;
}

// Artifacts are only reused by the config that wrote them.
void claim_output_dir(const fs::path& out, const std::string& digest, RunMode mode) {
    const fs::path stamp = out / "artifacts.digest";
    if (fs::exists(stamp)) {
        const std::string have = read_text_file(stamp);
        if (have != digest + "\n")
            throw ConfigError(fmt::format("{} holds artifacts of another config (digest {}); use a fresh output directory",
                                          out.string(), have.substr(0, have.find('\n'))));
        return;
    }
    if (mode == RunMode::Compute) write_text_file(stamp, digest + "\n");
}

}  // namespace

RunReport run_evaluation(const RunConfig& config, RunMode mode) {
    const auto started = std::chrono::steady_clock::now();
    validate_config(config);
    auto log = logger();

    const Dataset ds = load_dataset(config.dataset);
    const ProfileMap profiles = profile_questions(ds);
    std::map<ComplexityMeasure, std::vector<double>> edges;
    for (ComplexityMeasure m : kAllMeasures) {
        auto it = config.metrics.bin_edges.find(m);
        edges[m] = it != config.metrics.bin_edges.end() ? it->second : quintile_edges(profiles, m);
    }
    const ScoringOptions scoring{config.metrics.strict_scoring};
    const fs::path& out = config.output_dir;
    claim_output_dir(out, config_digest(config), mode);

    const std::size_t nr = config.retrievers.size();
    const std::size_t nm = config.models.size();
    std::vector<CellState> cells(nr * nm);

    auto cell_done = [&](std::size_t ri, std::size_t mi) {
        return fs::exists(outcomes_artifact(out, config.retrievers[ri].id, config.models[mi].id));
    };

    // Rankings, only for retrievers with at least one cell left to compute.
    std::vector<std::optional<RankingSet>> rankings(nr);
    std::vector<std::string> retriever_error(nr), retriever_error_kind(nr);
    if (mode == RunMode::Compute) {
        parallel_for(nr, config.threads, [&](std::size_t ri) {
            const RetrieverSpec& spec = config.retrievers[ri];
            bool needed = false;
            for (std::size_t mi = 0; mi < nm; ++mi) needed = needed || !cell_done(ri, mi);
            if (!needed) return;
            try {
                const fs::path art = rankings_artifact(out, spec.id);
                if (fs::exists(art)) {
                    rankings[ri] = load_external_rankings(art, spec.id);
                } else {
                    rankings[ri] = run_retriever(spec, ds, config.seed);
                    save_rankings(art, *rankings[ri]);
                }
                log->info("retriever {}: {} rankings", spec.id, rankings[ri]->size());
            } catch (const std::exception& e) {
                const auto* pe = dynamic_cast<const Error*>(&e);
                retriever_error_kind[ri] = pe ? pe->kind() : "Error";
                retriever_error[ri] = e.what();
            }
        });
    }

    parallel_for(nr * nm, config.threads, [&](std::size_t idx) {
        const std::size_t ri = idx / nm;
        const std::size_t mi = idx % nm;
        const RetrieverSpec& r = config.retrievers[ri];
        const ModelSpec& m = config.models[mi];
        CellState& cell = cells[idx];
        try {
            const fs::path art = outcomes_artifact(out, r.id, m.id);
            if (fs::exists(art)) {
                JoinResult jr = join_result_from_records(read_records(art), art.string());
                jr.retriever_id = r.id;
                jr.model_id = m.id;
                cell.joined = std::move(jr);
                return;
            }
            if (mode == RunMode::ArtifactsOnly)
                throw IOError(fmt::format("missing cell artifact {}", art.string()));
            if (!rankings[ri]) {
                cell.error_kind = retriever_error_kind[ri];
                cell.error = fmt::format("retriever={} model={}: {}", r.id, m.id, retriever_error[ri]);
                return;
            }

            std::vector<QAPrediction> preds;
            if (m.online()) {
                const fs::path pa = predictions_artifact(out, r.id, m.id);
                if (fs::exists(pa)) {
                    preds = load_predictions(pa);
                } else {
                    preds = online_predictions(m, *rankings[ri], ds);
                    save_predictions(pa, preds);
                }
            } else {
                preds = offline_predictions(m, r);
            }

            JoinResult jr = join_outcomes(*rankings[ri], preds, ds, scoring);
            jr.retriever_id = r.id;
            jr.model_id = m.id;
            for (auto& o : jr.outcomes) o.retriever_id = r.id;
            write_records(art, to_records(jr));
            cell.joined = std::move(jr);
        } catch (const std::exception& e) {
            record_error(cell, r.id, m.id, e);
        }
    });

    RunReport report;
    report.config_digest = config_digest(config);
    report.dataset.split = ds.split_name();
    report.dataset.questions = ds.questions().size();
    report.dataset.sources = ds.sources().size();
    report.dataset.modality = modality_counts(ds);
    report.dataset.violations = validate_dataset(ds).violations.size();

    report.cells.resize(nr * nm);
    for (std::size_t ri = 0; ri < nr; ++ri) {
        for (std::size_t mi = 0; mi < nm; ++mi) {
            report.cells[ri * nm + mi].retriever_id = config.retrievers[ri].id;
            report.cells[ri * nm + mi].model_id = config.models[mi].id;
        }
    }

    for (std::size_t mi = 0; mi < nm; ++mi) {
        BoundRuns bounds;
        if (config.metrics.bounds) {
            for (std::size_t ri = 0; ri < nr; ++ri) {
                const auto& cell = cells[ri * nm + mi];
                if (!cell.joined) continue;
                const auto kind = config.retrievers[ri].kind;
                if (kind == RetrieverKind::Oracle && !bounds.oracle) bounds.oracle = &cell.joined->outcomes;
                if (kind == RetrieverKind::RandomNegative && !bounds.random)
                    bounds.random = &cell.joined->outcomes;
            }
        }
        for (std::size_t ri = 0; ri < nr; ++ri) {
            CellState& cell = cells[ri * nm + mi];
            CellReport& rc = report.cells[ri * nm + mi];
            if (!cell.joined) {
                rc.error_kind = cell.error_kind;
                rc.error = cell.error;
                continue;
            }
            try {
                rc.metrics = build_metric_report(*cell.joined, bounds, config.metrics.success_rule);
                for (ComplexityMeasure m : kAllMeasures)
                    rc.complexity[m] = bin_by_complexity(cell.joined->outcomes, profiles, m, edges[m]);
            } catch (const std::exception& e) {
                record_error(cell, rc.retriever_id, rc.model_id, e);
                rc.metrics.reset();
                rc.complexity.clear();
                rc.error_kind = cell.error_kind;
                rc.error = cell.error;
            }
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return report;
}

}  // namespace paudit
