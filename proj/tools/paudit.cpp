// parametric-audit command line.

#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "paudit/errors.hpp"
#include "paudit/harness.hpp"
#include "paudit/logging.hpp"
#include "paudit/report.hpp"

namespace fs = std::filesystem;
using namespace paudit;

namespace {

enum Exit { kOk = 0, kDataError = 1, kPartial = 2, kIOError = 3 };

// Flags shared by every subcommand; each one overrides the config key it names.
struct Common {
    std::string config;
    std::string questions;
    std::string sources;
    std::string format;
    std::string split;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
    bool strict = false;
    bool no_bounds = false;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-c,--config", c.config, "run config (JSON)");
    cmd->add_option("--questions", c.questions, "question records, or the WebQA JSON");
    cmd->add_option("--sources", c.sources, "source records");
    cmd->add_option("--dataset-format", c.format, "normalized | webqa");
    cmd->add_option("--split", c.split, "WebQA split to keep");
    cmd->add_option("-o,--out", c.out, "output directory");
    cmd->add_option("--seed", c.seed, "run seed (required with a random-negative retriever)");
    cmd->add_option("--threads", c.threads, "worker threads (0 = all cores)");
    cmd->add_flag("--strict", c.strict, "strict scoring");
    cmd->add_flag("--no-bounds", c.no_bounds, "skip PPR/RPA");
}

std::string absolute(const std::string& p) { return fs::absolute(p).lexically_normal().string(); }

RunConfig build_config(const Common& c) {
    Json j = Json::object();
    fs::path base = fs::current_path();
    if (!c.config.empty()) {
        try {
            j = Json::parse(read_text_file(c.config));
        } catch (const Json::parse_error& e) {
            throw ConfigError(fmt::format("{}: malformed config: {}", c.config, e.what()));
        }
        if (!j.is_object()) throw ConfigError(fmt::format("{}: config must be an object", c.config));
        base = fs::absolute(c.config).parent_path();
    }
    if (!c.questions.empty()) j["dataset"]["questions"] = absolute(c.questions);
    if (!c.sources.empty()) j["dataset"]["sources"] = absolute(c.sources);
    if (!c.format.empty()) j["dataset"]["format"] = c.format;
    if (!c.split.empty()) j["dataset"]["split"] = c.split;
    if (!c.out.empty()) j["output_dir"] = absolute(c.out);
    if (c.seed) j["seed"] = *c.seed;
    if (c.threads) j["threads"] = *c.threads;
    if (c.strict) j["metrics"]["strict_scoring"] = true;
    if (c.no_bounds) j["metrics"]["bounds"] = false;
    return run_config_from_json(j, base);
}

const RetrieverSpec& find_retriever(const RunConfig& cfg, const std::string& id) {
    for (const auto& r : cfg.retrievers)
        if (r.id == id) return r;
    throw ConfigError(fmt::format("no retriever '{}' in the config", id));
}

const ModelSpec& find_model(const RunConfig& cfg, const std::string& id) {
    for (const auto& m : cfg.models)
        if (m.id == id) return m;
    throw ConfigError(fmt::format("no model '{}' in the config", id));
}

Dataset dataset_for(const RunConfig& cfg) {
    if (cfg.dataset.questions.empty()) throw ConfigError("no dataset: pass --questions/--sources or a config");
    return load_dataset(cfg.dataset);
}

// ---- subcommands ---------------------------------------------------------------

int cmd_validate(const Common& c) {
    const RunConfig cfg = build_config(c);
    if (cfg.dataset.questions.empty()) throw ConfigError("no dataset: pass --questions/--sources or a config");
    try {
        const Dataset ds = load_dataset(cfg.dataset);
        const auto mc = modality_counts(ds);
        fmt::print("ok: {} questions ({} text-only, {} one-image, {} two-image, {} other), {} sources\n",
                   ds.questions().size(), mc.text_only, mc.one_image, mc.two_image, mc.other_image,
                   ds.sources().size());
        return kOk;
    } catch (const IntegrityError& e) {
        for (const auto& item : e.items()) fmt::print("{}\n", item);
        fmt::print("{} violation(s)\n", e.items().size());
        return kDataError;
    }
}

int cmd_embed_check(const Common& c, const std::string& embeddings) {
    const RunConfig cfg = build_config(c);
    const Dataset ds = dataset_for(cfg);
    std::vector<fs::path> files;
    if (!embeddings.empty())
        files.push_back(embeddings);
    else
        for (const auto& r : cfg.retrievers)
            if (r.kind == RetrieverKind::Dense) files.push_back(r.embeddings);
    if (files.empty()) throw ConfigError("no embeddings: pass --embeddings or configure a dense retriever");

    bool complete = true;
    for (const auto& f : files) {
        const EmbeddingStore store = load_embeddings(f);
        const EmbeddingCoverage cov = check_coverage(store, ds);
        fmt::print("{}: dim={} vectors={} questions={} missing_questions={} missing_sources={}\n", f.string(),
                   store.dim(), store.size(), cov.questions_checked, cov.missing_questions.size(),
                   cov.missing_sources.size());
        for (const auto& id : cov.missing_questions) fmt::print("  missing question {}\n", id);
        for (const auto& id : cov.missing_sources) fmt::print("  missing source {}\n", id);
        complete = complete && cov.complete();
    }
    return complete ? kOk : kDataError;
}

int cmd_retrieve(const Common& c, const std::vector<std::string>& ids, const std::string& output) {
    const RunConfig cfg = build_config(c);
    const Dataset ds = dataset_for(cfg);
    std::vector<const RetrieverSpec*> specs;
    if (ids.empty())
        for (const auto& r : cfg.retrievers) specs.push_back(&r);
    else
        for (const auto& id : ids) specs.push_back(&find_retriever(cfg, id));
    if (specs.empty()) throw ConfigError("no retrievers configured");
    if (!output.empty() && specs.size() != 1) throw ConfigError("--rankings-out needs exactly one retriever");

    for (const auto* spec : specs) {
        const RankingSet rs = run_retriever(*spec, ds, cfg.seed);
        const fs::path path = output.empty() ? rankings_artifact(cfg.output_dir, spec->id) : fs::path(output);
        save_rankings(path, rs);
        fmt::print("{}: {} rankings -> {}\n", spec->id, rs.size(), path.string());
    }
    return kOk;
}

int cmd_score(const Common& c, const std::string& rankings_path, const std::string& predictions_path,
              const std::string& retriever_id, const std::string& model_id, const std::string& output) {
    const RunConfig cfg = build_config(c);
    const Dataset ds = dataset_for(cfg);
    if (model_id.empty()) throw ConfigError("--model is required");
    if (retriever_id.empty()) throw ConfigError("--retriever is required");

    const fs::path rpath =
        rankings_path.empty() ? rankings_artifact(cfg.output_dir, retriever_id) : fs::path(rankings_path);
    const RankingSet rankings = load_external_rankings(rpath, retriever_id);

    fs::path ppath = predictions_path;
    if (ppath.empty()) {
        const ModelSpec& m = find_model(cfg, model_id);
        if (auto it = m.predictions.find(retriever_id); it != m.predictions.end())
            ppath = it->second;
        else
            throw ConfigError(fmt::format("no predictions for {} x {}: pass --predictions", retriever_id, model_id));
    }
    std::vector<QAPrediction> preds;
    for (auto& p : load_predictions(ppath))
        if (p.model_id == model_id) preds.push_back(std::move(p));

    JoinResult jr = join_outcomes(rankings, preds, ds, ScoringOptions{cfg.metrics.strict_scoring});
    jr.retriever_id = retriever_id;
    jr.model_id = model_id;
    const fs::path out = output.empty() ? outcomes_artifact(cfg.output_dir, retriever_id, model_id) : fs::path(output);
    write_records(out, to_records(jr));

    const MetricReport m = build_metric_report(jr, {}, cfg.metrics.success_rule);
    fmt::print("{} x {}: scored={} unscorable={} missing={} acc={} ucr={} -> {}\n", retriever_id, model_id,
               m.n_scored, m.n_unscorable, m.n_missing, m.acc.value ? format_rate(*m.acc.value) : "NA",
               m.ucr.value ? format_rate(*m.ucr.value) : "NA", out.string());
    return kOk;
}

std::vector<ReportFormat> formats_of(const std::string& s) {
    if (s == "all") return {ReportFormat::Records, ReportFormat::Table, ReportFormat::PlotData};
    return {parse_report_format(s)};
}

void write_run_meta(const RunConfig& cfg, const RunReport& report) {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    const Json meta = {{"config_digest", report.config_digest},
                       {"finished_at", stamp},
                       {"wall_seconds", report.wall_seconds},
                       {"failed_cells", report.failed_cells()}};
    write_text_file(cfg.output_dir / "run_meta.json", meta.dump(2) + "\n");
}

int finish(const RunConfig& cfg, const RunReport& report, const std::string& format, bool print_table) {
    for (ReportFormat f : formats_of(format))
        for (const auto& p : emit_report(report, f, cfg.output_dir)) logger()->info("wrote {}", p.string());
    write_run_meta(cfg, report);
    if (print_table) std::cout << render_table(report);
    if (report.failed_cells()) {
        fmt::print(stderr, "{} of {} cell(s) failed\n", report.failed_cells(), report.cells.size());
        return kPartial;
    }
    return kOk;
}

int cmd_evaluate(const Common& c, const std::string& format, bool quiet) {
    const RunConfig cfg = build_config(c);
    return finish(cfg, run_evaluation(cfg, RunMode::Compute), format, !quiet);
}

int cmd_report(const Common& c, const std::string& format, bool quiet) {
    const RunConfig cfg = build_config(c);
    return finish(cfg, run_evaluation(cfg, RunMode::ArtifactsOnly), format, !quiet);
}

int exit_code_for(const Error& e) { return dynamic_cast<const IOError*>(&e) ? kIOError : kDataError; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evaluates retrieval + QA systems and how much they answer from parametric memory."};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    Common common;

    auto* validate = app.add_subcommand("validate", "load and check a dataset");
    add_common(validate, common);

    std::string embeddings;
    auto* embed = app.add_subcommand("embed-check", "check embedding coverage of a dataset");
    add_common(embed, common);
    embed->add_option("--embeddings", embeddings, "embedding file (default: every dense retriever)");

    std::vector<std::string> retriever_ids;
    std::string rankings_out;
    auto* retrieve = app.add_subcommand("retrieve", "write rankings for configured retrievers");
    add_common(retrieve, common);
    retrieve->add_option("--retriever", retriever_ids, "retriever id(s) (default: all)");
    retrieve->add_option("--rankings-out", rankings_out, "ranking file (single retriever)");

    std::string rankings, predictions, score_retriever, score_model, outcomes_out;
    auto* score = app.add_subcommand("score", "join rankings with predictions into a cell outcome file");
    add_common(score, common);
    score->add_option("--retriever", score_retriever, "retriever id")->required();
    score->add_option("--model", score_model, "model id")->required();
    score->add_option("--rankings", rankings, "ranking file (default: the retriever's artifact)");
    score->add_option("--predictions", predictions, "prediction file (default: from the config)");
    score->add_option("--outcomes-out", outcomes_out, "outcome file (default: the cell artifact)");

    std::string format = "all";
    bool quiet = false;
    auto* evaluate = app.add_subcommand("evaluate", "run the retriever x model matrix");
    add_common(evaluate, common);
    evaluate->add_option("--format", format, "records | table | plot | all");
    evaluate->add_flag("-q,--quiet", quiet, "do not print the table");

    auto* report = app.add_subcommand("report", "re-emit reports from existing cell artifacts");
    add_common(report, common);
    report->add_option("--format", format, "records | table | plot | all");
    report->add_flag("-q,--quiet", quiet, "do not print the table");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kDataError;
    }

    try {
        if (validate->parsed()) return cmd_validate(common);
        if (embed->parsed()) return cmd_embed_check(common, embeddings);
        if (retrieve->parsed()) return cmd_retrieve(common, retriever_ids, rankings_out);
        if (score->parsed())
            return cmd_score(common, rankings, predictions, score_retriever, score_model, outcomes_out);
        if (evaluate->parsed()) return cmd_evaluate(common, format, quiet);
        if (report->parsed()) return cmd_report(common, format, quiet);
    } catch (const ListError& e) {
        fmt::print(stderr, "error: {}: {}\n", e.kind(), e.what());
        for (const auto& item : e.items()) fmt::print(stderr, "  {}\n", item);
        return exit_code_for(e);
    } catch (const Error& e) {
        fmt::print(stderr, "error: {}: {}\n", e.kind(), e.what());
        return exit_code_for(e);
    } catch (const std::filesystem::filesystem_error& e) {
        fmt::print(stderr, "error: IOError: {}\n", e.what());
        return kIOError;
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kDataError;
    }
    return kOk;
}
