#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paudit/complexity.hpp"
#include "paudit/corpus.hpp"
#include "paudit/metrics.hpp"
#include "paudit/retrieval.hpp"

namespace paudit {

inline constexpr std::string_view kToolName = "parametric-audit";
inline constexpr std::string_view kToolVersion = "0.1.0";

enum class RetrieverKind { Dense, Oracle, RandomNegative, External };
std::string_view to_string(RetrieverKind k);
RetrieverKind parse_retriever_kind(std::string_view s);

struct RetrieverSpec {
    std::string id;
    RetrieverKind kind = RetrieverKind::Oracle;
    std::filesystem::path embeddings;  // Dense
    std::filesystem::path rankings;    // External
    std::size_t k = kDefaultTopK;      // Dense, RandomNegative
};

/// A QA model is either offline (prediction files per retriever) or online
/// (a QA service endpoint queried with each retriever's sources).
struct ModelSpec {
    std::string id;
    std::map<std::string, std::filesystem::path> predictions;  // retriever id -> file
    /// Alternative to `predictions`: "{retriever}" and "{model}" are substituted.
    std::string predictions_pattern;
    std::string endpoint;
    std::string bearer_token_env;  // env var holding the token, if any
    std::chrono::milliseconds timeout{60'000};
    std::size_t max_in_flight = 4;

    bool online() const noexcept { return !endpoint.empty(); }
};

struct MetricOptions {
    bool strict_scoring = false;
    SuccessRule success_rule = SuccessRule::AnyGold;
    /// Compute PPR/RPA; requires oracle and random-negative retrievers.
    bool bounds = true;
    /// Explicit edges per measure; quintiles of the dataset otherwise.
    std::map<ComplexityMeasure, std::vector<double>> bin_edges;
};

struct RunConfig {
    DatasetLocation dataset;
    std::vector<RetrieverSpec> retrievers;
    std::vector<ModelSpec> models;
    MetricOptions metrics;
    std::filesystem::path output_dir = "paudit-out";
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;  // 0 = hardware concurrency
    /// Canonical form of the settings that affect results; hashed into the
    /// report's config digest.
    Json canonical;
};

/// Parses a JSON config. Relative paths resolve against `base_dir`.
RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& path);

/// Throws ConfigError on the first problem: duplicate ids, missing bound
/// retrievers when bounds are requested, a random retriever without a seed,
/// models without a prediction source, bad bin edges.
void validate_config(const RunConfig& config);

std::string config_digest(const RunConfig& config);

struct CellReport {
    std::string retriever_id;
    std::string model_id;
    std::optional<MetricReport> metrics;
    std::map<ComplexityMeasure, std::vector<ComplexityBin>> complexity;
    std::string error_kind;  // empty when the cell computed
    std::string error;

    bool ok() const noexcept { return metrics.has_value(); }
};

struct DatasetSummary {
    std::string split;
    std::size_t questions = 0;
    std::size_t sources = 0;
    ModalityCounts modality;
    std::size_t violations = 0;
};

struct RunReport {
    std::string tool_version{kToolVersion};
    std::string config_digest;
    DatasetSummary dataset;
    std::vector<CellReport> cells;  // retriever-major, config order
    double wall_seconds = 0.0;      // not part of the serialized report

    std::size_t failed_cells() const;
};

enum class RunMode {
    Compute,        // reuse existing artifacts, compute the rest
    ArtifactsOnly,  // aggregate existing cell artifacts only
};

/// Runs the retriever x model matrix. Rankings and per-cell outcome files
/// are written under output_dir before aggregation; with existing artifacts
/// a rerun skips straight to aggregation. Errors inside a cell are recorded
/// on the cell; config and dataset errors throw.
RunReport run_evaluation(const RunConfig& config, RunMode mode = RunMode::Compute);

/// Artifact locations under an output directory.
std::filesystem::path rankings_artifact(const std::filesystem::path& out, std::string_view retriever);
std::filesystem::path predictions_artifact(const std::filesystem::path& out, std::string_view retriever,
                                           std::string_view model);
std::filesystem::path outcomes_artifact(const std::filesystem::path& out, std::string_view retriever,
                                        std::string_view model);

/// Rankings of one retriever over the whole dataset.
RankingSet run_retriever(const RetrieverSpec& spec, const Dataset& ds,
                         std::optional<std::uint64_t> seed);

}  // namespace paudit
