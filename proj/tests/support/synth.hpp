#pragma once

// Seeded generators for datasets, embedding stores, predictions and whole
// evaluation fixtures.

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "paudit/corpus.hpp"
#include "paudit/harness.hpp"
#include "paudit/retrieval.hpp"
#include "paudit/scoring.hpp"

namespace synth {

struct DatasetShape {
    std::size_t questions = 20;
    std::size_t max_gold = 2;
    std::size_t min_distractors = 1;
    std::size_t max_distractors = 6;
    double image_fraction = 0.5;  // chance that a source is an image
};

paudit::Dataset random_dataset(std::mt19937_64& rng, const DatasetShape& shape);

/// Correct answer for a category and one the scorer rejects.
std::string right_answer(paudit::Category c);
std::string wrong_answer(paudit::Category c);

/// Small integer vectors, never zero, for every question and source.
paudit::EmbeddingStore random_store(std::mt19937_64& rng, const paudit::Dataset& ds, Eigen::Index dim);

/// Deterministic uniform in [0, 1) from a key.
double unit_hash(std::uint64_t seed, std::string_view key);

/// One prediction per ranked question: correct with `p_hit` when some gold
/// source was retrieved and `p_miss` otherwise.
std::vector<paudit::QAPrediction> predictions_for(const paudit::RankingSet& rankings, const paudit::Dataset& ds,
                                                  const std::string& model_id, double p_hit, double p_miss,
                                                  std::uint64_t seed);

/// Writes a complete matrix fixture (dataset, embeddings, external rankings,
/// per-cell predictions, config.json) under `dir`: retrievers oracle, random,
/// dense and external; `models` offline models. Returns the config path.
std::filesystem::path write_matrix_fixture(const std::filesystem::path& dir, std::size_t questions,
                                           std::size_t models, std::uint64_t seed);

/// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

}  // namespace synth
