#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>
#include <fmt/format.h>

#include "paudit/corpus.hpp"
#include "paudit/errors.hpp"

namespace paudit {

/// Cosine similarity of two equally sized, non-zero vectors, clamped to
/// [-1, 1] against rounding. Works on any Eigen vector expression.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_similarity(const Eigen::MatrixBase<DerivedA>& a,
                                            const Eigen::MatrixBase<DerivedB>& b) {
    using Scalar = typename DerivedA::Scalar;
    if (a.size() != b.size())
        throw DimensionError(fmt::format("cosine_similarity: sizes {} and {} differ", a.size(),
                                         b.size()));
    const Scalar na = a.norm();
    const Scalar nb = b.norm();
    if (na == Scalar(0) || nb == Scalar(0))
        throw ZeroVectorError("cosine_similarity: zero vector has no direction");
    const Scalar c = a.dot(b.template cast<Scalar>()) / (na * nb);
    return std::clamp(c, Scalar(-1), Scalar(1));
}

/// Dense vectors keyed by question or source id, all of one dimension.
/// Rows live contiguously; lookups hand out Eigen maps over that storage.
template <typename Scalar>
class BasicEmbeddingStore {
public:
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using ConstRow = Eigen::Map<const Vector>;

    explicit BasicEmbeddingStore(Eigen::Index dim) : dim_(dim) {
        if (dim <= 0) throw DimensionError(fmt::format("embedding dim must be positive, got {}", dim));
    }

    Eigen::Index dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    bool contains(std::string_view id) const { return index_.count(std::string(id)) != 0; }
    const std::vector<std::string>& ids() const noexcept { return ids_; }

    template <typename Derived>
    void insert(std::string id, const Eigen::MatrixBase<Derived>& v) {
        if (v.size() != dim_)
            throw DimensionError(
                fmt::format("embedding '{}' has {} values, expected {}", id, v.size(), dim_));
        if (!v.allFinite()) throw NonFiniteError(fmt::format("embedding '{}' has a non-finite value", id));
        if (index_.count(id)) throw DuplicateError(fmt::format("embedding id '{}' appears twice", id));
        index_.emplace(id, ids_.size());
        ids_.push_back(std::move(id));
        for (Eigen::Index i = 0; i < dim_; ++i) data_.push_back(static_cast<Scalar>(v(i)));
    }

    ConstRow row(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end())
            throw MissingEmbeddingError(fmt::format("no embedding for '{}'", id),
                                        std::vector<std::string>{std::string(id)});
        return ConstRow(data_.data() + static_cast<std::ptrdiff_t>(it->second) * dim_, dim_);
    }

    /// Copy with every vector multiplied by `factor`.
    BasicEmbeddingStore scaled(Scalar factor) const {
        BasicEmbeddingStore out = *this;
        for (auto& x : out.data_) x *= factor;
        return out;
    }

private:
    Eigen::Index dim_;
    std::vector<Scalar> data_;
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> index_;
};

using EmbeddingStore = BasicEmbeddingStore<double>;

/// Text format: a `dim=<n>` header line, then `<id> <v1> ... <vn>` per row.
/// Blank lines and lines starting with '#' are skipped.
EmbeddingStore load_embeddings(const std::filesystem::path& path);
EmbeddingStore parse_embeddings(std::string_view text, std::string_view context);
void save_embeddings(const std::filesystem::path& path, const EmbeddingStore& store);

struct RankedRetrieval {
    std::string question_id;
    std::string retriever_id;
    std::vector<std::string> retrieved;
    std::vector<double> scores;  // parallel to `retrieved`, or empty

    bool operator==(const RankedRetrieval&) const = default;
};

using RankingSet = std::map<std::string, RankedRetrieval>;  // by question_id

inline constexpr std::size_t kDefaultTopK = 2;
/// Similarities closer than this are ties, ordered by ascending source id.
inline constexpr double kScoreTieTolerance = 1e-12;

/// Top-k candidates (gold and distractors of `q`) by cosine similarity to the
/// question's embedding. Throws MissingEmbeddingError listing every missing id.
RankedRetrieval retrieve_dense(const EmbeddingStore& store, const QuestionRecord& q, std::size_t k,
                               std::string retriever_id = "dense");

/// Gold sources in dataset order.
RankedRetrieval retrieve_oracle(const QuestionRecord& q, std::string retriever_id = "oracle");

/// k distractors drawn without replacement from a generator seeded by
/// (run_seed, question_id). Throws NoDistractorsError.
RankedRetrieval retrieve_random_negative(const QuestionRecord& q, std::uint64_t run_seed,
                                         std::size_t k, std::string retriever_id = "random");

/// Per-question seed; independent of evaluation order.
std::uint64_t question_seed(std::uint64_t run_seed, std::string_view question_id);

/// Ranking records: `question_id`, ordered `retrieved`, optional `scores`.
RankingSet load_external_rankings(const std::filesystem::path& path, std::string_view retriever_id);
void save_rankings(const std::filesystem::path& path, const RankingSet& rankings);
Json to_record(const RankedRetrieval& r);

struct EmbeddingCoverage {
    std::size_t questions_checked = 0;
    std::vector<std::string> missing_questions;
    std::vector<std::string> missing_sources;

    bool complete() const noexcept { return missing_questions.empty() && missing_sources.empty(); }
};

/// Which question and candidate ids of `ds` have no embedding.
EmbeddingCoverage check_coverage(const EmbeddingStore& store, const Dataset& ds);

}  // namespace paudit
