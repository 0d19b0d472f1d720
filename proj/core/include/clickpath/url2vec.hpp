#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clickpath/action_path.hpp"
#include "clickpath/matrix.hpp"

namespace clickpath::url2vec {

enum class Objective : std::uint8_t {
    kNegativeSampling,
    /// Full-batch gradient descent on the exact softmax objective over all
    /// real URLs. Intended for small vocabularies and as a reference.
    kExactSoftmax,
};

struct Config {
    std::size_t window = 2;  // context size c
    std::size_t dim = 16;
    std::size_t negatives = 5;
    std::size_t epochs = 20;
    double learning_rate = 0.025;
    std::uint64_t seed = 1;
    Objective objective = Objective::kNegativeSampling;

    /// Throws InvalidParams.
    void validate() const;
};

nlohmann::json to_json(const Config& c);
Config config_from_json(const nlohmann::json& j);

struct ContextPair {
    TokenId center = 0;
    TokenId context = 0;

    bool operator==(const ContextPair&) const = default;
};

struct EmbeddingTable {
    num::Matrix input_vectors;   // vocab x dim
    num::Matrix output_vectors;  // vocab x dim

    std::size_t vocab_size() const { return input_vectors.rows(); }
    std::size_t dim() const { return input_vectors.cols(); }
};

/// Skip-gram pairs within `window` positions, never crossing path boundaries.
/// Mark ids are skipped. Order: by path, then position, then offset -c..c.
std::vector<ContextPair> build_pairs(std::span<const ActionPath> paths, std::size_t window);
std::vector<ContextPair> build_pairs(std::span<const std::vector<TokenId>> sequences,
                                     std::size_t window);

/// Seeded initialization: input rows uniform in [-0.5/dim, 0.5/dim], output
/// rows zero. Rows are drawn in order of first appearance in `pairs`, then the
/// remaining ids ascending, so relabeling ids permutes rows.
EmbeddingTable initialize(std::span<const ContextPair> pairs, std::size_t vocab_size,
                          const Config& config);

/// Throws EmptyCorpus, IndexOutOfRange, InvalidParams.
EmbeddingTable train_embeddings(std::span<const ContextPair> pairs, std::size_t vocab_size,
                                const Config& config);

/// Negative-sampling loss of one pair:
/// -log s(v'_ctx . v_ctr) - sum_k log s(-v'_neg_k . v_ctr).
double ns_pair_loss(const EmbeddingTable& t, ContextPair pair, std::span<const TokenId> negatives);

/// Gradient of ns_pair_loss with respect to the whole table.
EmbeddingTable ns_pair_gradient(const EmbeddingTable& t, ContextPair pair,
                                std::span<const TokenId> negatives);

/// Mean over pairs of -log p(context | center), softmax over real URL ids.
double exact_softmax_loss(const EmbeddingTable& t, std::span<const ContextPair> pairs);
EmbeddingTable exact_softmax_gradient(const EmbeddingTable& t, std::span<const ContextPair> pairs);

/// p(. | center) over real URL ids (index i corresponds to id kFirstUrlId + i).
std::vector<double> context_distribution(const EmbeddingTable& t, TokenId center);

/// Cosine of input rows; 0 when either has zero norm. Throws IndexOutOfRange.
double similarity(const EmbeddingTable& t, TokenId a, TokenId b);

/// Top-n by cosine excluding `u` and marks; ties by ascending id.
std::vector<std::pair<TokenId, double>> nearest(const EmbeddingTable& t, TokenId u, std::size_t n);

nlohmann::json to_json(const EmbeddingTable& t, const Config& config);
std::pair<EmbeddingTable, Config> embeddings_from_json(const nlohmann::json& j);

}  // namespace clickpath::url2vec
