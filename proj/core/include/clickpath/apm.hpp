#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "clickpath/action_path.hpp"
#include "clickpath/matrix.hpp"

// Action Path Model: a duration-gated GRU-like encoder/decoder over
// mark-delimited URL sequences.
namespace clickpath::apm {

/// How the candidate state uses the reset gate.
enum class CandidateMode : std::uint8_t {
    /// tanh(P_H u + Q_H h): the reset gate is computed but not consumed.
    kUngated,
    /// tanh(P_H u + Q_H (r o h)): the usual GRU candidate.
    kStandard,
};

std::string_view to_string(CandidateMode m);
CandidateMode parse_candidate_mode(std::string_view s);

struct CellWeights {
    num::Matrix pz, qz;  // update gate
    num::Matrix pr, qr;  // reset gate
    num::Matrix ph, qh;  // candidate
};

struct ApmParams {
    std::size_t vocab_size = 0;
    std::size_t embedding_dim = 0;
    std::size_t latent_dim = 0;
    CandidateMode mode = CandidateMode::kUngated;

    num::Matrix embedding;  // vocab x E, shared by encoder and decoder
    CellWeights encoder;
    CellWeights decoder;
    num::Matrix out_weight;  // vocab x H
    num::Matrix out_bias;    // vocab x 1

    /// All-zero weights of the given shape.
    static ApmParams zeros(std::size_t vocab_size, std::size_t embedding_dim, std::size_t latent_dim,
                           CandidateMode mode = CandidateMode::kUngated);
    /// Glorot-uniform cell and output weights, small uniform embeddings, zero bias.
    static ApmParams random(std::size_t vocab_size, std::size_t embedding_dim,
                            std::size_t latent_dim, std::uint64_t seed,
                            CandidateMode mode = CandidateMode::kUngated);

    /// Replaces the embedding with pretrained URL vectors (vocab x E).
    /// Throws ShapeMismatch.
    void load_embedding(const num::Matrix& vectors);

    /// Visits every trainable tensor in a fixed order with a stable name.
    void for_each(const std::function<void(std::string_view, num::Matrix&)>& fn);
    void for_each(const std::function<void(std::string_view, const num::Matrix&)>& fn) const;

    std::size_t parameter_count() const;
    /// Throws InvariantViolation on inconsistent shapes or non-finite values.
    void validate() const;

    std::vector<double> flatten() const;
    void unflatten(std::span<const double> values);
};

/// d / (d + 1): maps [0, inf) onto [0, 1).
double squash(double seconds);

/// One recurrent step. The squashed duration is added to every update-gate
/// unit. Throws ShapeMismatch.
std::vector<double> cell_step(const CellWeights& w, CandidateMode mode, std::span<const double> u,
                              std::span<const double> h_prev, double seconds);

struct ContextTensor {
    std::vector<double> value;
};

/// Runs the encoder over [SOA, u_1..u_n, COI] with durations [0, d_1..d_n, 0]
/// from h = 0. Throws EmptyPath.
ContextTensor encode(const ApmParams& p, const ActionPath& path);

/// Output distribution over the vocabulary after one decoder step.
std::vector<double> output_distribution(const ApmParams& p, std::span<const double> h);

/// Greedy decoding from SOP; stops after the first EOA mark or max_len tokens.
std::vector<TokenId> decode_greedy(const ApmParams& p, const ContextTensor& ctx,
                                   std::size_t max_len);

enum class ClassifyMode : std::uint8_t {
    /// Softmax restricted to the three EOA logits; always yields a label.
    kRestricted,
    /// Full-vocabulary argmax; no label unless the winner is an EOA mark.
    kStrict,
};

struct Classification {
    std::optional<Behavior> label;
    std::array<double, 3> probs{};  // TRG, PUR, EXP (renormalized over EOA marks)
};

Classification classify(const ApmParams& p, const ActionPath& path,
                        ClassifyMode mode = ClassifyMode::kRestricted);

struct Prediction {
    std::vector<TokenId> tokens;  // raw greedy output, EOA mark included
    std::vector<TokenId> urls;    // marks stripped
};

/// Throws EmptyPath.
Prediction predict_suffix(const ApmParams& p, const ActionPath& prefix, std::size_t max_len);

/// Encoder input and decoder target for teacher-forced training.
struct TrainExample {
    ActionPath prefix;
    std::vector<TokenId> target;  // continuation ids followed by the EOA mark
};

enum class TrainTask : std::uint8_t {
    /// Whole path in, [EOA_label] out.
    kClassification,
    /// For each configured fraction f, first ceil(f*n) actions in, remainder
    /// plus EOA_label out.
    kSequence,
};

struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 32;
    double learning_rate = 0.001;
    double l2_lambda = 1e-7;
    std::size_t early_stop_patience = 1000;
    std::uint64_t seed = 1;
    TrainTask task = TrainTask::kSequence;
    std::vector<double> prefix_fractions = {0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};

    /// Throws InvalidParams.
    void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Throws LabelMissing, EmptyPath.
std::vector<TrainExample> make_examples(std::span<const ActionPath> paths,
                                        const TrainConfig& config);

/// Prefix length used for fraction f of an n-action path: ceil(f*n), at least 1.
std::size_t prefix_length(std::size_t n, double fraction);

/// Mean over examples of the per-token cross-entropy of each target, plus
/// lambda * sum of squared weights.
double sequence_loss(const ApmParams& p, std::span<const TrainExample> examples, double l2_lambda);

struct LossAndGradient {
    double loss = 0.0;
    ApmParams grad;
};

/// Analytic gradient of sequence_loss by backpropagation through time.
LossAndGradient loss_and_gradient(const ApmParams& p, std::span<const TrainExample> examples,
                                  double l2_lambda);

struct EpochRecord {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    ApmParams params;  // best validation loss
    std::vector<EpochRecord> history;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
    bool stopped_early = false;
};

/// Throws EmptyDataset, LabelMissing, InvalidParams.
TrainResult train(std::span<const ActionPath> train_paths, std::span<const ActionPath> val_paths,
                  ApmParams init, const TrainConfig& config,
                  const std::function<void(const EpochRecord&)>& on_epoch = {});

struct Checkpoint {
    ApmParams params;
    std::optional<TrainConfig> train_config;
    std::vector<EpochRecord> history;
};

nlohmann::json to_json(const Checkpoint& c);
Checkpoint checkpoint_from_json(const nlohmann::json& j);

/// Per-tensor and total trainable parameter counts.
nlohmann::json parameter_report(const ApmParams& p);

}  // namespace clickpath::apm
