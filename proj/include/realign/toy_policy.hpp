#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "realign/embedding.hpp"
#include "realign/knowledge_base.hpp"
#include "realign/pair_forge.hpp"
#include "realign/pref_opt.hpp"
#include "realign/text_encoder.hpp"

namespace realign {

/// Bag-of-context conditional language model. Every position shares the
/// logits  weights * concat(instruction_feat, image_emb) + bias,  so the
/// sequence log-probability is a sum of identical softmax lookups.
class ToyPolicy {
public:
    ToyPolicy() = default;
    ToyPolicy(std::size_t vocab_size, std::size_t ctx_dim);  // all-zero parameters

    /// Parameters drawn uniformly from [-scale, scale] using mt19937_64 output.
    static ToyPolicy random(std::size_t vocab_size, std::size_t ctx_dim, std::uint64_t seed, double scale = 0.01);

    std::size_t vocab_size() const noexcept { return vocab_size_; }
    std::size_t ctx_dim() const noexcept { return ctx_dim_; }
    std::size_t parameter_count() const noexcept { return weights_.size() + bias_.size(); }

    std::span<double> weights() noexcept { return weights_; }
    std::span<const double> weights() const noexcept { return weights_; }
    std::span<double> bias() noexcept { return bias_; }
    std::span<const double> bias() const noexcept { return bias_; }

    double& weight(std::size_t token, std::size_t d) { return weights_[token * ctx_dim_ + d]; }
    double weight(std::size_t token, std::size_t d) const { return weights_[token * ctx_dim_ + d]; }

    std::vector<double> logits(std::span<const double> context) const;

    bool operator==(const ToyPolicy&) const = default;

private:
    std::size_t vocab_size_ = 0;
    std::size_t ctx_dim_ = 0;
    std::vector<double> weights_;  // vocab_size x ctx_dim, row-major
    std::vector<double> bias_;
};

struct SequenceScore {
    double logprob = 0.0;
    std::vector<double> d_weights;  // same layout as ToyPolicy::weights(); empty without grads
    std::vector<double> d_bias;
};

/// log pi(tokens | instruction, image) and, optionally, its analytic gradient.
/// Throws TokenOutOfRange, DimensionMismatch, or MalformedInput (empty tokens).
SequenceScore score_sequence(const ToyPolicy& policy, const EmbeddingVector& instruction_feat,
                             const EmbeddingVector& image_emb, std::span<const int> tokens, bool with_grads = true);

/// Per-position softmax over the vocabulary for a context.
std::vector<double> next_token_distribution(const ToyPolicy& policy, const EmbeddingVector& instruction_feat,
                                            const EmbeddingVector& image_emb);

/// Fixed vocabulary: one token per line, line number (from 0) is the id.
/// Id 0 is the reserved out-of-vocabulary token.
class Vocabulary {
public:
    explicit Vocabulary(std::vector<std::string> tokens);
    static Vocabulary load(const std::filesystem::path& path);

    std::size_t size() const noexcept { return tokens_.size(); }
    const std::vector<std::string>& tokens() const noexcept { return tokens_; }
    int id(std::string_view token) const;

    /// Lowercased word tokens mapped to ids; unknown words become 0.
    std::vector<int> encode(std::string_view text) const;

private:
    std::vector<std::string> tokens_;
    std::unordered_map<std::string, int> ids_;
};

/// Turns preference records into policy inputs: hashed instruction features,
/// indexed image embeddings, and token ids.
class PolicyFeaturizer {
public:
    PolicyFeaturizer(const KnowledgeBase& kb, const Vocabulary& vocab, std::size_t instruction_dim);

    std::size_t ctx_dim() const noexcept { return encoder_.dim() + kb_.dim(); }
    std::size_t vocab_size() const noexcept { return vocab_.size(); }

    EmbeddingVector instruction(std::string_view text) const;
    EmbeddingVector image(std::string_view image_id) const;
    std::vector<int> tokens(std::string_view text) const;

private:
    const KnowledgeBase& kb_;
    const Vocabulary& vocab_;
    HashingTextEncoder encoder_;
};

/// The three log-probabilities one record contributes, under one policy.
struct RecordScores {
    SequenceScore chosen_v;    // log pi(y_w | x, v)
    SequenceScore rejected_v;  // log pi(y_l | x, v)
    SequenceScore chosen_vl;   // log pi(y_w | x, v_l)
};

RecordScores score_record(const ToyPolicy& policy, const PreferenceRecord& record, const PolicyFeaturizer& featurizer,
                          bool with_grads);

struct TrainStepResult {
    ToyPolicy policy;
    LossReport report;  // rDPO loss and its gradient w.r.t. the batch log-probs
    double dpo_loss = 0.0;
    double vdpo_loss = 0.0;
};

/// One gradient-descent step of the rDPO loss on `policy`; `reference` is read only.
/// Throws NonFinite naming the first record whose gradient is not finite.
TrainStepResult train_step(const ToyPolicy& policy, const ToyPolicy& reference,
                           std::span<const PreferenceRecord> records, const PolicyFeaturizer& featurizer,
                           const PrefOptConfig& cfg, double lr);

// Checkpoint: JSON object {vocab_size, ctx_dim, weights (row-major), bias}.
std::string policy_to_json(const ToyPolicy& policy);
ToyPolicy policy_from_json(std::string_view json);
void save_policy(const std::filesystem::path& path, const ToyPolicy& policy);
ToyPolicy load_policy(const std::filesystem::path& path);

}  // namespace realign
