#pragma once

#include <span>
#include <vector>

namespace realign {

/// Sequence log-probabilities under the trained policy (theta_*) and the
/// frozen reference (ref_*). The *_w_vl pair scores the chosen response
/// under the retrieved image (vDPO) or a corrupted image (CoDPO).
struct LogProbQuad {
    double theta_w_v = 0.0;
    double ref_w_v = 0.0;
    double theta_l_v = 0.0;
    double ref_l_v = 0.0;
    double theta_w_vl = 0.0;
    double ref_w_vl = 0.0;
};

struct PrefOptConfig {
    double beta = 0.1;
    double w_v = 1.0;

    /// Throws InvalidConfig unless beta is finite and > 0 and w_v is finite and >= 0.
    void validate() const;
};

/// Partials of a batch loss with respect to one element's theta_* fields.
struct QuadGradient {
    double theta_w_v = 0.0;
    double theta_l_v = 0.0;
    double theta_w_vl = 0.0;

    bool operator==(const QuadGradient&) const = default;
};

struct LossReport {
    double loss = 0.0;
    std::vector<QuadGradient> grads;  // one per batch element
};

/// -log(sigmoid(-x)) form: log(1 + e^x), stable for any finite x.
double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

// Batch losses are arithmetic means over elements. Every function throws
// EmptyBatch for an empty batch, NonFinite for NaN/inf inputs and
// InvalidLogProb for positive log-probabilities.

/// mean of -log sigmoid(beta * [(theta_w_v - ref_w_v) - (theta_l_v - ref_l_v)])
LossReport dpo_loss(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg);

/// mean of -log sigmoid(beta * [(theta_w_v - ref_w_v) - (theta_w_vl - ref_w_vl)])
LossReport vdpo_loss(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg);

/// dpo + w_v * vdpo, in value and gradient.
LossReport rdpo_loss(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg);

/// Conditional-preference baseline: the vDPO form with the *_w_vl fields
/// holding log-probabilities under a corrupted copy of the image.
LossReport codpo_loss(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg);

struct RdpoTerms {
    LossReport dpo;
    LossReport vdpo;
    LossReport rdpo;
};

/// All three terms from one validation pass; rdpo is assembled from the other two.
RdpoTerms rdpo_terms(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg);

}  // namespace realign
