#include "realign/pref_opt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "realign/error.hpp"

namespace realign {

namespace {

void validate_batch(std::span<const LogProbQuad> batch) {
    if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "preference batch is empty");
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& q = batch[i];
        for (double v : {q.theta_w_v, q.ref_w_v, q.theta_l_v, q.ref_l_v, q.theta_w_vl, q.ref_w_vl}) {
            if (!std::isfinite(v)) throw Error(ErrorCode::NonFinite, "batch element " + std::to_string(i));
            if (v > 0.0) {
                throw Error(ErrorCode::InvalidLogProb, "batch element " + std::to_string(i) + " holds log-prob " +
                                                           std::to_string(v) + " > 0");
            }
        }
    }
}

// Shared kernel: mean of softplus(-beta * margin_i). `margin` returns the
// log-ratio difference and `scatter` writes d loss / d margin into a gradient.
template <typename Margin, typename Scatter>
LossReport pairwise_loss(std::span<const LogProbQuad> batch, double beta, Margin margin, Scatter scatter) {
    const double n = static_cast<double>(batch.size());
    LossReport report;
    report.grads.resize(batch.size());
    double total = 0.0;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const double z = beta * margin(batch[i]);
        total += softplus(-z);
        scatter(report.grads[i], -beta * sigmoid(-z) / n);
    }
    report.loss = total / n;
    if (!std::isfinite(report.loss)) throw Error(ErrorCode::NonFinite, "loss overflowed");
    return report;
}

LossReport dpo_unchecked(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg) {
    return pairwise_loss(
        batch, cfg.beta,
        [](const LogProbQuad& q) { return (q.theta_w_v - q.ref_w_v) - (q.theta_l_v - q.ref_l_v); },
        [](QuadGradient& g, double d) {
            g.theta_w_v = d;
            g.theta_l_v = -d;
        });
}

LossReport vdpo_unchecked(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg) {
    return pairwise_loss(
        batch, cfg.beta,
        [](const LogProbQuad& q) { return (q.theta_w_v - q.ref_w_v) - (q.theta_w_vl - q.ref_w_vl); },
        [](QuadGradient& g, double d) {
            g.theta_w_v = d;
            g.theta_w_vl = -d;
        });
}

LossReport combine(const LossReport& dpo, const LossReport& vdpo, double w_v) {
    LossReport out;
    out.loss = dpo.loss + w_v * vdpo.loss;
    out.grads.resize(dpo.grads.size());
    for (std::size_t i = 0; i < dpo.grads.size(); ++i) {
        out.grads[i].theta_w_v = dpo.grads[i].theta_w_v + w_v * vdpo.grads[i].theta_w_v;
        out.grads[i].theta_l_v = dpo.grads[i].theta_l_v + w_v * vdpo.grads[i].theta_l_v;
        out.grads[i].theta_w_vl = dpo.grads[i].theta_w_vl + w_v * vdpo.grads[i].theta_w_vl;
    }
    return out;
}

}  // namespace

void PrefOptConfig::validate() const {
    if (!(std::isfinite(beta) && beta > 0.0)) throw Error(ErrorCode::InvalidConfig, "beta must be finite and > 0");
    if (!(std::isfinite(w_v) && w_v >= 0.0)) throw Error(ErrorCode::InvalidConfig, "w_v must be finite and >= 0");
}

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

LossReport dpo_loss(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg) {
    cfg.validate();
    validate_batch(batch);
    return dpo_unchecked(batch, cfg);
}

LossReport vdpo_loss(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg) {
    cfg.validate();
    validate_batch(batch);
    return vdpo_unchecked(batch, cfg);
}

LossReport codpo_loss(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg) { return vdpo_loss(batch, cfg); }

RdpoTerms rdpo_terms(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg) {
    cfg.validate();
    validate_batch(batch);
    RdpoTerms terms{dpo_unchecked(batch, cfg), vdpo_unchecked(batch, cfg), {}};
    terms.rdpo = combine(terms.dpo, terms.vdpo, cfg.w_v);
    return terms;
}

LossReport rdpo_loss(std::span<const LogProbQuad> batch, const PrefOptConfig& cfg) {
    return rdpo_terms(batch, cfg).rdpo;
}

}  // namespace realign
