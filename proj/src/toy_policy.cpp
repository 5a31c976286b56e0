#include "realign/toy_policy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"
#include "realign/error.hpp"
#include "realign/text.hpp"

namespace realign {

namespace {

std::vector<double> concat_context(const EmbeddingVector& instruction_feat, const EmbeddingVector& image_emb) {
    std::vector<double> ctx(instruction_feat.values().begin(), instruction_feat.values().end());
    ctx.insert(ctx.end(), image_emb.values().begin(), image_emb.values().end());
    return ctx;
}

double log_sum_exp(std::span<const double> xs) {
    const double hi = *std::max_element(xs.begin(), xs.end());
    double acc = 0.0;
    for (double x : xs) acc += std::exp(x - hi);
    return hi + std::log(acc);
}

void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

ToyPolicy::ToyPolicy(std::size_t vocab_size, std::size_t ctx_dim)
    : vocab_size_(vocab_size), ctx_dim_(ctx_dim), weights_(vocab_size * ctx_dim, 0.0), bias_(vocab_size, 0.0) {
    if (vocab_size == 0 || ctx_dim == 0) throw Error(ErrorCode::DimensionMismatch, "policy needs vocab_size, ctx_dim >= 1");
}

ToyPolicy ToyPolicy::random(std::size_t vocab_size, std::size_t ctx_dim, std::uint64_t seed, double scale) {
    ToyPolicy p(vocab_size, ctx_dim);
    std::mt19937_64 rng(seed);
    // 53 high bits -> [0, 1); avoids distribution objects whose output differs across standard libraries.
    auto draw = [&] { return (2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0) * scale; };
    for (double& w : p.weights_) w = draw();
    for (double& b : p.bias_) b = draw();
    return p;
}

std::vector<double> ToyPolicy::logits(std::span<const double> context) const {
    if (context.size() != ctx_dim_) {
        throw Error(ErrorCode::DimensionMismatch, "context dim " + std::to_string(context.size()) + ", policy expects " +
                                                      std::to_string(ctx_dim_));
    }
    std::vector<double> out(bias_);
    for (std::size_t v = 0; v < vocab_size_; ++v) {
        out[v] += dot(std::span<const double>(weights_).subspan(v * ctx_dim_, ctx_dim_), context);
    }
    return out;
}

std::vector<double> next_token_distribution(const ToyPolicy& policy, const EmbeddingVector& instruction_feat,
                                            const EmbeddingVector& image_emb) {
    auto logits = policy.logits(concat_context(instruction_feat, image_emb));
    const double lse = log_sum_exp(logits);
    for (double& l : logits) l = std::exp(l - lse);
    return logits;
}

SequenceScore score_sequence(const ToyPolicy& policy, const EmbeddingVector& instruction_feat,
                             const EmbeddingVector& image_emb, std::span<const int> tokens, bool with_grads) {
    if (tokens.empty()) throw Error(ErrorCode::MalformedInput, "cannot score an empty sequence");
    for (int t : tokens) {
        if (t < 0 || static_cast<std::size_t>(t) >= policy.vocab_size()) {
            throw Error(ErrorCode::TokenOutOfRange, "token " + std::to_string(t) + " outside vocabulary of " +
                                                        std::to_string(policy.vocab_size()));
        }
    }
    const auto context = concat_context(instruction_feat, image_emb);
    const auto logits = policy.logits(context);
    const double lse = log_sum_exp(logits);

    SequenceScore score;
    for (int t : tokens) score.logprob += logits[static_cast<std::size_t>(t)] - lse;
    if (!with_grads) return score;

    // d/dlogit_v of sum_i log softmax[t_i] = count_v - m * p_v
    const double m = static_cast<double>(tokens.size());
    score.d_bias.resize(policy.vocab_size());
    for (std::size_t v = 0; v < policy.vocab_size(); ++v) score.d_bias[v] = -m * std::exp(logits[v] - lse);
    for (int t : tokens) score.d_bias[static_cast<std::size_t>(t)] += 1.0;

    const std::size_t dim = policy.ctx_dim();
    score.d_weights.resize(policy.vocab_size() * dim);
    for (std::size_t v = 0; v < policy.vocab_size(); ++v) {
        for (std::size_t d = 0; d < dim; ++d) score.d_weights[v * dim + d] = score.d_bias[v] * context[d];
    }
    return score;
}

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
    if (tokens_.empty()) throw Error(ErrorCode::MalformedInput, "vocabulary is empty");
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) throw Error(ErrorCode::DuplicateId, "vocabulary token '" + tokens_[i] + "'");
    }
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<std::string> tokens;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        tokens.push_back(line);
    }
    return Vocabulary(std::move(tokens));
}

int Vocabulary::id(std::string_view token) const {
    auto it = ids_.find(std::string(token));
    return it == ids_.end() ? 0 : it->second;
}

std::vector<int> Vocabulary::encode(std::string_view text) const {
    std::vector<int> out;
    for (const auto& r : word_tokens(text)) out.push_back(id(ascii_lower(r.in(text))));
    return out;
}

PolicyFeaturizer::PolicyFeaturizer(const KnowledgeBase& kb, const Vocabulary& vocab, std::size_t instruction_dim)
    : kb_(kb), vocab_(vocab), encoder_(instruction_dim) {}

EmbeddingVector PolicyFeaturizer::instruction(std::string_view text) const {
    try {
        return encoder_.encode(text);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVector) throw;
        return EmbeddingVector(std::vector<double>(encoder_.dim(), 0.0));
    }
}

EmbeddingVector PolicyFeaturizer::image(std::string_view image_id) const { return kb_.vector(image_id); }

std::vector<int> PolicyFeaturizer::tokens(std::string_view text) const { return vocab_.encode(text); }

RecordScores score_record(const ToyPolicy& policy, const PreferenceRecord& record, const PolicyFeaturizer& featurizer,
                          bool with_grads) {
    const auto x = featurizer.instruction(record.instruction);
    const auto v = featurizer.image(record.image_id);
    const auto v_l = featurizer.image(record.retrieved_image_id);
    const auto chosen = featurizer.tokens(record.chosen);
    const auto rejected = featurizer.tokens(record.rejected);
    return {score_sequence(policy, x, v, chosen, with_grads), score_sequence(policy, x, v, rejected, with_grads),
            score_sequence(policy, x, v_l, chosen, with_grads)};
}

TrainStepResult train_step(const ToyPolicy& policy, const ToyPolicy& reference,
                           std::span<const PreferenceRecord> records, const PolicyFeaturizer& featurizer,
                           const PrefOptConfig& cfg, double lr) {
    if (!(std::isfinite(lr) && lr >= 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be finite and >= 0");

    std::vector<LogProbQuad> quads;
    quads.reserve(records.size());
    for (const auto& record : records) {
        const auto theta = score_record(policy, record, featurizer, false);
        const auto ref = score_record(reference, record, featurizer, false);
        quads.push_back({theta.chosen_v.logprob, ref.chosen_v.logprob, theta.rejected_v.logprob, ref.rejected_v.logprob,
                         theta.chosen_vl.logprob, ref.chosen_vl.logprob});
    }
    const RdpoTerms terms = rdpo_terms(quads, cfg);

    // Second pass with gradients keeps memory at one record's worth of partials.
    std::vector<double> g_weights(policy.weights().size(), 0.0);
    std::vector<double> g_bias(policy.bias().size(), 0.0);
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto s = score_record(policy, records[i], featurizer, true);
        const QuadGradient& g = terms.rdpo.grads[i];
        axpy(g.theta_w_v, s.chosen_v.d_weights, g_weights);
        axpy(g.theta_l_v, s.rejected_v.d_weights, g_weights);
        axpy(g.theta_w_vl, s.chosen_vl.d_weights, g_weights);
        axpy(g.theta_w_v, s.chosen_v.d_bias, g_bias);
        axpy(g.theta_l_v, s.rejected_v.d_bias, g_bias);
        axpy(g.theta_w_vl, s.chosen_vl.d_bias, g_bias);
        if (!all_finite(g_weights) || !all_finite(g_bias)) {
            throw Error(ErrorCode::NonFinite, "gradient became non-finite at record '" + records[i].sample_id + "'");
        }
    }

    TrainStepResult result{policy, terms.rdpo, terms.dpo.loss, terms.vdpo.loss};
    auto w = result.policy.weights();
    auto b = result.policy.bias();
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * g_weights[i];
    for (std::size_t i = 0; i < b.size(); ++i) b[i] -= lr * g_bias[i];
    return result;
}

std::string policy_to_json(const ToyPolicy& policy) {
    nlohmann::ordered_json j;
    j["vocab_size"] = policy.vocab_size();
    j["ctx_dim"] = policy.ctx_dim();
    j["weights"] = std::vector<double>(policy.weights().begin(), policy.weights().end());
    j["bias"] = std::vector<double>(policy.bias().begin(), policy.bias().end());
    return j.dump() + "\n";
}

ToyPolicy policy_from_json(std::string_view json) {
    try {
        const auto j = nlohmann::json::parse(json);
        const auto vocab = j.at("vocab_size").get<std::size_t>();
        const auto dim = j.at("ctx_dim").get<std::size_t>();
        const auto weights = j.at("weights").get<std::vector<double>>();
        const auto bias = j.at("bias").get<std::vector<double>>();
        if (j.size() != 4) throw Error(ErrorCode::MalformedInput, "checkpoint has unexpected keys");
        if (weights.size() != vocab * dim || bias.size() != vocab) {
            throw Error(ErrorCode::CountMismatch, "checkpoint parameter counts do not match vocab_size/ctx_dim");
        }
        ToyPolicy p(vocab, dim);
        std::copy(weights.begin(), weights.end(), p.weights().begin());
        std::copy(bias.begin(), bias.end(), p.bias().begin());
        if (!all_finite(p.weights()) || !all_finite(p.bias())) throw Error(ErrorCode::NonFinite, "checkpoint parameters");
        return p;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedInput, std::string("checkpoint: ") + e.what());
    }
}

void save_policy(const std::filesystem::path& path, const ToyPolicy& policy) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << policy_to_json(policy);
}

ToyPolicy load_policy(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return policy_from_json(buf.str());
}

}  // namespace realign
