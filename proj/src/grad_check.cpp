#include "realign/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include <fmt/format.h>

#include "realign/toy_policy.hpp"

namespace realign {

namespace {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return lo + (hi - lo) * static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(engine_() % n); }

private:
    std::mt19937_64 engine_;
};

void record(SuiteResult& suite, double err, std::size_t instance, std::string parameter) {
    if (suite.checked++ == 0 || err > suite.max_rel_error) {
        suite.max_rel_error = err;
        suite.worst_instance = instance;
        suite.worst_parameter = std::move(parameter);
    }
}

using LossFn = std::function<LossReport(std::span<const LogProbQuad>, const PrefOptConfig&)>;

SuiteResult check_loss(const std::string& name, const LossFn& fn, const GradCheckOptions& opt, Rng& rng) {
    SuiteResult suite;
    suite.suite = name;
    for (std::size_t inst = 0; inst < opt.instances; ++inst) {
        std::vector<LogProbQuad> batch(1 + rng.index(8));
        for (auto& q : batch) {
            q = {rng.uniform(-40, -0.5), rng.uniform(-40, -0.5), rng.uniform(-40, -0.5),
                 rng.uniform(-40, -0.5), rng.uniform(-40, -0.5), rng.uniform(-40, -0.5)};
        }
        const auto report = fn(batch, opt.opt);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            double LogProbQuad::*fields[] = {&LogProbQuad::theta_w_v, &LogProbQuad::theta_l_v, &LogProbQuad::theta_w_vl};
            const double analytic[] = {report.grads[i].theta_w_v, report.grads[i].theta_l_v, report.grads[i].theta_w_vl};
            const char* names[] = {"theta_w_v", "theta_l_v", "theta_w_vl"};
            for (int f = 0; f < 3; ++f) {
                auto plus = batch;
                auto minus = batch;
                plus[i].*fields[f] += opt.h;
                minus[i].*fields[f] -= opt.h;
                const double numeric = (fn(plus, opt.opt).loss - fn(minus, opt.opt).loss) / (2.0 * opt.h);
                const double a = opt.inject_sign_flip ? -analytic[f] : analytic[f];
                record(suite, relative_error(a, numeric), inst, fmt::format("element {} {}", i, names[f]));
            }
        }
    }
    return suite;
}

SuiteResult check_policy(const GradCheckOptions& opt, Rng& rng) {
    SuiteResult suite;
    suite.suite = "score_sequence";
    for (std::size_t inst = 0; inst < opt.instances; ++inst) {
        const std::size_t vocab = 2 + rng.index(11);
        const std::size_t instr_dim = 1 + rng.index(4);
        const std::size_t image_dim = 1 + rng.index(4);
        ToyPolicy policy(vocab, instr_dim + image_dim);
        for (double& w : policy.weights()) w = rng.uniform(-1, 1);
        for (double& b : policy.bias()) b = rng.uniform(-1, 1);
        std::vector<double> x(instr_dim), v(image_dim);
        for (double& e : x) e = rng.uniform(-1, 1);
        for (double& e : v) e = rng.uniform(-1, 1);
        const EmbeddingVector xe(x), ve(v);
        std::vector<int> tokens(1 + rng.index(10));
        for (int& t : tokens) t = static_cast<int>(rng.index(vocab));

        const auto score = score_sequence(policy, xe, ve, tokens);
        auto numeric_at = [&](double& param) {
            const double saved = param;
            param = saved + opt.h;
            const double up = score_sequence(policy, xe, ve, tokens, false).logprob;
            param = saved - opt.h;
            const double down = score_sequence(policy, xe, ve, tokens, false).logprob;
            param = saved;
            return (up - down) / (2.0 * opt.h);
        };
        for (std::size_t p = 0; p < policy.weights().size(); ++p) {
            const double a = opt.inject_sign_flip ? -score.d_weights[p] : score.d_weights[p];
            record(suite, relative_error(a, numeric_at(policy.weights()[p])), inst, fmt::format("weight {}", p));
        }
        for (std::size_t p = 0; p < policy.bias().size(); ++p) {
            const double a = opt.inject_sign_flip ? -score.d_bias[p] : score.d_bias[p];
            record(suite, relative_error(a, numeric_at(policy.bias()[p])), inst, fmt::format("bias {}", p));
        }
    }
    return suite;
}

}  // namespace

double relative_error(double analytic, double numeric, double floor) noexcept {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), floor});
    return std::abs(analytic - numeric) / denom;
}

GradCheckSummary run_grad_check(const GradCheckOptions& options) {
    Rng rng(options.seed);
    GradCheckSummary summary;
    summary.suites.push_back(check_loss("dpo", dpo_loss, options, rng));
    summary.suites.push_back(check_loss("vdpo", vdpo_loss, options, rng));
    summary.suites.push_back(check_loss("rdpo", rdpo_loss, options, rng));
    summary.suites.push_back(check_loss("codpo", codpo_loss, options, rng));
    summary.suites.push_back(check_policy(options, rng));
    for (const auto& s : summary.suites) summary.max_rel_error = std::max(summary.max_rel_error, s.max_rel_error);
    summary.passed = summary.max_rel_error <= options.tolerance;
    return summary;
}

}  // namespace realign
