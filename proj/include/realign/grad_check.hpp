#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "realign/pref_opt.hpp"

namespace realign {

/// |analytic - numeric| / max(|analytic|, |numeric|, floor)
/// The floor sits just above central-difference roundoff (~eps*|f|/h at h = 1e-5),
/// so near-zero partials are judged on absolute error instead of noise.
double relative_error(double analytic, double numeric, double floor = 1e-5) noexcept;

struct GradCheckOptions {
    std::size_t instances = 1000;  // random instances per suite
    double h = 1e-5;               // central-difference step
    double tolerance = 1e-4;
    std::uint64_t seed = 0;
    PrefOptConfig opt;
    bool inject_sign_flip = false;  // test hook: negate analytic gradients
};

struct SuiteResult {
    std::string suite;
    std::size_t checked = 0;  // partial derivatives compared
    double max_rel_error = 0.0;
    std::size_t worst_instance = 0;
    std::string worst_parameter;
};

struct GradCheckSummary {
    std::vector<SuiteResult> suites;
    double max_rel_error = 0.0;
    bool passed = false;
};

/// Finite-difference checks of dpo/vdpo/rdpo/codpo and of score_sequence on
/// random instances derived from `seed`.
GradCheckSummary run_grad_check(const GradCheckOptions& options);

}  // namespace realign
