#include <gtest/gtest.h>

#include <cstdlib>

#include "realign/error.hpp"
#include "realign/run_config.hpp"
#include "support.hpp"

using namespace realign;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no realign::Error thrown";
    return ErrorCode::Io;
}

}  // namespace

TEST(RunConfig, Defaults) {
    const RunConfig cfg = parse_run_config("");
    EXPECT_EQ(cfg.forge.tau, 0.95);
    EXPECT_EQ(cfg.forge.k, 10u);
    EXPECT_EQ(cfg.forge.min_similarity, 0.0);
    EXPECT_EQ(cfg.opt.beta, 0.1);
    EXPECT_EQ(cfg.opt.w_v, 1.0);
    EXPECT_EQ(cfg.mask.mode, MaskMode::SegmentLevel);
    EXPECT_EQ(cfg.mask.max_mask_fraction, 0.5);
    EXPECT_EQ(cfg.epochs, 1u);
    EXPECT_EQ(cfg.lr, 1e-5);
    EXPECT_EQ(cfg.seed, 0u);
}

TEST(RunConfig, ParsesAllKeys) {
    const auto cfg = parse_run_config(
        "# comment\n"
        "tau = 0.85\n"
        "k=5\n"
        "  min_similarity =0.1   # trailing\n"
        "beta = 0.2\n"
        "w_v = 0.75\n"
        "mask_mode = sentence_level\n"
        "max_mask_fraction = 1\n"
        "seed = 18446744073709551615\n"
        "epochs = 3\n"
        "lr = 0.1\n"
        "text_dim = 64\n"
        "instruction_dim = 16\n"
        "embedding_source = clip_vision\n");
    EXPECT_EQ(cfg.forge.tau, 0.85);
    EXPECT_EQ(cfg.forge.k, 5u);
    EXPECT_EQ(cfg.forge.min_similarity, 0.1);
    EXPECT_EQ(cfg.opt.beta, 0.2);
    EXPECT_EQ(cfg.opt.w_v, 0.75);
    EXPECT_EQ(cfg.mask.mode, MaskMode::SentenceLevel);
    EXPECT_EQ(cfg.mask.max_mask_fraction, 1.0);
    EXPECT_EQ(cfg.seed, 18446744073709551615ULL);
    EXPECT_EQ(cfg.epochs, 3u);
    EXPECT_EQ(cfg.lr, 0.1);
    EXPECT_EQ(cfg.text_dim, 64u);
    EXPECT_EQ(cfg.instruction_dim, 16u);
    EXPECT_EQ(cfg.embedding_source, "clip_vision");
}

TEST(RunConfig, RenderRoundTrip) {
    RunConfig cfg;
    cfg.forge.tau = 0.9;
    cfg.opt.w_v = 0.25;
    cfg.lr = 1.0 / 3.0;
    cfg.seed = 123;
    cfg.mask.mode = MaskMode::SentenceLevel;
    const auto text = render_run_config(cfg);
    const auto back = parse_run_config(text);
    EXPECT_EQ(render_run_config(back), text);
    EXPECT_EQ(back.lr, cfg.lr);
    std::size_t lines = 0;
    for (char c : text) lines += c == '\n';
    EXPECT_EQ(lines, config_keys().size());
}

TEST(RunConfig, Rejections) {
    EXPECT_EQ(code_of([] { parse_run_config("gamma = 1\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("tau = 0.9\ntau = 0.8\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("tau = high\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("tau 0.9\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("tau = 1.5\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("tau = 0\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("tau = 0.5\nmin_similarity = 0.5\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("k = 0\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("k = -3\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("beta = 0\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("w_v = -1\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("lr = 0\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("lr = nan\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("epochs = 0\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("mask_mode = word_level\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("max_mask_fraction = 0\n"); }), ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { parse_run_config("seed =\n"); }), ErrorCode::InvalidConfig);
}

TEST(RunConfig, SeedEnvironmentOverride) {
    RunConfig cfg;
    cfg.seed = 5;
    ::unsetenv("REALIGN_SEED");
    apply_env_overrides(cfg);
    EXPECT_EQ(cfg.seed, 5u);
    ::setenv("REALIGN_SEED", "77", 1);
    apply_env_overrides(cfg);
    EXPECT_EQ(cfg.seed, 77u);
    ::setenv("REALIGN_SEED", "seventy", 1);
    EXPECT_EQ(code_of([&] { apply_env_overrides(cfg); }), ErrorCode::InvalidConfig);
    ::unsetenv("REALIGN_SEED");
}

TEST(Manifest, ParseAndRoundTrip) {
    const std::string tsv =
        "sample_id\tinstruction\timage_id\tchosen_response\n"
        "s1\tDescribe.\timg1\tA red ball.\n"
        "s2\tWhat is it?\timg2\tA cat.\n";
    const auto samples = parse_manifest(tsv);
    ASSERT_EQ(samples.size(), 2u);
    EXPECT_EQ(samples[1].instruction, "What is it?");
    EXPECT_EQ(samples[1].chosen, "A cat.");
    testing_support::TempDir dir;
    write_manifest(dir / "m.tsv", samples);
    EXPECT_EQ(testing_support::read_text(dir / "m.tsv"), tsv);
}

TEST(Manifest, Rejections) {
    const std::string header = "sample_id\tinstruction\timage_id\tchosen_response\n";
    EXPECT_EQ(code_of([] { parse_manifest("id\tx\n"); }), ErrorCode::MalformedInput);
    EXPECT_EQ(code_of([&] { parse_manifest(header + "s1\tx\timg1\n"); }), ErrorCode::MalformedInput);
    EXPECT_EQ(code_of([&] { parse_manifest(header + "s1\tx\t\ty\n"); }), ErrorCode::MalformedInput);
    EXPECT_EQ(code_of([&] { parse_manifest(header + "s1\tx\ti\ty\ns1\tx\ti\tz\n"); }), ErrorCode::DuplicateId);
}
