#include "realign/commands.hpp"

#include <fstream>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "json.hpp"
#include "realign/error.hpp"
#include "realign/grad_check.hpp"
#include "realign/pair_forge.hpp"
#include "realign/raem_io.hpp"
#include "realign/run_config.hpp"
#include "realign/toy_policy.hpp"

namespace realign::cli {

namespace {

int exit_code_for(const Error& e) {
    switch (e.code()) {
        case ErrorCode::UnknownId: return kExitUnknownId;
        case ErrorCode::NonFinite: return kExitPropertyViolation;
        default: return kExitMalformedInput;
    }
}

template <typename Body>
int guarded(Streams io, Body body) {
    try {
        return body();
    } catch (const Error& e) {
        fmt::print(io.err, "error: {}\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        fmt::print(io.err, "error: {}\n", e.what());
        return kExitMalformedInput;
    }
}

RunConfig load_config(const fs::path& path) {
    RunConfig cfg = load_run_config(path);
    apply_env_overrides(cfg);
    return cfg;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    return out;
}

std::string forge_meta(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    j["format"] = "realign-preferences";
    j["version"] = 1;
    j["tau"] = cfg.forge.tau;
    j["k"] = cfg.forge.k;
    j["min_similarity"] = cfg.forge.min_similarity;
    j["mask_mode"] = std::string(to_string(cfg.mask.mode));
    j["max_mask_fraction"] = cfg.mask.max_mask_fraction;
    j["seed"] = cfg.seed;
    j["text_dim"] = cfg.text_dim;
    j["embedding_source"] = cfg.embedding_source;
    j["masking_prompt"] = std::string(kStrategicMaskingPrompt);
    j["completion_prompt"] = std::string(kMaskCompletionPrompt);
    return j.dump();
}

}  // namespace

int build_index(const fs::path& embeddings, const fs::path& ids, const fs::path& snapshot, Streams io) {
    return guarded(io, [&] {
        const KnowledgeBase kb = load_knowledge_base(embeddings, ids);
        write_snapshot(snapshot, kb);
        fmt::print(io.out, "{} vectors, dim={}\n", kb.size(), kb.dim());
        return kExitOk;
    });
}

int retrieve(const fs::path& snapshot, const std::string& query_id, std::size_t k, Streams io) {
    return guarded(io, [&] {
        if (k == 0) throw Error(ErrorCode::MalformedInput, "k must be >= 1");
        const KnowledgeBase kb = read_snapshot(snapshot);
        for (const auto& n : retrieve_top_k(kb, query_id, k)) {
            fmt::print(io.out, "{}\t{}\t{}\n", n.item_id, n.similarity, n.rank);
        }
        return kExitOk;
    });
}

int forge(const ForgeArgs& args, Streams io) {
    return guarded(io, [&] {
        const RunConfig cfg = load_config(args.config);
        const auto samples = load_manifest(args.manifest);
        const KnowledgeBase kb = read_snapshot(args.index);
        const ResponseMasker masker = lexicon_response_masker(ContentLexicon::load(args.lexicon), cfg.mask);
        const TableCompleter completer = TableCompleter::load(args.completions);
        const HashingTextEncoder encoder(cfg.text_dim);
        const ForgeContext ctx{kb, masker, completer, encoder, cfg.forge};

        const ForgeResult result = forge_dataset(samples, ctx, cfg.seed, std::max(1u, args.threads));

        // Build both outputs fully before touching the files.
        std::ostringstream jsonl;
        write_preference_jsonl(jsonl, forge_meta(cfg), result.records);
        const fs::path report_path = args.skip_report.value_or(fs::path(args.out_jsonl.string() + ".skips.json"));
        open_out(args.out_jsonl) << jsonl.str();
        open_out(report_path) << skip_report_to_json(result.report);

        fmt::print(io.out, "{} samples: {} records, {} skipped\n", result.report.total_samples, result.report.accepted,
                   result.report.total_skipped());
        return kExitOk;
    });
}

int train(const TrainArgs& args, Streams io) {
    return guarded(io, [&] {
        const RunConfig cfg = load_config(args.config);
        const PreferenceFile data = read_preference_jsonl(args.records);
        if (data.records.empty()) throw Error(ErrorCode::EmptyBatch, args.records.string() + " holds no records");
        const KnowledgeBase kb = read_snapshot(args.index);
        const Vocabulary vocab = Vocabulary::load(args.vocab);
        const PolicyFeaturizer featurizer(kb, vocab, cfg.instruction_dim);

        const ToyPolicy reference = ToyPolicy::random(vocab.size(), featurizer.ctx_dim(), cfg.seed);
        ToyPolicy policy = reference;

        std::ostringstream log;
        std::size_t step = 0;
        double first = 0.0;
        double last = 0.0;
        for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
            for (const auto& record : data.records) {
                TrainStepResult r;
                try {
                    r = train_step(policy, reference, std::span(&record, 1), featurizer, cfg.opt, cfg.lr);
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::NonFinite) throw;
                    throw Error(ErrorCode::NonFinite, fmt::format("record '{}': {}", record.sample_id, e.what()));
                }
                nlohmann::ordered_json line;
                line["step"] = step;
                line["dpo"] = r.dpo_loss;
                line["vdpo"] = r.vdpo_loss;
                line["rdpo"] = r.report.loss;
                log << line.dump() << '\n';
                if (step == 0) first = r.report.loss;
                last = r.report.loss;
                policy = std::move(r.policy);
                ++step;
            }
        }

        const fs::path log_path = args.loss_log.value_or(fs::path(args.checkpoint.string() + ".loss.jsonl"));
        save_policy(args.checkpoint, policy);
        open_out(log_path) << log.str();
        fmt::print(io.out, "{} steps, rdpo {} -> {}\n", step, first, last);
        return kExitOk;
    });
}

int grad_check(const GradCheckArgs& args, Streams io) {
    return guarded(io, [&] {
        RunConfig cfg;
        if (args.config) cfg = load_config(*args.config);
        else apply_env_overrides(cfg);

        GradCheckOptions opt;
        opt.instances = args.instances;
        opt.seed = cfg.seed;
        opt.opt = cfg.opt;
        opt.inject_sign_flip = args.inject_sign_flip;

        if (args.h_sweep) {
            for (double h : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
                opt.h = h;
                fmt::print(io.out, "h={:g}\tmax_rel_error={:.3e}\n", h, run_grad_check(opt).max_rel_error);
            }
        }

        opt.h = args.h;
        const GradCheckSummary summary = run_grad_check(opt);
        for (const auto& s : summary.suites) {
            fmt::print(io.out, "{}\tchecked={}\tmax_rel_error={:.3e}\n", s.suite, s.checked, s.max_rel_error);
        }
        fmt::print(io.out, "max relative error {:.3e} (tolerance {:g})\n", summary.max_rel_error, opt.tolerance);
        if (!summary.passed) {
            for (const auto& s : summary.suites) {
                if (s.max_rel_error > opt.tolerance) {
                    fmt::print(io.err, "violation: {} instance {} {}\n", s.suite, s.worst_instance, s.worst_parameter);
                }
            }
            return kExitPropertyViolation;
        }
        return kExitOk;
    });
}

}  // namespace realign::cli
