#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "realign/commands.hpp"

int main(int argc, char** argv) {
    namespace cli = realign::cli;
    CLI::App app{"Retrieval-driven preference data construction and rDPO training"};
    app.require_subcommand(1);

    std::string embeddings, ids, snapshot;
    auto* build = app.add_subcommand("build-index", "Build a frozen index snapshot from RAEM embeddings");
    build->add_option("embeddings", embeddings, "RAEM embedding file")->required()->check(CLI::ExistingFile);
    build->add_option("ids", ids, "Item ids, one per line")->required()->check(CLI::ExistingFile);
    build->add_option("out", snapshot, "Snapshot output path")->required();

    std::string index, query;
    std::size_t k = 10;
    auto* retrieve = app.add_subcommand("retrieve", "Print the top-k neighbors of an indexed item");
    retrieve->add_option("index", index, "Index snapshot")->required()->check(CLI::ExistingFile);
    retrieve->add_option("query_id", query, "Item id to query")->required();
    retrieve->add_option("-k,--k", k, "Number of neighbors")->capture_default_str();

    cli::ForgeArgs forge_args;
    std::string skip_report;
    auto* forge = app.add_subcommand("forge", "Construct preference records from a sample manifest");
    forge->add_option("--manifest", forge_args.manifest, "Sample manifest TSV")->required()->check(CLI::ExistingFile);
    forge->add_option("--index", forge_args.index, "Index snapshot")->required()->check(CLI::ExistingFile);
    forge->add_option("--config", forge_args.config, "Run config")->required()->check(CLI::ExistingFile);
    forge->add_option("--lexicon", forge_args.lexicon, "Content lexicon (word<TAB>kind)")->required()->check(CLI::ExistingFile);
    forge->add_option("--completions", forge_args.completions, "Completion table TSV")->required()->check(CLI::ExistingFile);
    forge->add_option("--out", forge_args.out_jsonl, "Preference JSONL output")->required();
    forge->add_option("--skip-report", skip_report, "Skip report path (default <out>.skips.json)");
    forge->add_option("--threads", forge_args.threads, "Worker threads")->capture_default_str();

    cli::TrainArgs train_args;
    std::string loss_log;
    auto* train = app.add_subcommand("train", "Train the toy policy with rDPO on preference records");
    train->add_option("--records", train_args.records, "Preference JSONL")->required()->check(CLI::ExistingFile);
    train->add_option("--config", train_args.config, "Run config")->required()->check(CLI::ExistingFile);
    train->add_option("--index", train_args.index, "Index snapshot")->required()->check(CLI::ExistingFile);
    train->add_option("--vocab", train_args.vocab, "Vocabulary file")->required()->check(CLI::ExistingFile);
    train->add_option("--out", train_args.checkpoint, "Checkpoint output path")->required();
    train->add_option("--loss-log", loss_log, "Loss log path (default <out>.loss.jsonl)");

    cli::GradCheckArgs gc_args;
    std::string gc_config;
    auto* grad = app.add_subcommand("grad-check", "Finite-difference check of every analytic gradient");
    grad->add_option("--config", gc_config, "Run config (seed, beta, w_v)")->check(CLI::ExistingFile);
    grad->add_option("--instances", gc_args.instances, "Random instances per suite")->capture_default_str();
    grad->add_option("--step", gc_args.h, "Central-difference step h")->capture_default_str();
    grad->add_flag("--h-sweep", gc_args.h_sweep, "Also report the error for h = 1e-2 .. 1e-6");
    grad->add_flag("--inject-sign-flip", gc_args.inject_sign_flip)->group("");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? cli::kExitOk : cli::kExitMalformedInput;
    }

    const cli::Streams io{std::cout, std::cerr};
    if (*build) return cli::build_index(embeddings, ids, snapshot, io);
    if (*retrieve) return cli::retrieve(index, query, k, io);
    if (*forge) {
        if (!skip_report.empty()) forge_args.skip_report = skip_report;
        return cli::forge(forge_args, io);
    }
    if (*train) {
        if (!loss_log.empty()) train_args.loss_log = loss_log;
        return cli::train(train_args, io);
    }
    if (!gc_config.empty()) gc_args.config = gc_config;
    return cli::grad_check(gc_args, io);
}
