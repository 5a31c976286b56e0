#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace realign::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitPropertyViolation = 1,
    kExitMalformedInput = 2,
    kExitUnknownId = 3,
};

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

namespace fs = std::filesystem;

/// Loads RAEM embeddings + ids and writes a frozen index snapshot.
int build_index(const fs::path& embeddings, const fs::path& ids, const fs::path& snapshot, Streams io);

/// Prints "id<TAB>similarity<TAB>rank" lines for the top-k neighbors.
int retrieve(const fs::path& snapshot, const std::string& query_id, std::size_t k, Streams io);

struct ForgeArgs {
    fs::path manifest;
    fs::path index;
    fs::path config;
    fs::path lexicon;
    fs::path completions;
    fs::path out_jsonl;
    std::optional<fs::path> skip_report;  // default: <out_jsonl>.skips.json
    unsigned threads = 1;
};

/// Writes preference JSONL (meta header + records) and a skip-report sidecar.
int forge(const ForgeArgs& args, Streams io);

struct TrainArgs {
    fs::path records;
    fs::path config;
    fs::path index;
    fs::path vocab;
    fs::path checkpoint;
    std::optional<fs::path> loss_log;  // default: <checkpoint>.loss.jsonl
};

/// Initializes policy and reference identically from the seed, runs
/// epochs x records single-record rDPO steps, writes checkpoint and loss log.
int train(const TrainArgs& args, Streams io);

struct GradCheckArgs {
    std::optional<fs::path> config;
    std::size_t instances = 1000;
    double h = 1e-5;
    bool h_sweep = false;
    bool inject_sign_flip = false;
};

/// Exit 0 iff the max relative error is within 1e-4.
int grad_check(const GradCheckArgs& args, Streams io);

}  // namespace realign::cli
