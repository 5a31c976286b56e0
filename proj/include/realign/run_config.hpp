#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "realign/mask_engine.hpp"
#include "realign/pair_forge.hpp"
#include "realign/pref_opt.hpp"

namespace realign {

/// Every tunable of a run. Parsed from flat "key = value" files.
struct RunConfig {
    ForgeConfig forge;       // tau, k, min_similarity
    PrefOptConfig opt;       // beta, w_v
    MaskStrategy mask;       // mask_mode, max_mask_fraction (seed mirrors `seed`)
    std::uint64_t seed = 0;
    std::size_t epochs = 1;
    double lr = 1e-5;
    std::size_t text_dim = 256;         // hashing encoder dim for response similarity
    std::size_t instruction_dim = 32;   // hashing encoder dim for policy instruction features
    std::string embedding_source = "unspecified";

    void validate() const;
};

/// Recognized keys, in canonical order.
const std::vector<std::string_view>& config_keys();

/// Parses "key = value" lines; '#' starts a comment. Unknown or repeated keys,
/// unparsable values and out-of-range values throw InvalidConfig.
RunConfig parse_run_config(std::string_view text);
RunConfig load_run_config(const std::filesystem::path& path);

/// REALIGN_SEED, when set, replaces the seed.
void apply_env_overrides(RunConfig& cfg);

/// Canonical "key = value" rendering; parse_run_config(render) == cfg.
std::string render_run_config(const RunConfig& cfg);

/// Manifest: UTF-8 TSV with header sample_id, instruction, image_id, chosen_response.
std::vector<Sample> parse_manifest(std::string_view tsv);
std::vector<Sample> load_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const std::vector<Sample>& samples);

}  // namespace realign
