#include "realign/run_config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "realign/error.hpp"
#include "realign/text.hpp"

namespace realign {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double parse_real(std::string_view key, std::string_view value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("{}: '{}' is not a finite number", key, value));
    }
    return out;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view value) {
    std::uint64_t out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw Error(ErrorCode::InvalidConfig, fmt::format("{}: '{}' is not a non-negative integer", key, value));
    }
    return out;
}

}  // namespace

void RunConfig::validate() const {
    forge.validate();
    opt.validate();
    if (!(mask.max_mask_fraction > 0.0 && mask.max_mask_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "max_mask_fraction must be in (0, 1]");
    }
    if (epochs == 0) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
    if (!(lr > 0.0)) throw Error(ErrorCode::InvalidConfig, "lr must be > 0");
    if (text_dim == 0 || instruction_dim == 0) throw Error(ErrorCode::InvalidConfig, "encoder dims must be >= 1");
    if (embedding_source.empty() || embedding_source.find_first_of(" \t\r\n#") != std::string::npos) {
        throw Error(ErrorCode::InvalidConfig, "embedding_source must be a single word");
    }
}

const std::vector<std::string_view>& config_keys() {
    static const std::vector<std::string_view> keys = {
        "tau",  "k",     "min_similarity", "beta",     "w_v",             "mask_mode",       "max_mask_fraction",
        "seed", "epochs", "lr",            "text_dim", "instruction_dim", "embedding_source"};
    return keys;
}

RunConfig parse_run_config(std::string_view text) {
    RunConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: expected key = value", line_no));
        }
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        if (value.empty()) throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: '{}' has no value", line_no, key));
        if (!seen.emplace(key).second) throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: duplicate key '{}'", line_no, key));

        if (key == "tau") cfg.forge.tau = parse_real(key, value);
        else if (key == "k") cfg.forge.k = parse_unsigned(key, value);
        else if (key == "min_similarity") cfg.forge.min_similarity = parse_real(key, value);
        else if (key == "beta") cfg.opt.beta = parse_real(key, value);
        else if (key == "w_v") cfg.opt.w_v = parse_real(key, value);
        else if (key == "mask_mode") {
            auto mode = parse_mask_mode(value);
            if (!mode) throw Error(ErrorCode::InvalidConfig, fmt::format("mask_mode: '{}' is not segment_level or sentence_level", value));
            cfg.mask.mode = *mode;
        } else if (key == "max_mask_fraction") cfg.mask.max_mask_fraction = parse_real(key, value);
        else if (key == "seed") cfg.seed = parse_unsigned(key, value);
        else if (key == "epochs") cfg.epochs = parse_unsigned(key, value);
        else if (key == "lr") cfg.lr = parse_real(key, value);
        else if (key == "text_dim") cfg.text_dim = parse_unsigned(key, value);
        else if (key == "instruction_dim") cfg.instruction_dim = parse_unsigned(key, value);
        else if (key == "embedding_source") cfg.embedding_source = std::string(value);
        else throw Error(ErrorCode::InvalidConfig, fmt::format("line {}: unknown key '{}'", line_no, key));
    }
    cfg.mask.seed = cfg.seed;
    cfg.validate();
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    try {
        return parse_run_config(slurp(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::Io) throw;
        throw Error(e.code(), path.string() + ": " + e.what());
    }
}

void apply_env_overrides(RunConfig& cfg) {
    if (const char* seed = std::getenv("REALIGN_SEED"); seed != nullptr && *seed != '\0') {
        cfg.seed = parse_unsigned("REALIGN_SEED", seed);
        cfg.mask.seed = cfg.seed;
    }
}

std::string render_run_config(const RunConfig& cfg) {
    std::string out;
    out += fmt::format("tau = {}\n", cfg.forge.tau);
    out += fmt::format("k = {}\n", cfg.forge.k);
    out += fmt::format("min_similarity = {}\n", cfg.forge.min_similarity);
    out += fmt::format("beta = {}\n", cfg.opt.beta);
    out += fmt::format("w_v = {}\n", cfg.opt.w_v);
    out += fmt::format("mask_mode = {}\n", to_string(cfg.mask.mode));
    out += fmt::format("max_mask_fraction = {}\n", cfg.mask.max_mask_fraction);
    out += fmt::format("seed = {}\n", cfg.seed);
    out += fmt::format("epochs = {}\n", cfg.epochs);
    out += fmt::format("lr = {}\n", cfg.lr);
    out += fmt::format("text_dim = {}\n", cfg.text_dim);
    out += fmt::format("instruction_dim = {}\n", cfg.instruction_dim);
    out += fmt::format("embedding_source = {}\n", cfg.embedding_source);
    return out;
}

std::vector<Sample> parse_manifest(std::string_view tsv) {
    std::vector<Sample> samples;
    std::set<std::string, std::less<>> ids;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < tsv.size()) {
        std::size_t eol = tsv.find('\n', pos);
        if (eol == std::string_view::npos) eol = tsv.size();
        std::string_view line = tsv.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line_no == 1) {
            if (line != "sample_id\tinstruction\timage_id\tchosen_response") {
                throw Error(ErrorCode::MalformedInput,
                            "manifest header must be sample_id<TAB>instruction<TAB>image_id<TAB>chosen_response");
            }
            continue;
        }
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            const auto tab = line.find('\t', start);
            cols.emplace_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (cols.size() != 4) {
            throw Error(ErrorCode::MalformedInput, fmt::format("manifest line {}: expected 4 columns, got {}", line_no, cols.size()));
        }
        for (const auto& c : cols) {
            if (c.empty()) throw Error(ErrorCode::MalformedInput, fmt::format("manifest line {}: empty column", line_no));
        }
        if (!ids.emplace(cols[0]).second) {
            throw Error(ErrorCode::DuplicateId, fmt::format("manifest line {}: sample_id '{}'", line_no, cols[0]));
        }
        samples.push_back({cols[0], cols[1], cols[2], cols[3]});
    }
    if (line_no == 0) throw Error(ErrorCode::MalformedInput, "manifest is empty");
    return samples;
}

std::vector<Sample> load_manifest(const std::filesystem::path& path) { return parse_manifest(slurp(path)); }

void write_manifest(const std::filesystem::path& path, const std::vector<Sample>& samples) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << "sample_id\tinstruction\timage_id\tchosen_response\n";
    for (const auto& s : samples) out << s.sample_id << '\t' << s.instruction << '\t' << s.image_id << '\t' << s.chosen << '\n';
}

}  // namespace realign
