#include "realign/pair_forge.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"

#include "realign/error.hpp"

namespace realign {

using ordered_json = nlohmann::ordered_json;

void ForgeConfig::validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidConfig, "tau must be in (0, 1]");
    if (k == 0) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
    if (!(min_similarity >= 0.0 && min_similarity < tau)) {
        throw Error(ErrorCode::InvalidConfig, "min_similarity must be in [0, tau)");
    }
}

std::string_view to_string(SkipReason reason) {
    switch (reason) {
        case SkipReason::NothingMaskable: return "NothingMaskable";
        case SkipReason::NoCandidate: return "NoCandidate";
        case SkipReason::UnalignableMask: return "UnalignableMask";
    }
    return "Unknown";
}

void TableCompleter::add(std::string sample_id, int rank, std::string completion) {
    auto [it, inserted] = table_.emplace(std::make_pair(std::move(sample_id), rank), std::move(completion));
    if (!inserted) {
        throw Error(ErrorCode::DuplicateId, "completion for (" + it->first.first + ", " + std::to_string(rank) + ")");
    }
}

TableCompleter TableCompleter::parse(std::string_view tsv) {
    TableCompleter table;
    std::istringstream in{std::string(tsv)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1) {
            if (line != "sample_id\trank\tcompletion") {
                throw Error(ErrorCode::MalformedInput, "completions TSV: header must be sample_id<TAB>rank<TAB>completion");
            }
            continue;
        }
        if (line.empty()) continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos) {
            throw Error(ErrorCode::MalformedInput, "completions TSV line " + std::to_string(line_no) + ": expected 3 columns");
        }
        int rank = 0;
        try {
            std::size_t used = 0;
            rank = std::stoi(line.substr(t1 + 1, t2 - t1 - 1), &used);
            if (used != t2 - t1 - 1 || rank < 1) throw std::invalid_argument("rank");
        } catch (const std::exception&) {
            throw Error(ErrorCode::MalformedInput, "completions TSV line " + std::to_string(line_no) + ": bad rank");
        }
        table.add(line.substr(0, t1), rank, line.substr(t2 + 1));
    }
    if (line_no == 0) throw Error(ErrorCode::MalformedInput, "completions TSV is empty");
    return table;
}

TableCompleter TableCompleter::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::string TableCompleter::complete(const CompletionRequest& request) const {
    auto it = table_.find(std::make_pair(std::string(request.sample_id), request.rank));
    return it == table_.end() ? std::string() : it->second;
}

ResponseMasker lexicon_response_masker(ContentLexicon lexicon, MaskStrategy strategy) {
    return [lexicon = std::move(lexicon), strategy](std::string_view y_w) { return mask_segments(y_w, lexicon, strategy); };
}

ResponseMasker external_response_masker(const MaskerProtocol& masker, std::string prompt, const ContentLexicon* lexicon) {
    return [&masker, prompt = std::move(prompt), lexicon](std::string_view y_w) {
        return apply_external_mask(y_w, masker, prompt, lexicon);
    };
}

ForgeOutcome forge_pair(const Sample& sample, const ForgeContext& ctx, std::uint64_t seed) {
    const ForgeConfig& cfg = ctx.config;
    if (!ctx.kb.contains(sample.image_id)) {
        throw Error(ErrorCode::UnknownId, "image '" + sample.image_id + "' of sample '" + sample.sample_id + "'");
    }

    MaskedResponse masked;
    try {
        masked = ctx.masker(sample.chosen);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NothingMaskable) return Skip{sample.sample_id, SkipReason::NothingMaskable, e.what()};
        if (e.code() == ErrorCode::UnalignableMask) return Skip{sample.sample_id, SkipReason::UnalignableMask, e.what()};
        throw;
    }

    EmbeddingVector chosen_embedding;
    try {
        chosen_embedding = ctx.text_encoder.encode(sample.chosen);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::ZeroVector) throw;
        return Skip{sample.sample_id, SkipReason::NoCandidate, "chosen response has no encodable text"};
    }

    const auto neighbors = retrieve_top_k(ctx.kb, sample.image_id, cfg.k);
    for (const Neighbor& neighbor : neighbors) {
        CompletionRequest request{ctx.completion_prompt, masked.rendered, neighbor.item_id, sample.sample_id,
                                  neighbor.rank, seed};
        std::string candidate = ctx.completer.complete(request);
        if (candidate.empty() || candidate == sample.chosen) continue;

        EmbeddingVector candidate_embedding;
        try {
            candidate_embedding = ctx.text_encoder.encode(candidate);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::ZeroVector) throw;
            continue;
        }
        const double s = cosine_similarity(chosen_embedding, candidate_embedding);
        if (s >= cfg.min_similarity && s < cfg.tau) {
            return PreferenceRecord{sample.sample_id,   sample.instruction, sample.image_id,
                                    neighbor.item_id,   sample.chosen,      std::move(candidate),
                                    masked.rendered,    s,                  neighbor.rank};
        }
    }
    return Skip{sample.sample_id, SkipReason::NoCandidate,
                "no candidate among " + std::to_string(neighbors.size()) + " retrieved images qualified"};
}

ForgeResult forge_dataset(const std::vector<Sample>& samples, const ForgeContext& ctx, std::uint64_t seed,
                          unsigned threads) {
    ctx.config.validate();
    for (const auto& sample : samples) {
        if (!ctx.kb.contains(sample.image_id)) {
            throw Error(ErrorCode::UnknownId, "image '" + sample.image_id + "' of sample '" + sample.sample_id + "'");
        }
    }

    std::vector<std::optional<ForgeOutcome>> outcomes(samples.size());
    std::vector<std::exception_ptr> failures(samples.size());
    auto work = [&](std::size_t begin, std::size_t stride) {
        for (std::size_t i = begin; i < samples.size(); i += stride) {
            try {
                const std::uint64_t sample_seed = splitmix64(seed ^ fnv1a64(samples[i].sample_id));
                outcomes[i] = forge_pair(samples[i], ctx, sample_seed);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(samples.size(), 1))));
    if (threads == 1) {
        work(0, 1);
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    }

    ForgeResult result;
    result.report.total_samples = samples.size();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (failures[i]) std::rethrow_exception(failures[i]);
        if (auto* record = std::get_if<PreferenceRecord>(&*outcomes[i])) {
            result.records.push_back(std::move(*record));
        } else {
            auto& skip = std::get<Skip>(*outcomes[i]);
            ++result.report.counts[skip.reason];
            result.report.skips.push_back(std::move(skip));
        }
    }
    result.report.accepted = result.records.size();
    return result;
}

std::string record_to_json(const PreferenceRecord& r) {
    ordered_json j;
    j["sample_id"] = r.sample_id;
    j["instruction"] = r.instruction;
    j["image_id"] = r.image_id;
    j["retrieved_image_id"] = r.retrieved_image_id;
    j["chosen"] = r.chosen;
    j["rejected"] = r.rejected;
    j["masked"] = r.masked;
    j["similarity"] = r.similarity;
    j["retrieval_rank"] = r.retrieval_rank;
    return j.dump();
}

PreferenceRecord record_from_json(std::string_view line) {
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedInput, std::string("preference record: ") + e.what());
    }
    static const std::vector<std::string> kKeys = {"sample_id", "instruction", "image_id",   "retrieved_image_id", "chosen",
                                                   "rejected",  "masked",      "similarity", "retrieval_rank"};
    if (!j.is_object() || j.size() != kKeys.size()) {
        throw Error(ErrorCode::MalformedInput, "preference record must have exactly " + std::to_string(kKeys.size()) + " fields");
    }
    try {
        PreferenceRecord r;
        r.sample_id = j.at("sample_id").get<std::string>();
        r.instruction = j.at("instruction").get<std::string>();
        r.image_id = j.at("image_id").get<std::string>();
        r.retrieved_image_id = j.at("retrieved_image_id").get<std::string>();
        r.chosen = j.at("chosen").get<std::string>();
        r.rejected = j.at("rejected").get<std::string>();
        r.masked = j.at("masked").get<std::string>();
        r.similarity = j.at("similarity").get<double>();
        r.retrieval_rank = j.at("retrieval_rank").get<int>();
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::MalformedInput, std::string("preference record: ") + e.what());
    }
}

void write_preference_jsonl(std::ostream& out, const std::string& meta_json_object,
                            const std::vector<PreferenceRecord>& records) {
    out << "{\"meta\":" << meta_json_object << "}\n";
    for (const auto& r : records) out << record_to_json(r) << '\n';
}

PreferenceFile read_preference_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    PreferenceFile file;
    std::string line;
    if (!std::getline(in, line)) throw Error(ErrorCode::MalformedInput, path.string() + ": missing meta header line");
    try {
        auto header = ordered_json::parse(line);
        if (!header.is_object() || header.size() != 1 || !header.contains("meta")) throw std::invalid_argument("meta");
        file.meta_json = header["meta"].dump();
    } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedInput, path.string() + ": first line must be {\"meta\": {...}}");
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            file.records.push_back(record_from_json(line));
        } catch (const Error& e) {
            throw Error(ErrorCode::MalformedInput, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return file;
}

std::string skip_report_to_json(const SkipReport& report) {
    ordered_json j;
    j["total_samples"] = report.total_samples;
    j["accepted"] = report.accepted;
    ordered_json counts = ordered_json::object();
    for (SkipReason reason : {SkipReason::NothingMaskable, SkipReason::NoCandidate, SkipReason::UnalignableMask}) {
        auto it = report.counts.find(reason);
        counts[std::string(to_string(reason))] = it == report.counts.end() ? 0 : it->second;
    }
    j["skipped"] = counts;
    ordered_json skips = ordered_json::array();
    for (const auto& s : report.skips) {
        skips.push_back({{"sample_id", s.sample_id}, {"reason", std::string(to_string(s.reason))}, {"detail", s.detail}});
    }
    j["skips"] = skips;
    return j.dump(2) + "\n";
}

}  // namespace realign
