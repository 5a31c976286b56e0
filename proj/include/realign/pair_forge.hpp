#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "realign/knowledge_base.hpp"
#include "realign/mask_engine.hpp"
#include "realign/text_encoder.hpp"

namespace realign {

/// Default instruction handed to completers.
inline constexpr std::string_view kMaskCompletionPrompt =
    "Please complete the following sentence based on the input image by filling in the masked segments.";

struct ForgeConfig {
    double tau = 0.95;            // accept when similarity < tau
    std::size_t k = 10;           // retrieved images to try
    double min_similarity = 0.0;  // optional floor; 0 disables

    /// Throws InvalidConfig unless 0 < tau <= 1, k >= 1, 0 <= min_similarity < tau.
    void validate() const;
};

struct Sample {
    std::string sample_id;
    std::string instruction;  // x
    std::string image_id;     // v
    std::string chosen;       // y_w
};

struct PreferenceRecord {
    std::string sample_id;
    std::string instruction;
    std::string image_id;
    std::string retrieved_image_id;  // v_l
    std::string chosen;              // y_w
    std::string rejected;            // y_l
    std::string masked;              // y_m, rendered
    double similarity = 0.0;         // cos(T(y_w), T(y_l))
    int retrieval_rank = 0;          // 1-based rank of v_l

    bool operator==(const PreferenceRecord&) const = default;
};

enum class SkipReason { NothingMaskable, NoCandidate, UnalignableMask };

std::string_view to_string(SkipReason reason);

struct Skip {
    std::string sample_id;
    SkipReason reason;
    std::string detail;
};

using ForgeOutcome = std::variant<PreferenceRecord, Skip>;

struct CompletionRequest {
    std::string_view prompt;
    std::string_view masked;
    std::string_view retrieved_image_id;
    std::string_view sample_id;
    int rank = 0;
    std::uint64_t seed = 0;
};

/// Fills the masks of y_m conditioned on a retrieved image. Returning an
/// empty string means "no completion"; that candidate is not accepted.
class CompleterProtocol {
public:
    virtual ~CompleterProtocol() = default;
    virtual std::string complete(const CompletionRequest& request) const = 0;
};

/// Completions looked up by (sample_id, rank). TSV with header
/// "sample_id<TAB>rank<TAB>completion".
class TableCompleter final : public CompleterProtocol {
public:
    void add(std::string sample_id, int rank, std::string completion);
    static TableCompleter parse(std::string_view tsv);
    static TableCompleter load(const std::filesystem::path& path);

    std::string complete(const CompletionRequest& request) const override;
    std::size_t size() const noexcept { return table_.size(); }

private:
    std::map<std::pair<std::string, int>, std::string, std::less<>> table_;
};

/// Produces y_m for a chosen response; throws NothingMaskable / UnalignableMask.
using ResponseMasker = std::function<MaskedResponse(std::string_view)>;

ResponseMasker lexicon_response_masker(ContentLexicon lexicon, MaskStrategy strategy);
ResponseMasker external_response_masker(const MaskerProtocol& masker, std::string prompt = std::string(kStrategicMaskingPrompt),
                                        const ContentLexicon* lexicon = nullptr);

struct ForgeContext {
    const KnowledgeBase& kb;
    const ResponseMasker& masker;
    const CompleterProtocol& completer;
    const TextEncoderProtocol& text_encoder;
    ForgeConfig config;
    std::string completion_prompt = std::string(kMaskCompletionPrompt);
};

/// Masks y_w, walks the top-k retrieved images in rank order and returns the
/// first completion whose similarity to y_w lies in [min_similarity, tau).
/// Never fabricates a pair: every failure is a Skip with its reason.
/// Throws UnknownId when the sample's image is not indexed.
ForgeOutcome forge_pair(const Sample& sample, const ForgeContext& ctx, std::uint64_t seed = 0);

struct SkipReport {
    std::size_t total_samples = 0;
    std::size_t accepted = 0;
    std::map<SkipReason, std::size_t> counts;
    std::vector<Skip> skips;  // input order

    std::size_t total_skipped() const noexcept { return skips.size(); }
};

struct ForgeResult {
    std::vector<PreferenceRecord> records;
    SkipReport report;
};

/// Forges every sample. Outputs keep input order for any thread count and
/// depend only on (inputs, seed). Protocol objects must be safe to call
/// concurrently when threads > 1.
ForgeResult forge_dataset(const std::vector<Sample>& samples, const ForgeContext& ctx, std::uint64_t seed,
                          unsigned threads = 1);

// Persistence. A preference JSONL file starts with one {"meta": {...}} line,
// followed by one record object per line with a fixed key order.

void write_preference_jsonl(std::ostream& out, const std::string& meta_json_object,
                            const std::vector<PreferenceRecord>& records);
std::string record_to_json(const PreferenceRecord& record);
PreferenceRecord record_from_json(std::string_view line);

struct PreferenceFile {
    std::string meta_json;  // the object under "meta", serialized
    std::vector<PreferenceRecord> records;
};

PreferenceFile read_preference_jsonl(const std::filesystem::path& path);

std::string skip_report_to_json(const SkipReport& report);

}  // namespace realign
