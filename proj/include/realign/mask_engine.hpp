#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "realign/text.hpp"

namespace realign {

enum class SpanKind { Object, Attribute, Relation, Sentence };

std::string_view to_string(SpanKind kind);
std::optional<SpanKind> parse_span_kind(std::string_view name);

struct MaskSpan {
    std::size_t start = 0;
    std::size_t end = 0;  // exclusive
    SpanKind kind = SpanKind::Object;

    std::size_t size() const noexcept { return end - start; }
    bool operator==(const MaskSpan&) const = default;
};

inline constexpr std::string_view kMaskToken = "[MASK]";

/// Default instruction handed to external maskers.
inline constexpr std::string_view kStrategicMaskingPrompt =
    "Please mask any words of the segments related to the objects, attributes, and logical "
    "relationships of the input image in the following description by replacing them with [MASK].";

struct MaskedResponse {
    std::string original;
    std::vector<MaskSpan> spans;  // sorted, non-overlapping
    std::string rendered;

    bool operator==(const MaskedResponse&) const = default;
};

/// Replaces each span of `original` with "[MASK]". Spans must be sorted and disjoint.
std::string render_masked(std::string_view original, const std::vector<MaskSpan>& spans);

/// Word list mapping content words (or multi-word phrases) to span kinds.
/// Matching is ASCII case-insensitive over word tokens.
class ContentLexicon {
public:
    /// Adds an entry; phrase is split into word tokens. Sentence kind is rejected.
    void add(std::string_view phrase, SpanKind kind);

    /// Parses UTF-8 lines "word<TAB>kind"; blank lines and '#' comments are skipped.
    static ContentLexicon parse(std::string_view text);
    static ContentLexicon load(const std::filesystem::path& path);

    std::optional<SpanKind> lookup(std::string_view normalized_phrase) const;
    std::size_t longest_phrase() const noexcept { return longest_; }
    bool empty() const noexcept { return entries_.empty(); }
    std::size_t size() const noexcept { return entries_.size(); }
    const std::map<std::string, SpanKind>& entries() const noexcept { return entries_; }

private:
    std::map<std::string, SpanKind> entries_;  // key: lowercase tokens joined by one space
    std::size_t longest_ = 0;
};

enum class MaskMode { SegmentLevel, SentenceLevel };

std::string_view to_string(MaskMode mode);
std::optional<MaskMode> parse_mask_mode(std::string_view name);

struct MaskStrategy {
    MaskMode mode = MaskMode::SegmentLevel;
    double max_mask_fraction = 0.5;  // in (0, 1]
    // The lexicon masker is deterministic and ignores the seed; it is carried
    // so stochastic maskers share the same strategy type.
    std::uint64_t seed = 0;
};

/// Built-in masker. Segment level: every maximal run of adjacent lexicon hits
/// of the same kind inside one sentence becomes a span. Sentence level: every
/// sentence holding a hit becomes a span. Spans are then admitted in priority
/// order (object > attribute > relation, earlier offset first) while the masked
/// byte total stays within max_mask_fraction of the text.
/// Throws NothingMaskable when no span survives.
MaskedResponse mask_segments(std::string_view y_w, const ContentLexicon& lexicon, const MaskStrategy& strategy);

/// Transport-agnostic external masker: returns the response with "[MASK]" substituted.
class MaskerProtocol {
public:
    virtual ~MaskerProtocol() = default;
    virtual std::string mask(std::string_view prompt, std::string_view response) const = 0;
};

/// Stub masker backed by mask_segments; echoes the response when nothing is maskable.
class LexiconMasker final : public MaskerProtocol {
public:
    LexiconMasker(ContentLexicon lexicon, MaskStrategy strategy)
        : lexicon_(std::move(lexicon)), strategy_(strategy) {}

    std::string mask(std::string_view prompt, std::string_view response) const override;

private:
    ContentLexicon lexicon_;
    MaskStrategy strategy_;
};

/// Aligns masked text back onto the original over whitespace tokens.
/// Literal tokens must match in order; each "[MASK]" (optionally glued to
/// punctuation, e.g. "[MASK].") covers one or more original tokens.
/// Kinds come from `lexicon` when the covered phrase is listed, else object.
/// Throws NothingMaskable (no mask in an otherwise identical text) or
/// UnalignableMask.
MaskedResponse align_masked_text(std::string_view y_w, std::string_view masked_text,
                                 const ContentLexicon* lexicon = nullptr);

/// Runs an external masker and aligns its output.
MaskedResponse apply_external_mask(std::string_view y_w, const MaskerProtocol& masker,
                                   std::string_view prompt = kStrategicMaskingPrompt,
                                   const ContentLexicon* lexicon = nullptr);

}  // namespace realign
