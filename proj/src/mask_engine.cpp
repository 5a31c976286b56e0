#include "realign/mask_engine.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "realign/error.hpp"

namespace realign {

namespace {

int priority(SpanKind kind) {
    switch (kind) {
        case SpanKind::Object: return 0;
        case SpanKind::Attribute: return 1;
        case SpanKind::Relation: return 2;
        case SpanKind::Sentence: return 3;
    }
    return 4;
}

std::string join_lower(std::string_view text, const std::vector<ByteRange>& tokens, std::size_t first,
                       std::size_t last) {
    std::string key;
    for (std::size_t i = first; i < last; ++i) {
        if (!key.empty()) key += ' ';
        key += ascii_lower(tokens[i].in(text));
    }
    return key;
}

bool only_space_between(std::string_view text, const ByteRange& a, const ByteRange& b) {
    for (std::size_t i = a.end; i < b.begin; ++i) {
        if (!is_space(text[i])) return false;
    }
    return true;
}

struct Hit {
    std::size_t first_token;
    std::size_t last_token;  // exclusive
    SpanKind kind;
};

// Greedy longest-phrase matching inside one sentence.
std::vector<Hit> find_hits(std::string_view text, const std::vector<ByteRange>& tokens, const ContentLexicon& lexicon) {
    std::vector<Hit> hits;
    std::size_t i = 0;
    while (i < tokens.size()) {
        std::size_t best_len = 0;
        SpanKind best_kind = SpanKind::Object;
        const std::size_t max_len = std::min(lexicon.longest_phrase(), tokens.size() - i);
        for (std::size_t len = 1; len <= max_len; ++len) {
            if (len > 1 && !only_space_between(text, tokens[i + len - 2], tokens[i + len - 1])) break;
            if (auto kind = lexicon.lookup(join_lower(text, tokens, i, i + len))) {
                best_len = len;
                best_kind = *kind;
            }
        }
        if (best_len == 0) {
            ++i;
            continue;
        }
        hits.push_back({i, i + best_len, best_kind});
        i += best_len;
    }
    return hits;
}

std::vector<MaskSpan> enforce_budget(std::vector<MaskSpan> candidates, double budget) {
    std::stable_sort(candidates.begin(), candidates.end(), [](const MaskSpan& a, const MaskSpan& b) {
        if (priority(a.kind) != priority(b.kind)) return priority(a.kind) < priority(b.kind);
        return a.start < b.start;
    });
    std::vector<MaskSpan> kept;
    std::size_t used = 0;
    for (const auto& span : candidates) {
        if (static_cast<double>(used + span.size()) <= budget) {
            kept.push_back(span);
            used += span.size();
        }
    }
    std::sort(kept.begin(), kept.end(), [](const MaskSpan& a, const MaskSpan& b) { return a.start < b.start; });
    return kept;
}

}  // namespace

std::string_view to_string(SpanKind kind) {
    switch (kind) {
        case SpanKind::Object: return "object";
        case SpanKind::Attribute: return "attribute";
        case SpanKind::Relation: return "relation";
        case SpanKind::Sentence: return "sentence";
    }
    return "unknown";
}

std::optional<SpanKind> parse_span_kind(std::string_view name) {
    if (name == "object") return SpanKind::Object;
    if (name == "attribute") return SpanKind::Attribute;
    if (name == "relation") return SpanKind::Relation;
    if (name == "sentence") return SpanKind::Sentence;
    return std::nullopt;
}

std::string_view to_string(MaskMode mode) {
    return mode == MaskMode::SegmentLevel ? "segment_level" : "sentence_level";
}

std::optional<MaskMode> parse_mask_mode(std::string_view name) {
    if (name == "segment_level") return MaskMode::SegmentLevel;
    if (name == "sentence_level") return MaskMode::SentenceLevel;
    return std::nullopt;
}

std::string render_masked(std::string_view original, const std::vector<MaskSpan>& spans) {
    std::string out;
    std::size_t cursor = 0;
    for (const auto& span : spans) {
        if (span.start < cursor || span.end <= span.start || span.end > original.size()) {
            throw Error(ErrorCode::MalformedInput, "mask spans must be sorted, disjoint and inside the text");
        }
        out.append(original.substr(cursor, span.start - cursor));
        out.append(kMaskToken);
        cursor = span.end;
    }
    out.append(original.substr(cursor));
    return out;
}

void ContentLexicon::add(std::string_view phrase, SpanKind kind) {
    if (kind == SpanKind::Sentence) {
        throw Error(ErrorCode::MalformedInput, "lexicon entries must be object, attribute or relation");
    }
    const auto tokens = word_tokens(phrase);
    if (tokens.empty()) throw Error(ErrorCode::MalformedInput, "lexicon entry has no word: '" + std::string(phrase) + "'");
    std::string key = join_lower(phrase, tokens, 0, tokens.size());
    auto [it, inserted] = entries_.emplace(key, kind);
    if (!inserted && it->second != kind) {
        throw Error(ErrorCode::MalformedInput, "lexicon entry '" + key + "' listed with two kinds");
    }
    longest_ = std::max(longest_, tokens.size());
}

ContentLexicon ContentLexicon::parse(std::string_view text) {
    ContentLexicon lex;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        auto kind = tab == std::string_view::npos ? std::nullopt : parse_span_kind(line.substr(tab + 1));
        if (!kind) {
            throw Error(ErrorCode::MalformedInput, "lexicon line " + std::to_string(line_no) + ": expected word<TAB>kind");
        }
        lex.add(line.substr(0, tab), *kind);
    }
    return lex;
}

ContentLexicon ContentLexicon::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

std::optional<SpanKind> ContentLexicon::lookup(std::string_view normalized_phrase) const {
    auto it = entries_.find(std::string(normalized_phrase));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

MaskedResponse mask_segments(std::string_view y_w, const ContentLexicon& lexicon, const MaskStrategy& strategy) {
    if (y_w.empty()) throw Error(ErrorCode::MalformedInput, "response to mask is empty");
    if (lexicon.empty()) throw Error(ErrorCode::MalformedInput, "lexicon is empty");
    if (!(strategy.max_mask_fraction > 0.0 && strategy.max_mask_fraction <= 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "max_mask_fraction must be in (0, 1]");
    }

    std::vector<MaskSpan> candidates;
    for (const ByteRange& sentence : split_sentences(y_w)) {
        auto tokens = word_tokens(sentence.in(y_w));
        for (auto& t : tokens) {
            t.begin += sentence.begin;
            t.end += sentence.begin;
        }
        const auto hits = find_hits(y_w, tokens, lexicon);
        if (hits.empty()) continue;

        if (strategy.mode == MaskMode::SentenceLevel) {
            candidates.push_back({sentence.begin, sentence.end, SpanKind::Sentence});
            continue;
        }
        for (std::size_t h = 0; h < hits.size();) {
            std::size_t run_end = h + 1;
            while (run_end < hits.size() && hits[run_end].kind == hits[h].kind &&
                   hits[run_end].first_token == hits[run_end - 1].last_token &&
                   only_space_between(y_w, tokens[hits[run_end - 1].last_token - 1], tokens[hits[run_end].first_token])) {
                ++run_end;
            }
            candidates.push_back(
                {tokens[hits[h].first_token].begin, tokens[hits[run_end - 1].last_token - 1].end, hits[h].kind});
            h = run_end;
        }
    }
    if (candidates.empty()) throw Error(ErrorCode::NothingMaskable, "no lexicon hit in response");

    auto spans = enforce_budget(std::move(candidates), strategy.max_mask_fraction * static_cast<double>(y_w.size()));
    if (spans.empty()) throw Error(ErrorCode::NothingMaskable, "mask budget admits no span");

    MaskedResponse out;
    out.original = std::string(y_w);
    out.rendered = render_masked(y_w, spans);
    out.spans = std::move(spans);
    return out;
}

std::string LexiconMasker::mask(std::string_view /*prompt*/, std::string_view response) const {
    try {
        return mask_segments(response, lexicon_, strategy_).rendered;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NothingMaskable) return std::string(response);
        throw;
    }
}

namespace {

struct OutToken {
    bool is_mask = false;
    std::string_view literal;  // whole token when !is_mask
    std::string_view prefix;   // glued text before "[MASK]"
    std::string_view suffix;   // glued text after the last "[MASK]"
};

OutToken classify(std::string_view token) {
    const auto first = token.find(kMaskToken);
    if (first == std::string_view::npos) return {false, token, {}, {}};
    const auto last = token.rfind(kMaskToken);
    return {true, {}, token.substr(0, first), token.substr(last + kMaskToken.size())};
}

}  // namespace

MaskedResponse align_masked_text(std::string_view y_w, std::string_view masked_text, const ContentLexicon* lexicon) {
    const auto orig = whitespace_tokens(y_w);
    std::vector<OutToken> out;
    bool any_mask = false;
    for (const auto& r : whitespace_tokens(masked_text)) {
        out.push_back(classify(r.in(masked_text)));
        any_mask = any_mask || out.back().is_mask;
    }
    if (!any_mask) {
        bool identical = out.size() == orig.size();
        for (std::size_t i = 0; identical && i < out.size(); ++i) identical = out[i].literal == orig[i].in(y_w);
        if (identical) throw Error(ErrorCode::NothingMaskable, "masker returned the response unchanged");
        throw Error(ErrorCode::UnalignableMask, "masker changed the text without inserting [MASK]");
    }

    const std::size_t n = out.size();
    const std::size_t m = orig.size();
    // A mask may consume original tokens [j, j2] if the glued prefix/suffix fit.
    auto mask_fits = [&](const OutToken& t, std::size_t j, std::size_t j2) {
        const auto first = orig[j].in(y_w);
        const auto last = orig[j2].in(y_w);
        if (!first.starts_with(t.prefix) || !last.ends_with(t.suffix)) return false;
        if (j == j2) return first.size() > t.prefix.size() + t.suffix.size();
        return first.size() > t.prefix.size() && last.size() > t.suffix.size();
    };

    // reach[i][j]: out[i..] aligns with orig[j..]
    std::vector<std::vector<char>> reach(n + 1, std::vector<char>(m + 1, 0));
    reach[n][m] = 1;
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t j = m + 1; j-- > 0;) {
            if (j == m) continue;
            if (!out[i].is_mask) {
                reach[i][j] = out[i].literal == orig[j].in(y_w) && reach[i + 1][j + 1];
                continue;
            }
            for (std::size_t j2 = j; j2 < m && !reach[i][j]; ++j2) {
                reach[i][j] = reach[i + 1][j2 + 1] && mask_fits(out[i], j, j2);
            }
        }
    }
    if (!reach[0][0]) throw Error(ErrorCode::UnalignableMask, "masked text does not align with the response");

    std::vector<MaskSpan> spans;
    std::size_t j = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!out[i].is_mask) {
            ++j;
            continue;
        }
        std::size_t j2 = j;
        while (!(reach[i + 1][j2 + 1] && mask_fits(out[i], j, j2))) ++j2;
        MaskSpan span{orig[j].begin + out[i].prefix.size(), orig[j2].end - out[i].suffix.size(), SpanKind::Object};
        if (lexicon != nullptr) {
            const auto text = y_w.substr(span.start, span.size());
            const auto words = word_tokens(text);
            if (!words.empty()) {
                if (auto kind = lexicon->lookup(join_lower(text, words, 0, words.size()))) span.kind = *kind;
            }
        }
        spans.push_back(span);
        j = j2 + 1;
    }

    MaskedResponse result;
    result.original = std::string(y_w);
    result.rendered = render_masked(y_w, spans);
    result.spans = std::move(spans);
    return result;
}

MaskedResponse apply_external_mask(std::string_view y_w, const MaskerProtocol& masker, std::string_view prompt,
                                   const ContentLexicon* lexicon) {
    return align_masked_text(y_w, masker.mask(prompt, y_w), lexicon);
}

}  // namespace realign
