#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "realign/error.hpp"
#include "realign/mask_engine.hpp"
#include "realign/text.hpp"

using namespace realign;

namespace {

ContentLexicon ball_lexicon() {
    ContentLexicon lex;
    lex.add("ball", SpanKind::Object);
    lex.add("table", SpanKind::Object);
    lex.add("red", SpanKind::Attribute);
    lex.add("on", SpanKind::Relation);
    return lex;
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no realign::Error thrown";
    return ErrorCode::Io;
}

std::size_t masked_bytes(const MaskedResponse& m) {
    std::size_t n = 0;
    for (const auto& s : m.spans) n += s.size();
    return n;
}

class EchoMasker final : public MaskerProtocol {
public:
    std::string mask(std::string_view, std::string_view response) const override { return std::string(response); }
};

class FixedMasker final : public MaskerProtocol {
public:
    explicit FixedMasker(std::string out) : out_(std::move(out)) {}
    std::string mask(std::string_view, std::string_view) const override { return out_; }

private:
    std::string out_;
};

std::vector<std::string> words_of(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& r : whitespace_tokens(text)) out.emplace_back(r.in(text));
    return out;
}

// Alignment oracle: literal tokens of the masked text must form a subsequence
// of the original (longest common subsequence equals their count) and every
// mask must be able to absorb at least one original token in between.
bool alignable_oracle(const std::vector<std::string>& orig, const std::vector<std::string>& masked) {
    std::function<bool(std::size_t, std::size_t)> go = [&](std::size_t i, std::size_t j) -> bool {
        if (j == masked.size()) return i == orig.size();
        if (masked[j] == "[MASK]") {
            for (std::size_t take = 1; i + take <= orig.size(); ++take) {
                if (go(i + take, j + 1)) return true;
            }
            return false;
        }
        return i < orig.size() && orig[i] == masked[j] && go(i + 1, j + 1);
    };
    return go(0, 0);
}

std::size_t lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
        }
    }
    return t[a.size()][b.size()];
}

}  // namespace

TEST(MaskSegments, RedBallOnATable) {
    const std::string y = "a red ball on a table";
    const auto m = mask_segments(y, ball_lexicon(), {MaskMode::SegmentLevel, 1.0, 0});
    EXPECT_EQ(m.rendered, "a [MASK] [MASK] [MASK] a [MASK]");
    const std::vector<MaskSpan> want = {
        {2, 5, SpanKind::Attribute}, {6, 10, SpanKind::Object}, {11, 13, SpanKind::Relation}, {16, 21, SpanKind::Object}};
    EXPECT_EQ(m.spans, want);
    EXPECT_EQ(m.original, y);
}

TEST(MaskSegments, DefaultBudgetDropsLowestPriorityFirst) {
    // 14 of 21 bytes are hits; a 0.5 budget allows 10.5. Objects go first
    // (ball 4 + table 5 = 9); neither red (3) nor on (2) fits after that.
    const auto m = mask_segments("a red ball on a table", ball_lexicon(), MaskStrategy{});
    const std::vector<MaskSpan> want = {{6, 10, SpanKind::Object}, {16, 21, SpanKind::Object}};
    EXPECT_EQ(m.spans, want);
    EXPECT_EQ(m.rendered, "a red [MASK] on a [MASK]");

    // 12 bytes: the attribute outranks the relation and fits exactly.
    const auto twelve = mask_segments("a red ball on a table", ball_lexicon(), {MaskMode::SegmentLevel, 12.0 / 21.0, 0});
    EXPECT_EQ(twelve.rendered, "a [MASK] [MASK] on a [MASK]");
    // 11 bytes: the attribute no longer fits, the relation still does.
    const auto eleven = mask_segments("a red ball on a table", ball_lexicon(), {MaskMode::SegmentLevel, 11.0 / 21.0, 0});
    EXPECT_EQ(eleven.rendered, "a red [MASK] [MASK] a [MASK]");
}

TEST(MaskSegments, SameKindRunsMerge) {
    ContentLexicon lex;
    lex.add("big", SpanKind::Attribute);
    lex.add("red", SpanKind::Attribute);
    lex.add("ball", SpanKind::Object);
    const auto m = mask_segments("A big red ball.", lex, {MaskMode::SegmentLevel, 1.0, 0});
    EXPECT_EQ(m.rendered, "A [MASK] [MASK].");
    ASSERT_EQ(m.spans.size(), 2u);
    EXPECT_EQ(m.spans[0], (MaskSpan{2, 9, SpanKind::Attribute}));
}

TEST(MaskSegments, MultiWordPhraseAndCase) {
    ContentLexicon lex;
    lex.add("fire hydrant", SpanKind::Object);
    const auto m = mask_segments("A Fire Hydrant stands.", lex, {MaskMode::SegmentLevel, 1.0, 0});
    EXPECT_EQ(m.rendered, "A [MASK] stands.");
}

TEST(MaskSegments, NothingMaskable) {
    ContentLexicon lex;
    lex.add("ball", SpanKind::Object);
    EXPECT_EQ(code_of([&] { mask_segments("hello there", lex, {}); }), ErrorCode::NothingMaskable);
}

TEST(MaskSegments, BudgetTooSmallForAnySpan) {
    ContentLexicon lex;
    lex.add("elephant", SpanKind::Object);
    EXPECT_EQ(code_of([&] { mask_segments("an elephant", lex, {MaskMode::SegmentLevel, 0.1, 0}); }),
              ErrorCode::NothingMaskable);
}

TEST(MaskSegments, InputValidation) {
    EXPECT_EQ(code_of([] { mask_segments("", ball_lexicon(), {}); }), ErrorCode::MalformedInput);
    EXPECT_EQ(code_of([] { mask_segments("a ball", ContentLexicon{}, {}); }), ErrorCode::MalformedInput);
    EXPECT_EQ(code_of([] { mask_segments("a ball", ball_lexicon(), {MaskMode::SegmentLevel, 0.0, 0}); }),
              ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { mask_segments("a ball", ball_lexicon(), {MaskMode::SegmentLevel, 1.5, 0}); }),
              ErrorCode::InvalidConfig);
}

TEST(MaskSegments, Deterministic) {
    const MaskStrategy st{MaskMode::SegmentLevel, 0.5, 42};
    EXPECT_EQ(mask_segments("a red ball on a table", ball_lexicon(), st),
              mask_segments("a red ball on a table", ball_lexicon(), st));
}

TEST(MaskSegments, SentenceLevel) {
    const std::string y = "The sky is blue. A red ball on a table! Nothing here.";
    const auto m = mask_segments(y, ball_lexicon(), {MaskMode::SentenceLevel, 1.0, 0});
    ASSERT_EQ(m.spans.size(), 1u);
    EXPECT_EQ(m.spans[0].kind, SpanKind::Sentence);
    EXPECT_EQ(y.substr(m.spans[0].start, m.spans[0].size()), "A red ball on a table!");
    EXPECT_EQ(m.rendered, "The sky is blue. [MASK] Nothing here.");
}

TEST(MaskSegments, RandomProperties) {
    const std::vector<std::string> vocab = {"a", "the", "red", "ball", "on", "table", "big", "cat", "sits", "under",
                                            "green", "dog", "near", "blue", "is"};
    ContentLexicon lex;
    lex.add("red", SpanKind::Attribute);
    lex.add("green", SpanKind::Attribute);
    lex.add("big", SpanKind::Attribute);
    lex.add("ball", SpanKind::Object);
    lex.add("cat", SpanKind::Object);
    lex.add("dog", SpanKind::Object);
    lex.add("table", SpanKind::Object);
    lex.add("on", SpanKind::Relation);
    lex.add("under", SpanKind::Relation);
    lex.add("near", SpanKind::Relation);
    std::mt19937_64 rng(17);
    const char* enders[] = {".", "!", "?", ""};
    int produced = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        std::string y;
        const int sentences = 1 + static_cast<int>(rng() % 3);
        for (int s = 0; s < sentences; ++s) {
            if (s) y += ' ';
            const int words = 1 + static_cast<int>(rng() % 8);
            for (int w = 0; w < words; ++w) {
                if (w) y += ' ';
                y += vocab[rng() % vocab.size()];
            }
            y += enders[s + 1 == sentences ? rng() % 4 : rng() % 3];
        }
        const double fraction = 0.05 + 0.95 * static_cast<double>(rng() % 1000) / 999.0;
        const MaskMode mode = rng() % 2 ? MaskMode::SegmentLevel : MaskMode::SentenceLevel;
        MaskedResponse m;
        try {
            m = mask_segments(y, lex, {mode, fraction, 0});
        } catch (const Error& e) {
            ASSERT_EQ(e.code(), ErrorCode::NothingMaskable);
            continue;
        }
        ++produced;
        ASSERT_FALSE(m.spans.empty());
        EXPECT_EQ(render_masked(m.original, m.spans), m.rendered);
        EXPECT_LE(static_cast<double>(masked_bytes(m)), fraction * static_cast<double>(y.size()));
        const auto sentence_ranges = split_sentences(y);
        for (std::size_t i = 0; i < m.spans.size(); ++i) {
            const auto& sp = m.spans[i];
            ASSERT_LT(sp.start, sp.end);
            ASSERT_LE(sp.end, y.size());
            if (i) EXPECT_LE(m.spans[i - 1].end, sp.start);
            bool whole = false, inside = false;
            for (const auto& r : sentence_ranges) {
                whole = whole || (r.begin == sp.start && r.end == sp.end);
                inside = inside || (r.begin <= sp.start && sp.end <= r.end);
            }
            if (mode == MaskMode::SentenceLevel) {
                EXPECT_TRUE(whole) << y;
                EXPECT_EQ(sp.kind, SpanKind::Sentence);
            } else {
                EXPECT_TRUE(inside) << y;
                EXPECT_NE(sp.kind, SpanKind::Sentence);
            }
        }
    }
    EXPECT_GT(produced, 500);
}

TEST(Lexicon, ParseFormat) {
    const auto lex = ContentLexicon::parse("# comment\nball\tobject\n\nred\tattribute\non top of\trelation\n");
    EXPECT_EQ(lex.size(), 3u);
    EXPECT_EQ(lex.lookup("ball"), SpanKind::Object);
    EXPECT_EQ(lex.lookup("on top of"), SpanKind::Relation);
    EXPECT_EQ(lex.longest_phrase(), 3u);
    EXPECT_THROW(ContentLexicon::parse("ball object\n"), Error);
    EXPECT_THROW(ContentLexicon::parse("ball\tcolour\n"), Error);
    EXPECT_THROW(ContentLexicon::parse("ball\tsentence\n"), Error);
}

TEST(ExternalMask, SingleSpanDefaultsToObject) {
    const auto m = apply_external_mask("a cat sits on the mat", FixedMasker("a [MASK] sits on the mat"));
    ASSERT_EQ(m.spans.size(), 1u);
    EXPECT_EQ(m.spans[0], (MaskSpan{2, 5, SpanKind::Object}));
    EXPECT_EQ(m.rendered, "a [MASK] sits on the mat");
}

TEST(ExternalMask, KindFromLexicon) {
    const auto lex = ball_lexicon();
    const auto m = apply_external_mask("a red ball", FixedMasker("a [MASK] ball"), kStrategicMaskingPrompt, &lex);
    ASSERT_EQ(m.spans.size(), 1u);
    EXPECT_EQ(m.spans[0].kind, SpanKind::Attribute);
}

TEST(ExternalMask, EchoIsNothingMaskable) {
    EXPECT_EQ(code_of([] { apply_external_mask("a cat sits on the mat", EchoMasker{}); }), ErrorCode::NothingMaskable);
}

TEST(ExternalMask, InterleavedWordsAreUnalignable) {
    EXPECT_EQ(code_of([] { apply_external_mask("a cat sits on the mat", FixedMasker("a [MASK] dog sits on the mat")); }),
              ErrorCode::UnalignableMask);
    EXPECT_EQ(code_of([] { apply_external_mask("a cat sits on the mat", FixedMasker("the [MASK] a sits on mat")); }),
              ErrorCode::UnalignableMask);
}

TEST(ExternalMask, GluedPunctuation) {
    const auto m = apply_external_mask("It is a cat. Nice.", FixedMasker("It is a [MASK]. Nice."));
    ASSERT_EQ(m.spans.size(), 1u);
    EXPECT_EQ(m.spans[0], (MaskSpan{8, 11, SpanKind::Object}));
}

TEST(ExternalMask, MultiTokenMask) {
    const auto m = apply_external_mask("a big red cat sits", FixedMasker("a [MASK] sits"));
    ASSERT_EQ(m.spans.size(), 1u);
    EXPECT_EQ(m.spans[0], (MaskSpan{2, 13, SpanKind::Object}));
}

TEST(ExternalMask, AgreesWithSubsequenceOracle) {
    const std::vector<std::string> vocab = {"a", "cat", "sits", "on", "the", "mat", "dog", "red"};
    std::mt19937_64 rng(23);
    int aligned = 0, rejected = 0;
    for (int trial = 0; trial < 3000; ++trial) {
        std::vector<std::string> orig(2 + rng() % 6);
        for (auto& w : orig) w = vocab[rng() % vocab.size()];
        std::vector<std::string> masked;
        bool has_mask = false;
        for (std::size_t i = 0; i < orig.size();) {
            const auto r = rng() % 10;
            if (r < 3) {
                masked.push_back("[MASK]");
                has_mask = true;
                i += 1 + rng() % std::min<std::size_t>(3, orig.size() - i);
            } else if (r == 3) {
                masked.push_back(vocab[rng() % vocab.size()]);  // stray word
            } else if (r == 4) {
                ++i;  // silently dropped word
            } else {
                masked.push_back(orig[i++]);
            }
        }
        if (!has_mask) continue;
        std::string y, out;
        for (const auto& w : orig) y += (y.empty() ? "" : " ") + w;
        for (const auto& w : masked) out += (out.empty() ? "" : " ") + w;
        std::vector<std::string> literals;
        for (const auto& w : masked) {
            if (w != "[MASK]") literals.push_back(w);
        }
        const bool expect = alignable_oracle(orig, masked);
        if (lcs(orig, literals) < literals.size()) EXPECT_FALSE(expect);
        try {
            const auto m = apply_external_mask(y, FixedMasker(out));
            EXPECT_TRUE(expect) << y << " | " << out;
            ++aligned;
            std::size_t n_masks = 0;
            for (const auto& w : masked) n_masks += w == "[MASK]";
            EXPECT_LE(m.spans.size(), n_masks);
            EXPECT_EQ(render_masked(m.original, m.spans), m.rendered);
            // Every literal survives in order.
            const auto kept = words_of(m.rendered);
            std::vector<std::string> kept_literals;
            for (const auto& w : kept) {
                if (w != "[MASK]") kept_literals.push_back(w);
            }
            EXPECT_EQ(kept_literals, literals);
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::UnalignableMask) << y << " | " << out;
            EXPECT_FALSE(expect) << y << " | " << out;
            ++rejected;
        }
    }
    EXPECT_GT(aligned, 100);
    EXPECT_GT(rejected, 100);
}
