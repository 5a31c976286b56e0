#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace realign {

/// Half-open byte range [begin, end) into some text.
struct ByteRange {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    std::string_view in(std::string_view text) const { return text.substr(begin, end - begin); }
    bool operator==(const ByteRange&) const = default;
};

/// Word tokens: maximal runs of ASCII letters/digits, non-ASCII bytes, and
/// inner apostrophes or hyphens. Punctuation and whitespace separate words.
/// Ranges always fall on UTF-8 character boundaries.
std::vector<ByteRange> word_tokens(std::string_view text);

/// Maximal runs of non-whitespace bytes.
std::vector<ByteRange> whitespace_tokens(std::string_view text);

/// Sentences end at '.', '?' or '!' followed by whitespace or end of text.
/// Returned ranges exclude surrounding whitespace; trailing text without a
/// terminator forms the last sentence.
std::vector<ByteRange> split_sentences(std::string_view text);

std::string ascii_lower(std::string_view text);

bool is_space(char c) noexcept;

}  // namespace realign
