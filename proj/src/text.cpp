#include "realign/text.hpp"

#include <cctype>

namespace realign {

namespace {

bool is_word_byte(char c) noexcept {
    const auto u = static_cast<unsigned char>(c);
    return u >= 0x80 || std::isalnum(u) != 0;
}

bool is_joiner(char c) noexcept { return c == '\'' || c == '-'; }

bool is_terminator(char c) noexcept { return c == '.' || c == '?' || c == '!'; }

}  // namespace

bool is_space(char c) noexcept { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::vector<ByteRange> word_tokens(std::string_view text) {
    std::vector<ByteRange> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (!is_word_byte(text[i])) {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        while (i < text.size()) {
            if (is_word_byte(text[i])) {
                ++i;
            } else if (is_joiner(text[i]) && i + 1 < text.size() && is_word_byte(text[i + 1])) {
                i += 2;
            } else {
                break;
            }
        }
        out.push_back({begin, i});
    }
    return out;
}

std::vector<ByteRange> whitespace_tokens(std::string_view text) {
    std::vector<ByteRange> out;
    std::size_t i = 0;
    while (i < text.size()) {
        if (is_space(text[i])) {
            ++i;
            continue;
        }
        const std::size_t begin = i;
        while (i < text.size() && !is_space(text[i])) ++i;
        out.push_back({begin, i});
    }
    return out;
}

std::vector<ByteRange> split_sentences(std::string_view text) {
    std::vector<ByteRange> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && is_space(text[i])) ++i;
        if (i == text.size()) break;
        const std::size_t begin = i;
        std::size_t end = text.size();
        for (; i < text.size(); ++i) {
            if (is_terminator(text[i]) && (i + 1 == text.size() || is_space(text[i + 1]))) {
                end = i + 1;
                break;
            }
        }
        if (i == text.size()) {
            while (end > begin && is_space(text[end - 1])) --end;
        }
        out.push_back({begin, end});
        i = end;
    }
    return out;
}

std::string ascii_lower(std::string_view text) {
    std::string out(text);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace realign
