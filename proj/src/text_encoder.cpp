#include "realign/text_encoder.hpp"

#include <vector>

#include "realign/error.hpp"
#include "realign/text.hpp"

namespace realign {

std::uint64_t fnv1a64(std::string_view bytes) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

HashingTextEncoder::HashingTextEncoder(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "text encoder dim must be >= 1");
}

EmbeddingVector HashingTextEncoder::encode(std::string_view text) const {
    std::vector<double> acc(dim_, 0.0);
    for (const auto& token : word_tokens(text)) {
        const std::uint64_t h = splitmix64(fnv1a64(ascii_lower(token.in(text))));
        acc[h % dim_] += (h >> 63) != 0 ? -1.0 : 1.0;
    }
    return normalize(EmbeddingVector(std::move(acc)));
}

}  // namespace realign
