#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

#include "realign/embedding.hpp"

namespace realign {

/// Maps text to an embedding; stands in for a sentence-embedding model.
class TextEncoderProtocol {
public:
    virtual ~TextEncoderProtocol() = default;
    virtual EmbeddingVector encode(std::string_view text) const = 0;
    virtual std::size_t dim() const = 0;
};

/// Signed feature hashing over lowercase word tokens, L2-normalized.
/// Texts sharing most words land close in cosine similarity.
class HashingTextEncoder final : public TextEncoderProtocol {
public:
    explicit HashingTextEncoder(std::size_t dim = 256);

    /// Throws ZeroVector for texts without words (or whose hashes cancel).
    EmbeddingVector encode(std::string_view text) const override;
    std::size_t dim() const override { return dim_; }

private:
    std::size_t dim_;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

/// SplitMix64 finalizer; used to derive per-item seeds.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace realign
