#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace realign {

/// Fixed-dimension real vector produced by an image or text encoder.
class EmbeddingVector {
public:
    EmbeddingVector() = default;
    explicit EmbeddingVector(std::vector<double> values);
    EmbeddingVector(std::initializer_list<double> values);

    std::size_t dim() const noexcept { return values_.size(); }
    std::span<const double> values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double norm() const noexcept;

    bool operator==(const EmbeddingVector&) const = default;

private:
    std::vector<double> values_;
};

/// Norms below this are treated as the zero vector.
inline constexpr double kZeroNormThreshold = 1e-12;

/// Unit-norm copy of v. Throws ZeroVector when ||v|| < 1e-12.
EmbeddingVector normalize(const EmbeddingVector& v);

/// Cosine of the angle between a and b, clamped to [-1, 1].
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

/// Plain dot product of two equal-length spans; used on pre-normalized rows.
double dot(std::span<const double> a, std::span<const double> b) noexcept;

}  // namespace realign
