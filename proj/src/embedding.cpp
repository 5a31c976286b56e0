#include "realign/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "realign/error.hpp"

namespace realign {

EmbeddingVector::EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) {
        throw Error(ErrorCode::DimensionMismatch, "embedding dim must be >= 1");
    }
}

EmbeddingVector::EmbeddingVector(std::initializer_list<double> values)
    : EmbeddingVector(std::vector<double>(values)) {}

double EmbeddingVector::norm() const noexcept { return std::sqrt(dot(values_, values_)); }

double dot(std::span<const double> a, std::span<const double> b) noexcept {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

EmbeddingVector normalize(const EmbeddingVector& v) {
    const double n = v.norm();
    if (!(n >= kZeroNormThreshold)) {
        throw Error(ErrorCode::ZeroVector, "cannot normalize vector with norm " + std::to_string(n));
    }
    std::vector<double> out(v.values().begin(), v.values().end());
    for (double& x : out) x /= n;
    return EmbeddingVector(std::move(out));
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "dims " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
    }
    const EmbeddingVector na = normalize(a);
    const EmbeddingVector nb = normalize(b);
    return std::clamp(dot(na.values(), nb.values()), -1.0, 1.0);
}

}  // namespace realign
