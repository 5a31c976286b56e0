#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "realign/embedding.hpp"

namespace realign {

struct Neighbor {
    std::string item_id;
    double similarity = 0.0;
    int rank = 0;  // 1-based

    bool operator==(const Neighbor&) const = default;
};

/// Neighbors sorted by similarity descending, ties by ascending id.
using RetrievalResult = std::vector<Neighbor>;

using IndexItem = std::pair<std::string, EmbeddingVector>;

/// Exact cosine-similarity store. Vectors are kept L2-normalized, so similarity
/// is a dot product. Mutable until freeze(); retrieval requires a frozen base.
/// A frozen base is immutable and may be queried from any number of threads.
class KnowledgeBase {
public:
    explicit KnowledgeBase(std::size_t dim);

    /// Appends one item. Throws DuplicateId, DimensionMismatch, ZeroVector or
    /// NotFrozen (the latter when called after freeze()).
    void add(std::string item_id, const EmbeddingVector& vector);

    /// Appends an item whose vector is already unit norm (snapshot loading).
    void add_normalized(std::string item_id, std::vector<double> unit_values);

    void freeze() noexcept { frozen_ = true; }
    bool frozen() const noexcept { return frozen_; }

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }

    const std::vector<std::string>& ids() const noexcept { return ids_; }
    bool contains(std::string_view item_id) const;
    std::optional<std::size_t> index_of(std::string_view item_id) const;

    /// Stored unit vector of row i.
    std::span<const double> row(std::size_t i) const;
    /// Stored unit vector for an id; throws UnknownId.
    EmbeddingVector vector(std::string_view item_id) const;

private:
    void check_insert(const std::string& item_id, std::size_t dim) const;

    std::size_t dim_;
    bool frozen_ = false;
    std::vector<std::string> ids_;
    std::vector<double> data_;  // row-major, size() x dim_
    std::unordered_map<std::string, std::size_t> lookup_;
};

/// Builds and freezes a base. Throws DuplicateId / DimensionMismatch /
/// ZeroVector naming the offending id; an empty list is MalformedInput.
KnowledgeBase build_index(const std::vector<IndexItem>& items);

/// Top-k neighbors of an indexed item, excluding the item itself.
/// Returns min(k, size()-1) entries. Throws NotFrozen or UnknownId.
RetrievalResult retrieve_top_k(const KnowledgeBase& kb, std::string_view query_id, std::size_t k);

}  // namespace realign
