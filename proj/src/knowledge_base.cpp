#include "realign/knowledge_base.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "realign/error.hpp"

namespace realign {

KnowledgeBase::KnowledgeBase(std::size_t dim) : dim_(dim) {
    if (dim == 0) throw Error(ErrorCode::DimensionMismatch, "knowledge base dim must be >= 1");
}

void KnowledgeBase::check_insert(const std::string& item_id, std::size_t dim) const {
    if (frozen_) throw Error(ErrorCode::NotFrozen, "knowledge base is frozen; cannot add '" + item_id + "'");
    if (dim != dim_) {
        throw Error(ErrorCode::DimensionMismatch, "item '" + item_id + "' has dim " + std::to_string(dim) +
                                                      ", expected " + std::to_string(dim_));
    }
    if (lookup_.contains(item_id)) throw Error(ErrorCode::DuplicateId, item_id);
}

void KnowledgeBase::add(std::string item_id, const EmbeddingVector& vector) {
    check_insert(item_id, vector.dim());
    EmbeddingVector unit;
    try {
        unit = normalize(vector);
    } catch (const Error&) {
        throw Error(ErrorCode::ZeroVector, item_id);
    }
    add_normalized(std::move(item_id), {unit.values().begin(), unit.values().end()});
}

void KnowledgeBase::add_normalized(std::string item_id, std::vector<double> unit_values) {
    check_insert(item_id, unit_values.size());
    lookup_.emplace(item_id, ids_.size());
    ids_.push_back(std::move(item_id));
    data_.insert(data_.end(), unit_values.begin(), unit_values.end());
}

bool KnowledgeBase::contains(std::string_view item_id) const { return index_of(item_id).has_value(); }

std::optional<std::size_t> KnowledgeBase::index_of(std::string_view item_id) const {
    auto it = lookup_.find(std::string(item_id));
    if (it == lookup_.end()) return std::nullopt;
    return it->second;
}

std::span<const double> KnowledgeBase::row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * dim_, dim_);
}

EmbeddingVector KnowledgeBase::vector(std::string_view item_id) const {
    auto idx = index_of(item_id);
    if (!idx) throw Error(ErrorCode::UnknownId, std::string(item_id));
    auto r = row(*idx);
    return EmbeddingVector(std::vector<double>(r.begin(), r.end()));
}

KnowledgeBase build_index(const std::vector<IndexItem>& items) {
    if (items.empty()) throw Error(ErrorCode::MalformedInput, "cannot build an empty knowledge base");
    KnowledgeBase kb(items.front().second.dim());
    for (const auto& [id, vec] : items) kb.add(id, vec);
    kb.freeze();
    return kb;
}

RetrievalResult retrieve_top_k(const KnowledgeBase& kb, std::string_view query_id, std::size_t k) {
    if (!kb.frozen()) throw Error(ErrorCode::NotFrozen, "retrieval requires a frozen knowledge base");
    const auto query = kb.index_of(query_id);
    if (!query) throw Error(ErrorCode::UnknownId, std::string(query_id));
    if (k == 0) return {};

    const auto q = kb.row(*query);
    struct Scored {
        double sim;
        std::size_t idx;
    };
    std::vector<Scored> scored;
    scored.reserve(kb.size());
    for (std::size_t i = 0; i < kb.size(); ++i) {
        if (i == *query) continue;
        scored.push_back({std::clamp(dot(q, kb.row(i)), -1.0, 1.0), i});
    }

    const auto& ids = kb.ids();
    auto before = [&ids](const Scored& a, const Scored& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return ids[a.idx] < ids[b.idx];
    };
    const std::size_t take = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(take), scored.end(), before);

    RetrievalResult out;
    out.reserve(take);
    for (std::size_t t = 0; t < take; ++t) {
        out.push_back({ids[scored[t].idx], scored[t].sim, static_cast<int>(t + 1)});
    }
    return out;
}

}  // namespace realign
