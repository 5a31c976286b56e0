#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "realign/knowledge_base.hpp"

namespace realign {

// RAEM embedding file, all integers little-endian:
//   "RAEM" | u16 version (=1) | u32 dim | u64 count | count*dim f32 row-major
// The ids sidecar is UTF-8 text, one item id per line, same order.

inline constexpr char kRaemMagic[4] = {'R', 'A', 'E', 'M'};
inline constexpr std::uint16_t kRaemVersion = 1;

struct EmbeddingFile {
    std::uint32_t dim = 0;
    std::vector<float> values;  // count * dim

    std::uint64_t count() const noexcept { return dim == 0 ? 0 : values.size() / dim; }
    bool operator==(const EmbeddingFile&) const = default;
};

std::vector<std::uint8_t> encode_embeddings(const EmbeddingFile& file);
EmbeddingFile decode_embeddings(const std::vector<std::uint8_t>& bytes);

EmbeddingFile read_embeddings(const std::filesystem::path& path);
void write_embeddings(const std::filesystem::path& path, const EmbeddingFile& file);

std::vector<std::string> read_ids(const std::filesystem::path& path);
void write_ids(const std::filesystem::path& path, const std::vector<std::string>& ids);

/// Pairs vectors with ids. Throws CountMismatch when the counts differ.
std::vector<IndexItem> zip_items(const EmbeddingFile& file, const std::vector<std::string>& ids);

/// Loads both files and builds a frozen base.
KnowledgeBase load_knowledge_base(const std::filesystem::path& embeddings_path,
                                  const std::filesystem::path& ids_path);

// Index snapshot, little-endian:
//   "RAIX" | u16 version (=1) | u32 dim | u64 count
//   | count * (u32 byte length, id bytes) | count*dim f64 unit vectors
// Reloading restores the stored unit vectors bit-for-bit.

std::vector<std::uint8_t> encode_snapshot(const KnowledgeBase& kb);
KnowledgeBase decode_snapshot(const std::vector<std::uint8_t>& bytes);

void write_snapshot(const std::filesystem::path& path, const KnowledgeBase& kb);
KnowledgeBase read_snapshot(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

}  // namespace realign
