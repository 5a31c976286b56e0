#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "realign/embedding.hpp"
#include "realign/knowledge_base.hpp"

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t dim);
std::vector<realign::IndexItem> random_items(std::mt19937_64& rng, std::size_t n, std::size_t dim);

/// Exhaustive scan: cosine against every other item computed from the raw
/// vectors, sorted by (similarity desc, id asc), truncated to k.
realign::RetrievalResult brute_force_top_k(const std::vector<realign::IndexItem>& items, std::size_t query,
                                           std::size_t k);

}  // namespace testing_support
