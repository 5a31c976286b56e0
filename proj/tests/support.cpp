#include "support.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <unistd.h>

namespace testing_support {

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() / fmt::format("realign-test-{}-{}", ::getpid(), counter++);
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> nd;
    std::vector<double> v(dim);
    for (double& x : v) x = nd(rng);
    return v;
}

std::vector<realign::IndexItem> random_items(std::mt19937_64& rng, std::size_t n, std::size_t dim) {
    std::vector<realign::IndexItem> items;
    items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        items.emplace_back(fmt::format("item{:05}", i), realign::EmbeddingVector(gaussian(rng, dim)));
    }
    return items;
}

realign::RetrievalResult brute_force_top_k(const std::vector<realign::IndexItem>& items, std::size_t query,
                                           std::size_t k) {
    const auto& q = items[query].second.values();
    double qn = 0;
    for (double x : q) qn += x * x;
    qn = std::sqrt(qn);
    std::vector<realign::Neighbor> all;
    for (std::size_t j = 0; j < items.size(); ++j) {
        if (j == query) continue;
        const auto& v = items[j].second.values();
        double d = 0, vn = 0;
        for (std::size_t i = 0; i < v.size(); ++i) {
            d += q[i] * v[i];
            vn += v[i] * v[i];
        }
        all.push_back({items[j].first, std::clamp(d / (qn * std::sqrt(vn)), -1.0, 1.0), 0});
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.similarity != b.similarity ? a.similarity > b.similarity : a.item_id < b.item_id;
    });
    if (all.size() > k) all.resize(k);
    for (std::size_t i = 0; i < all.size(); ++i) all[i].rank = static_cast<int>(i + 1);
    return all;
}

}  // namespace testing_support
