#include <gtest/gtest.h>

#include <cstring>
#include <random>

#include "realign/error.hpp"
#include "realign/raem_io.hpp"
#include "realign/toy_policy.hpp"
#include "support.hpp"

using namespace realign;
using testing_support::TempDir;

namespace {

EmbeddingFile random_file(std::mt19937_64& rng, std::uint32_t dim, std::size_t count) {
    std::normal_distribution<float> nd;
    EmbeddingFile f;
    f.dim = dim;
    for (std::size_t i = 0; i < dim * count; ++i) f.values.push_back(nd(rng));
    return f;
}

}  // namespace

TEST(Raem, HeaderLayoutIsLittleEndian) {
    EmbeddingFile f;
    f.dim = 2;
    f.values = {1.0f, -2.5f, 0.0f, 3.0f};
    const auto bytes = encode_embeddings(f);
    ASSERT_EQ(bytes.size(), 4u + 2 + 4 + 8 + 4 * 4);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RAEM");
    EXPECT_EQ(bytes[4], 1);
    EXPECT_EQ(bytes[5], 0);
    EXPECT_EQ(bytes[6], 2);
    EXPECT_EQ(bytes[7] | bytes[8] | bytes[9], 0);
    EXPECT_EQ(bytes[10], 2);
    for (int i = 11; i < 18; ++i) EXPECT_EQ(bytes[i], 0);
    // 1.0f = 0x3f800000
    EXPECT_EQ(bytes[18], 0x00);
    EXPECT_EQ(bytes[19], 0x00);
    EXPECT_EQ(bytes[20], 0x80);
    EXPECT_EQ(bytes[21], 0x3f);
}

TEST(Raem, WriteReadWriteIsByteIdentical) {
    std::mt19937_64 rng(1);
    TempDir dir;
    const auto f = random_file(rng, 7, 33);
    write_embeddings(dir / "a.raem", f);
    const auto back = read_embeddings(dir / "a.raem");
    EXPECT_EQ(back, f);
    write_embeddings(dir / "b.raem", back);
    EXPECT_EQ(read_file_bytes(dir / "a.raem"), read_file_bytes(dir / "b.raem"));
}

TEST(Raem, RejectsCorruptFiles) {
    EmbeddingFile f;
    f.dim = 2;
    f.values = {1, 2, 3, 4};
    auto bytes = encode_embeddings(f);

    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    auto bad_version = bytes;
    bad_version[4] = 2;
    auto truncated = bytes;
    truncated.pop_back();
    auto count_lies = bytes;
    count_lies[10] = 3;

    auto code = [](const std::vector<std::uint8_t>& b) {
        try {
            decode_embeddings(b);
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::Io;
    };
    EXPECT_EQ(code(bad_magic), ErrorCode::MalformedInput);
    EXPECT_EQ(code(bad_version), ErrorCode::MalformedInput);
    EXPECT_EQ(code(truncated), ErrorCode::CountMismatch);
    EXPECT_EQ(code(count_lies), ErrorCode::CountMismatch);
}

TEST(Raem, ZipCountMismatch) {
    EmbeddingFile f;
    f.dim = 1;
    f.values = {1, 2, 3};
    try {
        zip_items(f, {"a", "b"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::CountMismatch);
    }
}

TEST(Ids, RoundTrip) {
    TempDir dir;
    write_ids(dir / "x.ids", {"img1", "img 2", "ümlaut"});
    EXPECT_EQ(read_ids(dir / "x.ids"), (std::vector<std::string>{"img1", "img 2", "ümlaut"}));
}

TEST(Snapshot, ReloadRestoresVectorsAndRetrieval) {
    std::mt19937_64 rng(2);
    const auto items = testing_support::random_items(rng, 10'000, 24);
    const auto kb = build_index(items);
    TempDir dir;
    write_snapshot(dir / "i.raix", kb);
    const auto back = read_snapshot(dir / "i.raix");
    ASSERT_EQ(back.ids(), kb.ids());
    for (std::size_t i = 0; i < kb.size(); ++i) {
        ASSERT_EQ(0, std::memcmp(back.row(i).data(), kb.row(i).data(), kb.dim() * sizeof(double)));
    }
    for (std::size_t q = 0; q < items.size(); q += 997) {
        EXPECT_EQ(retrieve_top_k(back, items[q].first, 20), retrieve_top_k(kb, items[q].first, 20));
    }
    write_snapshot(dir / "j.raix", back);
    EXPECT_EQ(read_file_bytes(dir / "i.raix"), read_file_bytes(dir / "j.raix"));
}

TEST(Checkpoint, WriteReadWriteIsByteIdentical) {
    TempDir dir;
    auto p = ToyPolicy::random(17, 5, 99, 3.0);
    p.weight(3, 2) = 1.0 / 3.0;
    p.bias()[0] = -0.0;
    p.bias()[1] = 5e-324;
    save_policy(dir / "a.json", p);
    const auto back = load_policy(dir / "a.json");
    EXPECT_EQ(back, p);
    save_policy(dir / "b.json", back);
    EXPECT_EQ(read_file_bytes(dir / "a.json"), read_file_bytes(dir / "b.json"));
}

TEST(Checkpoint, RejectsShapeMismatch) {
    EXPECT_THROW(policy_from_json(R"({"vocab_size":2,"ctx_dim":1,"weights":[0.0],"bias":[0.0,0.0]})"), Error);
    EXPECT_THROW(policy_from_json("not json"), Error);
}
