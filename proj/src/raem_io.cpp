#include "realign/raem_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "realign/error.hpp"

namespace realign {

namespace {

constexpr char kSnapshotMagic[4] = {'R', 'A', 'I', 'X'};
constexpr std::uint16_t kSnapshotVersion = 1;

class ByteWriter {
public:
    void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }

    template <typename T>
    void le(T value) {
        using U = std::make_unsigned_t<T>;
        auto u = static_cast<U>(value);
        for (std::size_t i = 0; i < sizeof(T); ++i) bytes_.push_back(static_cast<std::uint8_t>(u >> (8 * i)));
    }
    void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
    void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::uint8_t> take() { return std::move(bytes_); }

private:
    std::vector<std::uint8_t> bytes_;
};

class ByteReader {
public:
    ByteReader(const std::vector<std::uint8_t>& bytes, const char* what) : bytes_(bytes), what_(what) {}

    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) {
            throw Error(ErrorCode::MalformedInput, std::string(what_) + ": truncated at byte " + std::to_string(pos_));
        }
    }
    std::string raw(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    template <typename T>
    T le() {
        need(sizeof(T));
        std::make_unsigned_t<T> u = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            u |= static_cast<std::make_unsigned_t<T>>(bytes_[pos_ + i]) << (8 * i);
        }
        pos_ += sizeof(T);
        return static_cast<T>(u);
    }
    float f32() { return std::bit_cast<float>(le<std::uint32_t>()); }
    double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

    std::size_t remaining() const { return bytes_.size() - pos_; }

private:
    const std::vector<std::uint8_t>& bytes_;
    const char* what_;
    std::size_t pos_ = 0;
};

void expect_magic(ByteReader& in, const char (&magic)[4], const char* what) {
    if (in.raw(4) != std::string(magic, 4)) throw Error(ErrorCode::MalformedInput, std::string(what) + ": bad magic");
}

}  // namespace

std::vector<std::uint8_t> encode_embeddings(const EmbeddingFile& file) {
    if (file.dim == 0) throw Error(ErrorCode::MalformedInput, "RAEM: dim must be >= 1");
    if (file.values.size() % file.dim != 0) {
        throw Error(ErrorCode::CountMismatch, "RAEM: value count is not a multiple of dim");
    }
    ByteWriter out;
    out.raw(kRaemMagic, 4);
    out.le(kRaemVersion);
    out.le(file.dim);
    out.le(file.count());
    for (float v : file.values) out.f32(v);
    return out.take();
}

EmbeddingFile decode_embeddings(const std::vector<std::uint8_t>& bytes) {
    ByteReader in(bytes, "RAEM");
    expect_magic(in, kRaemMagic, "RAEM");
    const auto version = in.le<std::uint16_t>();
    if (version != kRaemVersion) {
        throw Error(ErrorCode::MalformedInput, "RAEM: unsupported version " + std::to_string(version));
    }
    EmbeddingFile file;
    file.dim = in.le<std::uint32_t>();
    const auto count = in.le<std::uint64_t>();
    if (file.dim == 0) throw Error(ErrorCode::MalformedInput, "RAEM: dim must be >= 1");
    if (in.remaining() / 4 / file.dim != count || in.remaining() % (4ull * file.dim) != 0) {
        throw Error(ErrorCode::CountMismatch, "RAEM: header declares " + std::to_string(count) + " vectors but payload holds " +
                                                  std::to_string(in.remaining() / 4.0 / file.dim));
    }
    file.values.reserve(count * file.dim);
    for (std::uint64_t i = 0; i < count * file.dim; ++i) file.values.push_back(in.f32());
    return file;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::Io, "short write to " + path.string());
}

EmbeddingFile read_embeddings(const std::filesystem::path& path) { return decode_embeddings(read_file_bytes(path)); }

void write_embeddings(const std::filesystem::path& path, const EmbeddingFile& file) {
    write_file_bytes(path, encode_embeddings(file));
}

std::vector<std::string> read_ids(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
    std::vector<std::string> ids;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            throw Error(ErrorCode::MalformedInput, path.string() + ": empty id on line " + std::to_string(ids.size() + 1));
        }
        ids.push_back(line);
    }
    return ids;
}

void write_ids(const std::filesystem::path& path, const std::vector<std::string>& ids) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    for (const auto& id : ids) out << id << '\n';
}

std::vector<IndexItem> zip_items(const EmbeddingFile& file, const std::vector<std::string>& ids) {
    if (file.count() != ids.size()) {
        throw Error(ErrorCode::CountMismatch, "ids file has " + std::to_string(ids.size()) + " lines for " +
                                                  std::to_string(file.count()) + " vectors");
    }
    std::vector<IndexItem> items;
    items.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto begin = file.values.begin() + static_cast<std::ptrdiff_t>(i * file.dim);
        items.emplace_back(ids[i], EmbeddingVector(std::vector<double>(begin, begin + file.dim)));
    }
    return items;
}

KnowledgeBase load_knowledge_base(const std::filesystem::path& embeddings_path, const std::filesystem::path& ids_path) {
    return build_index(zip_items(read_embeddings(embeddings_path), read_ids(ids_path)));
}

std::vector<std::uint8_t> encode_snapshot(const KnowledgeBase& kb) {
    if (!kb.frozen()) throw Error(ErrorCode::NotFrozen, "only frozen bases can be snapshotted");
    ByteWriter out;
    out.raw(kSnapshotMagic, 4);
    out.le(kSnapshotVersion);
    out.le(static_cast<std::uint32_t>(kb.dim()));
    out.le(static_cast<std::uint64_t>(kb.size()));
    for (const auto& id : kb.ids()) {
        out.le(static_cast<std::uint32_t>(id.size()));
        out.raw(id.data(), id.size());
    }
    for (std::size_t i = 0; i < kb.size(); ++i) {
        for (double v : kb.row(i)) out.f64(v);
    }
    return out.take();
}

KnowledgeBase decode_snapshot(const std::vector<std::uint8_t>& bytes) {
    ByteReader in(bytes, "RAIX");
    expect_magic(in, kSnapshotMagic, "RAIX");
    const auto version = in.le<std::uint16_t>();
    if (version != kSnapshotVersion) {
        throw Error(ErrorCode::MalformedInput, "RAIX: unsupported version " + std::to_string(version));
    }
    const auto dim = in.le<std::uint32_t>();
    const auto count = in.le<std::uint64_t>();
    if (dim == 0 || count == 0) throw Error(ErrorCode::MalformedInput, "RAIX: empty snapshot");
    std::vector<std::string> ids;
    ids.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) ids.push_back(in.raw(in.le<std::uint32_t>()));
    if (in.remaining() != count * dim * 8) throw Error(ErrorCode::CountMismatch, "RAIX: vector payload size mismatch");

    KnowledgeBase kb(dim);
    for (std::uint64_t i = 0; i < count; ++i) {
        std::vector<double> row(dim);
        for (auto& v : row) v = in.f64();
        const double n = std::sqrt(dot(row, row));
        if (!(std::abs(n - 1.0) <= 1e-6)) {
            throw Error(ErrorCode::MalformedInput, "RAIX: vector for '" + ids[i] + "' is not unit norm");
        }
        kb.add_normalized(std::move(ids[i]), std::move(row));
    }
    kb.freeze();
    return kb;
}

void write_snapshot(const std::filesystem::path& path, const KnowledgeBase& kb) {
    write_file_bytes(path, encode_snapshot(kb));
}

KnowledgeBase read_snapshot(const std::filesystem::path& path) { return decode_snapshot(read_file_bytes(path)); }

}  // namespace realign
