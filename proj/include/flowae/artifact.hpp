#pragma once

// Model artifact container. Layout (all integers little-endian, reals are
// IEEE-754 binary64 little-endian):
//
//   magic         8 bytes  "FLOWAEMD"
//   version       u32      kArtifactVersion
//   config        u64 input_dim, u64 hidden_dim, u64 latent_dim,
//                 u64 num_layers, u8 mode (0 deterministic, 1 variational),
//                 u64 seed
//   tensors       u32 count, then per tensor:
//                 u32 name length, name bytes, u64 rows, u64 cols,
//                 rows*cols f64 in row-major order
//   normalization u64 n, n f64 minima, n f64 maxima
//   threshold     u8 present; if 1: f64 threshold, f64 percentile, u64 count
//   metadata      u32 count, then per entry u32 key length, key bytes,
//                 u32 value length, value bytes (sorted by key)
//   checksum      u64 FNV-1a over every preceding byte

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "flowae/autoencoder.hpp"
#include "flowae/detector.hpp"
#include "flowae/error.hpp"

namespace flowae {

inline constexpr std::uint32_t kArtifactVersion = 1;
inline constexpr char kArtifactMagic[8] = {'F', 'L', 'O', 'W', 'A', 'E', 'M', 'D'};

using Bytes = std::vector<std::uint8_t>;

struct ModelArtifact {
    AutoencoderModel model;
    std::optional<ThresholdModel> threshold;
    std::map<std::string, std::string> metadata;
};

namespace detail {

inline std::uint64_t fnv1a(const std::uint8_t* data, std::size_t size) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < size; ++i) {
        h ^= data[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void raw(const char* data, std::size_t size) { out_.insert(out_.end(), data, data + size); }
    Bytes take() { return std::move(out_); }
    const Bytes& bytes() const { return out_; }

private:
    Bytes out_;
};

class ByteReader {
public:
    ByteReader(const std::uint8_t* data, std::size_t size) : data_(data), size_(size) {}

    std::uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    std::uint32_t u32() {
        need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    std::uint64_t u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(data_[pos_++]) << (8 * i);
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const std::uint32_t len = u32();
        need(len);
        std::string s(reinterpret_cast<const char*>(data_ + pos_), len);
        pos_ += len;
        return s;
    }
    void expect(const char* bytes, std::size_t size) {
        need(size);
        if (std::memcmp(data_ + pos_, bytes, size) != 0) throw Error(ErrorKind::CorruptArtifact, "bad magic");
        pos_ += size;
    }
    std::size_t position() const noexcept { return pos_; }
    std::size_t remaining() const noexcept { return size_ - pos_; }

private:
    void need(std::size_t n) const {
        if (size_ - pos_ < n) throw Error(ErrorKind::CorruptArtifact, "artifact truncated");
    }

    const std::uint8_t* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline Bytes serialize(const ModelArtifact& artifact) {
    detail::ByteWriter w;
    w.raw(kArtifactMagic, sizeof(kArtifactMagic));
    w.u32(kArtifactVersion);
    const ModelConfig& cfg = artifact.model.config;
    w.u64(cfg.input_dim);
    w.u64(cfg.hidden_dim);
    w.u64(cfg.latent_dim);
    w.u64(cfg.num_layers);
    w.u8(cfg.mode == ModelMode::Variational ? 1 : 0);
    w.u64(cfg.seed);

    const auto tensors = artifact.model.params.tensors();
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        w.str(t.name);
        w.u64(static_cast<std::uint64_t>(t.rows));
        w.u64(static_cast<std::uint64_t>(t.cols));
        for (Eigen::Index r = 0; r < t.rows; ++r) {
            for (Eigen::Index c = 0; c < t.cols; ++c) w.f64(t.values[static_cast<std::size_t>(c * t.rows + r)]);
        }
    }

    const NormalizationStats& stats = artifact.model.normalization;
    w.u64(stats.min.size());
    for (double v : stats.min) w.f64(v);
    for (double v : stats.max) w.f64(v);

    w.u8(artifact.threshold ? 1 : 0);
    if (artifact.threshold) {
        w.f64(artifact.threshold->threshold);
        w.f64(artifact.threshold->percentile);
        w.u64(artifact.threshold->calibration_count);
    }

    w.u32(static_cast<std::uint32_t>(artifact.metadata.size()));
    for (const auto& [key, value] : artifact.metadata) {
        w.str(key);
        w.str(value);
    }
    const auto& body = w.bytes();
    w.u64(detail::fnv1a(body.data(), body.size()));
    return w.take();
}

inline ModelArtifact deserialize(const Bytes& bytes) {
    detail::ByteReader r(bytes.data(), bytes.size());
    r.expect(kArtifactMagic, sizeof(kArtifactMagic));
    const std::uint32_t version = r.u32();
    if (version != kArtifactVersion) {
        throw Error(ErrorKind::VersionMismatch, "artifact version " + std::to_string(version) + ", expected " +
                                                    std::to_string(kArtifactVersion));
    }
    if (bytes.size() < 8 + sizeof(kArtifactMagic) + 4) throw Error(ErrorKind::CorruptArtifact, "artifact truncated");
    const std::size_t body_size = bytes.size() - 8;
    detail::ByteReader tail(bytes.data() + body_size, 8);
    if (tail.u64() != detail::fnv1a(bytes.data(), body_size)) throw Error(ErrorKind::CorruptArtifact, "checksum mismatch");

    ModelArtifact artifact;
    ModelConfig cfg;
    cfg.input_dim = r.u64();
    cfg.hidden_dim = r.u64();
    cfg.latent_dim = r.u64();
    cfg.num_layers = r.u64();
    const std::uint8_t mode = r.u8();
    if (mode > 1) throw Error(ErrorKind::CorruptArtifact, "unknown model mode");
    cfg.mode = mode == 1 ? ModelMode::Variational : ModelMode::Deterministic;
    cfg.seed = r.u64();
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::CorruptArtifact, e.what());
    }
    // guards allocation on garbage dimensions
    if (cfg.input_dim > (1u << 20) || cfg.hidden_dim > (1u << 16) || cfg.latent_dim > (1u << 16) || cfg.num_layers > 64) {
        throw Error(ErrorKind::CorruptArtifact, "implausible model dimensions");
    }
    artifact.model.config = cfg;
    artifact.model.params = ParameterSet::zeros(cfg);

    auto tensors = artifact.model.params.tensors();
    if (r.u32() != tensors.size()) throw Error(ErrorKind::CorruptArtifact, "tensor count does not match config");
    for (auto& t : tensors) {
        const std::string name = r.str();
        const auto rows = static_cast<Eigen::Index>(r.u64());
        const auto cols = static_cast<Eigen::Index>(r.u64());
        if (name != t.name || rows != t.rows || cols != t.cols) {
            throw Error(ErrorKind::CorruptArtifact, "tensor '" + name + "' does not match expected '" + t.name + "'");
        }
        for (Eigen::Index row = 0; row < rows; ++row) {
            for (Eigen::Index col = 0; col < cols; ++col) t.values[static_cast<std::size_t>(col * rows + row)] = r.f64();
        }
    }

    const std::uint64_t n = r.u64();
    if (n > r.remaining() / 16) throw Error(ErrorKind::CorruptArtifact, "normalization block truncated");
    artifact.model.normalization.min.resize(n);
    artifact.model.normalization.max.resize(n);
    for (auto& v : artifact.model.normalization.min) v = r.f64();
    for (auto& v : artifact.model.normalization.max) v = r.f64();

    if (r.u8() == 1) {
        ThresholdModel threshold;
        threshold.threshold = r.f64();
        threshold.percentile = r.f64();
        threshold.calibration_count = r.u64();
        artifact.threshold = threshold;
    }

    const std::uint32_t entries = r.u32();
    for (std::uint32_t i = 0; i < entries; ++i) {
        std::string key = r.str();
        artifact.metadata.emplace(std::move(key), r.str());
    }
    if (r.position() != body_size) throw Error(ErrorKind::CorruptArtifact, "trailing bytes before checksum");
    return artifact;
}

inline void save_artifact(const std::filesystem::path& path, const ModelArtifact& artifact) {
    const Bytes bytes = serialize(artifact);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

inline ModelArtifact load_artifact(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open '" + path.string() + "'");
    const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

}  // namespace flowae
