#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace flowae;

namespace {

ModelArtifact sample(ModelMode mode) {
    ModelConfig cfg;
    cfg.input_dim = 3;
    cfg.hidden_dim = 4;
    cfg.latent_dim = 2;
    cfg.num_layers = 2;
    cfg.mode = mode;
    cfg.seed = 99;
    ModelArtifact a;
    a.model = init_model(cfg);
    a.model.normalization = NormalizationStats{{0, 1, 2}, {1, 5, 2}};
    a.threshold = ThresholdModel{0.125, 99, 40};
    a.metadata = {{"lambda_rec", "0.8"}, {"schema.features", "a\nb\nc"}};
    return a;
}

ErrorKind kind_of(const Bytes& bytes) {
    try {
        deserialize(bytes);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Io;
}

}  // namespace

TEST(Artifact, RoundTrip) {
    for (auto mode : {ModelMode::Deterministic, ModelMode::Variational}) {
        const auto a = sample(mode);
        const auto b = deserialize(serialize(a));
        EXPECT_EQ(b.model.config.input_dim, 3u);
        EXPECT_EQ(b.model.config.num_layers, 2u);
        EXPECT_EQ(b.model.config.mode, mode);
        EXPECT_EQ(b.model.config.seed, 99u);
        const auto ta = a.model.params.tensors();
        const auto tb = b.model.params.tensors();
        ASSERT_EQ(ta.size(), tb.size());
        for (std::size_t k = 0; k < ta.size(); ++k) {
            EXPECT_EQ(ta[k].name, tb[k].name);
            EXPECT_TRUE(std::equal(ta[k].values.begin(), ta[k].values.end(), tb[k].values.begin(), tb[k].values.end()))
                << ta[k].name;
        }
        EXPECT_EQ(b.model.normalization, a.model.normalization);
        EXPECT_EQ(b.threshold, a.threshold);
        EXPECT_EQ(b.metadata, a.metadata);
        EXPECT_EQ(serialize(b), serialize(a));
    }
}

TEST(Artifact, NoThreshold) {
    auto a = sample(ModelMode::Deterministic);
    a.threshold.reset();
    EXPECT_FALSE(deserialize(serialize(a)).threshold.has_value());
}

TEST(Artifact, Truncated) {
    const auto bytes = serialize(sample(ModelMode::Deterministic));
    for (std::size_t cut : {std::size_t{0}, std::size_t{5}, std::size_t{12}, bytes.size() / 2, bytes.size() - 1}) {
        EXPECT_EQ(kind_of(Bytes(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut))), ErrorKind::CorruptArtifact)
            << cut;
    }
}

TEST(Artifact, FlippedByte) {
    auto bytes = serialize(sample(ModelMode::Deterministic));
    bytes[bytes.size() / 2] ^= 0x10;
    EXPECT_EQ(kind_of(bytes), ErrorKind::CorruptArtifact);
}

TEST(Artifact, VersionMismatch) {
    auto bytes = serialize(sample(ModelMode::Deterministic));
    bytes[8] = 2;
    EXPECT_EQ(kind_of(bytes), ErrorKind::VersionMismatch);
}

TEST(Artifact, FileRoundTrip) {
    const auto path = std::filesystem::temp_directory_path() / "flowae_artifact_test.bin";
    const auto a = sample(ModelMode::Variational);
    save_artifact(path, a);
    const auto b = load_artifact(path);
    EXPECT_EQ(serialize(a), serialize(b));
    std::filesystem::remove(path);
    EXPECT_THROW(load_artifact(path), Error);
}
