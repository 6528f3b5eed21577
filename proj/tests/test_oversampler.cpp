#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace flowae;

namespace {

FlowTable random_cloud(std::size_t count, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows(count, std::vector<double>(n));
    for (auto& r : rows) {
        for (auto& v : r) v = uniform(rng, 0.0, 1.0);
    }
    return fixtures::table(rows);
}

std::vector<std::vector<double>> points(const FlowTable& t, std::size_t count) {
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(t.records[i].features);
    return out;
}

}  // namespace

TEST(Smote, TargetEqualsInputIsNoop) {
    const auto t = random_cloud(10, 3, 1);
    const auto out = smote_oversample(t, SmoteConfig{3, 10, 5});
    ASSERT_EQ(out.size(), t.size());
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(out.records[i].features, t.records[i].features);
}

TEST(Smote, TwoPointsOneDimension) {
    const auto t = fixtures::table({{0.0}, {1.0}});
    const auto out = smote_oversample(t, SmoteConfig{1, 3, 8});
    ASSERT_EQ(out.size(), 3u);
    const double v = out.records[2].features[0];
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
    EXPECT_TRUE(out.records[2].is_benign());
    EXPECT_EQ(out.records[2].original_index, 2u);
}

TEST(Smote, Errors) {
    const auto t = random_cloud(5, 2, 1);
    auto kind = [&](SmoteConfig cfg) {
        try {
            smote_oversample(t, cfg);
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    EXPECT_EQ(kind(SmoteConfig{2, 4, 0}), ErrorKind::TargetBelowInput);
    EXPECT_EQ(kind(SmoteConfig{5, 10, 0}), ErrorKind::TooFewRecords);
    EXPECT_EQ(kind(SmoteConfig{0, 10, 0}), ErrorKind::TooFewRecords);
    auto mixed = t;
    mixed.records[0].label = Label::Attack;
    EXPECT_THROW(smote_oversample(mixed, SmoteConfig{2, 10, 0}), Error);
}

TEST(Smote, OriginalsPreservedAndCountMatchesTarget) {
    const auto t = random_cloud(40, 4, 2);
    const auto out = smote_oversample(t, SmoteConfig{5, 100, 3});
    ASSERT_EQ(out.size(), 100u);
    for (std::size_t i = 0; i < t.size(); ++i) EXPECT_EQ(out.records[i].features, t.records[i].features);
}

TEST(Smote, SamplesLieOnNeighbourSegments) {
    const auto t = random_cloud(60, 3, 4);
    const std::size_t k = 4;
    const auto out = smote_oversample(t, SmoteConfig{k, 300, 6});
    const auto pts = points(t, t.size());
    for (std::size_t s = 0; s < 240; ++s) {
        const std::size_t base = s % t.size();
        const auto& x = out.records[t.size() + s].features;
        double best = 1e9;
        for (auto nn : oracle::knn(pts, base, k)) best = std::min(best, oracle::distance_to_segment(x, pts[base], pts[nn]));
        EXPECT_LE(best, 1e-9);
    }
}

TEST(Smote, Deterministic) {
    const auto t = random_cloud(20, 2, 5);
    const auto a = smote_oversample(t, SmoteConfig{3, 50, 11});
    const auto b = smote_oversample(t, SmoteConfig{3, 50, 11});
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a.records[i].features, b.records[i].features);
}

TEST(Smote, NeighbourTiesBrokenByIndex) {
    const auto t = fixtures::table({{0.0}, {1.0}, {-1.0}, {2.0}});
    EXPECT_EQ(detail::nearest_neighbors(t.records, 0, 2), (std::vector<std::size_t>{1, 2}));
}
