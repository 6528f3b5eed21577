#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace flowae;

namespace {

FlowSchema two_feature_schema() {
    FlowSchema s;
    s.feature_columns = {"a", "b"};
    s.attack_category_column = "cat";
    return s;
}

FlowTable parse(const std::string& text, const FlowSchema& schema = two_feature_schema()) {
    std::istringstream in(text);
    return load_flows(in, schema);
}

ErrorKind kind_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::Io;
}

}  // namespace

TEST(FlowIngest, ParsesThreeRows) {
    const auto t = parse("a,b,label,cat\n1,2,BENIGN,\n3,4,ATTACK,dos\n5,6,BENIGN,\n");
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t.benign_count(), 2u);
    EXPECT_EQ(t.records[1].label, Label::Attack);
    EXPECT_EQ(t.records[1].category, "dos");
    EXPECT_FALSE(t.records[0].category.has_value());
    EXPECT_EQ(t.records[2].features, (std::vector<double>{5, 6}));
    EXPECT_EQ(t.records[2].original_index, 2u);
}

TEST(FlowIngest, QuotedFieldsAndCrlf) {
    const auto t = parse("\"a\",b,label,cat\r\n\"1.5\",2,BENIGN,\"x, y\"\r\n");
    ASSERT_EQ(t.size(), 1u);
    EXPECT_DOUBLE_EQ(t.records[0].features[0], 1.5);
    EXPECT_EQ(t.records[0].category, "x, y");
}

TEST(FlowIngest, ColumnOrderFollowsSchema) {
    FlowSchema s = two_feature_schema();
    s.feature_columns = {"b", "a"};
    const auto t = parse("a,b,label,cat\n1,2,BENIGN,\n", s);
    EXPECT_EQ(t.records[0].features, (std::vector<double>{2, 1}));
}

TEST(FlowIngest, Errors) {
    EXPECT_EQ(kind_of([] { parse("a,b,cat\n1,2,x\n"); }), ErrorKind::MissingColumn);
    EXPECT_EQ(kind_of([] { parse("a,b,label,cat\n1,oops,BENIGN,\n"); }), ErrorKind::NonNumericValue);
    EXPECT_EQ(kind_of([] { parse("a,b,label,cat\nnan,1,BENIGN,\n"); }), ErrorKind::NonNumericValue);
    EXPECT_EQ(kind_of([] { parse(""); }), ErrorKind::EmptyFile);
    EXPECT_EQ(kind_of([] { parse("a,b,label,cat\n1,2\n"); }), ErrorKind::Io);
    EXPECT_EQ(kind_of([] { load_flows(std::filesystem::path("/nonexistent/x.csv"), two_feature_schema()); }),
              ErrorKind::MissingInput);
}

TEST(FlowIngest, HeaderOnlyIsEmptyTable) {
    const auto t = parse("a,b,label,cat\n");
    EXPECT_TRUE(t.empty());
}

TEST(FlowIngest, SemicolonDelimiter) {
    FlowSchema s = two_feature_schema();
    s.delimiter = ';';
    const auto t = parse("a;b;label;cat\n1.5;2;BENIGN;\n", s);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t.records[0].features, (std::vector<double>{1.5, 2}));
    EXPECT_EQ(kind_of([&] { parse("a;b;label;cat\n1.5;2;BENIGN;\n", two_feature_schema()); }), ErrorKind::MissingColumn);
    // a decimal comma is not a number
    EXPECT_EQ(kind_of([&] { parse("a;b;label;cat\n1,5;2;BENIGN;\n", s); }), ErrorKind::NonNumericValue);
    EXPECT_EQ(kind_of([&] { parse("a;b;label;cat\n1.5x;2;BENIGN;\n", s); }), ErrorKind::NonNumericValue);
}

TEST(Normalizer, FitMinMax) {
    const auto stats = fit_normalizer(fixtures::table({{0, 10}, {4, 20}}));
    EXPECT_EQ(stats.min, (std::vector<double>{0, 10}));
    EXPECT_EQ(stats.max, (std::vector<double>{4, 20}));
}

TEST(Normalizer, ConstantColumn) {
    const auto stats = fit_normalizer(fixtures::table({{5, 5}, {5, 9}}));
    EXPECT_EQ(stats.min[0], 5);
    EXPECT_EQ(stats.max[0], 5);
    EXPECT_EQ(stats.scale(0, 5), 0.0);
    EXPECT_EQ(stats.scale(0, 7), 0.0);
}

TEST(Normalizer, SingleRecordIsInsufficient) {
    EXPECT_EQ(kind_of([] { fit_normalizer(fixtures::table({{1, 2}})); }), ErrorKind::InsufficientData);
}

TEST(Normalizer, ScaleExamples) {
    NormalizationStats stats{{0}, {4}};
    EXPECT_EQ(stats.scale(0, 4), 1.0);
    EXPECT_EQ(stats.scale(0, 2), 0.5);
    EXPECT_EQ(stats.scale(0, 8), 1.0);
    EXPECT_EQ(stats.scale(0, -3), 0.0);
}

TEST(Normalizer, OutputInUnitCubeProperty) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> rows;
        for (int i = 0; i < 20; ++i) rows.push_back({uniform(rng, -100, 100), uniform(rng, 0, 1), 3.0});
        const auto t = fixtures::table(rows);
        const auto stats = fit_normalizer(t);
        const auto out = normalize(t, stats);
        for (const auto& r : out.records) {
            for (double v : r.features) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 1.0);
            }
        }
        // unseen data outside the fitted range is clamped as well
        const auto wide = normalize(fixtures::table({{-1000, 5, 3}}), stats);
        EXPECT_EQ(wide.records[0].features[0], 0.0);
        EXPECT_EQ(wide.records[0].features[1], 1.0);
    }
}

TEST(Normalizer, DimensionMismatch) {
    NormalizationStats stats{{0}, {1}};
    EXPECT_EQ(kind_of([&] { normalize(fixtures::table({{1, 2}}), stats); }), ErrorKind::DimensionMismatch);
}

TEST(Split, EightyTwenty) {
    std::vector<std::vector<double>> rows(10, {0.0});
    const auto [train, test] = split_benign(fixtures::table(rows), 0.8, 5);
    EXPECT_EQ(train.size(), 8u);
    EXPECT_EQ(test.size(), 2u);
}

TEST(Split, HalfOfFour) {
    std::vector<std::vector<double>> rows(4, {0.0});
    const auto [train, test] = split_benign(fixtures::table(rows), 0.5, 5);
    EXPECT_EQ(train.size(), 2u);
    EXPECT_EQ(test.size(), 2u);
}

TEST(Split, DeterministicDisjointCoveringAndOrdered) {
    std::vector<std::vector<double>> rows;
    std::vector<Label> labels;
    for (int i = 0; i < 57; ++i) {
        rows.push_back({double(i)});
        labels.push_back(i % 5 == 0 ? Label::Attack : Label::Benign);
    }
    const auto t = fixtures::table(rows, labels);
    const auto a = split_benign(t, 0.8, 42);
    const auto b = split_benign(t, 0.8, 42);
    std::vector<std::size_t> ia, ib;
    for (auto& r : a.first.records) ia.push_back(r.original_index);
    for (auto& r : b.first.records) ib.push_back(r.original_index);
    EXPECT_EQ(ia, ib);
    EXPECT_TRUE(std::is_sorted(ia.begin(), ia.end()));

    std::set<std::size_t> all(ia.begin(), ia.end());
    for (auto& r : a.second.records) {
        EXPECT_TRUE(all.insert(r.original_index).second);
        EXPECT_TRUE(r.is_benign());
    }
    EXPECT_EQ(all.size(), t.benign_count());

    const auto c = split_benign(t, 0.8, 43);
    std::vector<std::size_t> ic;
    for (auto& r : c.first.records) ic.push_back(r.original_index);
    EXPECT_NE(ia, ic);
}

TEST(Split, Errors) {
    const auto attacks = fixtures::table({{1}, {2}}, {Label::Attack, Label::Attack});
    EXPECT_EQ(kind_of([&] { split_benign(attacks, 0.8, 1); }), ErrorKind::NoBenignRecords);
    EXPECT_EQ(kind_of([] { split_benign(fixtures::table({{1}, {2}}), 1.5, 1); }), ErrorKind::InvalidConfig);
}
