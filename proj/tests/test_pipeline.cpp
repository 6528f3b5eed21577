#include <sstream>

#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace flowae;

TEST(Config, ParsesSections) {
    std::istringstream in(R"([data]
features = a, b
label = Label
category = kind
benign = normal
[sequence]
length = 10
noise = 0.02
[smote]
multiplier = 2
[model]
hidden = 16
mode = variational
[train]
lambda_rec = 0.5
epochs = 7
[detector]
percentile = 95
[run]
seed = 4
)");
    const auto cfg = parse_config(in);
    EXPECT_EQ(cfg.schema.feature_columns, (std::vector<std::string>{"a", "b"}));
    EXPECT_EQ(cfg.schema.label_column, "Label");
    EXPECT_EQ(cfg.schema.attack_category_column, "kind");
    EXPECT_EQ(cfg.schema.benign_label_value, "normal");
    EXPECT_EQ(cfg.sequence_length, 10u);
    EXPECT_EQ(cfg.stride, 10u);
    EXPECT_EQ(cfg.noise_scale, 0.02);
    EXPECT_EQ(cfg.smote_multiplier, 2.0);
    EXPECT_EQ(cfg.model.hidden_dim, 16u);
    EXPECT_EQ(cfg.model.mode, ModelMode::Variational);
    EXPECT_EQ(cfg.train.lambda_rec, 0.5);
    EXPECT_EQ(cfg.train.lambda_tml, 0.9);
    EXPECT_EQ(cfg.train.epochs, 7u);
    EXPECT_EQ(cfg.percentile, 95.0);
    EXPECT_EQ(cfg.seed, 4u);
}

TEST(Config, BadValues) {
    std::istringstream bad_number("[train]\nepochs = many\n");
    EXPECT_THROW(parse_config(bad_number), Error);
    std::istringstream bad_mode("[model]\nmode = quantum\n");
    EXPECT_THROW(parse_config(bad_mode), Error);
    std::istringstream negative("[model]\nhidden = -4\n");
    EXPECT_THROW(parse_config(negative), Error);
}

TEST(Pipeline, PrepareSplitsWithoutLeakage) {
    SyntheticSpec spec;
    spec.flows = 1000;
    spec.features = 3;
    spec.attack_fraction = 0.3;
    spec.seed = 2;
    const auto raw = generate_synthetic(spec);
    PipelineConfig cfg;
    cfg.schema = synthetic_schema(3);
    cfg.sequence_length = 10;
    cfg.stride = 10;
    cfg.seed = 5;
    const auto data = prepare(raw, cfg);

    std::set<std::size_t> train_starts;
    for (const auto& s : data.train_benign) train_starts.insert(s.start_index);
    for (const auto& s : data.test_benign) EXPECT_EQ(train_starts.count(s.start_index), 0u);
    for (const auto& s : data.attacks) EXPECT_FALSE(s.is_benign());
    const std::size_t benign = data.train_benign.size() + data.test_benign.size();
    EXPECT_EQ(data.train_benign.size(), static_cast<std::size_t>(std::floor(0.8 * benign)));
    EXPECT_EQ(benign + data.attacks.size(), 100u);

    // min-max comes only from benign flows inside training windows
    std::vector<double> lo(3, 1e300), hi(3, -1e300);
    for (const auto& s : data.train_benign) {
        for (std::size_t t = 0; t < 10; ++t) {
            const auto& r = raw.records[s.start_index + t];
            if (!r.is_benign()) continue;
            for (std::size_t f = 0; f < 3; ++f) {
                lo[f] = std::min(lo[f], r.features[f]);
                hi[f] = std::max(hi[f], r.features[f]);
            }
        }
    }
    EXPECT_EQ(data.stats.min, lo);
    EXPECT_EQ(data.stats.max, hi);
}

TEST(Pipeline, SmoteGrowsTrainingOnly) {
    SyntheticSpec spec;
    spec.flows = 600;
    spec.features = 2;
    spec.seed = 3;
    const auto raw = generate_synthetic(spec);
    PipelineConfig cfg;
    cfg.schema = synthetic_schema(2);
    cfg.sequence_length = 10;
    cfg.stride = 10;
    cfg.smote_multiplier = 2.0;
    const auto data = prepare(raw, cfg);
    EXPECT_EQ(data.training.size(), 2 * data.train_benign.size());
    for (const auto& s : data.training) {
        EXPECT_GE(s.values.minCoeff(), 0.0);
        EXPECT_LE(s.values.maxCoeff(), 1.0);
    }
}

TEST(Pipeline, TrainingIsReproducibleAndTransferFreezes) {
    SyntheticSpec spec;
    spec.flows = 400;
    spec.features = 3;
    spec.seed = 4;
    const auto raw = generate_synthetic(spec);
    PipelineConfig cfg;
    cfg.schema = synthetic_schema(3);
    cfg.sequence_length = 10;
    cfg.stride = 10;
    cfg.model.hidden_dim = 8;
    cfg.model.latent_dim = 4;
    cfg.train.epochs = 3;
    cfg.seed = 8;
    const auto a = run_training(raw, cfg);
    const auto b = run_training(raw, cfg);
    EXPECT_EQ(serialize(a.artifact), serialize(b.artifact));
    ASSERT_TRUE(a.artifact.threshold);
    EXPECT_EQ(a.artifact.threshold->calibration_count, a.data.train_benign.size());

    const auto restored = config_from_artifact(deserialize(serialize(a.artifact)));
    EXPECT_EQ(restored.schema.feature_columns, cfg.schema.feature_columns);
    EXPECT_EQ(restored.sequence_length, 10u);
    EXPECT_EQ(restored.train.epochs, 3u);

    SyntheticSpec target = spec;
    target.seed = 5;
    target.amplitude = 0.2;
    const auto moved = run_transfer(a.artifact, generate_synthetic(target), cfg, FreezeSpec::encoder());
    const auto before = a.artifact.model.params.tensors();
    const auto after = moved.artifact.model.params.tensors();
    for (std::size_t k = 0; k < before.size(); ++k) {
        if (before[k].group == ParamGroup::Encoder || before[k].group == ParamGroup::InputLayer) {
            EXPECT_TRUE(std::equal(before[k].values.begin(), before[k].values.end(), after[k].values.begin()))
                << before[k].name;
        }
    }

    SyntheticSpec wide = spec;
    wide.features = 4;
    PipelineConfig wide_cfg = cfg;
    wide_cfg.schema = synthetic_schema(4);
    EXPECT_THROW(run_transfer(a.artifact, generate_synthetic(wide), wide_cfg, FreezeSpec::encoder()), Error);
}

TEST(Synthetic, ShapeAndDeterminism) {
    SyntheticSpec spec;
    spec.flows = 2000;
    spec.attack_fraction = 0.3;
    spec.seed = 1;
    const auto a = generate_synthetic(spec);
    const auto b = generate_synthetic(spec);
    ASSERT_EQ(a.size(), 2000u);
    EXPECT_EQ(a.dimension(), 8u);
    std::size_t attacks = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a.records[i].features, b.records[i].features);
        if (!a.records[i].is_benign()) {
            ++attacks;
            EXPECT_TRUE(a.records[i].category.has_value());
        }
    }
    EXPECT_NEAR(static_cast<double>(attacks) / 2000.0, 0.3, 0.05);

    std::stringstream csv_text;
    write_flows_csv(csv_text, a);
    const auto parsed = load_flows(csv_text, synthetic_schema(8));
    ASSERT_EQ(parsed.size(), a.size());
    EXPECT_EQ(parsed.records[17].features, a.records[17].features);
    EXPECT_EQ(parsed.records[17].label, a.records[17].label);
}
