#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace flowae;

namespace {

ModelConfig small(ModelMode mode = ModelMode::Deterministic, std::size_t layers = 1) {
    ModelConfig cfg;
    cfg.input_dim = 3;
    cfg.hidden_dim = 6;
    cfg.latent_dim = 4;
    cfg.num_layers = layers;
    cfg.mode = mode;
    cfg.seed = 12;
    return cfg;
}

AutoencoderModel zero_model(const ModelConfig& cfg) { return AutoencoderModel{cfg, ParameterSet::zeros(cfg), {}}; }

}  // namespace

TEST(Model, InitIsDeterministic) {
    const auto a = init_model(small());
    const auto b = init_model(small());
    const auto ta = a.params.tensors();
    const auto tb = b.params.tensors();
    ASSERT_EQ(ta.size(), tb.size());
    for (std::size_t k = 0; k < ta.size(); ++k) {
        EXPECT_TRUE(std::equal(ta[k].values.begin(), ta[k].values.end(), tb[k].values.begin())) << ta[k].name;
    }
    auto other = small();
    other.seed = 13;
    EXPECT_NE(init_model(other).params.latent_weight, a.params.latent_weight);
}

TEST(Model, InitWithinFanInBounds) {
    const auto m = init_model(small());
    for (const auto& view : m.params.tensors()) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(view.fan_in));
        for (double v : view.values) EXPECT_LE(std::abs(v), bound) << view.name;
    }
}

TEST(Model, InvalidConfig) {
    auto cfg = small();
    cfg.hidden_dim = 0;
    EXPECT_THROW(init_model(cfg), Error);
    cfg = small();
    cfg.latent_dim = 0;
    EXPECT_THROW(init_model(cfg), Error);
}

TEST(Model, Shapes) {
    ModelConfig cfg;
    cfg.input_dim = 77;
    cfg.hidden_dim = 64;
    cfg.latent_dim = 32;
    const auto m = init_model(cfg);
    EXPECT_EQ(m.params.encoder[0].w_input.cols(), 77);
    EXPECT_EQ(m.params.encoder[0].w_input.rows(), 4 * 64);
    EXPECT_EQ(m.params.latent_weight.rows(), 32);
    EXPECT_EQ(m.params.latent_weight.cols(), 64);
    EXPECT_EQ(m.params.output_weight.rows(), 77);
    EXPECT_EQ(m.params.logvar_weight.size(), 0);
}

TEST(Model, TensorGroups) {
    const auto m = init_model(small(ModelMode::Variational, 2));
    std::map<std::string, ParamGroup> groups;
    for (const auto& v : m.params.tensors()) groups[v.name] = v.group;
    EXPECT_EQ(groups.at("encoder.0.w_input"), ParamGroup::InputLayer);
    EXPECT_EQ(groups.at("encoder.1.w_input"), ParamGroup::Encoder);
    EXPECT_EQ(groups.at("latent.weight"), ParamGroup::Encoder);
    EXPECT_EQ(groups.at("logvar.bias"), ParamGroup::Encoder);
    EXPECT_EQ(groups.at("decoder.1.w_hidden"), ParamGroup::DecoderCore);
    EXPECT_EQ(groups.at("output.weight"), ParamGroup::OutputLayer);
}

TEST(Encode, ZeroModelZeroInputGivesZeroLatent) {
    const auto m = zero_model(small());
    Sequence s;
    s.values = Eigen::MatrixXd::Zero(5, 3);
    EXPECT_EQ(encode(m, s).z, Eigen::VectorXd::Zero(4));
}

TEST(Encode, TimestepOrderMatters) {
    const auto m = init_model(small());
    Rng rng(1);
    const auto s = fixtures::random_sequence(rng, 6, 3);
    Sequence rev = s;
    rev.values = s.values.colwise().reverse();
    EXPECT_GT((encode(m, s).z - encode(m, rev).z).norm(), 1e-9);
}

TEST(Encode, VariationalFloorCollapsesToMean) {
    auto m = init_model(small(ModelMode::Variational));
    m.params.logvar_weight.setZero();
    m.params.logvar_bias.setConstant(-1e6);
    Rng rng(2);
    const auto s = fixtures::random_sequence(rng, 5, 3);
    Rng noise(3);
    const auto code = encode(m, s, noise);
    ASSERT_TRUE(code.mean && code.logvar);
    EXPECT_EQ(code.logvar->maxCoeff(), kLogVarMin);
    EXPECT_LT((code.z - *code.mean).cwiseAbs().maxCoeff(), 10 * std::exp(-5.0));
}

TEST(Encode, VariationalWithZeroEtaMatchesDeterministic) {
    const auto det = init_model(small());
    auto vae = init_model(small(ModelMode::Variational));
    // share every deterministic tensor
    AutoencoderModel shared = vae;
    auto dst = shared.params.tensors();
    for (const auto& src : det.params.tensors()) {
        for (auto& d : dst) {
            if (d.name == src.name) std::copy(src.values.begin(), src.values.end(), d.values.begin());
        }
    }
    Rng rng(4);
    const auto s = fixtures::random_sequence(rng, 5, 3);
    EXPECT_EQ(reconstruct(det, s), reconstruct(shared, s));
}

TEST(Encode, DimensionMismatch) {
    const auto m = init_model(small());
    Sequence s;
    s.values = Eigen::MatrixXd::Zero(4, 2);
    EXPECT_THROW(encode(m, s), Error);
}

TEST(Decode, SingleRow) {
    const auto m = init_model(small());
    LatentCode c{Eigen::VectorXd::Zero(4), {}, {}};
    const auto out = decode(m, c, 1);
    EXPECT_EQ(out.rows(), 1);
    EXPECT_EQ(out.cols(), 3);
}

TEST(Decode, ZeroModelIsBiasOnly) {
    auto m = zero_model(small());
    m.params.output_bias << 0.1, 0.2, 0.3;
    LatentCode c{Eigen::VectorXd::Zero(4), {}, {}};
    const auto out = decode(m, c, 4);
    for (Eigen::Index r = 0; r < 4; ++r) EXPECT_EQ(out.row(r), m.params.output_bias.transpose());
}

TEST(ReconstructionError, Examples) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(3, 2);
    EXPECT_EQ(reconstruction_error(x, x), 0.0);
    EXPECT_EQ(reconstruction_error(Eigen::MatrixXd::Zero(3, 2), Eigen::MatrixXd::Ones(3, 2)), 1.0);
    Eigen::MatrixXd a(1, 2), b(1, 2);
    a << 0, 0;
    b << 1, 3;
    EXPECT_EQ(reconstruction_error(a, b), 5.0);
    EXPECT_THROW(reconstruction_error(a, Eigen::MatrixXd::Zero(2, 2)), Error);
}

TEST(ReconstructionError, MatchesOracleAndIsNonNegative) {
    Rng rng(5);
    for (int i = 0; i < 100; ++i) {
        Eigen::MatrixXd x(4, 3), y(4, 3);
        for (auto& v : x.reshaped()) v = uniform(rng, -2, 2);
        for (auto& v : y.reshaped()) v = uniform(rng, -2, 2);
        const double e = reconstruction_error(x, y);
        EXPECT_GE(e, 0.0);
        EXPECT_NEAR(e, oracle::mse(x, y), 1e-14);
    }
}

TEST(Score, IsPureFunctionOfParameters) {
    const auto m = init_model(small(ModelMode::Variational));
    Rng rng(6);
    const auto s = fixtures::random_sequence(rng, 5, 3);
    EXPECT_EQ(anomaly_score(m, s), anomaly_score(m, s));
}
