#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowae/error.hpp"
#include "flowae/flow_ingest.hpp"
#include "flowae/lstm.hpp"
#include "flowae/random.hpp"
#include "flowae/sequencer.hpp"

namespace flowae {

enum class ModelMode { Deterministic, Variational };

inline std::string_view to_string(ModelMode mode) {
    return mode == ModelMode::Deterministic ? "deterministic" : "variational";
}

struct ModelConfig {
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 64;
    std::size_t latent_dim = 32;
    std::size_t num_layers = 1;
    ModelMode mode = ModelMode::Deterministic;
    std::uint64_t seed = 0;

    void validate() const {
        if (input_dim < 1 || hidden_dim < 1 || latent_dim < 1 || num_layers < 1) {
            throw Error(ErrorKind::InvalidConfig, "model dimensions must all be >= 1");
        }
    }

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Parameter groups used by transfer-learning freezes. They partition the
// parameters: the first encoder layer's input weights are the input layer,
// the final linear projection is the output layer.
enum class ParamGroup { Encoder, DecoderCore, InputLayer, OutputLayer };

inline std::string_view to_string(ParamGroup group) {
    switch (group) {
        case ParamGroup::Encoder: return "encoder";
        case ParamGroup::DecoderCore: return "decoder_core";
        case ParamGroup::InputLayer: return "input_layer";
        case ParamGroup::OutputLayer: return "output_layer";
    }
    return "unknown";
}

template <class T>
struct BasicTensorView {
    std::string name;
    ParamGroup group;
    Eigen::Index rows;
    Eigen::Index cols;
    Eigen::Index fan_in;
    std::span<T> values;  // Eigen storage order (column-major)
};

using TensorView = BasicTensorView<double>;
using ConstTensorView = BasicTensorView<const double>;

struct ParameterSet {
    std::vector<LstmLayer> encoder;
    Eigen::MatrixXd latent_weight;  // latent x H; doubles as the mean head in variational mode
    Eigen::VectorXd latent_bias;
    Eigen::MatrixXd logvar_weight;  // latent x H in variational mode, empty otherwise
    Eigen::VectorXd logvar_bias;
    std::vector<Eigen::MatrixXd> decoder_init_weight;  // per decoder layer, H x latent
    std::vector<Eigen::VectorXd> decoder_init_bias;
    std::vector<LstmLayer> decoder;  // layer 0 has no input weights (zero step input)
    Eigen::MatrixXd output_weight;   // n x H
    Eigen::VectorXd output_bias;

    // Zero-filled parameters shaped for cfg.
    static ParameterSet zeros(const ModelConfig& cfg) {
        const auto n = static_cast<Eigen::Index>(cfg.input_dim);
        const auto H = static_cast<Eigen::Index>(cfg.hidden_dim);
        const auto Z = static_cast<Eigen::Index>(cfg.latent_dim);
        const bool variational = cfg.mode == ModelMode::Variational;
        ParameterSet p;
        for (std::size_t l = 0; l < cfg.num_layers; ++l) {
            p.encoder.emplace_back(l == 0 ? n : H, H);
            p.decoder.emplace_back(l == 0 ? 0 : H, H);
            p.decoder_init_weight.push_back(Eigen::MatrixXd::Zero(H, Z));
            p.decoder_init_bias.push_back(Eigen::VectorXd::Zero(H));
        }
        p.latent_weight = Eigen::MatrixXd::Zero(Z, H);
        p.latent_bias = Eigen::VectorXd::Zero(Z);
        p.logvar_weight = Eigen::MatrixXd::Zero(variational ? Z : 0, variational ? H : 0);
        p.logvar_bias = Eigen::VectorXd::Zero(variational ? Z : 0);
        p.output_weight = Eigen::MatrixXd::Zero(n, H);
        p.output_bias = Eigen::VectorXd::Zero(n);
        return p;
    }

    std::vector<TensorView> tensors() { return collect<double>(*this); }
    std::vector<ConstTensorView> tensors() const { return collect<const double>(*this); }

    ParameterSet zeros_like() const {
        ParameterSet out = *this;
        for (auto& view : out.tensors()) std::fill(view.values.begin(), view.values.end(), 0.0);
        return out;
    }

private:
    template <class T, class Self>
    static std::vector<BasicTensorView<T>> collect(Self& self) {
        std::vector<BasicTensorView<T>> out;
        auto add = [&out](std::string name, ParamGroup group, auto& tensor, Eigen::Index fan_in) {
            out.push_back(BasicTensorView<T>{std::move(name), group, tensor.rows(), tensor.cols(), fan_in,
                                             std::span<T>(tensor.data(), static_cast<std::size_t>(tensor.size()))});
        };
        for (std::size_t l = 0; l < self.encoder.size(); ++l) {
            auto& layer = self.encoder[l];
            const std::string prefix = "encoder." + std::to_string(l) + ".";
            const Eigen::Index H = layer.w_hidden.cols();
            add(prefix + "w_input", l == 0 ? ParamGroup::InputLayer : ParamGroup::Encoder, layer.w_input, H);
            add(prefix + "w_hidden", ParamGroup::Encoder, layer.w_hidden, H);
            add(prefix + "bias", ParamGroup::Encoder, layer.bias, H);
        }
        add("latent.weight", ParamGroup::Encoder, self.latent_weight, self.latent_weight.cols());
        add("latent.bias", ParamGroup::Encoder, self.latent_bias, self.latent_weight.cols());
        add("logvar.weight", ParamGroup::Encoder, self.logvar_weight, self.logvar_weight.cols());
        add("logvar.bias", ParamGroup::Encoder, self.logvar_bias, self.logvar_weight.cols());
        for (std::size_t l = 0; l < self.decoder.size(); ++l) {
            const std::string init = "decoder_init." + std::to_string(l) + ".";
            const Eigen::Index Z = self.decoder_init_weight[l].cols();
            add(init + "weight", ParamGroup::DecoderCore, self.decoder_init_weight[l], Z);
            add(init + "bias", ParamGroup::DecoderCore, self.decoder_init_bias[l], Z);
            auto& layer = self.decoder[l];
            const std::string prefix = "decoder." + std::to_string(l) + ".";
            const Eigen::Index H = layer.w_hidden.cols();
            add(prefix + "w_input", ParamGroup::DecoderCore, layer.w_input, H);
            add(prefix + "w_hidden", ParamGroup::DecoderCore, layer.w_hidden, H);
            add(prefix + "bias", ParamGroup::DecoderCore, layer.bias, H);
        }
        add("output.weight", ParamGroup::OutputLayer, self.output_weight, self.output_weight.cols());
        add("output.bias", ParamGroup::OutputLayer, self.output_bias, self.output_weight.cols());
        return out;
    }
};

struct AutoencoderModel {
    ModelConfig config;
    ParameterSet params;
    NormalizationStats normalization;

    bool variational() const noexcept { return config.mode == ModelMode::Variational; }
};

struct LatentCode {
    Eigen::VectorXd z;
    std::optional<Eigen::VectorXd> mean;    // variational mode only
    std::optional<Eigen::VectorXd> logvar;  // variational mode only, clamped
};

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) for every tensor, drawn in tensor order
// from the "init" sub-stream of cfg.seed.
inline AutoencoderModel init_model(const ModelConfig& cfg) {
    cfg.validate();
    AutoencoderModel model{cfg, ParameterSet::zeros(cfg), {}};
    Rng rng = make_rng(cfg.seed, "init");
    for (auto& view : model.params.tensors()) {
        if (view.values.empty()) continue;
        const double bound = 1.0 / std::sqrt(static_cast<double>(view.fan_in));
        for (double& v : view.values) v = uniform(rng, -bound, bound);
    }
    return model;
}

struct EncoderTrace {
    std::vector<LstmTrace> layers;
    Eigen::VectorXd final_hidden;
    Eigen::VectorXd mean;
    Eigen::VectorXd logvar_raw;
    Eigen::VectorXd logvar;
    Eigen::VectorXd eta;
    Eigen::VectorXd z;
};

struct DecoderTrace {
    Eigen::VectorXd z;
    std::vector<Eigen::VectorXd> initial_hidden;  // post-tanh
    std::vector<LstmTrace> layers;
    Eigen::MatrixXd output;  // L x n
};

// eta is the reparameterisation noise for variational mode; an empty vector
// means eta = 0 (z equals the mean).
inline EncoderTrace encode_traced(const AutoencoderModel& model, const Eigen::MatrixXd& values,
                                  const Eigen::VectorXd& eta = {}) {
    const auto n = static_cast<Eigen::Index>(model.config.input_dim);
    const auto H = static_cast<Eigen::Index>(model.config.hidden_dim);
    if (values.cols() != n) {
        throw Error(ErrorKind::DimensionMismatch, "sequence has " + std::to_string(values.cols()) + " features, model expects " +
                                                      std::to_string(n));
    }
    if (values.rows() < 1) throw Error(ErrorKind::DimensionMismatch, "empty sequence");
    EncoderTrace trace;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(H);
    const Eigen::MatrixXd* input = &values;
    trace.layers.reserve(model.params.encoder.size());
    for (const auto& layer : model.params.encoder) {
        trace.layers.push_back(lstm_forward(layer, *input, zero, zero));
        input = &trace.layers.back().hiddens;
    }
    trace.final_hidden = trace.layers.back().hiddens.row(values.rows() - 1).transpose();
    trace.mean = model.params.latent_weight * trace.final_hidden + model.params.latent_bias;
    if (model.variational()) {
        const auto Z = trace.mean.size();
        trace.logvar_raw = model.params.logvar_weight * trace.final_hidden + model.params.logvar_bias;
        trace.logvar = trace.logvar_raw.cwiseMax(kLogVarMin).cwiseMin(kLogVarMax);
        if (eta.size() == 0) {
            trace.eta = Eigen::VectorXd::Zero(Z);
        } else {
            trace.eta = eta;
        }
        if (trace.eta.size() != Z) throw Error(ErrorKind::DimensionMismatch, "noise vector length differs from latent_dim");
        trace.z = trace.mean + (0.5 * trace.logvar.array()).exp().matrix().cwiseProduct(trace.eta);
    } else {
        trace.z = trace.mean;
    }
    return trace;
}

inline DecoderTrace decode_traced(const AutoencoderModel& model, const Eigen::VectorXd& z, Eigen::Index length) {
    const auto H = static_cast<Eigen::Index>(model.config.hidden_dim);
    if (z.size() != static_cast<Eigen::Index>(model.config.latent_dim)) {
        throw Error(ErrorKind::DimensionMismatch, "latent code has " + std::to_string(z.size()) + " entries, model expects " +
                                                      std::to_string(model.config.latent_dim));
    }
    if (length < 1) throw Error(ErrorKind::DimensionMismatch, "decode length must be >= 1");
    DecoderTrace trace;
    trace.z = z;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(H);
    const Eigen::MatrixXd step_inputs(length, 0);
    const Eigen::MatrixXd* input = &step_inputs;
    for (std::size_t l = 0; l < model.params.decoder.size(); ++l) {
        Eigen::VectorXd h0 = (model.params.decoder_init_weight[l] * z + model.params.decoder_init_bias[l]).array().tanh().matrix();
        trace.layers.push_back(lstm_forward(model.params.decoder[l], *input, h0, zero));
        trace.initial_hidden.push_back(std::move(h0));
        input = &trace.layers.back().hiddens;
    }
    trace.output = (*input) * model.params.output_weight.transpose();
    trace.output.rowwise() += model.params.output_bias.transpose();
    return trace;
}

inline LatentCode encode(const AutoencoderModel& model, const Sequence& seq, const Eigen::VectorXd& eta = {}) {
    auto trace = encode_traced(model, seq.values, eta);
    LatentCode code{std::move(trace.z), std::nullopt, std::nullopt};
    if (model.variational()) {
        code.mean = std::move(trace.mean);
        code.logvar = std::move(trace.logvar);
    }
    return code;
}

// Draws eta from rng (variational mode); deterministic models ignore rng.
inline LatentCode encode(const AutoencoderModel& model, const Sequence& seq, Rng& rng) {
    if (!model.variational()) return encode(model, seq);
    Eigen::VectorXd eta(static_cast<Eigen::Index>(model.config.latent_dim));
    for (auto& v : eta) v = standard_normal(rng);
    return encode(model, seq, eta);
}

inline Eigen::MatrixXd decode(const AutoencoderModel& model, const LatentCode& code, Eigen::Index length) {
    return decode_traced(model, code.z, length).output;
}

inline double reconstruction_error(const Eigen::MatrixXd& x, const Eigen::MatrixXd& reconstruction) {
    if (x.rows() != reconstruction.rows() || x.cols() != reconstruction.cols()) {
        throw Error(ErrorKind::DimensionMismatch, "reconstruction shape differs from input");
    }
    if (x.size() == 0) return 0.0;
    return (x - reconstruction).squaredNorm() / static_cast<double>(x.size());
}

inline double reconstruction_error(const Sequence& x, const Eigen::MatrixXd& reconstruction) {
    return reconstruction_error(x.values, reconstruction);
}

// Reconstruction with eta = 0, so scoring is a pure function of the parameters.
inline Eigen::MatrixXd reconstruct(const AutoencoderModel& model, const Sequence& seq) {
    return decode(model, encode(model, seq), seq.length());
}

inline double anomaly_score(const AutoencoderModel& model, const Sequence& seq) {
    return reconstruction_error(seq, reconstruct(model, seq));
}

// Backward through the decoder for dLoss/dOutput; accumulates into grad and
// returns dLoss/dz.
inline Eigen::VectorXd decoder_backward(const AutoencoderModel& model, const DecoderTrace& trace,
                                        const Eigen::MatrixXd& d_output, ParameterSet& grad) {
    const auto& params = model.params;
    const LstmTrace& top = trace.layers.back();
    grad.output_weight.noalias() += d_output.transpose() * top.hiddens;
    grad.output_bias += d_output.colwise().sum().transpose();
    Eigen::MatrixXd d_hiddens = d_output * params.output_weight;

    Eigen::VectorXd dz = Eigen::VectorXd::Zero(trace.z.size());
    for (std::size_t l = params.decoder.size(); l-- > 0;) {
        auto back = lstm_backward(params.decoder[l], trace.layers[l], d_hiddens, grad.decoder[l]);
        const Eigen::VectorXd& h0 = trace.initial_hidden[l];
        const Eigen::VectorXd d_pre = back.h0.cwiseProduct((1.0 - h0.array().square()).matrix());
        grad.decoder_init_weight[l].noalias() += d_pre * trace.z.transpose();
        grad.decoder_init_bias[l] += d_pre;
        dz.noalias() += params.decoder_init_weight[l].transpose() * d_pre;
        d_hiddens = std::move(back.inputs);
    }
    return dz;
}

// Backward through the encoder. d_z is the gradient w.r.t. the sampled code;
// d_mean_extra / d_logvar_extra carry direct terms (e.g. KL) and may be empty.
inline void encoder_backward(const AutoencoderModel& model, const EncoderTrace& trace, const Eigen::VectorXd& d_z,
                             const Eigen::VectorXd& d_mean_extra, const Eigen::VectorXd& d_logvar_extra, ParameterSet& grad) {
    const auto& params = model.params;
    Eigen::VectorXd d_mean = d_z;
    if (d_mean_extra.size()) d_mean += d_mean_extra;
    grad.latent_weight.noalias() += d_mean * trace.final_hidden.transpose();
    grad.latent_bias += d_mean;
    Eigen::VectorXd d_hidden = params.latent_weight.transpose() * d_mean;

    if (model.variational()) {
        Eigen::VectorXd d_logvar =
            d_z.cwiseProduct(trace.eta).cwiseProduct((0.5 * (0.5 * trace.logvar.array()).exp()).matrix());
        if (d_logvar_extra.size()) d_logvar += d_logvar_extra;
        for (Eigen::Index i = 0; i < d_logvar.size(); ++i) {
            if (trace.logvar_raw(i) < kLogVarMin || trace.logvar_raw(i) > kLogVarMax) d_logvar(i) = 0.0;
        }
        grad.logvar_weight.noalias() += d_logvar * trace.final_hidden.transpose();
        grad.logvar_bias += d_logvar;
        d_hidden.noalias() += params.logvar_weight.transpose() * d_logvar;
    }

    const LstmTrace& top = trace.layers.back();
    Eigen::MatrixXd d_hiddens = Eigen::MatrixXd::Zero(top.steps(), top.hiddens.cols());
    d_hiddens.row(top.steps() - 1) = d_hidden.transpose();
    for (std::size_t l = params.encoder.size(); l-- > 0;) {
        auto back = lstm_backward(params.encoder[l], trace.layers[l], d_hiddens, grad.encoder[l]);
        d_hiddens = std::move(back.inputs);
    }
}

}  // namespace flowae
