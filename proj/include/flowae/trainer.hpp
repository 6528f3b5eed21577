#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "flowae/autoencoder.hpp"
#include "flowae/detector.hpp"
#include "flowae/error.hpp"
#include "flowae/evaluator.hpp"
#include "flowae/random.hpp"
#include "flowae/sequencer.hpp"

namespace flowae {

struct TrainConfig {
    double lambda_rec = 0.8;
    double lambda_tml = 0.9;
    double lambda_kl = 1.0;  // variational mode only
    double margin = 1.0;
    std::size_t epochs = 50;
    std::size_t batch_size = 64;
    double learning_rate = 1e-3;
    double clip_norm = 5.0;  // global gradient norm; <= 0 disables clipping
    std::uint64_t seed = 0;

    void validate() const {
        if (epochs < 1 || batch_size < 1) throw Error(ErrorKind::InvalidConfig, "epochs and batch_size must be >= 1");
        if (lambda_rec < 0.0 || lambda_tml < 0.0 || lambda_kl < 0.0) {
            throw Error(ErrorKind::InvalidConfig, "loss weights must be non-negative");
        }
        if (!(margin > 0.0)) throw Error(ErrorKind::InvalidConfig, "margin must be > 0");
        if (!(learning_rate > 0.0)) throw Error(ErrorKind::InvalidConfig, "learning rate must be > 0");
    }
};

struct FreezeSpec {
    std::set<ParamGroup> frozen;

    bool is_frozen(ParamGroup group) const { return frozen.count(group) != 0; }

    static FreezeSpec none() { return {}; }
    // Whole encoder, its input weights included.
    static FreezeSpec encoder() { return {{ParamGroup::Encoder, ParamGroup::InputLayer}}; }
    // Everything except the input layer and the output projection.
    static FreezeSpec all_but_io() { return {{ParamGroup::Encoder, ParamGroup::DecoderCore}}; }
};

struct LossBreakdown {
    double total = 0.0;
    double reconstruction = 0.0;
    double triplet = 0.0;
    double kl = 0.0;
};

struct TrainReport {
    std::vector<double> joint_loss;
    std::vector<double> reconstruction_loss;
    std::vector<double> triplet_loss;
    std::vector<double> kl_loss;  // all zero for deterministic models
    AutoencoderModel model;
};

inline double triplet_margin_loss(const Eigen::VectorXd& anchor, const Eigen::VectorXd& positive,
                                  const Eigen::VectorXd& negative, double margin) {
    if (anchor.size() != positive.size() || anchor.size() != negative.size()) {
        throw Error(ErrorKind::DimensionMismatch, "triplet codes differ in dimension");
    }
    return std::max((anchor - positive).norm() - (anchor - negative).norm() + margin, 0.0);
}

inline double triplet_margin_loss(const LatentCode& a, const LatentCode& p, const LatentCode& n, double margin) {
    return triplet_margin_loss(a.z, p.z, n.z, margin);
}

// Reparameterisation noise for one triplet (anchor, positive, negative).
using TripletNoise = std::array<Eigen::VectorXd, 3>;

inline std::vector<TripletNoise> draw_noise(const AutoencoderModel& model, std::size_t count, Rng& rng) {
    std::vector<TripletNoise> out(count);
    if (!model.variational()) return out;
    const auto Z = static_cast<Eigen::Index>(model.config.latent_dim);
    for (auto& triple : out) {
        for (auto& eta : triple) {
            eta.resize(Z);
            for (auto& v : eta) v = standard_normal(rng);
        }
    }
    return out;
}

namespace detail {

inline Eigen::VectorXd unit_or_zero(const Eigen::VectorXd& v) {
    const double norm = v.norm();
    if (norm == 0.0) return Eigen::VectorXd::Zero(v.size());
    return v / norm;
}

// KL(N(mean, exp(logvar)) || N(0, I)) in closed form.
inline double kl_divergence(const Eigen::VectorXd& mean, const Eigen::VectorXd& logvar) {
    return -0.5 * (1.0 + logvar.array() - mean.array().square() - logvar.array().exp()).sum();
}

// Joint loss over a batch of triplets; when grad is non-null the gradient of
// the returned total is accumulated into it.
inline LossBreakdown joint_loss_impl(std::span<const Triplet* const> batch, const AutoencoderModel& model,
                                     const TrainConfig& cfg, std::span<const TripletNoise> noise, ParameterSet* grad) {
    if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "joint loss of an empty batch");
    if (!noise.empty() && noise.size() != batch.size()) {
        throw Error(ErrorKind::DimensionMismatch, "noise count differs from batch size");
    }
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    static const Eigen::VectorXd none;
    LossBreakdown loss;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Triplet& triplet = *batch[i];
        const auto& eta = noise.empty() ? TripletNoise{} : noise[i];
        const EncoderTrace anchor = encode_traced(model, triplet.anchor.values, eta[0]);
        const EncoderTrace positive = encode_traced(model, triplet.positive.values, eta[1]);
        const EncoderTrace negative = encode_traced(model, triplet.negative.values, eta[2]);
        const DecoderTrace decoded = decode_traced(model, anchor.z, triplet.anchor.length());

        const double rec = reconstruction_error(triplet.anchor.values, decoded.output);
        const Eigen::VectorXd to_positive = anchor.z - positive.z;
        const Eigen::VectorXd to_negative = anchor.z - negative.z;
        const double hinge = to_positive.norm() - to_negative.norm() + cfg.margin;
        const double tml = std::max(hinge, 0.0);
        const double kl = model.variational() ? kl_divergence(anchor.mean, anchor.logvar) : 0.0;

        loss.reconstruction += rec * inv_batch;
        loss.triplet += tml * inv_batch;
        loss.kl += kl * inv_batch;

        if (!grad) continue;

        const double rec_scale = cfg.lambda_rec * inv_batch * 2.0 / static_cast<double>(triplet.anchor.values.size());
        const Eigen::MatrixXd d_output = rec_scale * (decoded.output - triplet.anchor.values);
        Eigen::VectorXd dz_anchor = decoder_backward(model, decoded, d_output, *grad);

        Eigen::VectorXd d_mean_kl;
        Eigen::VectorXd d_logvar_kl;
        if (model.variational() && cfg.lambda_kl != 0.0) {
            const double w = cfg.lambda_kl * inv_batch;
            d_mean_kl = w * anchor.mean;
            d_logvar_kl = (-0.5 * w) * (1.0 - anchor.logvar.array().exp()).matrix();
        }

        if (cfg.lambda_tml != 0.0 && hinge > 0.0) {
            const double w = cfg.lambda_tml * inv_batch;
            const Eigen::VectorXd u_pos = unit_or_zero(to_positive);
            const Eigen::VectorXd u_neg = unit_or_zero(to_negative);
            dz_anchor += w * (u_pos - u_neg);
            encoder_backward(model, positive, -w * u_pos, none, none, *grad);
            encoder_backward(model, negative, w * u_neg, none, none, *grad);
        }
        encoder_backward(model, anchor, dz_anchor, d_mean_kl, d_logvar_kl, *grad);
    }
    loss.total = cfg.lambda_tml * loss.triplet + cfg.lambda_rec * loss.reconstruction;
    if (model.variational()) loss.total += cfg.lambda_kl * loss.kl;
    return loss;
}

inline std::vector<const Triplet*> pointers(std::span<const Triplet> triplets) {
    std::vector<const Triplet*> out;
    out.reserve(triplets.size());
    for (const auto& t : triplets) out.push_back(&t);
    return out;
}

}  // namespace detail

// lambda_tml * mean triplet loss + lambda_rec * mean anchor MSE
// (+ lambda_kl * mean anchor KL in variational mode).
inline LossBreakdown joint_loss(std::span<const Triplet> batch, const AutoencoderModel& model, const TrainConfig& cfg,
                                std::span<const TripletNoise> noise = {}) {
    const auto ptrs = detail::pointers(batch);
    return detail::joint_loss_impl(ptrs, model, cfg, noise, nullptr);
}

inline LossBreakdown joint_loss_gradient(std::span<const Triplet> batch, const AutoencoderModel& model,
                                         const TrainConfig& cfg, ParameterSet& grad,
                                         std::span<const TripletNoise> noise = {}) {
    const auto ptrs = detail::pointers(batch);
    return detail::joint_loss_impl(ptrs, model, cfg, noise, &grad);
}

// Adaptive-moment optimizer over a ParameterSet; frozen groups are skipped.
class Adam {
public:
    Adam(const ParameterSet& params, double learning_rate, double beta1 = 0.9, double beta2 = 0.999, double epsilon = 1e-8)
        : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon) {
        for (const auto& view : params.tensors()) {
            first_.emplace_back(view.values.size(), 0.0);
            second_.emplace_back(view.values.size(), 0.0);
        }
    }

    void step(ParameterSet& params, const ParameterSet& grad, const FreezeSpec& freeze) {
        ++t_;
        const double correction1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
        const double correction2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
        auto views = params.tensors();
        const auto grads = grad.tensors();
        for (std::size_t k = 0; k < views.size(); ++k) {
            if (freeze.is_frozen(views[k].group)) continue;
            auto& m = first_[k];
            auto& v = second_[k];
            for (std::size_t i = 0; i < views[k].values.size(); ++i) {
                const double g = grads[k].values[i];
                m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
                v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
                const double m_hat = m[i] / correction1;
                const double v_hat = v[i] / correction2;
                views[k].values[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
            }
        }
    }

private:
    double lr_;
    double beta1_;
    double beta2_;
    double eps_;
    std::size_t t_ = 0;
    std::vector<std::vector<double>> first_;
    std::vector<std::vector<double>> second_;
};

// Scales trainable gradients so their global L2 norm is at most max_norm.
inline double clip_gradients(ParameterSet& grad, const FreezeSpec& freeze, double max_norm) {
    double sq = 0.0;
    auto views = grad.tensors();
    for (const auto& view : views) {
        if (freeze.is_frozen(view.group)) continue;
        for (double g : view.values) sq += g * g;
    }
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double scale = max_norm / norm;
        for (auto& view : views) {
            for (double& g : view.values) g *= scale;
        }
    }
    return norm;
}

inline TrainReport train(std::span<const Triplet> benign_triplets, AutoencoderModel model, const TrainConfig& cfg,
                         const FreezeSpec& freeze = FreezeSpec::none()) {
    cfg.validate();
    if (benign_triplets.empty()) throw Error(ErrorKind::EmptyTrainingSet, "no triplets to train on");
    for (const auto& t : benign_triplets) {
        if (!t.anchor.is_benign() || !t.positive.is_benign() || !t.negative.is_benign()) {
            throw Error(ErrorKind::InvalidConfig, "training triplets must be benign");
        }
    }

    Rng rng = make_rng(cfg.seed, "training");
    Adam optimizer(model.params, cfg.learning_rate);
    ParameterSet grad = model.params.zeros_like();
    std::vector<const Triplet*> order = detail::pointers(benign_triplets);

    TrainReport report;
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        shuffle(order, rng);
        LossBreakdown sums;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t stop = std::min(start + cfg.batch_size, order.size());
            const std::span<const Triplet* const> batch(order.data() + start, stop - start);
            const auto noise = draw_noise(model, batch.size(), rng);

            for (auto& view : grad.tensors()) std::fill(view.values.begin(), view.values.end(), 0.0);
            const LossBreakdown loss = detail::joint_loss_impl(batch, model, cfg, noise, &grad);
            if (!std::isfinite(loss.total)) {
                throw Error(ErrorKind::DivergedLoss, "non-finite loss at epoch " + std::to_string(epoch));
            }
            clip_gradients(grad, freeze, cfg.clip_norm);
            optimizer.step(model.params, grad, freeze);

            const double weight = static_cast<double>(batch.size());
            sums.total += loss.total * weight;
            sums.reconstruction += loss.reconstruction * weight;
            sums.triplet += loss.triplet * weight;
            sums.kl += loss.kl * weight;
        }
        const double count = static_cast<double>(order.size());
        report.joint_loss.push_back(sums.total / count);
        report.reconstruction_loss.push_back(sums.reconstruction / count);
        report.triplet_loss.push_back(sums.triplet / count);
        report.kl_loss.push_back(sums.kl / count);
    }
    report.model = std::move(model);
    return report;
}

struct SweepGrid {
    std::vector<double> lambda_rec;
    std::vector<double> lambda_tml;

    // 0.0, 0.1, ..., 1.0 on both axes (121 cells).
    static SweepGrid full() {
        SweepGrid grid;
        for (int i = 0; i <= 10; ++i) {
            grid.lambda_rec.push_back(i / 10.0);
            grid.lambda_tml.push_back(i / 10.0);
        }
        return grid;
    }
};

struct SweepCell {
    double lambda_rec = 0.0;
    double lambda_tml = 0.0;
    ThresholdModel threshold;
    EvalReport report;
    double criterion = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::size_t best = 0;
    bool selected_by_f1 = false;
};

// Selection: F1 on the validation set when it holds both classes, otherwise
// benign accuracy (on validation if given, else on the calibration set).
inline SweepResult sweep(std::span<const Triplet> benign_triplets, std::span<const Sequence> calibration_sequences,
                         std::span<const Sequence> validation_sequences, const AutoencoderModel& initial,
                         const TrainConfig& base, const SweepGrid& grid, double q = kDefaultPercentile) {
    for (double v : grid.lambda_rec) {
        if (v < 0.0 || v > 1.0) throw Error(ErrorKind::InvalidConfig, "lambda_rec grid values must lie in [0, 1]");
    }
    for (double v : grid.lambda_tml) {
        if (v < 0.0 || v > 1.0) throw Error(ErrorKind::InvalidConfig, "lambda_tml grid values must lie in [0, 1]");
    }
    const auto eval_set = validation_sequences.empty() ? calibration_sequences : validation_sequences;
    const bool has_attack = std::any_of(eval_set.begin(), eval_set.end(), [](const Sequence& s) { return !s.is_benign(); });
    const bool has_benign = std::any_of(eval_set.begin(), eval_set.end(), [](const Sequence& s) { return s.is_benign(); });

    SweepResult result;
    result.selected_by_f1 = !validation_sequences.empty() && has_attack && has_benign;
    for (double rec : grid.lambda_rec) {
        for (double tml : grid.lambda_tml) {
            TrainConfig cfg = base;
            cfg.lambda_rec = rec;
            cfg.lambda_tml = tml;
            auto trained = train(benign_triplets, initial, cfg);
            SweepCell cell{rec, tml, calibrate(trained.model, calibration_sequences, q), {}, 0.0};
            cell.report = evaluate(trained.model, cell.threshold, eval_set);
            const auto& m = cell.report.metrics;
            cell.criterion = result.selected_by_f1 ? m.f1.value_or(-1.0) : m.benign_accuracy.value_or(-1.0);
            result.cells.push_back(std::move(cell));
        }
    }
    for (std::size_t i = 1; i < result.cells.size(); ++i) {
        if (result.cells[i].criterion > result.cells[result.best].criterion) result.best = i;
    }
    return result;
}

}  // namespace flowae
