#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "flowae/autoencoder.hpp"
#include "flowae/detector.hpp"
#include "flowae/error.hpp"
#include "flowae/sequencer.hpp"

namespace flowae {

// Attack is the positive class.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    std::size_t total() const noexcept { return tp + fp + tn + fn; }

    void add(Label truth, Label predicted) {
        if (truth == Label::Attack) {
            predicted == Label::Attack ? ++tp : ++fn;
        } else {
            predicted == Label::Attack ? ++fp : ++tn;
        }
    }

    friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

// Ratios with a zero denominator are left empty rather than reported as 0.
struct Metrics {
    std::optional<double> benign_accuracy;   // percent
    std::optional<double> anomaly_accuracy;  // percent
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

namespace detail {
inline std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

inline Metrics compute_metrics(const ConfusionCounts& c) {
    Metrics m;
    if (auto ba = detail::ratio(c.tn, c.tn + c.fp)) m.benign_accuracy = 100.0 * *ba;
    if (auto aa = detail::ratio(c.tp, c.tp + c.fn)) m.anomaly_accuracy = 100.0 * *aa;
    m.precision = detail::ratio(c.tp, c.tp + c.fp);
    m.recall = detail::ratio(c.tp, c.tp + c.fn);
    if (m.precision && m.recall && (*m.precision + *m.recall) > 0.0) {
        m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
    }
    return m;
}

struct CategoryMetrics {
    ConfusionCounts counts;
    std::optional<double> anomaly_accuracy;  // percent
    std::optional<double> precision;
    std::optional<double> recall;
};

struct PrPoint {
    double percentile = 0.0;
    double threshold = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> benign_accuracy;
    std::optional<double> anomaly_accuracy;
};

struct EvalReport {
    ConfusionCounts counts;
    Metrics metrics;
    std::map<std::string, CategoryMetrics> per_category;
    std::vector<PrPoint> pr_curve;
    std::optional<double> latent_cohesion;
};

// A labelled score: the unit the evaluator aggregates over.
struct ScoredSequence {
    Label truth;
    std::optional<std::string> category;
    double score;
};

inline std::vector<ScoredSequence> score_labeled(const AutoencoderModel& model, std::span<const Sequence> sequences) {
    std::vector<ScoredSequence> out;
    out.reserve(sequences.size());
    for (const auto& seq : sequences) out.push_back({seq.label, seq.category, anomaly_score(model, seq)});
    return out;
}

inline ConfusionCounts confusion(std::span<const ScoredSequence> scored, const ThresholdModel& threshold) {
    ConfusionCounts c;
    for (const auto& s : scored) c.add(s.truth, verdict_for(s.score, threshold));
    return c;
}

// Per attack category: TP/FN from that category's attack sequences, FP/TN
// from the shared benign set.
inline std::map<std::string, CategoryMetrics> per_category_eval(std::span<const ScoredSequence> scored,
                                                                const ThresholdModel& threshold) {
    ConfusionCounts benign;
    std::map<std::string, ConfusionCounts> attacks;
    for (const auto& s : scored) {
        if (s.truth == Label::Benign) {
            benign.add(Label::Benign, verdict_for(s.score, threshold));
            continue;
        }
        if (!s.category) throw Error(ErrorKind::UnknownCategory, "attack sequence without category metadata");
        attacks[*s.category].add(Label::Attack, verdict_for(s.score, threshold));
    }
    std::map<std::string, CategoryMetrics> out;
    for (auto& [name, c] : attacks) {
        c.fp = benign.fp;
        c.tn = benign.tn;
        const Metrics m = compute_metrics(c);
        out.emplace(name, CategoryMetrics{c, m.anomaly_accuracy, m.precision, m.recall});
    }
    return out;
}

inline std::map<std::string, CategoryMetrics> per_category_eval(const AutoencoderModel& model, const ThresholdModel& threshold,
                                                                std::span<const Sequence> attack_sequences,
                                                                std::span<const Sequence> benign_sequences) {
    auto scored = score_labeled(model, benign_sequences);
    auto attacks = score_labeled(model, attack_sequences);
    scored.insert(scored.end(), attacks.begin(), attacks.end());
    return per_category_eval(scored, threshold);
}

// Re-thresholds the stored benign error sample at each percentile; no retraining.
inline std::vector<PrPoint> pr_across_percentiles(std::span<const double> benign_errors,
                                                  std::span<const ScoredSequence> labeled, std::span<const double> percentiles) {
    if (benign_errors.empty()) throw Error(ErrorKind::EmptyCalibrationSet, "no benign errors for the PR sweep");
    std::vector<PrPoint> curve;
    curve.reserve(percentiles.size());
    for (double q : percentiles) {
        const ThresholdModel threshold = threshold_from_errors(benign_errors, q);
        const Metrics m = compute_metrics(confusion(labeled, threshold));
        curve.push_back({q, threshold.threshold, m.precision, m.recall, m.benign_accuracy, m.anomaly_accuracy});
    }
    return curve;
}

inline std::vector<PrPoint> pr_across_percentiles(const AutoencoderModel& model, std::span<const double> benign_errors,
                                                  std::span<const Sequence> labeled_sequences,
                                                  std::span<const double> percentiles) {
    const auto scored = score_labeled(model, labeled_sequences);
    return pr_across_percentiles(benign_errors, scored, percentiles);
}

// Mean over latent dimensions of the (max - min) extent.
inline double latent_cohesion(std::span<const LatentCode> codes) {
    if (codes.size() < 2) throw Error(ErrorKind::InsufficientCodes, "latent cohesion needs at least 2 codes");
    const Eigen::Index dim = codes.front().z.size();
    if (dim == 0) throw Error(ErrorKind::InsufficientCodes, "latent codes are empty");
    Eigen::VectorXd lo = codes.front().z;
    Eigen::VectorXd hi = codes.front().z;
    for (const auto& code : codes) {
        if (code.z.size() != dim) throw Error(ErrorKind::DimensionMismatch, "latent codes differ in dimension");
        lo = lo.cwiseMin(code.z);
        hi = hi.cwiseMax(code.z);
    }
    return (hi - lo).mean();
}

inline std::vector<LatentCode> encode_all(const AutoencoderModel& model, std::span<const Sequence> sequences) {
    std::vector<LatentCode> codes;
    codes.reserve(sequences.size());
    for (const auto& seq : sequences) codes.push_back(encode(model, seq));
    return codes;
}

// Full report over a labelled evaluation set. benign_errors is the calibration
// sample used for the PR sweep; cohesion is measured on the benign sequences.
inline EvalReport evaluate(const AutoencoderModel& model, const ThresholdModel& threshold,
                           std::span<const Sequence> sequences, std::span<const double> benign_errors = {},
                           std::span<const double> percentiles = {}) {
    EvalReport report;
    const auto scored = score_labeled(model, sequences);
    report.counts = confusion(scored, threshold);
    report.metrics = compute_metrics(report.counts);
    const bool has_categories = std::all_of(scored.begin(), scored.end(), [](const ScoredSequence& s) {
        return s.truth == Label::Benign || s.category.has_value();
    });
    if (has_categories) report.per_category = per_category_eval(scored, threshold);
    if (!benign_errors.empty() && !percentiles.empty()) {
        report.pr_curve = pr_across_percentiles(benign_errors, scored, percentiles);
    }
    std::vector<LatentCode> codes;
    for (const auto& seq : sequences) {
        if (seq.is_benign()) codes.push_back(encode(model, seq));
    }
    if (codes.size() >= 2) report.latent_cohesion = latent_cohesion(codes);
    return report;
}

}  // namespace flowae
