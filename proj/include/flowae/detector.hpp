#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "flowae/autoencoder.hpp"
#include "flowae/error.hpp"
#include "flowae/sequencer.hpp"

namespace flowae {

inline constexpr double kDefaultPercentile = 99.0;

struct ThresholdModel {
    double threshold = 0.0;
    double percentile = kDefaultPercentile;
    std::size_t calibration_count = 0;

    friend bool operator==(const ThresholdModel&, const ThresholdModel&) = default;
};

// Linear interpolation between closest ranks: rank = q/100 * (N - 1).
inline double percentile(std::vector<double> sample, double q) {
    if (sample.empty()) throw Error(ErrorKind::EmptyCalibrationSet, "percentile of an empty sample");
    if (!(q > 0.0 && q <= 100.0)) throw Error(ErrorKind::InvalidConfig, "percentile must lie in (0, 100]");
    std::sort(sample.begin(), sample.end());
    const double rank = q / 100.0 * static_cast<double>(sample.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(rank));
    const auto hi = std::min(lo + 1, sample.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return sample[lo] + frac * (sample[hi] - sample[lo]);
}

inline ThresholdModel threshold_from_errors(std::span<const double> errors, double q = kDefaultPercentile) {
    if (errors.empty()) throw Error(ErrorKind::EmptyCalibrationSet, "no benign errors to calibrate on");
    return ThresholdModel{percentile(std::vector<double>(errors.begin(), errors.end()), q), q, errors.size()};
}

inline std::vector<double> score_sequences(const AutoencoderModel& model, std::span<const Sequence> sequences) {
    std::vector<double> scores;
    scores.reserve(sequences.size());
    for (const auto& seq : sequences) scores.push_back(anomaly_score(model, seq));
    return scores;
}

// Threshold from unweighted reconstruction errors of the benign training sequences.
inline ThresholdModel calibrate(const AutoencoderModel& model, std::span<const Sequence> benign_train_sequences,
                                double q = kDefaultPercentile) {
    if (benign_train_sequences.empty()) throw Error(ErrorKind::EmptyCalibrationSet, "no benign sequences to calibrate on");
    const auto errors = score_sequences(model, benign_train_sequences);
    return threshold_from_errors(errors, q);
}

struct Verdict {
    Label label;
    double score;
};

// A score equal to the threshold is benign.
inline Label verdict_for(double score, const ThresholdModel& threshold) {
    return score > threshold.threshold ? Label::Attack : Label::Benign;
}

inline Verdict classify(const AutoencoderModel& model, const ThresholdModel& threshold, const Sequence& seq) {
    const double score = anomaly_score(model, seq);
    return Verdict{verdict_for(score, threshold), score};
}

}  // namespace flowae
