#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowae/error.hpp"
#include "flowae/flow_ingest.hpp"
#include "flowae/random.hpp"

namespace flowae {

// A window of consecutive flows; values is (length x features).
struct Sequence {
    Eigen::MatrixXd values;
    Label label = Label::Benign;
    std::optional<std::string> category;
    std::size_t start_index = 0;

    Eigen::Index length() const noexcept { return values.rows(); }
    Eigen::Index dimension() const noexcept { return values.cols(); }
    bool is_benign() const noexcept { return label == Label::Benign; }
};

struct Triplet {
    Sequence anchor;
    Sequence positive;
    Sequence negative;
};

struct TripletConfig {
    double noise_scale = 0.01;
    std::size_t sequence_length = 25;
    std::size_t stride = 25;
    std::uint64_t seed = 0;
};

// Windows start at 0, stride, 2*stride, ...; a trailing partial window is
// dropped. A window is an attack iff strictly more than half its flows are.
inline std::vector<Sequence> build_sequences(const FlowTable& flows, std::size_t length, std::size_t stride) {
    if (length == 0 || stride == 0) throw Error(ErrorKind::InvalidConfig, "sequence length and stride must be >= 1");
    if (length > flows.size()) {
        throw Error(ErrorKind::SequenceLongerThanData, "sequence length " + std::to_string(length) + " exceeds " +
                                                           std::to_string(flows.size()) + " flows");
    }
    const auto n = static_cast<Eigen::Index>(flows.dimension());
    std::vector<Sequence> out;
    out.reserve((flows.size() - length) / stride + 1);
    for (std::size_t start = 0; start + length <= flows.size(); start += stride) {
        Sequence seq;
        seq.values.resize(static_cast<Eigen::Index>(length), n);
        seq.start_index = start;
        std::size_t attacks = 0;
        std::map<std::string, std::size_t> category_counts;
        for (std::size_t t = 0; t < length; ++t) {
            const auto& record = flows.records[start + t];
            if (static_cast<Eigen::Index>(record.features.size()) != n) {
                throw Error(ErrorKind::DimensionMismatch, "record width differs from table dimension");
            }
            for (Eigen::Index f = 0; f < n; ++f) seq.values(static_cast<Eigen::Index>(t), f) = record.features[static_cast<std::size_t>(f)];
            if (!record.is_benign()) {
                ++attacks;
                if (record.category) ++category_counts[*record.category];
            }
        }
        if (2 * attacks > length) {
            seq.label = Label::Attack;
            // std::map iterates lexicographically, so the first maximum wins ties
            std::size_t best = 0;
            for (const auto& [name, count] : category_counts) {
                if (count > best) {
                    best = count;
                    seq.category = name;
                }
            }
        }
        out.push_back(std::move(seq));
    }
    return out;
}

// One triplet per anchor. Each anchor draws from its own stream derived from
// (seed, anchor index): uniform noise in [-eps, eps] clamped to [0, 1] for the
// positive, and a uniformly chosen benign sequence with another start index
// for the negative.
inline std::vector<Triplet> make_triplets(const std::vector<Sequence>& benign_sequences, const TripletConfig& cfg) {
    if (benign_sequences.size() < 2) throw Error(ErrorKind::NeedAtLeastTwoSequences, "triplets need two benign sequences");
    if (cfg.noise_scale < 0.0) throw Error(ErrorKind::InvalidConfig, "noise scale must be non-negative");

    std::vector<Triplet> out;
    out.reserve(benign_sequences.size());
    for (std::size_t i = 0; i < benign_sequences.size(); ++i) {
        const Sequence& anchor = benign_sequences[i];
        Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));

        Sequence positive = anchor;
        if (cfg.noise_scale > 0.0) {
            for (Eigen::Index c = 0; c < positive.values.cols(); ++c) {
                for (Eigen::Index r = 0; r < positive.values.rows(); ++r) {
                    const double noisy = positive.values(r, c) + uniform(rng, -cfg.noise_scale, cfg.noise_scale);
                    positive.values(r, c) = std::clamp(noisy, 0.0, 1.0);
                }
            }
        }

        std::vector<std::size_t> candidates;
        candidates.reserve(benign_sequences.size() - 1);
        for (std::size_t j = 0; j < benign_sequences.size(); ++j) {
            if (benign_sequences[j].start_index != anchor.start_index) candidates.push_back(j);
        }
        if (candidates.empty()) {
            throw Error(ErrorKind::NeedAtLeastTwoSequences, "no sequence with a distinct start index");
        }
        const Sequence& negative = benign_sequences[candidates[uniform_index(rng, candidates.size())]];
        out.push_back(Triplet{anchor, std::move(positive), negative});
    }
    return out;
}

}  // namespace flowae
