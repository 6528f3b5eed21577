#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <utility>
#include <vector>

#include "flowae/error.hpp"
#include "flowae/flow_ingest.hpp"
#include "flowae/random.hpp"

namespace flowae {

struct SmoteConfig {
    std::size_t k_neighbors = 5;
    std::size_t target_count = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

// Exact k nearest neighbours of records[query] (excluding itself), ties broken by index.
inline std::vector<std::size_t> nearest_neighbors(const std::vector<FlowRecord>& records, std::size_t query, std::size_t k) {
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(records.size() - 1);
    for (std::size_t j = 0; j < records.size(); ++j) {
        if (j != query) dist.emplace_back(squared_distance(records[query].features, records[j].features), j);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    std::vector<std::size_t> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(dist[i].second);
    return out;
}

}  // namespace detail

// SMOTE over benign records. Synthetic record s uses base s mod N (round
// robin), one of the base's k nearest neighbours picked uniformly, and a
// uniform interpolation weight u in [0, 1]: x + u * (x_nn - x). Originals come
// first, synthetic records are appended in generation order.
inline FlowTable smote_oversample(const FlowTable& benign_flows, const SmoteConfig& cfg) {
    const std::size_t count = benign_flows.size();
    if (cfg.target_count < count) {
        throw Error(ErrorKind::TargetBelowInput, "target " + std::to_string(cfg.target_count) + " below input count " +
                                                     std::to_string(count));
    }
    if (cfg.target_count == count) return benign_flows;
    if (cfg.k_neighbors < 1 || cfg.k_neighbors >= count) {
        throw Error(ErrorKind::TooFewRecords, "SMOTE needs more than k=" + std::to_string(cfg.k_neighbors) + " records, got " +
                                                  std::to_string(count));
    }
    for (const auto& record : benign_flows.records) {
        if (!record.is_benign()) throw Error(ErrorKind::InvalidConfig, "SMOTE input must be benign-only");
    }

    FlowTable out = benign_flows;
    out.records.reserve(cfg.target_count);
    Rng rng(cfg.seed);
    std::unordered_map<std::size_t, std::vector<std::size_t>> neighbor_cache;
    const auto& originals = benign_flows.records;
    for (std::size_t s = 0; s < cfg.target_count - count; ++s) {
        const std::size_t base = s % count;
        auto it = neighbor_cache.find(base);
        if (it == neighbor_cache.end()) {
            it = neighbor_cache.emplace(base, detail::nearest_neighbors(originals, base, cfg.k_neighbors)).first;
        }
        const std::size_t neighbor = it->second[uniform_index(rng, cfg.k_neighbors)];
        const double u = uniform(rng, 0.0, 1.0);

        FlowRecord synthetic;
        synthetic.features.resize(originals[base].features.size());
        for (std::size_t f = 0; f < synthetic.features.size(); ++f) {
            const double x = originals[base].features[f];
            synthetic.features[f] = x + u * (originals[neighbor].features[f] - x);
        }
        synthetic.label = Label::Benign;
        synthetic.original_index = count + s;
        out.records.push_back(std::move(synthetic));
    }
    return out;
}

}  // namespace flowae
