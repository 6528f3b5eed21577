#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <ostream>
#include <string>
#include <vector>

#include "flowae/csv.hpp"
#include "flowae/error.hpp"
#include "flowae/flow_ingest.hpp"
#include "flowae/random.hpp"

namespace flowae {

// Desk-scale labelled corpus: each benign feature is a sinusoid with its own
// period and phase plus Gaussian noise; attacks are contiguous bursts in which
// every feature is mean-shifted by shift_sigma benign standard deviations.
struct SyntheticSpec {
    std::size_t flows = 5000;
    std::size_t features = 8;
    double amplitude = 0.4;
    double noise_sigma = 0.05;
    double attack_fraction = 0.0;
    double shift_sigma = 5.0;
    std::vector<std::string> categories = {"bruteforce", "dos", "recon"};
    std::size_t burst_min = 50;
    std::size_t burst_max = 150;
    std::uint64_t seed = 0;

    void validate() const {
        if (flows < 1 || features < 1) throw Error(ErrorKind::InvalidConfig, "synthetic corpus needs flows and features");
        if (!(attack_fraction >= 0.0 && attack_fraction <= 1.0)) {
            throw Error(ErrorKind::InvalidConfig, "attack fraction must lie in [0, 1]");
        }
        if (attack_fraction > 0.0 && categories.empty()) throw Error(ErrorKind::InvalidConfig, "attacks need a category");
        if (burst_min < 1 || burst_max < burst_min) throw Error(ErrorKind::InvalidConfig, "invalid burst length range");
    }

    double benign_std() const { return std::sqrt(amplitude * amplitude / 2.0 + noise_sigma * noise_sigma); }
};

inline constexpr const char* kSyntheticLabelColumn = "label";
inline constexpr const char* kSyntheticCategoryColumn = "category";
inline constexpr const char* kSyntheticBenignLabel = "BENIGN";
inline constexpr const char* kSyntheticAttackLabel = "ATTACK";

inline std::vector<std::string> synthetic_feature_names(std::size_t features) {
    std::vector<std::string> names;
    for (std::size_t j = 0; j < features; ++j) names.push_back("f" + std::to_string(j));
    return names;
}

inline FlowSchema synthetic_schema(std::size_t features) {
    FlowSchema schema;
    schema.feature_columns = synthetic_feature_names(features);
    schema.label_column = kSyntheticLabelColumn;
    schema.attack_category_column = kSyntheticCategoryColumn;
    schema.benign_label_value = kSyntheticBenignLabel;
    return schema;
}

inline FlowTable generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();
    Rng rng = make_rng(spec.seed, "synthetic");

    std::vector<double> period(spec.features);
    std::vector<double> phase(spec.features);
    for (std::size_t j = 0; j < spec.features; ++j) {
        period[j] = 16.0 + 9.0 * static_cast<double>(j);
        phase[j] = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    }

    // burst layout
    const auto attack_total =
        static_cast<std::size_t>(std::llround(spec.attack_fraction * static_cast<double>(spec.flows)));
    std::vector<std::size_t> bursts;
    for (std::size_t placed = 0; placed < attack_total;) {
        std::size_t len = spec.burst_min + uniform_index(rng, spec.burst_max - spec.burst_min + 1);
        len = std::min(len, attack_total - placed);
        bursts.push_back(len);
        placed += len;
    }
    const std::size_t benign_total = spec.flows - attack_total;
    std::vector<std::size_t> cuts;
    for (std::size_t b = 0; b < bursts.size(); ++b) cuts.push_back(uniform_index(rng, benign_total + 1));
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::size_t> gaps;
    std::size_t prev = 0;
    for (auto c : cuts) {
        gaps.push_back(c - prev);
        prev = c;
    }
    gaps.push_back(benign_total - prev);

    std::vector<int> category_of(spec.flows, -1);
    std::size_t cursor = 0;
    for (std::size_t b = 0; b < bursts.size(); ++b) {
        cursor += gaps[b];
        for (std::size_t i = 0; i < bursts[b]; ++i) category_of[cursor + i] = static_cast<int>(b % spec.categories.size());
        cursor += bursts[b];
    }

    const double sigma = spec.benign_std();
    FlowTable table;
    table.feature_names = synthetic_feature_names(spec.features);
    table.records.reserve(spec.flows);
    for (std::size_t t = 0; t < spec.flows; ++t) {
        FlowRecord record;
        record.original_index = t;
        record.features.resize(spec.features);
        for (std::size_t j = 0; j < spec.features; ++j) {
            const double angle = 2.0 * std::numbers::pi * static_cast<double>(t) / period[j] + phase[j];
            record.features[j] = 0.5 + spec.amplitude * std::sin(angle) + spec.noise_sigma * standard_normal(rng);
        }
        if (const int c = category_of[t]; c >= 0) {
            record.label = Label::Attack;
            record.category = spec.categories[static_cast<std::size_t>(c)];
            // each category shifts its own sign pattern across features
            for (std::size_t j = 0; j < spec.features; ++j) {
                const double sign = ((j + static_cast<std::size_t>(c)) % 3 == 0) ? -1.0 : 1.0;
                record.features[j] += sign * spec.shift_sigma * sigma;
            }
        }
        table.records.push_back(std::move(record));
    }
    return table;
}

// Columns: flow_id, f0..f{n-1}, label, category.
inline void write_flows_csv(std::ostream& out, const FlowTable& table) {
    csv::Row row{"flow_id"};
    row.insert(row.end(), table.feature_names.begin(), table.feature_names.end());
    row.emplace_back(kSyntheticLabelColumn);
    row.emplace_back(kSyntheticCategoryColumn);
    csv::write_row(out, row);
    for (const auto& record : table.records) {
        row.clear();
        row.push_back(std::to_string(record.original_index));
        for (double v : record.features) row.push_back(csv::format_number(v));
        row.emplace_back(record.is_benign() ? kSyntheticBenignLabel : kSyntheticAttackLabel);
        row.push_back(record.category.value_or(""));
        csv::write_row(out, row);
    }
}

}  // namespace flowae
