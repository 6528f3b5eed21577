#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "flowae/csv.hpp"
#include "flowae/error.hpp"
#include "flowae/random.hpp"

namespace flowae {

enum class Label { Benign, Attack };

inline std::string_view to_string(Label label) {
    return label == Label::Benign ? "benign" : "attack";
}

struct FlowSchema {
    std::vector<std::string> feature_columns;
    std::string label_column = "label";
    std::optional<std::string> attack_category_column;
    std::string benign_label_value = "BENIGN";
    char delimiter = ',';

    void validate() const {
        if (feature_columns.empty()) throw Error(ErrorKind::InvalidConfig, "schema has no feature columns");
        std::unordered_set<std::string> seen;
        for (const auto& name : feature_columns) {
            if (!seen.insert(name).second) throw Error(ErrorKind::InvalidConfig, "duplicate feature column '" + name + "'");
        }
        if (seen.count(label_column)) throw Error(ErrorKind::InvalidConfig, "label column '" + label_column + "' is also a feature");
        if (attack_category_column && seen.count(*attack_category_column)) {
            throw Error(ErrorKind::InvalidConfig, "category column '" + *attack_category_column + "' is also a feature");
        }
    }

    std::size_t dimension() const noexcept { return feature_columns.size(); }
};

struct FlowRecord {
    std::vector<double> features;
    Label label = Label::Benign;
    std::optional<std::string> category;
    std::size_t original_index = 0;

    bool is_benign() const noexcept { return label == Label::Benign; }
};

struct FlowTable {
    std::vector<std::string> feature_names;
    std::vector<FlowRecord> records;

    std::size_t dimension() const noexcept { return feature_names.size(); }
    std::size_t size() const noexcept { return records.size(); }
    bool empty() const noexcept { return records.empty(); }

    std::size_t benign_count() const {
        return static_cast<std::size_t>(std::count_if(records.begin(), records.end(),
                                                      [](const FlowRecord& r) { return r.is_benign(); }));
    }
};

struct NormalizationStats {
    std::vector<double> min;
    std::vector<double> max;

    std::size_t dimension() const noexcept { return min.size(); }

    double scale(std::size_t feature, double value) const {
        const double span = max[feature] - min[feature];
        if (!(span > 0.0)) return 0.0;
        return std::clamp((value - min[feature]) / span, 0.0, 1.0);
    }

    double unscale(std::size_t feature, double value) const {
        return value * (max[feature] - min[feature]) + min[feature];
    }

    friend bool operator==(const NormalizationStats&, const NormalizationStats&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

inline std::optional<double> parse_double(std::string_view text) {
    text = trim(text);
    if (text.empty()) return std::nullopt;
    if (text.front() == '+') text.remove_prefix(1);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size() || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace detail

inline FlowTable load_flows(std::istream& in, const FlowSchema& schema) {
    schema.validate();
    csv::Reader reader(in, schema.delimiter);
    csv::Row header;
    if (!reader.next(header) || (header.size() == 1 && detail::trim(header[0]).empty())) {
        throw Error(ErrorKind::EmptyFile, "no header row");
    }

    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) position.emplace(std::string(detail::trim(header[i])), i);
    auto column = [&](const std::string& name) {
        auto it = position.find(name);
        if (it == position.end()) throw Error(ErrorKind::MissingColumn, "column '" + name + "' not in header");
        return it->second;
    };

    std::vector<std::size_t> feature_pos;
    feature_pos.reserve(schema.feature_columns.size());
    for (const auto& name : schema.feature_columns) feature_pos.push_back(column(name));
    const std::size_t label_pos = column(schema.label_column);
    std::optional<std::size_t> category_pos;
    if (schema.attack_category_column) category_pos = column(*schema.attack_category_column);

    FlowTable table;
    table.feature_names = schema.feature_columns;
    csv::Row row;
    std::size_t index = 0;
    while (reader.next(row)) {
        if (row.size() == 1 && detail::trim(row[0]).empty()) continue;  // blank line
        if (row.size() != header.size()) {
            throw Error(ErrorKind::Io,
                        "row " + std::to_string(index) + " has " + std::to_string(row.size()) + " fields, header has " +
                            std::to_string(header.size()));
        }
        FlowRecord record;
        record.features.reserve(feature_pos.size());
        for (std::size_t f = 0; f < feature_pos.size(); ++f) {
            auto value = detail::parse_double(row[feature_pos[f]]);
            if (!value) {
                throw Error(ErrorKind::NonNumericValue, "row " + std::to_string(index) + ", column '" +
                                                            schema.feature_columns[f] + "': '" + row[feature_pos[f]] + "'");
            }
            record.features.push_back(*value);
        }
        record.label = (row[label_pos] == schema.benign_label_value) ? Label::Benign : Label::Attack;
        if (category_pos) {
            auto cat = detail::trim(row[*category_pos]);
            if (!cat.empty()) record.category = std::string(cat);
        }
        record.original_index = index++;
        table.records.push_back(std::move(record));
    }
    return table;
}

inline FlowTable load_flows(const std::filesystem::path& path, const FlowSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open '" + path.string() + "'");
    return load_flows(in, schema);
}

// Per-feature min/max over the (training, benign) records only.
inline NormalizationStats fit_normalizer(const FlowTable& benign_flows) {
    if (benign_flows.size() < 2) throw Error(ErrorKind::InsufficientData, "need at least 2 records to fit normalization");
    const std::size_t n = benign_flows.dimension();
    NormalizationStats stats{benign_flows.records.front().features, benign_flows.records.front().features};
    for (const auto& record : benign_flows.records) {
        if (record.features.size() != n) throw Error(ErrorKind::DimensionMismatch, "record width differs from schema");
        for (std::size_t f = 0; f < n; ++f) {
            stats.min[f] = std::min(stats.min[f], record.features[f]);
            stats.max[f] = std::max(stats.max[f], record.features[f]);
        }
    }
    return stats;
}

inline FlowTable normalize(const FlowTable& flows, const NormalizationStats& stats) {
    if (flows.dimension() != stats.dimension()) {
        throw Error(ErrorKind::DimensionMismatch, "table has " + std::to_string(flows.dimension()) +
                                                      " features, stats have " + std::to_string(stats.dimension()));
    }
    FlowTable out = flows;
    for (auto& record : out.records) {
        for (std::size_t f = 0; f < record.features.size(); ++f) record.features[f] = stats.scale(f, record.features[f]);
    }
    return out;
}

// Seeded shuffle of the benign items followed by a prefix/suffix cut at
// floor(fraction * count). Works for flow records and sequences alike; the
// element type needs is_benign(). Each partition keeps source order.
template <class Item>
std::pair<std::vector<Item>, std::vector<Item>> split_benign_items(const std::vector<Item>& items, double train_fraction,
                                                                    std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "train fraction must lie in (0, 1)");
    }
    std::vector<std::size_t> benign;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i].is_benign()) benign.push_back(i);
    }
    if (benign.empty()) throw Error(ErrorKind::NoBenignRecords, "nothing to split");

    Rng rng(seed);
    shuffle(benign, rng);
    const auto cut = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(benign.size())));
    std::vector<std::size_t> train_idx(benign.begin(), benign.begin() + static_cast<std::ptrdiff_t>(cut));
    std::vector<std::size_t> test_idx(benign.begin() + static_cast<std::ptrdiff_t>(cut), benign.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    std::pair<std::vector<Item>, std::vector<Item>> out;
    out.first.reserve(train_idx.size());
    out.second.reserve(test_idx.size());
    for (auto i : train_idx) out.first.push_back(items[i]);
    for (auto i : test_idx) out.second.push_back(items[i]);
    return out;
}

inline std::pair<FlowTable, FlowTable> split_benign(const FlowTable& flows, double train_fraction, std::uint64_t seed) {
    auto [train, test] = split_benign_items(flows.records, train_fraction, seed);
    return {FlowTable{flows.feature_names, std::move(train)}, FlowTable{flows.feature_names, std::move(test)}};
}

}  // namespace flowae
