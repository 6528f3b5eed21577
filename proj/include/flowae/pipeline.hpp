#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/lexical_cast.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "flowae/artifact.hpp"
#include "flowae/autoencoder.hpp"
#include "flowae/csv.hpp"
#include "flowae/detector.hpp"
#include "flowae/error.hpp"
#include "flowae/evaluator.hpp"
#include "flowae/flow_ingest.hpp"
#include "flowae/oversampler.hpp"
#include "flowae/random.hpp"
#include "flowae/sequencer.hpp"
#include "flowae/trainer.hpp"

namespace flowae {

struct PipelineConfig {
    FlowSchema schema;
    std::vector<std::string> exclude_columns;  // used when features = "*"
    bool all_features = false;
    std::size_t sequence_length = 25;
    std::size_t stride = 25;
    double noise_scale = 0.01;
    double percentile = kDefaultPercentile;
    double train_fraction = 0.8;
    double smote_multiplier = 0.0;  // 0 disables SMOTE; otherwise target = multiplier * benign count
    std::size_t smote_k = 5;
    ModelConfig model;
    TrainConfig train;
    std::uint64_t seed = 0;

    void validate() const {
        if (sequence_length < 1 || stride < 1) throw Error(ErrorKind::InvalidConfig, "sequence length and stride must be >= 1");
        if (!(noise_scale >= 0.0)) throw Error(ErrorKind::InvalidConfig, "noise scale must be >= 0");
        if (!(percentile > 0.0 && percentile <= 100.0)) throw Error(ErrorKind::InvalidConfig, "percentile must lie in (0, 100]");
        if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw Error(ErrorKind::InvalidConfig, "train fraction must lie in (0, 1)");
        if (smote_multiplier != 0.0 && smote_multiplier < 1.0) {
            throw Error(ErrorKind::InvalidConfig, "smote multiplier must be 0 (off) or >= 1");
        }
        train.validate();
    }
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& text, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        auto trimmed = std::string(trim(item));
        if (!trimmed.empty()) out.push_back(std::move(trimmed));
    }
    return out;
}

inline std::string join(const std::vector<std::string>& items, char sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out.push_back(sep);
        out += items[i];
    }
    return out;
}

inline ModelMode parse_mode(const std::string& text) {
    if (text == "deterministic") return ModelMode::Deterministic;
    if (text == "variational") return ModelMode::Variational;
    throw Error(ErrorKind::InvalidConfig, "unknown model mode '" + text + "'");
}

inline char parse_delimiter(const std::string& text) {
    if (text == "\\t" || text == "tab") return '\t';
    if (text.size() != 1) throw Error(ErrorKind::InvalidConfig, "delimiter must be a single character");
    return text[0];
}

}  // namespace detail

// INI config with sections [data], [sequence], [smote], [model], [train],
// [detector], [run]. Missing keys keep their defaults.
namespace detail {

// ptree::get with a default swallows conversion failures; this does not.
template <class T>
T read_value(const boost::property_tree::ptree& tree, const std::string& key, T fallback) {
    const auto raw = tree.get_optional<std::string>(key);
    if (!raw) return fallback;
    const std::string text(trim(*raw));
    if constexpr (std::is_unsigned_v<T>) {
        if (!text.empty() && text.front() == '-') {
            throw Error(ErrorKind::InvalidConfig, key + " must be non-negative, got '" + text + "'");
        }
    }
    try {
        return boost::lexical_cast<T>(text);
    } catch (const boost::bad_lexical_cast&) {
        throw Error(ErrorKind::InvalidConfig, key + ": cannot parse '" + text + "'");
    }
}

}  // namespace detail

inline PipelineConfig parse_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw Error(ErrorKind::InvalidConfig, e.what());
    }
    PipelineConfig cfg;
    try {
        const std::string features = tree.get<std::string>("data.features", "*");
        if (detail::trim(features) == "*") {
            cfg.all_features = true;
        } else {
            cfg.schema.feature_columns = detail::split_list(features);
        }
        cfg.exclude_columns = detail::split_list(tree.get<std::string>("data.exclude", ""));
        cfg.schema.label_column = tree.get<std::string>("data.label", cfg.schema.label_column);
        const std::string category = tree.get<std::string>("data.category", "");
        if (!category.empty()) cfg.schema.attack_category_column = category;
        cfg.schema.benign_label_value = tree.get<std::string>("data.benign", cfg.schema.benign_label_value);
        cfg.schema.delimiter = detail::parse_delimiter(tree.get<std::string>("data.delimiter", ","));

        cfg.sequence_length = detail::read_value<std::size_t>(tree, "sequence.length", cfg.sequence_length);
        cfg.stride = detail::read_value<std::size_t>(tree, "sequence.stride", cfg.sequence_length);
        cfg.noise_scale = detail::read_value<double>(tree, "sequence.noise", cfg.noise_scale);
        cfg.train_fraction = detail::read_value<double>(tree, "sequence.train_fraction", cfg.train_fraction);

        cfg.smote_multiplier = detail::read_value<double>(tree, "smote.multiplier", cfg.smote_multiplier);
        cfg.smote_k = detail::read_value<std::size_t>(tree, "smote.k", cfg.smote_k);

        cfg.model.hidden_dim = detail::read_value<std::size_t>(tree, "model.hidden", cfg.model.hidden_dim);
        cfg.model.latent_dim = detail::read_value<std::size_t>(tree, "model.latent", cfg.model.latent_dim);
        cfg.model.num_layers = detail::read_value<std::size_t>(tree, "model.layers", cfg.model.num_layers);
        cfg.model.mode = detail::parse_mode(tree.get<std::string>("model.mode", "deterministic"));

        cfg.train.lambda_rec = detail::read_value<double>(tree, "train.lambda_rec", cfg.train.lambda_rec);
        cfg.train.lambda_tml = detail::read_value<double>(tree, "train.lambda_tml", cfg.train.lambda_tml);
        cfg.train.lambda_kl = detail::read_value<double>(tree, "train.lambda_kl", cfg.train.lambda_kl);
        cfg.train.margin = detail::read_value<double>(tree, "train.margin", cfg.train.margin);
        cfg.train.epochs = detail::read_value<std::size_t>(tree, "train.epochs", cfg.train.epochs);
        cfg.train.batch_size = detail::read_value<std::size_t>(tree, "train.batch_size", cfg.train.batch_size);
        cfg.train.learning_rate = detail::read_value<double>(tree, "train.learning_rate", cfg.train.learning_rate);
        cfg.train.clip_norm = detail::read_value<double>(tree, "train.clip_norm", cfg.train.clip_norm);

        cfg.percentile = detail::read_value<double>(tree, "detector.percentile", cfg.percentile);
        cfg.seed = detail::read_value<std::uint64_t>(tree, "run.seed", cfg.seed);
    } catch (const pt::ptree_error& e) {
        throw Error(ErrorKind::InvalidConfig, e.what());
    }
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open config '" + path.string() + "'");
    return parse_config(in);
}

// Expands features = "*" against the CSV header: every column except the
// label, the category and any excluded column.
inline FlowSchema resolve_schema(const PipelineConfig& cfg, const std::filesystem::path& csv_path) {
    FlowSchema schema = cfg.schema;
    if (!cfg.all_features) return schema;
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw Error(ErrorKind::MissingInput, "cannot open '" + csv_path.string() + "'");
    csv::Reader reader(in, schema.delimiter);
    csv::Row header;
    if (!reader.next(header)) throw Error(ErrorKind::EmptyFile, "no header row in '" + csv_path.string() + "'");
    schema.feature_columns.clear();
    for (const auto& raw : header) {
        const std::string name(detail::trim(raw));
        if (name == schema.label_column) continue;
        if (schema.attack_category_column && name == *schema.attack_category_column) continue;
        if (std::find(cfg.exclude_columns.begin(), cfg.exclude_columns.end(), name) != cfg.exclude_columns.end()) continue;
        schema.feature_columns.push_back(name);
    }
    return schema;
}

// Sub-stream seeds under the root seed.
struct PipelineSeeds {
    std::uint64_t split;
    std::uint64_t triplets;
    std::uint64_t init;
    std::uint64_t training;
    std::uint64_t smote;

    explicit PipelineSeeds(std::uint64_t root)
        : split(derive_seed(root, "ingest-split")),
          triplets(derive_seed(root, "triplets")),
          init(derive_seed(root, "init")),
          training(derive_seed(root, "training")),
          smote(derive_seed(root, "smote")) {}
};

struct PreparedData {
    NormalizationStats stats;
    std::vector<Sequence> train_benign;  // calibration set
    std::vector<Sequence> test_benign;   // held out
    std::vector<Sequence> attacks;
    std::vector<Sequence> training;      // train_benign, or the SMOTE-augmented rebuild

    // held-out benign followed by every attack sequence
    std::vector<Sequence> evaluation_set() const {
        std::vector<Sequence> out = test_benign;
        out.insert(out.end(), attacks.begin(), attacks.end());
        return out;
    }
};

// Windows the raw table, splits benign windows train/test, fits min-max on
// the benign flows inside training windows (unless stats are supplied) and
// normalizes every window. SMOTE, when enabled, oversamples the normalized
// benign training flows and the training windows are rebuilt from them.
inline PreparedData prepare(const FlowTable& raw, const PipelineConfig& cfg,
                            const std::optional<NormalizationStats>& fixed_stats = std::nullopt) {
    cfg.validate();
    const PipelineSeeds seeds(cfg.seed);
    const auto windows = build_sequences(raw, cfg.sequence_length, cfg.stride);
    const auto [train_windows, test_windows] = split_benign_items(windows, cfg.train_fraction, seeds.split);

    FlowTable train_flows;
    train_flows.feature_names = raw.feature_names;
    for (const auto& w : train_windows) {
        for (std::size_t t = 0; t < cfg.sequence_length; ++t) {
            const auto& record = raw.records[w.start_index + t];
            if (record.is_benign()) train_flows.records.push_back(record);
        }
    }

    PreparedData data;
    data.stats = fixed_stats ? *fixed_stats : fit_normalizer(train_flows);
    const FlowTable normalized = normalize(raw, data.stats);
    const auto sequences = build_sequences(normalized, cfg.sequence_length, cfg.stride);

    std::vector<bool> in_train(sequences.size(), false);
    std::vector<bool> in_test(sequences.size(), false);
    for (const auto& w : train_windows) in_train[w.start_index / cfg.stride] = true;
    for (const auto& w : test_windows) in_test[w.start_index / cfg.stride] = true;
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        if (in_train[i]) {
            data.train_benign.push_back(sequences[i]);
        } else if (in_test[i]) {
            data.test_benign.push_back(sequences[i]);
        } else {
            data.attacks.push_back(sequences[i]);
        }
    }

    if (cfg.smote_multiplier >= 1.0) {
        FlowTable benign = normalize(train_flows, data.stats);
        for (std::size_t i = 0; i < benign.records.size(); ++i) benign.records[i].original_index = i;
        const auto target = static_cast<std::size_t>(std::llround(cfg.smote_multiplier * static_cast<double>(benign.size())));
        const FlowTable augmented = smote_oversample(benign, SmoteConfig{cfg.smote_k, target, seeds.smote});
        data.training = build_sequences(augmented, cfg.sequence_length, cfg.stride);
    } else {
        data.training = data.train_benign;
    }
    return data;
}

inline void store_pipeline_metadata(std::map<std::string, std::string>& meta, const PipelineConfig& cfg,
                                    const TrainConfig& train) {
    meta["lambda_rec"] = csv::format_number(train.lambda_rec);
    meta["lambda_tml"] = csv::format_number(train.lambda_tml);
    meta["lambda_kl"] = csv::format_number(train.lambda_kl);
    meta["margin"] = csv::format_number(train.margin);
    meta["epochs"] = std::to_string(train.epochs);
    meta["batch_size"] = std::to_string(train.batch_size);
    meta["learning_rate"] = csv::format_number(train.learning_rate);
    meta["seed"] = std::to_string(cfg.seed);
    meta["train_fraction"] = csv::format_number(cfg.train_fraction);
    meta["sequence_length"] = std::to_string(cfg.sequence_length);
    meta["stride"] = std::to_string(cfg.stride);
    meta["noise_scale"] = csv::format_number(cfg.noise_scale);
    meta["smote_multiplier"] = csv::format_number(cfg.smote_multiplier);
    meta["smote_k"] = std::to_string(cfg.smote_k);
    meta["schema.features"] = detail::join(cfg.schema.feature_columns, '\n');
    meta["schema.label"] = cfg.schema.label_column;
    meta["schema.category"] = cfg.schema.attack_category_column.value_or("");
    meta["schema.benign"] = cfg.schema.benign_label_value;
    meta["schema.delimiter"] = std::string(1, cfg.schema.delimiter);
}

// Rebuilds the data-handling part of the config a model was trained with.
inline PipelineConfig config_from_artifact(const ModelArtifact& artifact) {
    const auto& meta = artifact.metadata;
    auto get = [&meta](const std::string& key) {
        auto it = meta.find(key);
        if (it == meta.end()) throw Error(ErrorKind::CorruptArtifact, "artifact metadata lacks '" + key + "'");
        return it->second;
    };
    PipelineConfig cfg;
    try {
        cfg.schema.feature_columns = detail::split_list(get("schema.features"), '\n');
        cfg.schema.label_column = get("schema.label");
        if (auto cat = get("schema.category"); !cat.empty()) cfg.schema.attack_category_column = cat;
        cfg.schema.benign_label_value = get("schema.benign");
        cfg.schema.delimiter = detail::parse_delimiter(get("schema.delimiter"));
        cfg.sequence_length = std::stoul(get("sequence_length"));
        cfg.stride = std::stoul(get("stride"));
        cfg.noise_scale = std::stod(get("noise_scale"));
        cfg.train_fraction = std::stod(get("train_fraction"));
        cfg.smote_multiplier = std::stod(get("smote_multiplier"));
        cfg.smote_k = std::stoul(get("smote_k"));
        cfg.seed = std::stoull(get("seed"));
        cfg.train.lambda_rec = std::stod(get("lambda_rec"));
        cfg.train.lambda_tml = std::stod(get("lambda_tml"));
        cfg.train.lambda_kl = std::stod(get("lambda_kl"));
        cfg.train.margin = std::stod(get("margin"));
        cfg.train.epochs = std::stoul(get("epochs"));
        cfg.train.batch_size = std::stoul(get("batch_size"));
        cfg.train.learning_rate = std::stod(get("learning_rate"));
    } catch (const std::logic_error& e) {
        throw Error(ErrorKind::CorruptArtifact, std::string("bad artifact metadata: ") + e.what());
    }
    cfg.model = artifact.model.config;
    if (artifact.threshold) cfg.percentile = artifact.threshold->percentile;
    return cfg;
}

struct TrainingOutcome {
    ModelArtifact artifact;
    TrainReport report;
    PreparedData data;
};

inline TrainingOutcome run_training(const FlowTable& raw, const PipelineConfig& cfg) {
    PreparedData data = prepare(raw, cfg);
    const PipelineSeeds seeds(cfg.seed);
    const auto triplets = make_triplets(data.training, TripletConfig{cfg.noise_scale, cfg.sequence_length, cfg.stride, seeds.triplets});

    ModelConfig model_cfg = cfg.model;
    model_cfg.input_dim = raw.dimension();
    model_cfg.seed = seeds.init;
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = seeds.training;

    TrainReport report = train(triplets, init_model(model_cfg), train_cfg);
    report.model.normalization = data.stats;

    ModelArtifact artifact;
    artifact.model = report.model;
    artifact.threshold = calibrate(artifact.model, data.train_benign, cfg.percentile);
    store_pipeline_metadata(artifact.metadata, cfg, cfg.train);
    return {std::move(artifact), std::move(report), std::move(data)};
}

// Fine-tunes a pre-trained model on target-domain flows. Normalization is
// refitted on the target training split and the threshold recalibrated.
inline TrainingOutcome run_transfer(const ModelArtifact& pretrained, const FlowTable& raw, const PipelineConfig& cfg,
                                    const FreezeSpec& freeze) {
    if (raw.dimension() != pretrained.model.config.input_dim) {
        throw Error(ErrorKind::DimensionMismatch, "target data has " + std::to_string(raw.dimension()) +
                                                      " features, pre-trained model expects " +
                                                      std::to_string(pretrained.model.config.input_dim));
    }
    PreparedData data = prepare(raw, cfg);
    const PipelineSeeds seeds(cfg.seed);
    const auto triplets = make_triplets(data.training, TripletConfig{cfg.noise_scale, cfg.sequence_length, cfg.stride, seeds.triplets});
    TrainConfig train_cfg = cfg.train;
    train_cfg.seed = seeds.training;

    TrainReport report = train(triplets, pretrained.model, train_cfg, freeze);
    report.model.normalization = data.stats;

    ModelArtifact artifact;
    artifact.model = report.model;
    artifact.threshold = calibrate(artifact.model, data.train_benign, cfg.percentile);
    artifact.metadata = pretrained.metadata;
    store_pipeline_metadata(artifact.metadata, cfg, cfg.train);
    return {std::move(artifact), std::move(report), std::move(data)};
}

inline std::string format_optional(const std::optional<double>& value) {
    return value ? csv::format_number(*value) : std::string("NA");
}

inline void write_train_report_csv(std::ostream& out, const TrainReport& report, bool include_kl) {
    csv::Row header{"epoch", "loss", "loss_rec", "loss_tml"};
    if (include_kl) header.emplace_back("loss_kl");
    csv::write_row(out, header);
    for (std::size_t e = 0; e < report.joint_loss.size(); ++e) {
        csv::Row row{std::to_string(e + 1), csv::format_number(report.joint_loss[e]),
                     csv::format_number(report.reconstruction_loss[e]), csv::format_number(report.triplet_loss[e])};
        if (include_kl) row.push_back(csv::format_number(report.kl_loss[e]));
        csv::write_row(out, row);
    }
}

inline void write_verdicts_csv(std::ostream& out, std::span<const Sequence> sequences, std::span<const Verdict> verdicts) {
    csv::write_row(out, {"start_index", "score", "verdict"});
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        csv::write_row(out, {std::to_string(sequences[i].start_index), csv::format_number(verdicts[i].score),
                             std::string(to_string(verdicts[i].label))});
    }
}

inline void write_pr_curve_csv(std::ostream& out, std::span<const PrPoint> curve) {
    csv::write_row(out, {"percentile", "precision", "recall", "benign_acc", "anomaly_acc"});
    for (const auto& p : curve) {
        csv::write_row(out, {csv::format_number(p.percentile), format_optional(p.precision), format_optional(p.recall),
                             format_optional(p.benign_accuracy), format_optional(p.anomaly_accuracy)});
    }
}

inline void write_per_category_csv(std::ostream& out, const std::map<std::string, CategoryMetrics>& categories) {
    csv::write_row(out, {"category", "anomaly_acc", "precision", "recall", "tp", "fn"});
    for (const auto& [name, m] : categories) {
        csv::write_row(out, {name, format_optional(m.anomaly_accuracy), format_optional(m.precision),
                             format_optional(m.recall), std::to_string(m.counts.tp), std::to_string(m.counts.fn)});
    }
}

// key = value lines, no timestamps.
inline void write_summary(std::ostream& out, const EvalReport& report, const ThresholdModel& threshold) {
    out << "threshold = " << csv::format_number(threshold.threshold) << '\n';
    out << "percentile = " << csv::format_number(threshold.percentile) << '\n';
    out << "tp = " << report.counts.tp << '\n';
    out << "fp = " << report.counts.fp << '\n';
    out << "tn = " << report.counts.tn << '\n';
    out << "fn = " << report.counts.fn << '\n';
    out << "benign_accuracy = " << format_optional(report.metrics.benign_accuracy) << '\n';
    out << "anomaly_accuracy = " << format_optional(report.metrics.anomaly_accuracy) << '\n';
    out << "precision = " << format_optional(report.metrics.precision) << '\n';
    out << "recall = " << format_optional(report.metrics.recall) << '\n';
    out << "f1 = " << format_optional(report.metrics.f1) << '\n';
    out << "latent_cohesion = " << format_optional(report.latent_cohesion) << '\n';
}

inline void write_latent_csv(std::ostream& out, const AutoencoderModel& model, std::span<const Sequence> sequences) {
    csv::Row header{"start_index", "label"};
    for (std::size_t i = 0; i < model.config.latent_dim; ++i) header.push_back("z" + std::to_string(i));
    csv::write_row(out, header);
    for (const auto& seq : sequences) {
        const LatentCode code = encode(model, seq);
        csv::Row row{std::to_string(seq.start_index), std::string(to_string(seq.label))};
        for (double v : code.z) row.push_back(csv::format_number(v));
        csv::write_row(out, row);
    }
}

// Mean of each defined metric over the sweep cells.
inline Metrics average_metrics(const SweepResult& result) {
    auto mean_of = [&result](auto field) -> std::optional<double> {
        double sum = 0.0;
        std::size_t count = 0;
        for (const auto& cell : result.cells) {
            if (const auto& v = field(cell.report.metrics)) {
                sum += *v;
                ++count;
            }
        }
        if (count == 0) return std::nullopt;
        return sum / static_cast<double>(count);
    };
    Metrics m;
    m.benign_accuracy = mean_of([](const Metrics& x) { return x.benign_accuracy; });
    m.anomaly_accuracy = mean_of([](const Metrics& x) { return x.anomaly_accuracy; });
    m.precision = mean_of([](const Metrics& x) { return x.precision; });
    m.recall = mean_of([](const Metrics& x) { return x.recall; });
    m.f1 = mean_of([](const Metrics& x) { return x.f1; });
    return m;
}

inline void write_sweep_csv(std::ostream& out, const SweepResult& result) {
    csv::write_row(out, {"lambda_rec", "lambda_tml", "benign_acc", "anomaly_acc", "precision", "recall", "f1", "threshold",
                         "criterion", "selected"});
    for (std::size_t i = 0; i < result.cells.size(); ++i) {
        const auto& c = result.cells[i];
        const auto& m = c.report.metrics;
        csv::write_row(out, {csv::format_number(c.lambda_rec), csv::format_number(c.lambda_tml), format_optional(m.benign_accuracy),
                             format_optional(m.anomaly_accuracy), format_optional(m.precision), format_optional(m.recall),
                             format_optional(m.f1), csv::format_number(c.threshold.threshold), csv::format_number(c.criterion),
                             i == result.best ? "1" : "0"});
    }
}

}  // namespace flowae
