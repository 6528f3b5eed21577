// flowae: batch front end for the triplet-regularised LSTM autoencoder
// anomaly detector. Data goes to files, diagnostics to stderr.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "flowae.hpp"

namespace fs = std::filesystem;
using namespace flowae;

namespace {

std::ofstream open_output(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    return out;
}

std::vector<double> parse_numbers(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : detail::split_list(text)) {
        auto value = detail::parse_double(item);
        if (!value) throw Error(ErrorKind::InvalidConfig, "'" + item + "' is not a number");
        out.push_back(*value);
    }
    return out;
}

// Command-line overrides layered on top of the config file.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> features, exclude, label, category, benign;
    std::optional<std::size_t> sequence_length, stride, smote_k, hidden, latent, layers, epochs, batch_size;
    std::optional<double> noise, percentile, train_fraction, smote_multiplier;
    std::optional<double> lambda_rec, lambda_tml, lambda_kl, margin, learning_rate;
    std::optional<std::string> mode;

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed", seed, "root seed");
        cmd->add_option("--features", features, "comma-separated feature columns, or *");
        cmd->add_option("--exclude", exclude, "columns to drop when features = *");
        cmd->add_option("--label", label, "label column");
        cmd->add_option("--category", category, "attack category column");
        cmd->add_option("--benign", benign, "label value that marks benign flows");
        cmd->add_option("--sequence-length", sequence_length, "flows per sequence");
        cmd->add_option("--stride", stride, "window stride");
        cmd->add_option("--noise-scale", noise, "positive-sample noise scale");
        cmd->add_option("--percentile", percentile, "threshold percentile")->check(CLI::Range(90.0, 100.0));
        cmd->add_option("--train-fraction", train_fraction, "benign training share");
        cmd->add_option("--smote", smote_multiplier, "SMOTE target as a multiple of the benign count (0 = off)");
        cmd->add_option("--smote-k", smote_k, "SMOTE neighbours");
        cmd->add_option("--hidden", hidden, "LSTM hidden size");
        cmd->add_option("--latent", latent, "latent size");
        cmd->add_option("--layers", layers, "LSTM layers");
        cmd->add_option("--mode", mode, "deterministic | variational");
        cmd->add_option("--lambda-rec", lambda_rec, "reconstruction loss weight");
        cmd->add_option("--lambda-tml", lambda_tml, "triplet margin loss weight");
        cmd->add_option("--lambda-kl", lambda_kl, "KL weight (variational mode)");
        cmd->add_option("--margin", margin, "triplet margin");
        cmd->add_option("--epochs", epochs, "training epochs");
        cmd->add_option("--batch-size", batch_size, "batch size");
        cmd->add_option("--learning-rate", learning_rate, "optimizer learning rate");
    }

    void apply(PipelineConfig& cfg) const {
        if (seed) cfg.seed = *seed;
        if (features) {
            cfg.all_features = detail::trim(*features) == "*";
            cfg.schema.feature_columns = cfg.all_features ? std::vector<std::string>{} : detail::split_list(*features);
        }
        if (exclude) cfg.exclude_columns = detail::split_list(*exclude);
        if (label) cfg.schema.label_column = *label;
        if (category) cfg.schema.attack_category_column = *category;
        if (benign) cfg.schema.benign_label_value = *benign;
        if (sequence_length) cfg.sequence_length = *sequence_length;
        if (stride) cfg.stride = *stride;
        if (noise) cfg.noise_scale = *noise;
        if (percentile) cfg.percentile = *percentile;
        if (train_fraction) cfg.train_fraction = *train_fraction;
        if (smote_multiplier) cfg.smote_multiplier = *smote_multiplier;
        if (smote_k) cfg.smote_k = *smote_k;
        if (hidden) cfg.model.hidden_dim = *hidden;
        if (latent) cfg.model.latent_dim = *latent;
        if (layers) cfg.model.num_layers = *layers;
        if (mode) cfg.model.mode = detail::parse_mode(*mode);
        if (lambda_rec) cfg.train.lambda_rec = *lambda_rec;
        if (lambda_tml) cfg.train.lambda_tml = *lambda_tml;
        if (lambda_kl) cfg.train.lambda_kl = *lambda_kl;
        if (margin) cfg.train.margin = *margin;
        if (epochs) cfg.train.epochs = *epochs;
        if (batch_size) cfg.train.batch_size = *batch_size;
        if (learning_rate) cfg.train.learning_rate = *learning_rate;
    }
};

PipelineConfig base_config(const std::optional<fs::path>& config_path) {
    if (config_path) return load_config(*config_path);
    PipelineConfig cfg;
    cfg.all_features = true;
    return cfg;
}

FlowTable load_input(const fs::path& input, PipelineConfig& cfg) {
    if (!fs::exists(input)) throw Error(ErrorKind::MissingInput, "input '" + input.string() + "' does not exist");
    cfg.schema = resolve_schema(cfg, input);
    cfg.all_features = false;
    return load_flows(input, cfg.schema);
}

void write_report(const fs::path& path, const TrainReport& report, bool variational) {
    auto out = open_output(path);
    write_train_report_csv(out, report, variational);
    std::cout << path.string() << '\n';
}

int cmd_generate(const SyntheticSpec& spec, const fs::path& out_path) {
    const FlowTable table = generate_synthetic(spec);
    auto out = open_output(out_path);
    write_flows_csv(out, table);
    return 0;
}

int cmd_train(const std::optional<fs::path>& config, const Overrides& overrides, const fs::path& input,
              const fs::path& model_path, std::optional<fs::path> report_path) {
    PipelineConfig cfg = base_config(config);
    overrides.apply(cfg);
    const FlowTable raw = load_input(input, cfg);
    const TrainingOutcome outcome = run_training(raw, cfg);
    save_artifact(model_path, outcome.artifact);
    write_report(report_path.value_or(fs::path(model_path.string() + ".train.csv")), outcome.report,
                 outcome.artifact.model.variational());
    return 0;
}

int cmd_calibrate(const fs::path& model_path, const fs::path& input, std::optional<double> q,
                  const std::optional<fs::path>& out_path) {
    ModelArtifact artifact = load_artifact(model_path);
    PipelineConfig cfg = config_from_artifact(artifact);
    if (q) cfg.percentile = *q;
    const FlowTable raw = load_flows(input, cfg.schema);
    const PreparedData data = prepare(raw, cfg, artifact.model.normalization);
    artifact.threshold = calibrate(artifact.model, data.train_benign, cfg.percentile);
    save_artifact(out_path.value_or(model_path), artifact);
    return 0;
}

int cmd_detect(const fs::path& model_path, const fs::path& input, const fs::path& out_path,
               const std::optional<fs::path>& config) {
    const ModelArtifact artifact = load_artifact(model_path);
    if (!artifact.threshold) throw Error(ErrorKind::InvalidConfig, "model has no calibrated threshold");
    PipelineConfig cfg = config_from_artifact(artifact);
    if (config) {
        PipelineConfig user = load_config(*config);
        if (!fs::exists(input)) throw Error(ErrorKind::MissingInput, "input '" + input.string() + "' does not exist");
        cfg.schema = resolve_schema(user, input);
        if (cfg.schema.dimension() != artifact.model.config.input_dim) {
            throw Error(ErrorKind::DimensionMismatch, "schema selects " + std::to_string(cfg.schema.dimension()) +
                                                          " features, model expects " +
                                                          std::to_string(artifact.model.config.input_dim));
        }
    }
    if (!fs::exists(input)) throw Error(ErrorKind::MissingInput, "input '" + input.string() + "' does not exist");

    std::vector<Sequence> sequences;
    if (fs::file_size(input) > 0) {
        const FlowTable raw = load_flows(input, cfg.schema);
        if (!raw.empty()) {
            sequences = build_sequences(normalize(raw, artifact.model.normalization), cfg.sequence_length, cfg.stride);
        }
    }
    std::vector<Verdict> verdicts;
    verdicts.reserve(sequences.size());
    for (const auto& seq : sequences) verdicts.push_back(classify(artifact.model, *artifact.threshold, seq));
    auto out = open_output(out_path);
    write_verdicts_csv(out, sequences, verdicts);
    return 0;
}

int cmd_eval(const fs::path& model_path, const fs::path& input, const fs::path& out_dir, const std::string& percentiles,
             bool all_sequences) {
    const ModelArtifact artifact = load_artifact(model_path);
    if (!artifact.threshold) throw Error(ErrorKind::InvalidConfig, "model has no calibrated threshold");
    const PipelineConfig cfg = config_from_artifact(artifact);
    const FlowTable raw = load_flows(input, cfg.schema);
    const PreparedData data = prepare(raw, cfg, artifact.model.normalization);

    std::vector<Sequence> eval_set = data.evaluation_set();
    if (all_sequences) eval_set.insert(eval_set.begin(), data.train_benign.begin(), data.train_benign.end());
    const auto benign_errors = score_sequences(artifact.model, data.train_benign);
    const auto qs = parse_numbers(percentiles);
    const EvalReport report = evaluate(artifact.model, *artifact.threshold, eval_set, benign_errors, qs);

    fs::create_directories(out_dir);
    {
        auto out = open_output(out_dir / "summary.txt");
        write_summary(out, report, *artifact.threshold);
    }
    {
        auto out = open_output(out_dir / "pr_curve.csv");
        write_pr_curve_csv(out, report.pr_curve);
    }
    {
        auto out = open_output(out_dir / "per_category.csv");
        write_per_category_csv(out, report.per_category);
    }
    {
        auto out = open_output(out_dir / "latent.csv");
        write_latent_csv(out, artifact.model, eval_set);
    }
    return 0;
}

int cmd_sweep(const std::optional<fs::path>& config, const Overrides& overrides, const fs::path& input,
              const fs::path& out_path, const std::string& grid_rec, const std::string& grid_tml,
              const std::optional<fs::path>& validation, const std::optional<fs::path>& average_path) {
    PipelineConfig cfg = base_config(config);
    overrides.apply(cfg);
    const FlowTable raw = load_input(input, cfg);
    const PreparedData data = prepare(raw, cfg);
    const PipelineSeeds seeds(cfg.seed);
    const auto triplets =
        make_triplets(data.training, TripletConfig{cfg.noise_scale, cfg.sequence_length, cfg.stride, seeds.triplets});

    ModelConfig model_cfg = cfg.model;
    model_cfg.input_dim = raw.dimension();
    model_cfg.seed = seeds.init;
    AutoencoderModel initial = init_model(model_cfg);
    initial.normalization = data.stats;
    TrainConfig base = cfg.train;
    base.seed = seeds.training;

    SweepGrid grid = SweepGrid::full();
    if (!grid_rec.empty()) grid.lambda_rec = parse_numbers(grid_rec);
    if (!grid_tml.empty()) grid.lambda_tml = parse_numbers(grid_tml);

    std::vector<Sequence> validation_set;
    if (validation) {
        const FlowTable val_raw = load_flows(*validation, cfg.schema);
        validation_set = build_sequences(normalize(val_raw, data.stats), cfg.sequence_length, cfg.stride);
    } else {
        validation_set = data.evaluation_set();
    }

    const SweepResult result = sweep(triplets, data.train_benign, validation_set, initial, base, grid, cfg.percentile);
    {
        auto out = open_output(out_path);
        write_sweep_csv(out, result);
    }
    if (average_path) {
        const Metrics avg = average_metrics(result);
        auto out = open_output(*average_path);
        csv::write_row(out, {"benign_acc", "anomaly_acc", "precision", "recall", "f1"});
        csv::write_row(out, {format_optional(avg.benign_accuracy), format_optional(avg.anomaly_accuracy),
                             format_optional(avg.precision), format_optional(avg.recall), format_optional(avg.f1)});
    }
    const auto& best = result.cells[result.best];
    std::cerr << "selected lambda_rec=" << csv::format_number(best.lambda_rec)
              << " lambda_tml=" << csv::format_number(best.lambda_tml) << " by "
              << (result.selected_by_f1 ? "f1" : "benign accuracy") << '\n';
    return 0;
}

int cmd_transfer(const std::optional<fs::path>& config, const Overrides& overrides, const fs::path& model_path,
                 const fs::path& input, const fs::path& out_path, const std::string& freeze_name,
                 std::optional<fs::path> report_path) {
    const ModelArtifact pretrained = load_artifact(model_path);
    PipelineConfig cfg = config ? load_config(*config) : config_from_artifact(pretrained);
    cfg.model = pretrained.model.config;
    // fine-tuning regime: reconstruction only
    cfg.train.lambda_tml = 0.0;
    cfg.train.lambda_rec = 1.0;
    overrides.apply(cfg);
    const FlowTable raw = load_input(input, cfg);

    const FreezeSpec freeze = freeze_name == "encoder" ? FreezeSpec::encoder() : FreezeSpec::all_but_io();
    TrainingOutcome outcome = run_transfer(pretrained, raw, cfg, freeze);
    outcome.artifact.metadata["transfer.freeze"] = freeze_name;
    outcome.artifact.metadata["transfer.source"] = model_path.filename().string();
    save_artifact(out_path, outcome.artifact);
    write_report(report_path.value_or(fs::path(out_path.string() + ".train.csv")), outcome.report,
                 outcome.artifact.model.variational());
    return 0;
}

void print_value(const std::string& key, double value) { std::cout << key << ": " << csv::format_number(value) << '\n'; }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"flowae: benign-only LSTM autoencoder anomaly detection for network flows"};
    app.require_subcommand(1);

    // generate
    SyntheticSpec spec;
    fs::path gen_out;
    std::string categories = "bruteforce,dos,recon";
    auto* gen = app.add_subcommand("generate", "write a synthetic labelled flow corpus");
    gen->add_option("--out", gen_out, "output CSV")->required();
    gen->add_option("--flows", spec.flows, "number of flows");
    gen->add_option("--features", spec.features, "number of features");
    gen->add_option("--attack-fraction", spec.attack_fraction, "share of attack flows")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--shift", spec.shift_sigma, "attack mean shift in benign standard deviations");
    gen->add_option("--categories", categories, "comma-separated attack categories");
    gen->add_option("--noise", spec.noise_sigma, "benign Gaussian noise sigma");
    gen->add_option("--burst-min", spec.burst_min, "shortest attack burst");
    gen->add_option("--burst-max", spec.burst_max, "longest attack burst");
    gen->add_option("--seed", spec.seed, "seed");

    // train
    Overrides train_over;
    std::optional<fs::path> train_config, train_report;
    fs::path train_input, train_model;
    auto* train_cmd = app.add_subcommand("train", "train a model and calibrate its threshold");
    train_cmd->add_option("--config", train_config, "INI config");
    train_cmd->add_option("--input", train_input, "flow CSV")->required();
    train_cmd->add_option("--model", train_model, "output model artifact")->required();
    train_cmd->add_option("--report", train_report, "per-epoch loss CSV (default <model>.train.csv)");
    train_over.attach(train_cmd);

    // calibrate
    fs::path cal_model, cal_input;
    std::optional<fs::path> cal_out;
    std::optional<double> cal_q;
    auto* cal = app.add_subcommand("calibrate", "recalibrate the threshold of a trained model");
    cal->add_option("--model", cal_model, "model artifact")->required();
    cal->add_option("--input", cal_input, "flow CSV the model was trained on")->required();
    cal->add_option("--percentile", cal_q, "threshold percentile")->check(CLI::Range(90.0, 100.0));
    cal->add_option("--out", cal_out, "output artifact (default: overwrite --model)");

    // detect
    fs::path det_model, det_input, det_out;
    std::optional<fs::path> det_config;
    auto* det = app.add_subcommand("detect", "classify every sequence of a flow CSV");
    det->add_option("--model", det_model, "model artifact")->required();
    det->add_option("--input", det_input, "flow CSV")->required();
    det->add_option("--out", det_out, "verdict CSV")->required();
    det->add_option("--config", det_config, "config whose [data] section overrides the stored schema");

    // eval
    fs::path ev_model, ev_input, ev_dir;
    std::string ev_percentiles = "90,95,99,100";
    bool ev_all = false;
    auto* ev = app.add_subcommand("eval", "evaluate a model on labelled flows");
    ev->add_option("--model", ev_model, "model artifact")->required();
    ev->add_option("--input", ev_input, "labelled flow CSV")->required();
    ev->add_option("--out-dir", ev_dir, "report directory")->required();
    ev->add_option("--percentiles", ev_percentiles, "percentiles for the PR curve");
    ev->add_flag("--all", ev_all, "include the benign training split in the evaluation set");

    // sweep
    Overrides sweep_over;
    std::optional<fs::path> sweep_config, sweep_validation, sweep_average;
    fs::path sweep_input, sweep_out;
    std::string grid_rec, grid_tml;
    auto* sw = app.add_subcommand("sweep", "train one model per (lambda_rec, lambda_tml) grid cell");
    sw->add_option("--config", sweep_config, "INI config");
    sw->add_option("--input", sweep_input, "flow CSV")->required();
    sw->add_option("--out", sweep_out, "results CSV")->required();
    sw->add_option("--grid-rec", grid_rec, "lambda_rec values (default 0,0.1,...,1)");
    sw->add_option("--grid-tml", grid_tml, "lambda_tml values (default 0,0.1,...,1)");
    sw->add_option("--validation", sweep_validation, "labelled validation CSV");
    sw->add_option("--average", sweep_average, "CSV with metrics averaged over the grid");
    sweep_over.attach(sw);

    // transfer
    Overrides tr_over;
    std::optional<fs::path> tr_config, tr_report;
    fs::path tr_model, tr_input, tr_out;
    std::string tr_freeze;
    auto* tr = app.add_subcommand("transfer", "fine-tune a pre-trained model on new flows with frozen layers");
    tr->add_option("--config", tr_config, "INI config for the target data");
    tr->add_option("--model", tr_model, "pre-trained artifact")->required();
    tr->add_option("--input", tr_input, "target-domain flow CSV")->required();
    tr->add_option("--out", tr_out, "output artifact")->required();
    tr->add_option("--freeze", tr_freeze, "encoder | all-but-io")->required()->check(CLI::IsMember({"encoder", "all-but-io"}));
    tr->add_option("--report", tr_report, "per-epoch loss CSV (default <out>.train.csv)");
    tr_over.attach(tr);

    // threat
    auto* threat_cmd = app.add_subcommand("threat", "analytical threat-model calculators");
    threat_cmd->require_subcommand(1);
    threat::BruteForceParams bf;
    auto* bf_cmd = threat_cmd->add_subcommand("brute-force", "expected time and success probability");
    bf_cmd->add_option("--alphabet", bf.alphabet_size, "alphabet size A")->required();
    bf_cmd->add_option("--length", bf.password_length, "password length k")->required();
    bf_cmd->add_option("--guess-time", bf.guess_time, "seconds per guess T")->required();
    bf_cmd->add_option("--procs", bf.processors, "parallel processors p");
    bf_cmd->add_option("--elapsed", bf.elapsed, "elapsed attack time t in seconds");
    threat::DosParams dos;
    auto* dos_cmd = threat_cmd->add_subcommand("dos", "overload condition and queueing ratio");
    dos_cmd->add_option("--capacity", dos.capacity, "capacity C")->required();
    dos_cmd->add_option("--legit-rate", dos.legit_rate, "legitimate request rate");
    dos_cmd->add_option("--attack-rate", dos.attack_rate, "attack request rate");
    dos_cmd->add_option("--legit-arrival", dos.legit_arrival, "legitimate arrival rate");
    dos_cmd->add_option("--attack-arrival", dos.attack_arrival, "attack arrival rate");
    dos_cmd->add_option("--service-rate", dos.service_rate, "service rate mu");
    threat::ReconParams recon;
    auto* recon_cmd = threat_cmd->add_subcommand("recon", "search space, detection and success probabilities");
    recon_cmd->add_option("--ips", recon.ip_count, "IP count N");
    recon_cmd->add_option("--ports", recon.port_count, "port count P");
    recon_cmd->add_option("--services", recon.service_count, "service count S");
    recon_cmd->add_option("--scan-rate", recon.scan_rate, "scan rate");
    recon_cmd->add_option("--beta", recon.detection_scale, "detection scale beta");
    recon_cmd->add_option("--time", recon.time, "time T");
    recon_cmd->add_option("--vulns", recon.vulnerabilities, "vulnerabilities V");
    recon_cmd->add_option("--exploitable", recon.exploitable, "exploitable vulnerabilities v");
    recon_cmd->add_option("--detection-threshold", recon.detection_threshold, "detection threshold d (informational)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            spec.categories = detail::split_list(categories);
            return cmd_generate(spec, gen_out);
        }
        if (train_cmd->parsed()) return cmd_train(train_config, train_over, train_input, train_model, train_report);
        if (cal->parsed()) return cmd_calibrate(cal_model, cal_input, cal_q, cal_out);
        if (det->parsed()) return cmd_detect(det_model, det_input, det_out, det_config);
        if (ev->parsed()) return cmd_eval(ev_model, ev_input, ev_dir, ev_percentiles, ev_all);
        if (sw->parsed()) {
            return cmd_sweep(sweep_config, sweep_over, sweep_input, sweep_out, grid_rec, grid_tml, sweep_validation,
                             sweep_average);
        }
        if (tr->parsed()) return cmd_transfer(tr_config, tr_over, tr_model, tr_input, tr_out, tr_freeze, tr_report);
        if (bf_cmd->parsed()) {
            std::cout << "keyspace: " << threat::keyspace(bf) << '\n';
            print_value("expected_time_s", threat::brute_force_expected_time(bf));
            print_value("success_probability", threat::brute_force_success_prob(bf));
            return 0;
        }
        if (dos_cmd->parsed()) {
            const auto result = threat::dos_overload(dos);
            std::cout << "overloaded: " << (result.overloaded ? "true" : "false") << '\n';
            print_value("overload_ratio", result.overload_ratio);
            print_value("overload_probability", result.overload_clamped);
            return 0;
        }
        if (recon_cmd->parsed()) {
            std::cout << "search_space: " << threat::recon_search_space(recon) << '\n';
            print_value("detect_probability", threat::recon_detect_prob(recon));
            print_value("success_probability", threat::recon_success_prob(recon));
            return 0;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
