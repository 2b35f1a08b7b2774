// seepline: impute, denoise, and forecast dam saturation-line series.
//
// Exit codes: 0 success, 2 configuration error, 3 data error, 4 numeric fault.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "seepline/correlation.hpp"
#include "seepline/errors.hpp"
#include "seepline/impute.hpp"
#include "seepline/io_util.hpp"
#include "seepline/monitoring.hpp"
#include "seepline/normalize.hpp"
#include "seepline/pipeline.hpp"
#include "seepline/sweep.hpp"
#include "seepline/synth.hpp"
#include "seepline/train.hpp"
#include "seepline/wavelet.hpp"
#include "seepline/windowing.hpp"

namespace fs = std::filesystem;
using namespace seepline;

namespace {

std::uint64_t env_seed() {
    const char* raw = std::getenv("SEEPLINE_SEED");
    if (raw == nullptr || *raw == '\0') return 0;
    std::int64_t v = 0;
    if (!parse_int64(raw, v) || v < 0)
        throw ConfigError("SEEPLINE_SEED must be a non-negative integer, got '" +
                          std::string(raw) + "'");
    return static_cast<std::uint64_t>(v);
}

nlohmann::json parse_json_file(const fs::path& path) {
    if (!fs::exists(path)) throw NotFoundError("file not found: " + path.string());
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& ex) {
        throw SchemaError(path.string() + ": " + ex.what());
    }
}

fs::path ensure_out(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

/// ingest -> z-score (fit per --fit-on) -> windows for one channel.
struct Prepared {
    MonitoringSeries raw;
    NormalizationStats stats;
    ForecastDataset data;
    std::string input_digest;
};

Prepared prepare(const std::string& input, const std::string& station, Eigen::Index seq_len,
                 const std::string& fit_on) {
    if (fit_on != "train" && fit_on != "all")
        throw ConfigError("--fit-on must be 'train' or 'all'");
    Prepared p;
    p.input_digest = digest_file(input);
    p.raw = ingest_csv(input);
    const Eigen::Index fit_end =
        fit_on == "all" ? p.raw.rows() : chrono_split(p.raw.rows()).train_end;
    p.stats = zscore_fit(p.raw, FrameRange{0, fit_end});
    p.data = make_windows(zscore_apply(p.raw, p.stats), seq_len, station);
    return p;
}

std::string render_report(const EvalReport& report, const std::string& format) {
    if (format == "markdown") return report.to_markdown();
    if (format == "csv") return report.to_csv();
    if (format == "json") return report.to_json().dump(2) + "\n";
    throw ConfigError("--format must be markdown, csv, or json");
}

// ---------------------------------------------------------------- synth ----

struct SynthArgs {
    std::string out = "seepline-out";
    std::string spec_path;
    std::int64_t n = 0;
    double missing = -1.0;
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void cmd_synth(const SynthArgs& a) {
    SyntheticSpec spec =
        a.spec_path.empty() ? SyntheticSpec::defaults() : SyntheticSpec::from_json(parse_json_file(a.spec_path));
    if (a.n > 0) spec.n = a.n;
    if (a.missing >= 0.0) spec.missing_fraction = a.missing;
    if (a.seed_set) spec.seed = a.seed;

    const SyntheticData data = synth(spec);
    const fs::path out = ensure_out(a.out);
    write_csv(data.observed, out / "data.csv");
    write_csv(data.truth, out / "truth.csv");
    atomic_write_file(out / "synth-spec.json", spec.to_json().dump(2) + "\n");
    std::cout << "wrote " << data.observed.rows() << " frames x " << data.observed.channels()
              << " channels to " << (out / "data.csv").string() << " (truth sidecar alongside)\n";
}

// --------------------------------------------------------------- impute ----

struct ImputeArgs {
    std::string input;
    std::string target;
    std::vector<std::string> predictors;
    int trees = 100;
    int max_depth = 12;
    int min_leaf = 2;
    int features = 0;
    std::uint64_t seed = 0;
    std::string out = "seepline-out";
};

void cmd_impute(const ImputeArgs& a) {
    RfHyperparams hp;
    hp.trees = a.trees;
    hp.max_depth = a.max_depth;
    hp.min_samples_leaf = a.min_leaf;
    hp.feature_subset = a.features;
    hp.seed = a.seed;

    const MonitoringSeries series = ingest_csv(a.input);
    const ImputeReport report = ni_impute(series, a.target, a.predictors, hp);

    const fs::path out = ensure_out(a.out);
    write_csv(report.series, out / "imputed.csv");
    nlohmann::json summary{{"target", a.target},
                           {"predictors", a.predictors},
                           {"filled", report.filled},
                           {"filled_rows", report.filled_rows}};
    atomic_write_file(out / "impute-report.json", summary.dump(2) + "\n");
    std::cout << "filled " << report.filled << " cell(s) of '" << a.target << "' -> "
              << (out / "imputed.csv").string() << "\n";
}

// -------------------------------------------------------------- denoise ----

struct DenoiseArgs {
    std::string input;
    std::vector<std::string> channels;
    std::string family = "db4";
    int level = 4;
    std::string mode = "soft";
    std::string boundary = "symmetric";
    std::string out = "seepline-out";
};

void cmd_denoise(const DenoiseArgs& a) {
    MonitoringSeries series = ingest_csv(a.input);
    const auto& fp = wavelet::filters(a.family);
    const auto mode = wavelet::shrink_mode_from_name(a.mode);
    const auto boundary = wavelet::boundary_from_name(a.boundary);

    std::vector<std::string> channels = a.channels;
    if (channels.empty()) channels = series.channel_ids();

    const fs::path out = ensure_out(a.out);
    for (const auto& ch : channels) {
        const Eigen::Index col = series.channel_index(ch);
        for (Eigen::Index r = 0; r < series.rows(); ++r) {
            if (!series.clean(r, col))
                throw InsufficientDataError("channel '" + ch + "' is not gapless at frame " +
                                            std::to_string(r) + "; impute first");
        }
        const Eigen::VectorXd v = series.values().col(col);
        series.values().col(col) = wavelet::denoise(v, fp, a.level, mode, boundary);
        const auto decomp = wavelet::decompose(v, fp, a.level, boundary);
        atomic_write_file(out / ("decomposition_" + ch + ".json"),
                          decomp.to_json().dump(2) + "\n");
    }
    write_csv(series, out / "denoised.csv");
    std::cout << "denoised " << channels.size() << " channel(s) -> "
              << (out / "denoised.csv").string() << "\n";
}

// ---------------------------------------------------------------- train ----

struct TrainArgs {
    std::string input;
    std::string station;
    std::string preset = "cnn-lstm-2";
    TrainConfig cfg;
    Eigen::Index seq_len = 10;
    std::string fit_on = "train";
    std::string out = "seepline-out";
};

void cmd_train(const TrainArgs& a) {
    Prepared p = prepare(a.input, a.station, a.seq_len, a.fit_on);
    const auto spec = nn::build_preset(a.preset, a.seq_len, a.cfg.seed);
    TrainOutcome outcome = train(spec, p.data, a.cfg);

    const fs::path out = ensure_out(a.out);
    const std::string stats_text = p.stats.to_json().dump(2) + "\n";
    atomic_write_file(out / "stats.json", stats_text);
    atomic_write_file(out / ("dataset_" + a.station + ".json"),
                      dataset_manifest(p.data, p.stats, p.input_digest).dump(2) + "\n");
    const auto cp = make_checkpoint(outcome, a.cfg, a.station, digest_hex(stats_text));
    atomic_write_file(out / ("checkpoint_" + a.station + ".json"), cp.to_json().dump(2) + "\n");

    std::cout << "trained " << a.preset << " on '" << a.station << "': "
              << outcome.train_loss.size() << " epoch(s), best epoch " << outcome.best_epoch
              << ", final train loss " << format_double(outcome.train_loss.back()) << " -> "
              << (out / ("checkpoint_" + a.station + ".json")).string() << "\n";
}

// -------------------------------------------------------------- predict ----

struct PredictArgs {
    std::string checkpoint;
    std::string stats;
    std::string input;
    std::string out = "seepline-out";
};

void cmd_predict(const PredictArgs& a) {
    const Checkpoint cp = Checkpoint::from_json(parse_json_file(a.checkpoint));
    const auto stats = NormalizationStats::from_json(parse_json_file(a.stats));
    nn::Network net = restore_network(cp);

    const MonitoringSeries raw = ingest_csv(a.input);
    const MonitoringSeries normalized = zscore_apply(raw, stats);
    const Eigen::Index L = cp.spec.input_len;
    const Eigen::Index col = raw.channel_index(cp.channel);

    auto stats_col = [&]() {
        for (std::size_t i = 0; i < stats.channel_ids.size(); ++i)
            if (stats.channel_ids[i] == cp.channel) return static_cast<Eigen::Index>(i);
        throw SchemaError("channel '" + cp.channel + "' missing from normalization stats");
    }();

    // In-sample predictions wherever a full window plus target exists.
    const ForecastDataset ds = make_windows(normalized, L, cp.channel);
    std::string csv = "timestamp,truth,prediction\n";
    for (Eigen::Index w = 0; w < ds.count(); ++w) {
        const Eigen::Index frame = ds.start_frames[static_cast<std::size_t>(w)] + L;
        const double pred = stats.denormalize(stats_col, net.predict_one(ds.inputs.row(w)));
        csv += std::to_string(raw.timestamps()(frame)) + "," +
               format_double(raw.values()(frame, col)) + "," + format_double(pred) + "\n";
    }
    const fs::path out = ensure_out(a.out);
    atomic_write_file(out / ("predictions_" + cp.channel + ".csv"), csv);

    // One step beyond the end of the series, if the tail is gapless.
    bool tail_clean = raw.rows() >= L;
    for (Eigen::Index r = raw.rows() - L; tail_clean && r < raw.rows(); ++r)
        tail_clean = raw.clean(r, col);
    if (tail_clean) {
        const Eigen::VectorXd window =
            normalized.values().col(col).tail(L);
        const double next = predict(net, window, stats, cp.channel);
        std::cout << "next '" << cp.channel << "' forecast: " << format_double(next) << "\n";
    } else {
        std::cout << "series tail has gaps; no one-step forecast\n";
    }
    std::cout << ds.count() << " window prediction(s) -> "
              << (out / ("predictions_" + cp.channel + ".csv")).string() << "\n";
}

// ------------------------------------------------------------- evaluate ----

struct EvaluateArgs {
    std::string checkpoint;
    std::string stats;
    std::string input;
    std::string format = "markdown";
    std::string out = "seepline-out";
};

void cmd_evaluate(const EvaluateArgs& a) {
    const Checkpoint cp = Checkpoint::from_json(parse_json_file(a.checkpoint));
    const auto stats = NormalizationStats::from_json(parse_json_file(a.stats));
    nn::Network net = restore_network(cp);

    const MonitoringSeries raw = ingest_csv(a.input);
    const ForecastDataset ds = make_windows(zscore_apply(raw, stats), cp.spec.input_len, cp.channel);

    EvalReport report;
    report.rows.push_back(evaluate_model(net, ds, stats, cp.channel,
                                         fs::path(a.checkpoint).stem().string(), 0.0));
    const std::string rendered = render_report(report, a.format);
    const fs::path out = ensure_out(a.out);
    const std::string ext = a.format == "markdown" ? "md" : a.format;
    atomic_write_file(out / ("eval." + ext), rendered);
    std::cout << rendered;
}

// ---------------------------------------------------------------- sweep ----

struct SweepArgs {
    std::string input;
    std::string station;
    std::string grid_path;
    TrainConfig cfg;
    Eigen::Index seq_len = 10;
    std::string fit_on = "train";
    std::string format = "markdown";
    std::string out = "seepline-out";
};

void cmd_sweep(const SweepArgs& a) {
    Prepared p = prepare(a.input, a.station, a.seq_len, a.fit_on);
    std::vector<SweepEntry> grid;
    if (a.grid_path.empty()) {
        grid = default_sweep_grid();
    } else {
        const auto j = parse_json_file(a.grid_path);
        if (!j.is_array()) throw SchemaError("sweep grid must be a JSON array");
        for (const auto& je : j) grid.push_back(SweepEntry::from_json(je));
    }
    const EvalReport report = sweep(grid, p.data, p.stats, a.cfg, a.station);

    const fs::path out = ensure_out(a.out);
    atomic_write_file(out / "sweep.csv", report.to_csv());
    atomic_write_file(out / "sweep.json", report.to_json().dump(2) + "\n");
    std::cout << render_report(report, a.format);
}

// ------------------------------------------------------------------ run ----

struct RunArgs {
    std::string config_path;
    const CLI::App* cmd = nullptr;  // for given-on-the-command-line checks
    // Flags land here and override config-file fields when provided. Presence
    // is detected through the parser, not sentinel values, so an explicit bad
    // value (say --epochs 0) reaches validation instead of being ignored.
    std::string input, out, preset, fit_on, truth, family, mode, boundary, scope;
    std::vector<std::string> stations, drivers, predictors;
    int epochs = 0, batch = 0, level = 0, trees = 0, patience = 0;
    double lr = 0, wd = 0;
    Eigen::Index seq_len = 0;
    std::uint64_t seed = 0;
    bool seed_set = false, no_impute = false, no_wavelet = false;
};

void cmd_run(RunArgs& a) {
    PipelineConfig cfg = a.config_path.empty()
                             ? PipelineConfig{}
                             : PipelineConfig::from_json(parse_json_file(a.config_path));
    const auto given = [&a](const std::string& flag) {
        return a.cmd != nullptr && a.cmd->count(flag) > 0;
    };
    if (given("--input")) cfg.input = a.input;
    if (given("--out")) cfg.out = a.out;
    if (given("--stations")) cfg.stations = a.stations;
    if (given("--drivers")) cfg.drivers = a.drivers;
    if (given("--predictors")) cfg.impute.predictors = a.predictors;
    if (given("--preset")) {
        cfg.preset = a.preset;
        cfg.layers.clear();
    }
    if (given("--epochs")) cfg.train.epochs = a.epochs;
    if (given("--batch")) cfg.train.batch = a.batch;
    if (given("--patience")) cfg.train.patience = a.patience;
    if (given("--lr")) cfg.train.lr = a.lr;
    if (given("--wd")) cfg.train.weight_decay = a.wd;
    if (given("--seq-len")) cfg.window_len = a.seq_len;
    if (given("--fit-on")) cfg.fit_on = a.fit_on;
    if (given("--truth")) cfg.truth = a.truth;
    if (given("--wavelet")) cfg.wavelet.family = a.family;
    if (given("--level")) cfg.wavelet.level = a.level;
    if (given("--mode")) cfg.wavelet.mode = a.mode;
    if (given("--boundary")) cfg.wavelet.boundary = a.boundary;
    if (given("--wavelet-scope")) cfg.wavelet.scope = a.scope;
    if (given("--trees")) cfg.impute.trees = a.trees;
    if (a.no_impute) cfg.impute.enabled = false;
    if (a.no_wavelet) cfg.wavelet.enabled = false;
    if (a.seed_set) cfg.seed = a.seed;

    const RunResult result = run_pipeline(cfg);
    std::cout << result.report.to_markdown();
    std::cout << "manifest " << result.manifest.at("manifest_digest").get<std::string>() << " -> "
              << (result.out_dir / "manifest.json").string() << "\n";
}

// ------------------------------------------------------------ plot-data ----

struct PlotArgs {
    std::string artifact;
    std::string kind;
    std::string out = "seepline-out";
    std::string name;
};

void cmd_plot(const PlotArgs& a) {
    const std::string content = emit_plot_data(a.artifact, a.kind);
    const fs::path out = ensure_out(a.out);
    const std::string name = a.name.empty() ? "plot_" + a.kind + ".csv" : a.name;
    atomic_write_file(out / name, content);
    std::cout << (out / name).string() << "\n";
}

void add_train_flags(CLI::App* cmd, TrainConfig& cfg) {
    cmd->add_option("--epochs", cfg.epochs, "Training epochs")->capture_default_str();
    cmd->add_option("--batch", cfg.batch, "Batch size")->capture_default_str();
    cmd->add_option("--lr", cfg.lr, "Adam learning rate")->capture_default_str();
    cmd->add_option("--wd", cfg.weight_decay, "Decoupled weight decay")->capture_default_str();
    cmd->add_option("--loss", cfg.loss, "Loss history metric: mse|rmse")->capture_default_str();
    cmd->add_option("--patience", cfg.patience, "Early-stopping patience")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Saturation-line toolkit: imputation, wavelet denoising, forecasting"};
    app.require_subcommand(1);

    std::uint64_t default_seed = 0;
    try {
        default_seed = env_seed();
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    }

    SynthArgs synth_args;
    synth_args.seed = default_seed;
    auto* c_synth = app.add_subcommand("synth", "Generate coupled synthetic monitoring data");
    c_synth->add_option("--out", synth_args.out, "Output directory")->capture_default_str();
    c_synth->add_option("--spec", synth_args.spec_path, "Synthetic spec JSON");
    c_synth->add_option("--n", synth_args.n, "Frame count override");
    c_synth->add_option("--missing", synth_args.missing, "Missing-cell fraction override");
    auto* synth_seed = c_synth->add_option("--seed", synth_args.seed, "Generator seed");

    ImputeArgs impute_args;
    impute_args.seed = default_seed;
    auto* c_impute = app.add_subcommand("impute", "Fill gaps from predictor channels");
    c_impute->add_option("--input", impute_args.input, "Input CSV")->required();
    c_impute->add_option("--target", impute_args.target, "Channel to fill")->required();
    c_impute->add_option("--predictors", impute_args.predictors, "Predictor channels")
        ->required()
        ->delimiter(',');
    c_impute->add_option("--trees", impute_args.trees, "Forest size")->capture_default_str();
    c_impute->add_option("--max-depth", impute_args.max_depth, "Tree depth cap")
        ->capture_default_str();
    c_impute->add_option("--min-leaf", impute_args.min_leaf, "Minimum samples per leaf")
        ->capture_default_str();
    c_impute->add_option("--features", impute_args.features,
                         "Features tried per split (0 = d/3)")
        ->capture_default_str();
    c_impute->add_option("--seed", impute_args.seed, "Forest seed");
    c_impute->add_option("--out", impute_args.out, "Output directory")->capture_default_str();

    DenoiseArgs denoise_args;
    auto* c_denoise = app.add_subcommand("denoise", "Wavelet-threshold channels");
    c_denoise->add_option("--input", denoise_args.input, "Input CSV")->required();
    c_denoise->add_option("--channels", denoise_args.channels, "Channels (default: all)")
        ->delimiter(',');
    c_denoise->add_option("--wavelet", denoise_args.family, "haar|db2|db4")
        ->capture_default_str();
    c_denoise->add_option("--level", denoise_args.level, "Decomposition depth")
        ->capture_default_str();
    c_denoise->add_option("--mode", denoise_args.mode, "soft|hard")->capture_default_str();
    c_denoise->add_option("--boundary", denoise_args.boundary, "symmetric|periodic")
        ->capture_default_str();
    c_denoise->add_option("--out", denoise_args.out, "Output directory")->capture_default_str();

    TrainArgs train_args;
    train_args.cfg.seed = default_seed;
    auto* c_train = app.add_subcommand("train", "Train a forecaster for one station");
    c_train->add_option("--input", train_args.input, "Input CSV")->required();
    c_train->add_option("--station", train_args.station, "Channel to forecast")->required();
    c_train->add_option("--preset", train_args.preset,
                        "mlp|rnn|gru|lstm|cnn-lstm-1|cnn-lstm-2")
        ->capture_default_str();
    add_train_flags(c_train, train_args.cfg);
    c_train->add_option("--seq-len", train_args.seq_len, "Window length")->capture_default_str();
    c_train->add_option("--fit-on", train_args.fit_on, "Normalization fit range: train|all")
        ->capture_default_str();
    c_train->add_option("--seed", train_args.cfg.seed, "Initialization seed");
    c_train->add_option("--out", train_args.out, "Output directory")->capture_default_str();

    PredictArgs predict_args;
    auto* c_predict = app.add_subcommand("predict", "Predict with a trained checkpoint");
    c_predict->add_option("--checkpoint", predict_args.checkpoint, "Checkpoint JSON")->required();
    c_predict->add_option("--stats", predict_args.stats, "Normalization stats JSON")->required();
    c_predict->add_option("--input", predict_args.input, "Input CSV")->required();
    c_predict->add_option("--out", predict_args.out, "Output directory")->capture_default_str();

    EvaluateArgs eval_args;
    auto* c_eval = app.add_subcommand("evaluate", "Score a checkpoint on the test split");
    c_eval->add_option("--checkpoint", eval_args.checkpoint, "Checkpoint JSON")->required();
    c_eval->add_option("--stats", eval_args.stats, "Normalization stats JSON")->required();
    c_eval->add_option("--input", eval_args.input, "Input CSV")->required();
    c_eval->add_option("--format", eval_args.format, "markdown|csv|json")->capture_default_str();
    c_eval->add_option("--out", eval_args.out, "Output directory")->capture_default_str();

    SweepArgs sweep_args;
    sweep_args.cfg.seed = default_seed;
    auto* c_sweep = app.add_subcommand("sweep", "Hyperparameter comparison grid");
    c_sweep->add_option("--input", sweep_args.input, "Input CSV")->required();
    c_sweep->add_option("--station", sweep_args.station, "Channel to forecast")->required();
    c_sweep->add_option("--grid", sweep_args.grid_path, "Grid JSON (default: built-in 9 cases)");
    add_train_flags(c_sweep, sweep_args.cfg);
    c_sweep->add_option("--seq-len", sweep_args.seq_len, "Window length")->capture_default_str();
    c_sweep->add_option("--fit-on", sweep_args.fit_on, "Normalization fit range: train|all")
        ->capture_default_str();
    c_sweep->add_option("--format", sweep_args.format, "markdown|csv|json")
        ->capture_default_str();
    c_sweep->add_option("--seed", sweep_args.cfg.seed, "Shared training seed");
    c_sweep->add_option("--out", sweep_args.out, "Output directory")->capture_default_str();

    RunArgs run_args;
    run_args.seed = default_seed;
    run_args.seed_set = default_seed != 0;
    auto* c_run = app.add_subcommand("run", "Full pipeline: impute, denoise, train, evaluate");
    run_args.cmd = c_run;
    c_run->add_option("--config", run_args.config_path, "Pipeline config JSON");
    c_run->add_option("--input", run_args.input, "Input CSV");
    c_run->add_option("--out", run_args.out, "Output directory");
    c_run->add_option("--stations", run_args.stations, "Stations to model")->delimiter(',');
    c_run->add_option("--drivers", run_args.drivers, "Driver channels")->delimiter(',');
    c_run->add_option("--predictors", run_args.predictors, "Imputation predictors")
        ->delimiter(',');
    c_run->add_option("--preset", run_args.preset, "Network preset");
    c_run->add_option("--epochs", run_args.epochs, "Training epochs");
    c_run->add_option("--batch", run_args.batch, "Batch size");
    c_run->add_option("--patience", run_args.patience, "Early-stopping patience");
    c_run->add_option("--lr", run_args.lr, "Adam learning rate");
    c_run->add_option("--wd", run_args.wd, "Decoupled weight decay");
    c_run->add_option("--seq-len", run_args.seq_len, "Window length");
    c_run->add_option("--fit-on", run_args.fit_on, "train|all");
    c_run->add_option("--truth", run_args.truth, "Evaluation reference: denoised|raw");
    c_run->add_option("--wavelet", run_args.family, "haar|db2|db4");
    c_run->add_option("--level", run_args.level, "Decomposition depth");
    c_run->add_option("--mode", run_args.mode, "soft|hard");
    c_run->add_option("--boundary", run_args.boundary, "symmetric|periodic");
    c_run->add_option("--wavelet-scope", run_args.scope, "split|full");
    c_run->add_option("--trees", run_args.trees, "Imputation forest size");
    c_run->add_flag("--no-impute", run_args.no_impute, "Skip the imputation stage");
    c_run->add_flag("--no-wavelet", run_args.no_wavelet, "Skip the denoising stage");
    auto* run_seed = c_run->add_option("--seed", run_args.seed, "Global seed");

    PlotArgs plot_args;
    auto* c_plot = app.add_subcommand("plot-data", "Emit columnar plot data from an artifact");
    c_plot->add_option("--artifact", plot_args.artifact, "Stage artifact path")->required();
    c_plot
        ->add_option("--kind", plot_args.kind,
                     "correlation-heatmap|decomposition|forecast-overlay|scatter")
        ->required();
    c_plot->add_option("--out", plot_args.out, "Output directory")->capture_default_str();
    c_plot->add_option("--name", plot_args.name, "Output file name (default plot_<kind>.csv)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        synth_args.seed_set = synth_seed->count() > 0 || default_seed != 0;
        run_args.seed_set = run_seed->count() > 0 || default_seed != 0;
        if (c_synth->parsed()) cmd_synth(synth_args);
        if (c_impute->parsed()) cmd_impute(impute_args);
        if (c_denoise->parsed()) cmd_denoise(denoise_args);
        if (c_train->parsed()) cmd_train(train_args);
        if (c_predict->parsed()) cmd_predict(predict_args);
        if (c_eval->parsed()) cmd_evaluate(eval_args);
        if (c_sweep->parsed()) cmd_sweep(sweep_args);
        if (c_run->parsed()) cmd_run(run_args);
        if (c_plot->parsed()) cmd_plot(plot_args);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
