#include "seepline/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <optional>
#include <sstream>
#include <thread>
#include <utility>

#include "seepline/correlation.hpp"
#include "seepline/errors.hpp"
#include "seepline/impute.hpp"
#include "seepline/io_util.hpp"
#include "seepline/monitoring.hpp"
#include "seepline/normalize.hpp"
#include "seepline/rng.hpp"
#include "seepline/sweep.hpp"
#include "seepline/wavelet.hpp"
#include "seepline/windowing.hpp"

namespace fs = std::filesystem;

namespace seepline {

namespace {

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                const char* where) {
    if (!j.is_object()) throw SchemaError(std::string(where) + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return it.key() == k; });
        if (!known)
            throw SchemaError("unknown key '" + it.key() + "' in " + where);
    }
}

/// Station id reduced to a filesystem-safe token.
std::string file_token(const std::string& id) {
    std::string out = id;
    for (char& ch : out) {
        const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                        (ch >= '0' && ch <= '9') || ch == '-' || ch == '_';
        if (!ok) ch = '_';
    }
    return out;
}

[[noreturn]] void rethrow_staged(const Error& e, const std::string& stage_name) {
    throw Error(e.kind(), "stage " + stage_name + ": " + e.what());
}

std::vector<std::string> csv_lines(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const std::string row = trim(line);
        if (!row.empty()) lines.push_back(row);
    }
    return lines;
}

}  // namespace

void PipelineConfig::validate() const {
    if (input.empty()) throw ConfigError("pipeline: input path is required");
    if (out.empty()) throw ConfigError("pipeline: output directory is required");
    if (window_len < 1) throw ConfigError("pipeline: window length must be >= 1");
    if (fit_on != "train" && fit_on != "all")
        throw ConfigError("pipeline: fit_on must be 'train' or 'all'");
    if (truth != "denoised" && truth != "raw")
        throw ConfigError("pipeline: truth must be 'denoised' or 'raw'");
    if (wavelet.enabled) {
        if (wavelet.level < 1) throw ConfigError("pipeline: wavelet level must be >= 1");
        if (wavelet.scope != "split" && wavelet.scope != "full")
            throw ConfigError("pipeline: wavelet scope must be 'split' or 'full'");
        wavelet::filters(wavelet.family);
        wavelet::shrink_mode_from_name(wavelet.mode);
        wavelet::boundary_from_name(wavelet.boundary);
    }
    if (impute.enabled) {
        if (impute.trees < 1) throw ConfigError("pipeline: impute.trees must be >= 1");
        if (impute.max_depth < 1) throw ConfigError("pipeline: impute.max_depth must be >= 1");
        if (impute.min_samples_leaf < 1)
            throw ConfigError("pipeline: impute.min_samples_leaf must be >= 1");
        if (impute.feature_subset < 0)
            throw ConfigError("pipeline: impute.feature_subset must be >= 0");
    }
    train.validate();
    if (layers.empty()) nn::build_preset(preset, window_len, 0);  // name check only
}

nlohmann::json PipelineConfig::to_json() const {
    nlohmann::json jt = train.to_json();
    jt.erase("seed");  // the global seed is authoritative
    nlohmann::json network;
    if (layers.empty()) {
        network = nlohmann::json{{"preset", preset}};
    } else {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& l : layers) arr.push_back(l.to_json());
        network = nlohmann::json{{"layers", arr}};
    }
    return nlohmann::json{
        {"input", input},
        {"out", out},
        {"stations", stations},
        {"drivers", drivers},
        {"impute",
         {{"enabled", impute.enabled},
          {"predictors", impute.predictors},
          {"trees", impute.trees},
          {"max_depth", impute.max_depth},
          {"min_samples_leaf", impute.min_samples_leaf},
          {"feature_subset", impute.feature_subset}}},
        {"wavelet",
         {{"enabled", wavelet.enabled},
          {"family", wavelet.family},
          {"level", wavelet.level},
          {"mode", wavelet.mode},
          {"boundary", wavelet.boundary},
          {"scope", wavelet.scope}}},
        {"network", network},
        {"window_len", window_len},
        {"train", jt},
        {"fit_on", fit_on},
        {"truth", truth},
        {"seed", seed}};
}

nlohmann::json PipelineConfig::canonical_json() const {
    nlohmann::json j = to_json();
    j.erase("input");
    j.erase("out");
    return j;
}

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("pipeline config must be a JSON object");
    check_keys(j,
               {"input", "out", "stations", "drivers", "impute", "wavelet", "network",
                "window_len", "train", "fit_on", "truth", "seed"},
               "pipeline config");
    PipelineConfig cfg;
    try {
        cfg.input = j.value("input", cfg.input);
        cfg.out = j.value("out", cfg.out);
        if (j.contains("stations"))
            cfg.stations = j.at("stations").get<std::vector<std::string>>();
        if (j.contains("drivers")) cfg.drivers = j.at("drivers").get<std::vector<std::string>>();
        if (j.contains("impute")) {
            const auto& ji = j.at("impute");
            check_keys(ji,
                       {"enabled", "predictors", "trees", "max_depth", "min_samples_leaf",
                        "feature_subset"},
                       "impute settings");
            cfg.impute.enabled = ji.value("enabled", cfg.impute.enabled);
            if (ji.contains("predictors"))
                cfg.impute.predictors = ji.at("predictors").get<std::vector<std::string>>();
            cfg.impute.trees = ji.value("trees", cfg.impute.trees);
            cfg.impute.max_depth = ji.value("max_depth", cfg.impute.max_depth);
            cfg.impute.min_samples_leaf = ji.value("min_samples_leaf", cfg.impute.min_samples_leaf);
            cfg.impute.feature_subset = ji.value("feature_subset", cfg.impute.feature_subset);
        }
        if (j.contains("wavelet")) {
            const auto& jw = j.at("wavelet");
            check_keys(jw, {"enabled", "family", "level", "mode", "boundary", "scope"},
                       "wavelet settings");
            cfg.wavelet.enabled = jw.value("enabled", cfg.wavelet.enabled);
            cfg.wavelet.family = jw.value("family", cfg.wavelet.family);
            cfg.wavelet.level = jw.value("level", cfg.wavelet.level);
            cfg.wavelet.mode = jw.value("mode", cfg.wavelet.mode);
            cfg.wavelet.boundary = jw.value("boundary", cfg.wavelet.boundary);
            cfg.wavelet.scope = jw.value("scope", cfg.wavelet.scope);
        }
        if (j.contains("network")) {
            const auto& jn = j.at("network");
            check_keys(jn, {"preset", "layers"}, "network settings");
            if (jn.contains("preset") && jn.contains("layers"))
                throw SchemaError("network settings: give a preset or explicit layers, not both");
            if (jn.contains("preset")) cfg.preset = jn.at("preset").get<std::string>();
            if (jn.contains("layers")) {
                cfg.layers.clear();
                for (const auto& jl : jn.at("layers"))
                    cfg.layers.push_back(nn::LayerSpec::from_json(jl));
            }
        }
        if (j.contains("window_len")) cfg.window_len = j.at("window_len").get<Eigen::Index>();
        if (j.contains("train")) {
            const auto& jt = j.at("train");
            check_keys(jt, {"epochs", "batch", "lr", "weight_decay", "loss", "patience"},
                       "train settings");
            cfg.train = TrainConfig::from_json(jt);
        }
        cfg.fit_on = j.value("fit_on", cfg.fit_on);
        cfg.truth = j.value("truth", cfg.truth);
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const nlohmann::json::exception& ex) {
        throw SchemaError(std::string("pipeline config: ") + ex.what());
    }
    return cfg;
}

std::string emit_plot_data(const fs::path& artifact, const std::string& kind) {
    const bool known = kind == "correlation-heatmap" || kind == "decomposition" ||
                       kind == "forecast-overlay" || kind == "scatter";
    if (!known) throw ConfigError("unknown plot kind: " + kind);
    if (!fs::exists(artifact))
        throw NotFoundError("plot artifact not found: " + artifact.string());

    if (kind == "correlation-heatmap") {
        return correlation_matrix(ingest_csv(artifact)).to_csv();
    }

    if (kind == "decomposition") {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_file(artifact));
        } catch (const nlohmann::json::exception& ex) {
            throw SchemaError(std::string("decomposition artifact: ") + ex.what());
        }
        const auto d = wavelet::Decomposition::from_json(j);
        if (static_cast<int>(d.details.size()) != d.level)
            throw SchemaError("decomposition artifact: band count does not match level");

        std::vector<std::string> names{"oL_" + std::to_string(d.level)};
        std::vector<const Eigen::VectorXd*> bands{&d.approx};
        for (int k = d.level; k >= 1; --k) {
            names.push_back("oH_" + std::to_string(k));
            bands.push_back(&d.details[static_cast<std::size_t>(k - 1)]);
        }
        Eigen::Index rows = 0;
        for (const auto* b : bands) rows = std::max(rows, b->size());

        std::string out;
        for (std::size_t c = 0; c < names.size(); ++c) {
            if (c > 0) out += ',';
            out += names[c];
        }
        out += '\n';
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < bands.size(); ++c) {
                if (c > 0) out += ',';
                if (r < bands[c]->size()) out += format_double((*bands[c])(r));
            }
            out += '\n';
        }
        return out;
    }

    // forecast-overlay and scatter read a predictions CSV.
    const auto lines = csv_lines(read_file(artifact));
    if (lines.empty() || lines[0] != "timestamp,truth,prediction")
        throw SchemaError("predictions artifact: expected header timestamp,truth,prediction");
    std::string out = kind == "scatter" ? "truth,prediction\n" : lines[0] + "\n";
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const auto cells = split(lines[i], ',');
        if (cells.size() != 3)
            throw SchemaError("predictions artifact: row " + std::to_string(i + 1) +
                              " does not have 3 cells");
        if (kind == "scatter")
            out += cells[1] + "," + cells[2] + "\n";
        else
            out += lines[i] + "\n";
    }
    return out;
}

namespace {

/// Per-station products, filled by a worker thread and written afterwards so
/// completed artifacts survive a failure elsewhere.
struct StationSlot {
    std::string station;
    std::optional<std::string> dataset_json;
    std::optional<std::string> checkpoint_json;
    std::optional<std::string> predictions_csv;
    std::optional<EvalRow> row;
    std::string failed_stage;
    std::exception_ptr error;
};

}  // namespace

RunResult run_pipeline(const PipelineConfig& cfg) {
    cfg.validate();
    const fs::path out_dir(cfg.out);
    fs::create_directories(out_dir);

    const fs::path input_path(cfg.input);
    if (!fs::exists(input_path))
        throw NotFoundError("pipeline: input not found: " + cfg.input);
    const std::string input_digest = digest_file(input_path);
    MonitoringSeries series = ingest_csv(input_path);

    std::vector<std::string> stations = cfg.stations;
    if (stations.empty()) {
        for (const auto& ch : series.channel_ids()) {
            if (std::find(cfg.drivers.begin(), cfg.drivers.end(), ch) == cfg.drivers.end())
                stations.push_back(ch);
        }
    }
    if (stations.empty()) throw ConfigError("pipeline: no station channels to model");
    for (const auto& s : stations) series.channel_index(s);

    std::vector<std::string> predictors =
        cfg.impute.predictors.empty() ? cfg.drivers : cfg.impute.predictors;
    if (cfg.impute.enabled) {
        if (predictors.empty())
            throw ConfigError("pipeline: imputation enabled but no predictor channels");
        for (const auto& p : predictors) series.channel_index(p);
    }

    nlohmann::json stage_digests = nlohmann::json::object();
    auto put_artifact = [&](const char* stage_name, const std::string& name,
                            const std::string& content) {
        atomic_write_file(out_dir / name, content);
        stage_digests[stage_name][name] = digest_hex(content);
    };

    atomic_write_file(out_dir / "config.json", cfg.to_json().dump(2) + "\n");

    // ---- impute ----
    MonitoringSeries imputed = std::move(series);
    try {
        if (cfg.impute.enabled) {
            RfHyperparams hp;
            hp.trees = cfg.impute.trees;
            hp.max_depth = cfg.impute.max_depth;
            hp.min_samples_leaf = cfg.impute.min_samples_leaf;
            hp.feature_subset = cfg.impute.feature_subset;
            for (std::size_t i = 0; i < stations.size(); ++i) {
                const Eigen::Index col = imputed.channel_index(stations[i]);
                bool has_gap = false;
                for (Eigen::Index r = 0; r < imputed.rows() && !has_gap; ++r)
                    has_gap = !imputed.clean(r, col);
                if (!has_gap) continue;
                hp.seed = Rng::substream(cfg.seed, "imputation", i).next_u64();
                imputed = ni_impute(imputed, stations[i], predictors, hp).series;
            }
        }
        put_artifact("impute", "imputed.csv", to_csv(imputed));
    } catch (const Error& e) {
        rethrow_staged(e, "impute");
    }

    // ---- normalize ----
    NormalizationStats stats;
    MonitoringSeries work;
    std::string stats_digest;
    try {
        const Eigen::Index fit_end =
            cfg.fit_on == "all" ? imputed.rows() : chrono_split(imputed.rows()).train_end;
        stats = zscore_fit(imputed, FrameRange{0, fit_end});
        work = zscore_apply(imputed, stats);
        const std::string stats_text = stats.to_json().dump(2) + "\n";
        stats_digest = digest_hex(stats_text);
        put_artifact("normalize", "stats.json", stats_text);
    } catch (const Error& e) {
        rethrow_staged(e, "normalize");
    }

    // ---- denoise ----
    stage_digests["denoise"] = nlohmann::json::object();
    if (cfg.wavelet.enabled) {
        try {
            const auto& fp = wavelet::filters(cfg.wavelet.family);
            const auto mode = wavelet::shrink_mode_from_name(cfg.wavelet.mode);
            const auto boundary = wavelet::boundary_from_name(cfg.wavelet.boundary);
            const Eigen::Index n = work.rows();
            const Eigen::Index train_frames = chrono_split(n).train_end;
            for (const auto& st : stations) {
                const Eigen::Index col = work.channel_index(st);
                for (Eigen::Index r = 0; r < n; ++r) {
                    if (!work.clean(r, col))
                        throw InsufficientDataError(
                            "channel '" + st + "' is not gapless at frame " + std::to_string(r) +
                            "; denoising needs imputation first");
                }
                const Eigen::VectorXd v = work.values().col(col);
                Eigen::VectorXd d(n);
                if (cfg.wavelet.scope == "full") {
                    d = wavelet::denoise(v, fp, cfg.wavelet.level, mode, boundary);
                } else {
                    d.head(train_frames) = wavelet::denoise(v.head(train_frames), fp,
                                                            cfg.wavelet.level, mode, boundary);
                    d.tail(n - train_frames) = wavelet::denoise(v.tail(n - train_frames), fp,
                                                                cfg.wavelet.level, mode, boundary);
                }
                work.values().col(col) = d;
                const auto decomp = wavelet::decompose(v, fp, cfg.wavelet.level, boundary);
                put_artifact("denoise", "decomposition_" + file_token(st) + ".json",
                             decomp.to_json().dump(2) + "\n");
            }
            put_artifact("denoise", "denoised.csv", to_csv(zscore_invert(work, stats)));
        } catch (const Error& e) {
            rethrow_staged(e, "denoise");
        }
    }

    // ---- window / train / evaluate, one worker per station ----
    const std::string model_label = cfg.layers.empty() ? cfg.preset : "custom";
    std::vector<StationSlot> slots(stations.size());
    auto run_station = [&](std::size_t idx) {
        StationSlot& slot = slots[idx];
        const char* stage_name = "window";
        try {
            const Eigen::Index col = imputed.channel_index(slot.station);
            ForecastDataset ds = make_windows(work, cfg.window_len, slot.station);
            slot.dataset_json = dataset_manifest(ds, stats, input_digest).dump(2) + "\n";

            stage_name = "train";
            nn::NetworkSpec spec;
            if (cfg.layers.empty()) {
                spec = nn::build_preset(cfg.preset, cfg.window_len, cfg.seed);
            } else {
                spec.layers = cfg.layers;
                spec.input_len = cfg.window_len;
                spec.input_channels = 1;
                spec.seed = cfg.seed;
            }
            TrainConfig tc = cfg.train;
            tc.seed = cfg.seed;
            TrainOutcome outcome = train(spec, ds, tc);
            slot.checkpoint_json =
                make_checkpoint(outcome, tc, slot.station, stats_digest).to_json().dump(2) + "\n";

            stage_name = "evaluate";
            const bool use_raw = cfg.truth == "raw";
            const Eigen::Index n_test = ds.split.total - ds.split.val_end;
            Eigen::VectorXd raw_truth(n_test);
            for (Eigen::Index i = 0; i < n_test; ++i) {
                const Eigen::Index frame =
                    ds.start_frames[static_cast<std::size_t>(ds.split.val_end + i)] +
                    cfg.window_len;
                raw_truth(i) = imputed.values()(frame, col);
            }
            slot.row = evaluate_model(outcome.net, ds, stats, slot.station, model_label,
                                      outcome.runtime_seconds, use_raw ? &raw_truth : nullptr);

            std::string pred_csv = "timestamp,truth,prediction\n";
            for (Eigen::Index i = 0; i < n_test; ++i) {
                const Eigen::Index w = ds.split.val_end + i;
                const Eigen::Index frame =
                    ds.start_frames[static_cast<std::size_t>(w)] + cfg.window_len;
                const double pred =
                    stats.denormalize(col, outcome.net.predict_one(ds.inputs.row(w)));
                const double truth_v =
                    use_raw ? raw_truth(i) : stats.denormalize(col, ds.targets(w));
                pred_csv += std::to_string(imputed.timestamps()(frame)) + "," +
                            format_double(truth_v) + "," + format_double(pred) + "\n";
            }
            slot.predictions_csv = std::move(pred_csv);
        } catch (...) {
            slot.failed_stage = stage_name;
            slot.error = std::current_exception();
        }
    };

    {
        std::vector<std::thread> workers;
        workers.reserve(stations.size());
        for (std::size_t i = 0; i < stations.size(); ++i) {
            slots[i].station = stations[i];
            workers.emplace_back(run_station, i);
        }
        for (auto& t : workers) t.join();
    }

    for (const auto& slot : slots) {
        const std::string token = file_token(slot.station);
        if (slot.dataset_json) put_artifact("window", "dataset_" + token + ".json", *slot.dataset_json);
        if (slot.checkpoint_json)
            put_artifact("train", "checkpoint_" + token + ".json", *slot.checkpoint_json);
        if (slot.predictions_csv)
            put_artifact("evaluate", "predictions_" + token + ".csv", *slot.predictions_csv);
    }
    for (const auto& slot : slots) {
        if (!slot.error) continue;
        try {
            std::rethrow_exception(slot.error);
        } catch (const Error& e) {
            throw Error(e.kind(),
                        "stage " + slot.failed_stage + " (station " + slot.station + "): " + e.what());
        }
        // non-Error exceptions propagate unchanged
    }

    EvalReport report;
    report.rows.reserve(slots.size());
    for (const auto& slot : slots) report.rows.push_back(*slot.row);
    {
        EvalReport stripped = report;  // manifest digests exclude runtimes
        for (auto& r : stripped.rows) r.runtime_seconds = 0.0;
        atomic_write_file(out_dir / "eval.csv", report.to_csv());
        atomic_write_file(out_dir / "eval.json", report.to_json().dump(2) + "\n");
        stage_digests["evaluate"]["eval.csv"] = digest_hex(stripped.to_csv());
        stage_digests["evaluate"]["eval.json"] = digest_hex(stripped.to_json().dump(2) + "\n");
    }

    // ---- plot data ----
    nlohmann::json plots = nlohmann::json::object();
    auto put_plot = [&](const std::string& name, const std::string& content) {
        atomic_write_file(out_dir / name, content);
        plots[name] = digest_hex(content);
    };
    try {
        put_plot("plot_correlation-heatmap.csv",
                 emit_plot_data(out_dir / "imputed.csv", "correlation-heatmap"));
        for (const auto& st : stations) {
            const std::string token = file_token(st);
            const fs::path preds = out_dir / ("predictions_" + token + ".csv");
            put_plot("plot_forecast-overlay_" + token + ".csv",
                     emit_plot_data(preds, "forecast-overlay"));
            put_plot("plot_scatter_" + token + ".csv", emit_plot_data(preds, "scatter"));
            if (cfg.wavelet.enabled) {
                put_plot("plot_decomposition_" + token + ".csv",
                         emit_plot_data(out_dir / ("decomposition_" + token + ".json"),
                                        "decomposition"));
            }
        }
    } catch (const Error& e) {
        rethrow_staged(e, "plot-data");
    }

    nlohmann::json manifest;
    manifest["version"] = 1;
    manifest["seed"] = cfg.seed;
    manifest["config_digest"] = digest_hex(cfg.canonical_json().dump());
    manifest["input_digest"] = input_digest;
    manifest["stages"] = stage_digests;
    manifest["plots"] = plots;
    manifest["manifest_digest"] = digest_hex(manifest.dump());
    atomic_write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

    return RunResult{out_dir, manifest, report};
}

}  // namespace seepline
