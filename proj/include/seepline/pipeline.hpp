#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "seepline/metrics.hpp"
#include "seepline/nn.hpp"
#include "seepline/train.hpp"

namespace seepline {

struct ImputeSettings {
    bool enabled = true;
    std::vector<std::string> predictors;  // empty: fall back to the driver channels
    int trees = 100;
    int max_depth = 12;
    int min_samples_leaf = 2;
    int feature_subset = 0;  // 0: ceil(d/3) at fit time
};

struct WaveletSettings {
    bool enabled = true;
    std::string family = "db4";
    int level = 4;
    std::string mode = "soft";
    std::string boundary = "symmetric";
    /// "split" denoises the training frames and the remainder as separate
    /// segments so the test range cannot inform the training range;
    /// "full" denoises the whole series in one pass.
    std::string scope = "split";
};

/// Everything a run needs. A run is reproducible from this config, the input
/// file digest, and the seed alone; `input` and `out` locate files but do not
/// enter any digest.
struct PipelineConfig {
    std::string input;
    std::string out = "seepline-out";
    std::vector<std::string> stations;  // empty: every channel that is not a driver
    std::vector<std::string> drivers{"rainfall", "waterlevel"};
    ImputeSettings impute;
    WaveletSettings wavelet;
    std::string preset = "cnn-lstm-2";
    std::vector<nn::LayerSpec> layers;  // non-empty: explicit network instead of the preset
    Eigen::Index window_len = 10;
    TrainConfig train;  // its seed field is ignored; the global seed wins
    std::string fit_on = "train";   // normalization fit range: "train" | "all"
    std::string truth = "denoised";  // evaluation reference: "denoised" | "raw"
    std::uint64_t seed = 0;

    void validate() const;

    /// Resolved form, defaults materialized. `input`/`out` included.
    nlohmann::json to_json() const;
    /// Digest form: `to_json()` minus the `input` and `out` paths.
    nlohmann::json canonical_json() const;
    /// Unknown keys anywhere in the document are rejected.
    static PipelineConfig from_json(const nlohmann::json& j);
};

struct RunResult {
    std::filesystem::path out_dir;
    nlohmann::json manifest;
    EvalReport report;
};

/// Full pipeline: impute -> normalize -> denoise -> window -> train ->
/// evaluate, one model per station, every intermediate written atomically
/// into `cfg.out`. Stations run in parallel after the shared impute and
/// denoise stages. A stage error aborts with the stage name prefixed;
/// artifacts written before the abort are kept. The manifest digest is a
/// pure function of (config, input digest, seed): artifact runtimes are
/// excluded from all digests.
RunResult run_pipeline(const PipelineConfig& cfg);

/// Columnar plot data derived from a stage artifact:
///   correlation-heatmap  <- a series CSV (square labeled matrix)
///   decomposition        <- a decomposition JSON (oL_<L>, oH_<L>..oH_1,
///                           bands padded to the longest)
///   forecast-overlay     <- a predictions CSV (timestamp, truth, prediction)
///   scatter              <- a predictions CSV (truth, prediction pairs)
/// A missing artifact raises NotFoundError.
std::string emit_plot_data(const std::filesystem::path& artifact, const std::string& kind);

}  // namespace seepline
