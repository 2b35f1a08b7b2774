#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "seepline/metrics.hpp"
#include "seepline/normalize.hpp"
#include "seepline/train.hpp"
#include "seepline/windowing.hpp"

namespace seepline {

/// One hyperparameter case of the published comparison grid: batch size,
/// convolution filter count, pooling size, and the LSTM stack widths.
struct SweepEntry {
    int batch = 64;
    int conv_filters = 32;
    int pool = 2;
    std::vector<int> lstm_sizes{25, 50};

    /// conv -> maxpool -> lstm stack -> flatten -> dense(1).
    nn::NetworkSpec to_spec(Eigen::Index input_len, std::uint64_t seed) const;

    std::string label() const;  // "batch=64 conv=32 pool=2 lstm=25/50"

    nlohmann::json to_json() const;
    static SweepEntry from_json(const nlohmann::json& j);
};

/// The nine published hyperparameter cases, in table order.
std::vector<SweepEntry> default_sweep_grid();

/// Test-split metrics of a trained network in original units. When
/// `truth_override` is given (length = test window count, denormalized) it
/// replaces the dataset targets as the reference series.
EvalRow evaluate_model(nn::Network& net, const ForecastDataset& data,
                       const NormalizationStats& stats, const std::string& station,
                       const std::string& model, double runtime_seconds,
                       const Eigen::VectorXd* truth_override = nullptr);

/// Trains and evaluates every grid entry on the same dataset with a shared
/// seed. Rows keep grid order; a failing entry records its error in the row
/// and the sweep continues.
EvalReport sweep(const std::vector<SweepEntry>& grid, const ForecastDataset& data,
                 const NormalizationStats& stats, const TrainConfig& cfg,
                 const std::string& station);

}  // namespace seepline
