#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "seepline/nn.hpp"
#include "seepline/normalize.hpp"
#include "seepline/windowing.hpp"

namespace seepline {

/// Optimization settings. `loss` names the recorded criterion ("mse" or
/// "rmse"); both minimize mean squared error, sharing the argmin.
struct TrainConfig {
    int epochs = 120;
    int batch = 64;
    double lr = 0.001;
    double weight_decay = 0.005;
    std::string loss = "mse";
    int patience = 15;  // epochs of stalled validation loss before stopping
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError on out-of-range settings
    nlohmann::json to_json() const;
    static TrainConfig from_json(const nlohmann::json& j);
};

struct TrainOutcome {
    nn::Network net;                 // parameters from the best validation epoch
    std::vector<double> train_loss;  // one entry per completed epoch
    std::vector<double> val_loss;    // empty when the split has no validation windows
    Eigen::Index best_epoch = 0;     // 0-based epoch the returned parameters came from
    bool early_stopped = false;
    double runtime_seconds = 0.0;
};

/// Mini-batch training on the chronological train portion of `data`;
/// batches are taken in time order and never shuffled. Validation loss is
/// evaluated after every epoch and drives early stopping. Deterministic:
/// identical (spec, data, cfg) reproduce bitwise-identical parameters.
TrainOutcome train(const nn::NetworkSpec& spec, const ForecastDataset& data,
                   const TrainConfig& cfg);

/// Normalized-space predictions for each row of `windows`.
Eigen::VectorXd predict_windows(nn::Network& net,
                                const Eigen::Ref<const Eigen::MatrixXd>& windows);

/// Single-window prediction reported in original units: forward pass, then
/// denormalization with the stats of `channel`.
double predict(nn::Network& net, const Eigen::Ref<const Eigen::VectorXd>& window,
               const NormalizationStats& stats, const std::string& channel);

/// Self-contained trained-model artifact. `stats_digest` ties the checkpoint
/// to the normalization stats used at training time so predictions cannot be
/// denormalized with mismatched statistics.
struct Checkpoint {
    nn::NetworkSpec spec;
    nlohmann::json state;  // Network::state_json() of the trained network
    TrainConfig cfg;
    std::string channel;
    std::string stats_digest;
    std::vector<double> train_loss;
    std::vector<double> val_loss;
    Eigen::Index best_epoch = 0;
    bool early_stopped = false;

    nlohmann::json to_json() const;
    static Checkpoint from_json(const nlohmann::json& j);
};

Checkpoint make_checkpoint(TrainOutcome& outcome, const TrainConfig& cfg,
                           const std::string& channel, const std::string& stats_digest);

/// Rebuilds the network a checkpoint describes and loads its parameters.
nn::Network restore_network(const Checkpoint& cp);

}  // namespace seepline
