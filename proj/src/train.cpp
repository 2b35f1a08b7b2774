#include "seepline/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "seepline/errors.hpp"

namespace seepline {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (batch < 1) throw ConfigError("batch size must be at least 1");
    if (lr < 0) throw ConfigError("learning rate must be non-negative");
    if (weight_decay < 0) throw ConfigError("weight decay must be non-negative");
    if (patience < 1) throw ConfigError("patience must be at least 1");
    if (loss != "mse" && loss != "rmse") {
        throw ConfigError("unknown loss: " + loss + " (expected mse or rmse)");
    }
}

namespace {

double dataset_mse(nn::Network& net, const ForecastDataset& data, Eigen::Index begin,
                   Eigen::Index end) {
    double acc = 0.0;
    for (Eigen::Index i = begin; i < end; ++i) {
        const double err = net.predict_one(data.inputs.row(i).transpose()) - data.targets(i);
        acc += err * err;
    }
    return acc / static_cast<double>(end - begin);
}

}  // namespace

nlohmann::json TrainConfig::to_json() const {
    return nlohmann::json{{"epochs", epochs},
                          {"batch", batch},
                          {"lr", lr},
                          {"weight_decay", weight_decay},
                          {"loss", loss},
                          {"patience", patience},
                          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("train config must be a JSON object");
    TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.batch = j.value("batch", cfg.batch);
    cfg.lr = j.value("lr", cfg.lr);
    cfg.weight_decay = j.value("weight_decay", cfg.weight_decay);
    cfg.loss = j.value("loss", cfg.loss);
    cfg.patience = j.value("patience", cfg.patience);
    cfg.seed = j.value("seed", cfg.seed);
    return cfg;
}

TrainOutcome train(const nn::NetworkSpec& spec, const ForecastDataset& data,
                   const TrainConfig& cfg) {
    cfg.validate();
    if (data.count() == 0) throw InsufficientDataError("dataset has no windows");
    if (spec.input_len != data.window_len) {
        throw ConfigError("network expects windows of length " + std::to_string(spec.input_len) +
                          " but the dataset provides " + std::to_string(data.window_len));
    }
    const Eigen::Index n_train = data.split.train_count();
    const Eigen::Index n_val = data.split.val_count();
    if (n_train < 1) throw InsufficientDataError("dataset split has no training windows");

    const auto started = std::chrono::steady_clock::now();
    TrainOutcome out{nn::Network(spec), {}, {}, 0, false, 0.0};
    nn::Network& net = out.net;

    nn::AdamConfig opt_cfg;
    opt_cfg.lr = cfg.lr;
    opt_cfg.weight_decay = cfg.weight_decay;
    nn::Adam opt(net.params(), opt_cfg);

    const bool record_rmse = cfg.loss == "rmse";
    double best_val = std::numeric_limits<double>::infinity();
    int stalled = 0;
    std::vector<Eigen::MatrixXd> best_params;
    const auto snapshot = [&] {
        best_params.clear();
        for (auto* p : net.params()) best_params.push_back(*p);
    };

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (Eigen::Index start = 0; start < n_train; start += cfg.batch) {
            const Eigen::Index stop = std::min<Eigen::Index>(start + cfg.batch, n_train);
            const double inv = 1.0 / static_cast<double>(stop - start);
            net.zero_grads();
            try {
                for (Eigen::Index i = start; i < stop; ++i) {
                    const Eigen::MatrixXd pred = net.forward(data.inputs.row(i).transpose());
                    Eigen::MatrixXd dpred(1, 1);
                    dpred(0, 0) = 2.0 * (pred(0, 0) - data.targets(i)) * inv;
                    net.backward(dpred);
                }
            } catch (const NumericFault& e) {
                throw NumericFault("epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(start / cfg.batch) + ": " + e.what());
            }
            opt.step(net.grads());
        }

        const double train_mse = dataset_mse(net, data, 0, n_train);
        out.train_loss.push_back(record_rmse ? std::sqrt(train_mse) : train_mse);

        if (n_val > 0) {
            const double val_mse =
                dataset_mse(net, data, data.split.train_end, data.split.val_end);
            out.val_loss.push_back(record_rmse ? std::sqrt(val_mse) : val_mse);
            if (val_mse < best_val) {
                best_val = val_mse;
                out.best_epoch = epoch;
                stalled = 0;
                snapshot();
            } else if (++stalled >= cfg.patience) {
                out.early_stopped = true;
                break;
            }
        } else {
            // No validation windows: keep the final epoch, never stop early.
            out.best_epoch = epoch;
        }
    }

    if (!best_params.empty()) {
        const auto ptrs = net.params();
        for (std::size_t k = 0; k < ptrs.size(); ++k) *ptrs[k] = best_params[k];
    }

    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

Eigen::VectorXd predict_windows(nn::Network& net,
                                const Eigen::Ref<const Eigen::MatrixXd>& windows) {
    Eigen::VectorXd preds(windows.rows());
    for (Eigen::Index i = 0; i < windows.rows(); ++i) {
        preds(i) = net.predict_one(windows.row(i).transpose());
    }
    return preds;
}

double predict(nn::Network& net, const Eigen::Ref<const Eigen::VectorXd>& window,
               const NormalizationStats& stats, const std::string& channel) {
    const auto it = std::find(stats.channel_ids.begin(), stats.channel_ids.end(), channel);
    if (it == stats.channel_ids.end()) {
        throw SchemaError("channel " + channel + " not present in normalization stats");
    }
    const Eigen::Index idx = it - stats.channel_ids.begin();
    return stats.denormalize(idx, net.predict_one(window));
}

nlohmann::json Checkpoint::to_json() const {
    return nlohmann::json{{"version", 1},
                          {"spec", spec.to_json()},
                          {"state", state},
                          {"train_config", cfg.to_json()},
                          {"channel", channel},
                          {"stats_digest", stats_digest},
                          {"train_loss", train_loss},
                          {"val_loss", val_loss},
                          {"best_epoch", best_epoch},
                          {"early_stopped", early_stopped}};
}

Checkpoint Checkpoint::from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("version", 0) != 1) {
        throw SchemaError("unsupported checkpoint version");
    }
    Checkpoint cp;
    cp.spec = nn::NetworkSpec::from_json(j.at("spec"));
    cp.state = j.at("state");
    cp.cfg = TrainConfig::from_json(j.at("train_config"));
    cp.channel = j.value("channel", "");
    cp.stats_digest = j.value("stats_digest", "");
    cp.train_loss = j.value("train_loss", std::vector<double>{});
    cp.val_loss = j.value("val_loss", std::vector<double>{});
    cp.best_epoch = j.value("best_epoch", Eigen::Index{0});
    cp.early_stopped = j.value("early_stopped", false);
    return cp;
}

Checkpoint make_checkpoint(TrainOutcome& outcome, const TrainConfig& cfg,
                           const std::string& channel, const std::string& stats_digest) {
    Checkpoint cp;
    cp.spec = outcome.net.spec();
    cp.state = outcome.net.state_json();
    cp.cfg = cfg;
    cp.channel = channel;
    cp.stats_digest = stats_digest;
    cp.train_loss = outcome.train_loss;
    cp.val_loss = outcome.val_loss;
    cp.best_epoch = outcome.best_epoch;
    cp.early_stopped = outcome.early_stopped;
    return cp;
}

nn::Network restore_network(const Checkpoint& cp) {
    nn::Network net(cp.spec);
    net.load_state(cp.state);
    return net;
}

}  // namespace seepline
