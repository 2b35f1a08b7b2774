#include "seepline/sweep.hpp"

#include <algorithm>
#include <utility>

#include "seepline/errors.hpp"

namespace seepline {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

}  // namespace

nn::NetworkSpec SweepEntry::to_spec(Eigen::Index input_len, std::uint64_t seed) const {
    require(batch >= 1, "sweep entry: batch size must be >= 1");
    require(conv_filters >= 1, "sweep entry: conv filter count must be >= 1");
    require(pool >= 1, "sweep entry: pool size must be >= 1");
    require(!lstm_sizes.empty(), "sweep entry: lstm stack must not be empty");
    for (int units : lstm_sizes) require(units >= 1, "sweep entry: lstm units must be >= 1");

    nn::NetworkSpec spec;
    spec.input_len = input_len;
    spec.input_channels = 1;
    spec.seed = seed;
    spec.layers.push_back(nn::LayerSpec::conv1d(conv_filters));
    spec.layers.push_back(nn::LayerSpec::maxpool(pool));
    for (int units : lstm_sizes) spec.layers.push_back(nn::LayerSpec::lstm(units));
    spec.layers.push_back(nn::LayerSpec::flatten());
    spec.layers.push_back(nn::LayerSpec::dense(1));
    return spec;
}

std::string SweepEntry::label() const {
    std::string s = "batch=" + std::to_string(batch) + " conv=" + std::to_string(conv_filters) +
                    " pool=" + std::to_string(pool) + " lstm=";
    for (std::size_t i = 0; i < lstm_sizes.size(); ++i) {
        if (i > 0) s += '/';
        s += std::to_string(lstm_sizes[i]);
    }
    return s;
}

nlohmann::json SweepEntry::to_json() const {
    return {{"batch", batch},
            {"conv_filters", conv_filters},
            {"pool", pool},
            {"lstm_sizes", lstm_sizes}};
}

SweepEntry SweepEntry::from_json(const nlohmann::json& j) {
    try {
        SweepEntry e;
        e.batch = j.at("batch").get<int>();
        e.conv_filters = j.at("conv_filters").get<int>();
        e.pool = j.at("pool").get<int>();
        e.lstm_sizes = j.at("lstm_sizes").get<std::vector<int>>();
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw SchemaError(std::string("sweep entry: ") + ex.what());
    }
}

std::vector<SweepEntry> default_sweep_grid() {
    return {
        {32, 16, 2, {25, 50}},
        {64, 32, 2, {50, 75}},
        {32, 16, 4, {25, 50}},
        {64, 32, 4, {50, 75}},
        {16, 16, 2, {50, 50}},
        {128, 16, 4, {25, 50}},
        {16, 32, 2, {25, 75}},
        {128, 32, 2, {25, 50}},
        {64, 32, 2, {25, 50}},
    };
}

EvalRow evaluate_model(nn::Network& net, const ForecastDataset& data,
                       const NormalizationStats& stats, const std::string& station,
                       const std::string& model, double runtime_seconds,
                       const Eigen::VectorXd* truth_override) {
    const Eigen::Index begin = data.split.val_end;
    const Eigen::Index end = data.split.total;
    const Eigen::Index n = end - begin;
    if (n < 2) throw InsufficientDataError("evaluate: need at least two test windows");

    auto it = std::find(stats.channel_ids.begin(), stats.channel_ids.end(), data.channel);
    if (it == stats.channel_ids.end())
        throw SchemaError("evaluate: channel '" + data.channel + "' not in normalization stats");
    const auto ch = static_cast<Eigen::Index>(it - stats.channel_ids.begin());

    Eigen::VectorXd pred(n);
    Eigen::VectorXd truth(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        pred(i) = stats.denormalize(ch, net.predict_one(data.inputs.row(begin + i)));
        truth(i) = stats.denormalize(ch, data.targets(begin + i));
    }
    if (truth_override != nullptr) {
        if (truth_override->size() != n)
            throw ShapeError("evaluate: truth override length does not match test window count");
        truth = *truth_override;
    }

    EvalRow row;
    row.station = station;
    row.model = model;
    row.rmse = rmse(truth, pred);
    row.mape = mape(truth, pred);
    row.r2 = r2(truth, pred);
    row.runtime_seconds = runtime_seconds;
    row.n = n;
    return row;
}

EvalReport sweep(const std::vector<SweepEntry>& grid, const ForecastDataset& data,
                 const NormalizationStats& stats, const TrainConfig& cfg,
                 const std::string& station) {
    EvalReport report;
    report.rows.reserve(grid.size());
    for (const auto& entry : grid) {
        EvalRow row;
        row.station = station;
        row.model = entry.label();
        try {
            TrainConfig local = cfg;
            local.batch = entry.batch;
            auto spec = entry.to_spec(data.window_len, cfg.seed);
            auto outcome = train(spec, data, local);
            row = evaluate_model(outcome.net, data, stats, station, entry.label(),
                                 outcome.runtime_seconds);
        } catch (const Error& e) {
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

}  // namespace seepline
