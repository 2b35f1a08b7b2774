#include <doctest.h>

#include <cmath>
#include <string>

#include "seepline/errors.hpp"
#include "seepline/metrics.hpp"
#include "seepline/monitoring.hpp"
#include "seepline/normalize.hpp"
#include "seepline/train.hpp"
#include "seepline/windowing.hpp"

using namespace seepline;

namespace {

ForecastDataset zero_input_dataset(Eigen::Index n, Eigen::Index window_len, double target) {
    ForecastDataset ds;
    ds.channel = "x";
    ds.window_len = window_len;
    ds.inputs = Eigen::MatrixXd::Zero(n, window_len);
    ds.targets = Eigen::VectorXd::Constant(n, target);
    ds.split = chrono_split(n);
    return ds;
}

MonitoringSeries sine_series(int n) {
    MonitoringSeries s({"s"});
    for (int i = 0; i < n; ++i) {
        MonitoringFrame f;
        f.timestamp = static_cast<std::int64_t>(i) * 3600;
        f.values.resize(1);
        f.values(0) = std::sin(2.0 * 3.14159265358979323846 * i / 24.0);
        f.quality = {CellFlag::observed};
        s.append(f);
    }
    return s;
}

}  // namespace

TEST_CASE("train: constant target converges to the bias-only optimum") {
    const ForecastDataset ds = zero_input_dataset(80, 5, 0.7);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.batch = 8;
    cfg.lr = 0.01;
    cfg.weight_decay = 0.0;
    cfg.seed = 7;
    TrainOutcome out = train(nn::build_preset("mlp", 5, 7), ds, cfg);
    REQUIRE(!out.train_loss.empty());
    CHECK(out.train_loss.back() < 1e-6);

    // Non-increasing after the initial settling epochs, until the loss hits
    // the convergence floor where Adam hunts at the 1e-11 scale.
    for (std::size_t e = 3; e < out.train_loss.size(); ++e) {
        if (out.train_loss[e - 1] < 1e-6) break;
        CHECK(out.train_loss[e] <= out.train_loss[e - 1]);
    }

    // The best-epoch parameters really are the ones returned.
    Eigen::VectorXd w = Eigen::VectorXd::Zero(5);
    CHECK(out.net.predict_one(w) == doctest::Approx(0.7).epsilon(1e-3));
}

TEST_CASE("train: one epoch at lr zero leaves the initialization untouched") {
    const ForecastDataset ds = zero_input_dataset(20, 4, 1.0);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.batch = 4;
    cfg.lr = 0.0;
    cfg.weight_decay = 0.0;
    const nn::NetworkSpec spec = nn::build_preset("mlp", 4, 99);
    TrainOutcome out = train(spec, ds, cfg);

    nn::Network fresh(spec);
    const auto pa = out.net.params();
    const auto pb = fresh.params();
    REQUIRE(pa.size() == pb.size());
    for (std::size_t k = 0; k < pa.size(); ++k) CHECK(*pa[k] == *pb[k]);
}

TEST_CASE("train: lr zero stalls validation and trips early stopping after patience") {
    const ForecastDataset ds = zero_input_dataset(50, 4, 1.0);
    REQUIRE(ds.split.val_count() > 0);
    TrainConfig cfg;
    cfg.epochs = 100;
    cfg.batch = 8;
    cfg.lr = 0.0;
    cfg.patience = 6;
    TrainOutcome out = train(nn::build_preset("mlp", 4, 3), ds, cfg);
    CHECK(out.early_stopped);
    CHECK(out.train_loss.size() == 7);  // epoch 0 improves from +inf, then 6 stalls
    CHECK(out.val_loss.size() == 7);
    CHECK(out.best_epoch == 0);
}

TEST_CASE("train: deterministic given identical spec, data, and config") {
    const ForecastDataset ds = zero_input_dataset(40, 4, 0.3);
    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch = 8;
    const nn::NetworkSpec spec = nn::build_preset("lstm", 4, 55);
    TrainOutcome a = train(spec, ds, cfg);
    TrainOutcome b = train(spec, ds, cfg);
    const auto pa = a.net.params();
    const auto pb = b.net.params();
    for (std::size_t k = 0; k < pa.size(); ++k) CHECK(*pa[k] == *pb[k]);
    CHECK(a.train_loss == b.train_loss);
    CHECK(a.val_loss == b.val_loss);
}

TEST_CASE("train: input validation") {
    const ForecastDataset ds = zero_input_dataset(30, 4, 1.0);
    TrainConfig cfg;
    CHECK_THROWS_AS(train(nn::build_preset("mlp", 5, 1), ds, cfg), ConfigError);

    TrainConfig bad = cfg;
    bad.epochs = 0;
    CHECK_THROWS_AS(train(nn::build_preset("mlp", 4, 1), ds, bad), ConfigError);
    bad = cfg;
    bad.batch = 0;
    CHECK_THROWS_AS(train(nn::build_preset("mlp", 4, 1), ds, bad), ConfigError);
    bad = cfg;
    bad.loss = "mae";
    CHECK_THROWS_AS(train(nn::build_preset("mlp", 4, 1), ds, bad), ConfigError);
    bad = cfg;
    bad.lr = -0.1;
    CHECK_THROWS_AS(train(nn::build_preset("mlp", 4, 1), ds, bad), ConfigError);

    ForecastDataset empty;
    empty.window_len = 4;
    empty.inputs = Eigen::MatrixXd(0, 4);
    empty.targets = Eigen::VectorXd(0);
    CHECK_THROWS_AS(train(nn::build_preset("mlp", 4, 1), empty, cfg), InsufficientDataError);
}

TEST_CASE("train: numeric faults carry the epoch and batch index") {
    ForecastDataset ds = zero_input_dataset(20, 4, 1.0);
    ds.inputs.setConstant(1e308);  // overflows the first matmul
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch = 4;
    try {
        train(nn::build_preset("mlp", 4, 1), ds, cfg);
        FAIL("expected NumericFault");
    } catch (const NumericFault& e) {
        const std::string what = e.what();
        CHECK(what.find("epoch 0") != std::string::npos);
        CHECK(what.find("batch 0") != std::string::npos);
    }
}

TEST_CASE("train: rmse loss identifier records the square root of the mse history") {
    const ForecastDataset ds = zero_input_dataset(30, 4, 0.5);
    TrainConfig mse_cfg;
    mse_cfg.epochs = 3;
    mse_cfg.batch = 8;
    TrainConfig rmse_cfg = mse_cfg;
    rmse_cfg.loss = "rmse";
    const nn::NetworkSpec spec = nn::build_preset("mlp", 4, 21);
    TrainOutcome a = train(spec, ds, mse_cfg);
    TrainOutcome b = train(spec, ds, rmse_cfg);
    REQUIRE(a.train_loss.size() == b.train_loss.size());
    for (std::size_t e = 0; e < a.train_loss.size(); ++e) {
        CHECK(b.train_loss[e] == doctest::Approx(std::sqrt(a.train_loss[e])).epsilon(1e-12));
    }
}

TEST_CASE("train: forecasts a clean sinusoid well out of sample") {
    const MonitoringSeries series = sine_series(300);
    const NormalizationStats stats = zscore_fit(series, {0, 300});
    const MonitoringSeries normed = zscore_apply(series, stats);
    const ForecastDataset ds = make_windows(normed, 10, "s");
    REQUIRE(ds.split.test_count() > 20);

    TrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch = 16;
    cfg.lr = 0.01;
    cfg.weight_decay = 0.0;
    TrainOutcome out = train(nn::build_preset("lstm", 10, 2024), ds, cfg);

    // Returned parameters must reproduce the recorded best validation loss.
    REQUIRE(!out.val_loss.empty());
    double val_acc = 0.0;
    for (Eigen::Index i = ds.split.train_end; i < ds.split.val_end; ++i) {
        const double err = out.net.predict_one(ds.inputs.row(i).transpose()) - ds.targets(i);
        val_acc += err * err;
    }
    val_acc /= static_cast<double>(ds.split.val_count());
    CHECK(val_acc == doctest::Approx(out.val_loss[static_cast<std::size_t>(out.best_epoch)])
                         .epsilon(1e-12));

    // Denormalized out-of-sample predictions track the true signal.
    const Eigen::Index n_test = ds.split.test_count();
    Eigen::VectorXd truth(n_test), pred(n_test);
    for (Eigen::Index i = 0; i < n_test; ++i) {
        const Eigen::Index row = ds.split.val_end + i;
        truth(i) = stats.denormalize(0, ds.targets(row));
        pred(i) = predict(out.net, ds.inputs.row(row).transpose(), stats, "s");
    }
    CHECK(r2(truth, pred) > 0.9);
}

TEST_CASE("predict: denormalizes with the named channel and validates it") {
    nn::Network net(nn::build_preset("mlp", 4, 5));
    NormalizationStats stats;
    stats.channel_ids = {"a", "s"};
    stats.mean = Eigen::VectorXd::Zero(2);
    stats.sigma = Eigen::VectorXd::Ones(2);
    stats.mean << 10.0, 20.0;
    stats.sigma << 2.0, 4.0;
    Eigen::VectorXd w(4);
    w << 0.1, 0.2, 0.3, 0.4;
    const double raw = net.predict_one(w);
    CHECK(predict(net, w, stats, "a") == doctest::Approx(raw * 2.0 + 10.0));
    CHECK(predict(net, w, stats, "s") == doctest::Approx(raw * 4.0 + 20.0));
    CHECK_THROWS_AS(predict(net, w, stats, "zz"), SchemaError);
}

TEST_CASE("checkpoint: JSON round-trip restores an identical predictor") {
    const ForecastDataset ds = zero_input_dataset(40, 6, 0.9);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch = 8;
    cfg.seed = 17;
    TrainOutcome out = train(nn::build_preset("gru", 6, 17), ds, cfg);
    Checkpoint cp = make_checkpoint(out, cfg, "s", "aabbccdd00112233");

    const nlohmann::json j = cp.to_json();
    CHECK(j.at("version") == 1);
    const Checkpoint back = Checkpoint::from_json(j);
    CHECK(back.channel == "s");
    CHECK(back.stats_digest == "aabbccdd00112233");
    CHECK(back.cfg.seed == 17);
    CHECK(back.train_loss == out.train_loss);
    CHECK(back.best_epoch == out.best_epoch);

    nn::Network restored = restore_network(back);
    Eigen::VectorXd w(6);
    w << 1, -1, 2, -2, 0.5, 0;
    CHECK(restored.predict_one(w) == out.net.predict_one(w));

    CHECK_THROWS_AS(Checkpoint::from_json(nlohmann::json{{"version", 9}}), SchemaError);
}
