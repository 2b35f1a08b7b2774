#include <doctest.h>

#include <cmath>

#include "seepline/errors.hpp"
#include "seepline/monitoring.hpp"
#include "seepline/normalize.hpp"
#include "seepline/sweep.hpp"
#include "seepline/windowing.hpp"

using namespace seepline;
using doctest::Approx;

namespace {

// Small positive series: offset sine keeps MAPE well-defined.
MonitoringSeries sine_series(Eigen::Index n) {
    MonitoringSeries s({"s1"});
    for (Eigen::Index i = 0; i < n; ++i) {
        MonitoringFrame f;
        f.timestamp = 1000 + 3600 * i;
        f.values = Eigen::VectorXd::Constant(1, 10.0 + std::sin(2.0 * M_PI * i / 24.0));
        f.quality = {CellFlag::observed};
        s.append(f);
    }
    return s;
}

struct Fixture {
    MonitoringSeries series;
    NormalizationStats stats;
    ForecastDataset data;

    explicit Fixture(Eigen::Index n = 140) : series(sine_series(n)) {
        stats = zscore_fit(series, FrameRange{0, static_cast<Eigen::Index>(0.7 * n)});
        auto normalized = zscore_apply(series, stats);
        data = make_windows(normalized, 10, "s1");
    }
};

}  // namespace

TEST_CASE("default sweep grid lists the nine published cases in order") {
    auto grid = default_sweep_grid();
    REQUIRE(grid.size() == 9);

    CHECK(grid[0].batch == 32);
    CHECK(grid[0].conv_filters == 16);
    CHECK(grid[0].pool == 2);
    CHECK(grid[0].lstm_sizes == std::vector<int>{25, 50});

    CHECK(grid[1].batch == 64);
    CHECK(grid[1].conv_filters == 32);
    CHECK(grid[1].pool == 2);
    CHECK(grid[1].lstm_sizes == std::vector<int>{50, 75});

    CHECK(grid[2].batch == 32);
    CHECK(grid[2].conv_filters == 16);
    CHECK(grid[2].pool == 4);
    CHECK(grid[2].lstm_sizes == std::vector<int>{25, 50});

    CHECK(grid[3].batch == 64);
    CHECK(grid[3].conv_filters == 32);
    CHECK(grid[3].pool == 4);
    CHECK(grid[3].lstm_sizes == std::vector<int>{50, 75});

    CHECK(grid[4].batch == 16);
    CHECK(grid[4].conv_filters == 16);
    CHECK(grid[4].pool == 2);
    CHECK(grid[4].lstm_sizes == std::vector<int>{50, 50});

    CHECK(grid[5].batch == 128);
    CHECK(grid[5].conv_filters == 16);
    CHECK(grid[5].pool == 4);
    CHECK(grid[5].lstm_sizes == std::vector<int>{25, 50});

    CHECK(grid[6].batch == 16);
    CHECK(grid[6].conv_filters == 32);
    CHECK(grid[6].pool == 2);
    CHECK(grid[6].lstm_sizes == std::vector<int>{25, 75});

    CHECK(grid[7].batch == 128);
    CHECK(grid[7].conv_filters == 32);
    CHECK(grid[7].pool == 2);
    CHECK(grid[7].lstm_sizes == std::vector<int>{25, 50});

    CHECK(grid[8].batch == 64);
    CHECK(grid[8].conv_filters == 32);
    CHECK(grid[8].pool == 2);
    CHECK(grid[8].lstm_sizes == std::vector<int>{25, 50});
}

TEST_CASE("sweep entry composes conv/pool/lstm stack/flatten/dense") {
    SweepEntry e{16, 8, 3, {5, 7}};
    auto spec = e.to_spec(12, 42);
    REQUIRE(spec.layers.size() == 6);
    CHECK(spec.input_len == 12);
    CHECK(spec.input_channels == 1);
    CHECK(spec.seed == 42);
    CHECK(spec.layers[0].kind == "conv1d");
    CHECK(spec.layers[0].units == 8);
    CHECK(spec.layers[1].kind == "maxpool");
    CHECK(spec.layers[1].pool == 3);
    CHECK(spec.layers[2].kind == "lstm");
    CHECK(spec.layers[2].units == 5);
    CHECK(spec.layers[3].kind == "lstm");
    CHECK(spec.layers[3].units == 7);
    CHECK(spec.layers[4].kind == "flatten");
    CHECK(spec.layers[5].kind == "dense");
    CHECK(spec.layers[5].units == 1);

    CHECK(e.label() == "batch=16 conv=8 pool=3 lstm=5/7");

    CHECK_THROWS_AS((SweepEntry{0, 8, 2, {5}}.to_spec(12, 0)), ConfigError);
    CHECK_THROWS_AS((SweepEntry{16, 0, 2, {5}}.to_spec(12, 0)), ConfigError);
    CHECK_THROWS_AS((SweepEntry{16, 8, 0, {5}}.to_spec(12, 0)), ConfigError);
    CHECK_THROWS_AS((SweepEntry{16, 8, 2, {}}.to_spec(12, 0)), ConfigError);
}

TEST_CASE("sweep entry JSON round-trip") {
    SweepEntry e{128, 16, 4, {25, 50}};
    auto back = SweepEntry::from_json(e.to_json());
    CHECK(back.batch == e.batch);
    CHECK(back.conv_filters == e.conv_filters);
    CHECK(back.pool == e.pool);
    CHECK(back.lstm_sizes == e.lstm_sizes);

    CHECK_THROWS_AS(SweepEntry::from_json({{"batch", 1}}), SchemaError);
}

TEST_CASE("empty grid yields an empty report") {
    Fixture fx;
    TrainConfig cfg;
    cfg.epochs = 1;
    auto report = sweep({}, fx.data, fx.stats, cfg, "s1");
    CHECK(report.rows.empty());
}

TEST_CASE("single matching entry reproduces a direct preset train run") {
    Fixture fx;
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.batch = 64;
    cfg.seed = 7;

    SweepEntry entry{64, 32, 2, {25, 50}};
    auto report = sweep({entry}, fx.data, fx.stats, cfg, "s1");
    REQUIRE(report.rows.size() == 1);
    const auto& row = report.rows[0];
    REQUIRE(row.error.empty());

    auto spec = nn::build_preset("cnn-lstm-2", fx.data.window_len, cfg.seed);
    auto direct = train(spec, fx.data, cfg);
    auto ref = evaluate_model(direct.net, fx.data, fx.stats, "s1", "direct", 0.0);

    CHECK(row.rmse == ref.rmse);
    CHECK(row.mape == ref.mape);
    CHECK(row.r2 == ref.r2);
    CHECK(row.n == ref.n);
    CHECK(row.station == "s1");
    CHECK(row.model == "batch=64 conv=32 pool=2 lstm=25/50");
    CHECK(row.runtime_seconds > 0.0);
}

TEST_CASE("a failing entry records its error and the sweep continues") {
    Fixture fx;
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 3;

    std::vector<SweepEntry> grid{
        {16, 4, 0, {3}},   // invalid pool
        {16, 4, 2, {3}},   // valid
        {16, 4, 20, {3}},  // pool swallows the output entirely? 10/20 -> 1 frame, still valid
    };
    auto report = sweep(grid, fx.data, fx.stats, cfg, "s1");
    REQUIRE(report.rows.size() == 3);
    CHECK(report.rows[0].failed());
    CHECK(!report.rows[0].error.empty());
    CHECK(report.rows[0].model == "batch=16 conv=4 pool=0 lstm=3");
    CHECK(!report.rows[1].failed());
    CHECK(report.rows[1].n == fx.data.split.total - fx.data.split.val_end);
    CHECK(!report.rows[2].failed());
}

TEST_CASE("sweep report rows keep grid order and metrics are finite") {
    Fixture fx;
    TrainConfig cfg;
    cfg.epochs = 2;
    cfg.seed = 11;

    std::vector<SweepEntry> grid{
        {32, 4, 2, {3, 5}},
        {16, 2, 2, {4}},
        {64, 6, 5, {3}},
    };
    auto report = sweep(grid, fx.data, fx.stats, cfg, "s1");
    REQUIRE(report.rows.size() == 3);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CAPTURE(i);
        CHECK(report.rows[i].model == grid[i].label());
        REQUIRE(report.rows[i].error.empty());
        CHECK(std::isfinite(report.rows[i].rmse));
        CHECK(std::isfinite(report.rows[i].mape));
        CHECK(std::isfinite(report.rows[i].r2));
        CHECK(report.rows[i].rmse >= 0.0);
    }
}

TEST_CASE("evaluate_model honors a truth override") {
    Fixture fx;
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.seed = 5;
    auto spec = nn::build_preset("mlp", fx.data.window_len, cfg.seed);
    auto outcome = train(spec, fx.data, cfg);

    auto base = evaluate_model(outcome.net, fx.data, fx.stats, "s1", "mlp", 1.5);
    CHECK(base.runtime_seconds == 1.5);

    // Overriding truth with the predictions themselves zeroes the error.
    const Eigen::Index n = fx.data.split.total - fx.data.split.val_end;
    Eigen::VectorXd self(n);
    for (Eigen::Index i = 0; i < n; ++i)
        self(i) = fx.stats.denormalize(0, outcome.net.predict_one(
                                              fx.data.inputs.row(fx.data.split.val_end + i)));
    auto perfect = evaluate_model(outcome.net, fx.data, fx.stats, "s1", "mlp", 0.0, &self);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.mape == 0.0);

    Eigen::VectorXd wrong(n + 1);
    wrong.setZero();
    CHECK_THROWS_AS(evaluate_model(outcome.net, fx.data, fx.stats, "s1", "mlp", 0.0, &wrong),
                    ShapeError);
}
