#include <doctest.h>

#include <cmath>

#include "seepline/errors.hpp"
#include "seepline/monitoring.hpp"
#include "seepline/normalize.hpp"

using namespace seepline;

namespace {

MonitoringFrame mk(std::int64_t ts, std::initializer_list<double> vals,
                   std::initializer_list<CellFlag> flags) {
    MonitoringFrame f;
    f.timestamp = ts;
    f.values.resize(static_cast<Eigen::Index>(vals.size()));
    Eigen::Index i = 0;
    for (double v : vals) f.values(i++) = v;
    f.quality.assign(flags);
    return f;
}

MonitoringSeries ramp_series(int n) {
    MonitoringSeries s({"x", "y"});
    for (int i = 0; i < n; ++i)
        s.append(mk(static_cast<std::int64_t>(i) * 7200,
                    {static_cast<double>(i + 1), 2.0 * static_cast<double>(i)},
                    {CellFlag::observed, CellFlag::observed}));
    return s;
}

}  // namespace

TEST_CASE("fit uses the population deviation over the requested range") {
    auto s = ramp_series(3);
    auto stats = zscore_fit(s, FrameRange{0, 3});
    // Channel x holds 1,2,3: mean 2, population sigma sqrt(2/3).
    CHECK(stats.mean(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(stats.sigma(0) == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-15));
}

TEST_CASE("fit ignores frames outside the range and unclean cells") {
    auto s = ramp_series(5);
    s.set_value(1, 0, 1000.0, CellFlag::abnormal);
    auto stats = zscore_fit(s, FrameRange{0, 3});
    // Surviving x cells in range: 1, 3. Mean 2, sigma 1.
    CHECK(stats.mean(0) == doctest::Approx(2.0));
    CHECK(stats.sigma(0) == doctest::Approx(1.0));
}

TEST_CASE("apply and invert are mutually inverse on clean cells") {
    auto s = ramp_series(10);
    auto stats = zscore_fit(s, FrameRange{0, 7});
    auto norm = zscore_apply(s, stats);
    auto back = zscore_invert(norm, stats);
    for (Eigen::Index r = 0; r < s.rows(); ++r)
        for (Eigen::Index c = 0; c < s.channels(); ++c)
            CHECK(back.values()(r, c) == doctest::Approx(s.values()(r, c)).epsilon(1e-12));
}

TEST_CASE("normalized train range has zero mean and unit variance") {
    auto s = ramp_series(50);
    auto stats = zscore_fit(s, FrameRange{0, 35});
    auto norm = zscore_apply(s, stats);
    for (Eigen::Index c = 0; c < 2; ++c) {
        double sum = 0, sumsq = 0;
        for (Eigen::Index r = 0; r < 35; ++r) {
            sum += norm.values()(r, c);
            sumsq += norm.values()(r, c) * norm.values()(r, c);
        }
        double mean = sum / 35;
        CHECK(mean == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(sumsq / 35 - mean * mean == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("degenerate channel in the fit range is rejected") {
    MonitoringSeries s({"x"});
    for (int i = 0; i < 5; ++i)
        s.append(mk(static_cast<std::int64_t>(i), {4.0}, {CellFlag::observed}));
    CHECK_THROWS_AS(zscore_fit(s, FrameRange{0, 5}), DegenerateChannelError);
}

TEST_CASE("empty fit range is rejected") {
    auto s = ramp_series(5);
    CHECK_THROWS_AS(zscore_fit(s, FrameRange{2, 2}), InsufficientDataError);
}

TEST_CASE("stats serialize and deserialize losslessly") {
    auto s = ramp_series(8);
    auto stats = zscore_fit(s, FrameRange{0, 8});
    auto j = stats.to_json();
    auto back = NormalizationStats::from_json(j);
    CHECK(back.channel_ids == stats.channel_ids);
    for (Eigen::Index c = 0; c < 2; ++c) {
        CHECK(back.mean(c) == stats.mean(c));
        CHECK(back.sigma(c) == stats.sigma(c));
    }
}

TEST_CASE("apply rejects a series with different channels") {
    auto s = ramp_series(5);
    auto stats = zscore_fit(s, FrameRange{0, 5});
    MonitoringSeries other({"p", "q"});
    other.append(mk(0, {1.0, 2.0}, {CellFlag::observed, CellFlag::observed}));
    CHECK_THROWS_AS(zscore_apply(other, stats), SchemaError);
}
