#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "seepline/monitoring.hpp"

namespace seepline {

/// One generated saturation-line channel. The value at step t is
///   base + trend*t + seasonal_amp*sin(2*pi*t/seasonal_period + phase)
///   + rain_coupling*(rain_t - rain_mean) + water_coupling*(water_t - water_mean)
///   + noise_sigma*eps_t
/// so the emitted series is an exact known function of the driver channels,
/// trend, season, and the seeded noise draws.
struct StationSpec {
    std::string id;
    double base = 0.0;
    double trend = 0.0;  // per-step drift
    double seasonal_amp = 0.0;
    double seasonal_period = 2000.0;
    double phase = 0.0;
    double rain_coupling = 0.0;
    double water_coupling = 0.0;
    double noise_sigma = 0.0;

    nlohmann::json to_json() const;
    static StationSpec from_json(const nlohmann::json& j);
};

/// Generator settings for the coupled rainfall / water-level / station
/// channels. `missing_fraction` blanks that share of station cells (the
/// driver channels are never blanked; imputation needs them intact).
struct SyntheticSpec {
    Eigen::Index n = 8365;
    std::int64_t start_timestamp = 0;
    std::int64_t step_seconds = 3600;

    double rain_base = 6.0;
    double rain_seasonal = 0.6;   // relative seasonal swing of the rain level
    double rain_period = 168.0;
    double rain_noise = 2.0;      // scales |N(0,1)| showers on top of the level

    double water_base = 15.0;
    double water_amp = 2.0;
    double water_period = 2000.0;
    double water_phase = 1.3;
    double water_noise = 0.3;

    std::vector<StationSpec> stations;
    double missing_fraction = 0.0;
    std::uint64_t seed = 0;

    /// Six stations whose long-run means land on the published dataset
    /// description (NO.8 4.57 ... NO.33 15.03) at the default length.
    static SyntheticSpec defaults();

    nlohmann::json to_json() const;
    static SyntheticSpec from_json(const nlohmann::json& j);
};

/// `observed` is the emitted dataset (with blanks); `truth` is the identical
/// series before blanking, kept as a test oracle and never consumed by any
/// pipeline stage.
struct SyntheticData {
    MonitoringSeries observed;
    MonitoringSeries truth;
};

SyntheticData synth(const SyntheticSpec& spec);

}  // namespace seepline
