#include "seepline/synth.hpp"

#include <cmath>

#include "seepline/errors.hpp"
#include "seepline/rng.hpp"

namespace seepline {

namespace {

constexpr double kPi = 3.14159265358979323846;

// E|N(0,1)|: the theoretical mean of the rain shower term, used so the
// coupling terms are centered without a data-dependent pass.
const double kMeanAbsNormal = std::sqrt(2.0 / kPi);

StationSpec station(std::string id, double mean_target, double drift, double amp, double period,
                    double phase, double cr, double cw, double sigma, Eigen::Index n) {
    StationSpec s;
    s.id = std::move(id);
    s.trend = drift / static_cast<double>(n - 1);
    s.base = mean_target - drift / 2.0;
    s.seasonal_amp = amp;
    s.seasonal_period = period;
    s.phase = phase;
    s.rain_coupling = cr;
    s.water_coupling = cw;
    s.noise_sigma = sigma;
    return s;
}

}  // namespace

nlohmann::json StationSpec::to_json() const {
    return nlohmann::json{{"id", id},
                          {"base", base},
                          {"trend", trend},
                          {"seasonal_amp", seasonal_amp},
                          {"seasonal_period", seasonal_period},
                          {"phase", phase},
                          {"rain_coupling", rain_coupling},
                          {"water_coupling", water_coupling},
                          {"noise_sigma", noise_sigma}};
}

StationSpec StationSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("id")) {
        throw SchemaError("station spec must be an object with an \"id\"");
    }
    StationSpec s;
    s.id = j.at("id").get<std::string>();
    s.base = j.value("base", s.base);
    s.trend = j.value("trend", s.trend);
    s.seasonal_amp = j.value("seasonal_amp", s.seasonal_amp);
    s.seasonal_period = j.value("seasonal_period", s.seasonal_period);
    s.phase = j.value("phase", s.phase);
    s.rain_coupling = j.value("rain_coupling", s.rain_coupling);
    s.water_coupling = j.value("water_coupling", s.water_coupling);
    s.noise_sigma = j.value("noise_sigma", s.noise_sigma);
    return s;
}

SyntheticSpec SyntheticSpec::defaults() {
    SyntheticSpec spec;
    const Eigen::Index n = spec.n;
    spec.stations = {
        station("no8", 4.57, 0.3, 0.12, 2000.0, 0.0, 0.020, 0.06, 0.020, n),
        station("no13", 7.73, -0.4, 0.20, 1800.0, 0.7, 0.030, 0.10, 0.030, n),
        station("no17", 11.32, 0.5, 0.30, 2200.0, 1.4, 0.040, 0.15, 0.040, n),
        station("no21", 10.67, 0.2, 0.25, 1600.0, 2.1, 0.035, 0.12, 0.035, n),
        station("no28", 14.52, -0.3, 0.35, 2400.0, 2.8, 0.050, 0.18, 0.050, n),
        station("no33", 15.03, 0.6, 0.40, 2000.0, 3.5, 0.050, 0.20, 0.050, n),
    };
    return spec;
}

nlohmann::json SyntheticSpec::to_json() const {
    nlohmann::json st = nlohmann::json::array();
    for (const auto& s : stations) st.push_back(s.to_json());
    return nlohmann::json{{"n", n},
                          {"start_timestamp", start_timestamp},
                          {"step_seconds", step_seconds},
                          {"rain_base", rain_base},
                          {"rain_seasonal", rain_seasonal},
                          {"rain_period", rain_period},
                          {"rain_noise", rain_noise},
                          {"water_base", water_base},
                          {"water_amp", water_amp},
                          {"water_period", water_period},
                          {"water_phase", water_phase},
                          {"water_noise", water_noise},
                          {"stations", std::move(st)},
                          {"missing_fraction", missing_fraction},
                          {"seed", seed}};
}

SyntheticSpec SyntheticSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SchemaError("synthetic spec must be a JSON object");
    SyntheticSpec s;
    s.n = j.value("n", s.n);
    s.start_timestamp = j.value("start_timestamp", s.start_timestamp);
    s.step_seconds = j.value("step_seconds", s.step_seconds);
    s.rain_base = j.value("rain_base", s.rain_base);
    s.rain_seasonal = j.value("rain_seasonal", s.rain_seasonal);
    s.rain_period = j.value("rain_period", s.rain_period);
    s.rain_noise = j.value("rain_noise", s.rain_noise);
    s.water_base = j.value("water_base", s.water_base);
    s.water_amp = j.value("water_amp", s.water_amp);
    s.water_period = j.value("water_period", s.water_period);
    s.water_phase = j.value("water_phase", s.water_phase);
    s.water_noise = j.value("water_noise", s.water_noise);
    s.missing_fraction = j.value("missing_fraction", s.missing_fraction);
    s.seed = j.value("seed", s.seed);
    if (j.contains("stations")) {
        for (const auto& sj : j.at("stations")) s.stations.push_back(StationSpec::from_json(sj));
    } else {
        s.stations = defaults().stations;
    }
    return s;
}

SyntheticData synth(const SyntheticSpec& spec) {
    if (spec.n < 200) throw ConfigError("synthetic series needs n >= 200");
    if (spec.missing_fraction < 0.0 || spec.missing_fraction >= 1.0) {
        throw ConfigError("missing fraction must lie in [0, 1)");
    }
    if (spec.stations.empty()) throw ConfigError("synthetic spec has no stations");
    if (spec.step_seconds <= 0) throw ConfigError("step seconds must be positive");
    for (const auto& s : spec.stations) {
        if (s.seasonal_period <= 0) throw ConfigError("seasonal period must be positive");
        if (s.noise_sigma < 0) throw ConfigError("noise sigma must be non-negative");
    }
    if (spec.rain_period <= 0 || spec.water_period <= 0) {
        throw ConfigError("driver periods must be positive");
    }

    const Eigen::Index n = spec.n;
    const Eigen::Index n_stations = static_cast<Eigen::Index>(spec.stations.size());

    // Driver channels first; per-channel substreams keep the draws stable
    // when stations are added or removed.
    Rng rain_rng = Rng::substream(spec.seed, "synth-rain");
    Rng water_rng = Rng::substream(spec.seed, "synth-water");
    Eigen::VectorXd rain(n), water(n);
    for (Eigen::Index t = 0; t < n; ++t) {
        const double td = static_cast<double>(t);
        rain(t) = spec.rain_base * (1.0 + spec.rain_seasonal *
                                              std::sin(2.0 * kPi * td / spec.rain_period)) +
                  spec.rain_noise * std::abs(rain_rng.normal());
        water(t) = spec.water_base +
                   spec.water_amp * std::sin(2.0 * kPi * td / spec.water_period +
                                             spec.water_phase) +
                   spec.water_noise * water_rng.normal();
    }
    const double rain_mean = spec.rain_base + spec.rain_noise * kMeanAbsNormal;
    const double water_mean = spec.water_base;

    std::vector<std::string> channels{"rainfall", "waterlevel"};
    for (const auto& s : spec.stations) channels.push_back(s.id);

    MonitoringSeries truth(channels);
    Eigen::MatrixXd sat(n, n_stations);
    for (Eigen::Index c = 0; c < n_stations; ++c) {
        const StationSpec& s = spec.stations[static_cast<std::size_t>(c)];
        Rng rng = Rng::substream(spec.seed, "synth-station", static_cast<std::uint64_t>(c));
        for (Eigen::Index t = 0; t < n; ++t) {
            const double td = static_cast<double>(t);
            sat(t, c) = s.base + s.trend * td +
                        s.seasonal_amp * std::sin(2.0 * kPi * td / s.seasonal_period + s.phase) +
                        s.rain_coupling * (rain(t) - rain_mean) +
                        s.water_coupling * (water(t) - water_mean) + s.noise_sigma * rng.normal();
        }
    }

    for (Eigen::Index t = 0; t < n; ++t) {
        MonitoringFrame f;
        f.timestamp = spec.start_timestamp + static_cast<std::int64_t>(t) * spec.step_seconds;
        f.values.resize(2 + n_stations);
        f.values(0) = rain(t);
        f.values(1) = water(t);
        for (Eigen::Index c = 0; c < n_stations; ++c) f.values(2 + c) = sat(t, c);
        f.quality.assign(static_cast<std::size_t>(2 + n_stations), CellFlag::observed);
        truth.append(f);
    }

    MonitoringSeries observed = truth;
    const auto total_cells = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n_stations);
    const auto blank_count = static_cast<std::uint64_t>(
        spec.missing_fraction * static_cast<double>(total_cells));
    if (blank_count > 0) {
        // Partial Fisher-Yates over the station-cell index space.
        std::vector<std::uint64_t> cells(total_cells);
        for (std::uint64_t i = 0; i < total_cells; ++i) cells[i] = i;
        Rng rng = Rng::substream(spec.seed, "synth-missing");
        for (std::uint64_t i = 0; i < blank_count; ++i) {
            const std::uint64_t j = i + rng.uniform_int(total_cells - i);
            std::swap(cells[i], cells[j]);
            const auto row = static_cast<Eigen::Index>(cells[i] / n_stations);
            const auto col = static_cast<Eigen::Index>(cells[i] % n_stations);
            observed.set_missing(row, 2 + col);
        }
    }

    return SyntheticData{std::move(observed), std::move(truth)};
}

}  // namespace seepline
