#include "seepline/normalize.hpp"

#include <cmath>

#include "seepline/errors.hpp"

namespace seepline {

nlohmann::json NormalizationStats::to_json() const {
    nlohmann::json j;
    j["channels"] = channel_ids;
    j["mean"] = std::vector<double>(mean.data(), mean.data() + mean.size());
    j["sigma"] = std::vector<double>(sigma.data(), sigma.data() + sigma.size());
    return j;
}

NormalizationStats NormalizationStats::from_json(const nlohmann::json& j) {
    NormalizationStats s;
    s.channel_ids = j.at("channels").get<std::vector<std::string>>();
    auto m = j.at("mean").get<std::vector<double>>();
    auto g = j.at("sigma").get<std::vector<double>>();
    s.mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
    s.sigma = Eigen::Map<const Eigen::VectorXd>(g.data(), static_cast<Eigen::Index>(g.size()));
    return s;
}

NormalizationStats zscore_fit(const MonitoringSeries& series, FrameRange train) {
    if (train.begin < 0 || train.end > series.rows() || train.size() <= 0)
        throw InsufficientDataError("empty or out-of-range training range");
    NormalizationStats stats;
    stats.channel_ids = series.channel_ids();
    stats.mean.resize(series.channels());
    stats.sigma.resize(series.channels());
    for (Eigen::Index c = 0; c < series.channels(); ++c) {
        double sum = 0;
        Eigen::Index n = 0;
        for (Eigen::Index r = train.begin; r < train.end; ++r) {
            if (!series.clean(r, c)) continue;
            sum += series.values()(r, c);
            ++n;
        }
        if (n == 0)
            throw DegenerateChannelError("channel " + series.channel_ids()[static_cast<std::size_t>(c)] +
                                         " has no clean cell in training range");
        const double mu = sum / static_cast<double>(n);
        double ss = 0;
        for (Eigen::Index r = train.begin; r < train.end; ++r) {
            if (!series.clean(r, c)) continue;
            const double d = series.values()(r, c) - mu;
            ss += d * d;
        }
        const double sigma = std::sqrt(ss / static_cast<double>(n));
        if (!(sigma > 0))
            throw DegenerateChannelError("channel " + series.channel_ids()[static_cast<std::size_t>(c)] +
                                         " is constant on the training range");
        stats.mean(c) = mu;
        stats.sigma(c) = sigma;
    }
    return stats;
}

namespace {

MonitoringSeries transform(const MonitoringSeries& series, const NormalizationStats& stats, bool invert) {
    if (stats.channel_ids != series.channel_ids())
        throw SchemaError("normalization stats channels do not match series channels");
    MonitoringSeries out = series;
    for (Eigen::Index c = 0; c < out.channels(); ++c) {
        for (Eigen::Index r = 0; r < out.rows(); ++r) {
            if (!out.clean(r, c)) continue;
            const double x = out.values()(r, c);
            out.values()(r, c) = invert ? stats.denormalize(c, x) : stats.normalize(c, x);
        }
    }
    return out;
}

}  // namespace

MonitoringSeries zscore_apply(const MonitoringSeries& series, const NormalizationStats& stats) {
    return transform(series, stats, false);
}

MonitoringSeries zscore_invert(const MonitoringSeries& series, const NormalizationStats& stats) {
    return transform(series, stats, true);
}

}  // namespace seepline
